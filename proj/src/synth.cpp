#include "centsmooth/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "centsmooth/seeding.hpp"

namespace centsmooth {

void SynthConfig::validate() const {
    if (num_groups < 2) throw Error("synthetic data needs at least two groups");
    if (features_per_group < 1) throw Error("features per group must be positive");
    if (num_drugs < 2) throw Error("synthetic data needs at least two drugs");
    if (max_groups < 1 || max_groups > num_groups)
        throw Error("max groups per drug m=" + std::to_string(max_groups) + " must lie in [1, " +
                    std::to_string(num_groups) + "]");
    if (!(sigma >= 0.0)) throw Error("sigma must be non-negative");
}

Index side_effect_for_groups(Index g, Index h, Index num_groups) {
    if (g > h) std::swap(g, h);
    if (g == h || g < 0 || h >= num_groups) throw Error("invalid group pair");
    return g * (2 * num_groups - g - 1) / 2 + (h - g - 1);
}

std::vector<Triple> triples_from_ledger(const GroupAssignment& ledger, Index num_groups) {
    std::vector<Triple> out;
    const Index d = static_cast<Index>(ledger.groups.size());
    for (Index i = 0; i < d; ++i) {
        for (Index j = i + 1; j < d; ++j) {
            for (Index g : ledger.groups[i]) {
                for (Index h : ledger.groups[j]) {
                    if (g == h) continue;
                    out.push_back({i, j, side_effect_for_groups(g, h, num_groups)});
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SynthDataset generate(const SynthConfig& config) {
    config.validate();
    SynthDataset ds;
    ds.config = config;
    const Index n = config.num_groups;
    const Index a = config.features_per_group;
    for (Index g = 0; g < n; ++g)
        for (Index h = g + 1; h < n; ++h) ds.side_effect_groups.emplace_back(g, h);

    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<Index> count_dist(1, config.max_groups);
    std::normal_distribution<double> noise(0.0, config.sigma);

    ds.ledger.groups.resize(static_cast<std::size_t>(config.num_drugs));
    ds.ledger.templates = Matrix::Zero(config.num_drugs, a * n);
    Matrix features(config.num_drugs, a * n);
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < config.num_drugs; ++i) {
        const Index count = count_dist(rng);
        std::iota(all.begin(), all.end(), 0);
        for (Index c = 0; c < count; ++c) {
            std::uniform_int_distribution<Index> pick(c, n - 1);
            std::swap(all[c], all[pick(rng)]);
        }
        auto& gi = ds.ledger.groups[i];
        gi.assign(all.begin(), all.begin() + count);
        std::sort(gi.begin(), gi.end());
        for (Index g : gi) ds.ledger.templates.row(i).segment(g * a, a).setOnes();
        for (Index j = 0; j < a * n; ++j) features(i, j) = ds.ledger.templates(i, j) + noise(rng);
    }

    const auto triples = triples_from_ledger(ds.ledger, n);
    ds.graph = build_hypergraph(config.num_drugs, config.num_side_effects(), triples, std::move(features));
    return ds;
}

std::vector<SynthDataset> sweep(const SynthConfig& base, std::span<const Index> m_values) {
    std::vector<SynthDataset> out;
    out.reserve(m_values.size());
    for (Index m : m_values) {
        SynthConfig c = base;
        c.max_groups = m;
        c.seed = derive_seed(base.seed, {static_cast<std::uint64_t>(m)});
        out.push_back(generate(c));
    }
    return out;
}

}  // namespace centsmooth
