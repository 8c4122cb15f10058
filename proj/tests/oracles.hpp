#pragma once

// Independent reference implementations shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "centsmooth/hypergraph.hpp"
#include "centsmooth/metrics.hpp"
#include "centsmooth/model.hpp"
#include "centsmooth/train.hpp"

namespace oracle {

using namespace centsmooth;

/// Random hypergraph with distinct canonical edges.
inline DdiHypergraph random_graph(std::mt19937_64& rng, Index max_drugs, Index max_side_effects, Index max_edges,
                                  Index feature_width = 3) {
    std::uniform_int_distribution<Index> nd(2, max_drugs), ns(1, max_side_effects);
    const Index d = nd(rng), s = ns(rng);
    const Index universe = d * (d - 1) / 2 * s;
    std::uniform_int_distribution<Index> ne(0, std::min(max_edges, universe));
    const Index count = ne(rng);
    std::uniform_int_distribution<Index> pick_drug(0, d - 1), pick_se(0, s - 1);
    std::set<Triple> edges;
    while (static_cast<Index>(edges.size()) < count) {
        const Index u = pick_drug(rng), v = pick_drug(rng);
        if (u == v) continue;
        edges.insert(canonicalize(u, v, pick_se(rng)));
    }
    std::vector<Triple> list(edges.begin(), edges.end());
    std::normal_distribution<double> normal;
    Matrix features(d, feature_width);
    for (Index i = 0; i < features.size(); ++i) features.data()[i] = normal(rng);
    return build_hypergraph(d, s, list, std::move(features));
}

/// sum_e w_e ((x_u + x_v)/2 - x_t)^2 evaluated edge by edge.
inline double central_quadratic_direct(const DdiHypergraph& g, std::span<const double> w, const Vector& x) {
    double acc = 0.0;
    for (const auto& e : g.edges()) {
        const double d = 0.5 * (x[e.u] + x[e.v]) - x[g.side_effect_node(e.t)];
        acc += w[static_cast<std::size_t>(e.t)] * d * d;
    }
    return acc;
}

/// Explicit pairwise comparison.
inline double auc_pairwise(std::span<const ScoredLabel> s) {
    double wins = 0.0;
    double pairs = 0.0;
    for (const auto& p : s) {
        if (!p.positive) continue;
        for (const auto& n : s) {
            if (n.positive) continue;
            pairs += 1.0;
            if (p.score > n.score) wins += 1.0;
            else if (p.score == n.score) wins += 0.5;
        }
    }
    return wins / pairs;
}

/// Per-threshold enumeration: for every distinct score tau, predict positive iff score >= tau;
/// area = sum over thresholds of (recall gain) * precision.
inline double aupr_enumerated(std::span<const ScoredLabel> s) {
    std::vector<double> thresholds;
    double total_pos = 0.0;
    for (const auto& x : s) {
        thresholds.push_back(x.score);
        if (x.positive) total_pos += 1.0;
    }
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    double prev_recall = 0.0;
    double area = 0.0;
    for (double tau : thresholds) {
        double tp = 0.0, predicted = 0.0;
        for (const auto& x : s) {
            if (x.score >= tau) {
                predicted += 1.0;
                if (x.positive) tp += 1.0;
            }
        }
        const double recall = tp / total_pos;
        area += (recall - prev_recall) * (tp / predicted);
        prev_recall = recall;
    }
    return area;
}

/// Exact binomial coefficients for n <= 66 (fits in 64 bits).
inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    static const auto table = [] {
        std::vector<std::vector<std::uint64_t>> t(67);
        for (int i = 0; i <= 66; ++i) {
            t[i].assign(static_cast<std::size_t>(i + 1), 1);
            for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
        }
        return t;
    }();
    return table[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

/// P(X >= a) by enumerating the hypergeometric support with exact integer counts.
inline double fisher_enumerated(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    const int exposed = static_cast<int>(a + b), with = static_cast<int>(a + c);
    const int without = static_cast<int>(b + d), total = static_cast<int>(a + b + c + d);
    if (a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0) return 1.0;
    std::uint64_t num = 0;
    for (int x = static_cast<int>(a); x <= std::min(exposed, with); ++x)
        num += binomial(with, x) * binomial(without, exposed - x);
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(binomial(total, exposed)));
}

/// Central finite differences of the training loss for every parameter entry, compared
/// against the analytic gradients.
struct GradientCheck {
    double worst_relative = 0.0;
    double worst_absolute_small = 0.0;
    std::size_t entries = 0;
    bool pass = true;
    std::string first_failure;
};

inline GradientCheck check_gradients(const ModelParams& params, const DdiHypergraph& g,
                                     std::span<const Triple> negatives, double lambda, Method method,
                                     double step = 1e-5, double rel_tol = 1e-4, double abs_tol = 1e-7) {
    const LaplacianBuilder builder(g, method);
    const auto analytic = gradients(params, g, negatives, lambda, builder);
    std::vector<double> flat_analytic;
    analytic.grads.visit([&](const std::string&, const double* data, Index n) {
        flat_analytic.insert(flat_analytic.end(), data, data + n);
    });

    GradientCheck out;
    auto fail = [&](const std::string& name, Index i, double a, double numeric) {
        if (out.pass)
            out.first_failure = name + "[" + std::to_string(i) + "] analytic " + std::to_string(a) + " numeric " +
                                std::to_string(numeric);
        out.pass = false;
    };
    ModelParams probe = params;
    std::size_t offset = 0;
    probe.visit([&](const std::string& name, double* data, Index n) {
        const bool frozen = name == "weights" && !builder.learns_weights();
        for (Index i = 0; i < n; ++i) {
            if (frozen) {
                // W is a constant for fixed-Laplacian methods
                if (flat_analytic[offset + static_cast<std::size_t>(i)] != 0.0) fail(name, i, 1.0, 0.0);
                continue;
            }
            const double keep = data[i];
            data[i] = keep + step;
            const double up = loss(probe, g, negatives, lambda, builder);
            data[i] = keep - step;
            const double down = loss(probe, g, negatives, lambda, builder);
            data[i] = keep;
            const double numeric = (up - down) / (2.0 * step);
            const double a = flat_analytic[offset + static_cast<std::size_t>(i)];
            ++out.entries;
            if (std::abs(a) < 1e-8) {
                out.worst_absolute_small = std::max(out.worst_absolute_small, std::abs(a - numeric));
                if (std::abs(a - numeric) > abs_tol) fail(name, i, a, numeric);
            } else {
                const double rel = std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric));
                out.worst_relative = std::max(out.worst_relative, rel);
                if (rel > rel_tol) fail(name, i, a, numeric);
            }
        }
        offset += static_cast<std::size_t>(n);
    });
    return out;
}

}  // namespace oracle
