#include "centsmooth/hypergraph.hpp"

#include <algorithm>
#include <string>

namespace centsmooth {

namespace {

// Offset of the first pair (u, u+1) in the lexicographic enumeration of pairs u < v.
std::uint64_t pair_offset(std::uint64_t u, std::uint64_t n) { return u * (2 * n - u - 1) / 2; }

}  // namespace

Triple canonicalize(Index u, Index v, Index t) {
    if (u < 0 || v < 0 || t < 0) throw Error("negative index in triple");
    if (u == v) throw Error("self-pair: drug " + std::to_string(u) + " paired with itself");
    return u < v ? Triple{u, v, t} : Triple{v, u, t};
}

Triple canonicalize(Index u, Index v, Index t, Index num_drugs, Index num_side_effects) {
    if (u >= num_drugs || v >= num_drugs)
        throw Error("drug index out of range: (" + std::to_string(u) + ", " + std::to_string(v) +
                    ") with " + std::to_string(num_drugs) + " drugs");
    if (t >= num_side_effects)
        throw Error("side-effect index out of range: " + std::to_string(t) + " with " +
                    std::to_string(num_side_effects) + " side effects");
    return canonicalize(u, v, t);
}

std::size_t TripleHash::operator()(const Triple& e) const noexcept {
    // splitmix64 over the packed canonical triple; mirrored inputs are canonicalized upstream
    std::uint64_t x = static_cast<std::uint64_t>(std::min(e.u, e.v)) * 0x9E3779B97F4A7C15ULL ^
                      static_cast<std::uint64_t>(std::max(e.u, e.v)) << 21 ^
                      static_cast<std::uint64_t>(e.t) << 42;
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return static_cast<std::size_t>(x);
}

std::uint64_t DdiHypergraph::universe_size() const {
    const auto d = static_cast<std::uint64_t>(num_drugs_);
    return d < 2 ? 0 : d * (d - 1) / 2 * static_cast<std::uint64_t>(num_side_effects_);
}

std::uint64_t DdiHypergraph::triple_key(const Triple& e) const {
    const auto n = static_cast<std::uint64_t>(num_drugs_);
    const auto u = static_cast<std::uint64_t>(e.u);
    const auto v = static_cast<std::uint64_t>(e.v);
    const std::uint64_t pair = pair_offset(u, n) + (v - u - 1);
    return pair * static_cast<std::uint64_t>(num_side_effects_) + static_cast<std::uint64_t>(e.t);
}

Triple DdiHypergraph::triple_from_key(std::uint64_t key) const {
    const auto n = static_cast<std::uint64_t>(num_drugs_);
    const auto s = static_cast<std::uint64_t>(num_side_effects_);
    const std::uint64_t pair = key / s;
    const std::uint64_t t = key % s;
    // largest u in [0, n-2] with pair_offset(u) <= pair
    std::uint64_t lo = 0, hi = n - 2;
    while (lo < hi) {
        const std::uint64_t mid = (lo + hi + 1) / 2;
        if (pair_offset(mid, n) <= pair)
            lo = mid;
        else
            hi = mid - 1;
    }
    const std::uint64_t u = lo;
    const std::uint64_t v = pair - pair_offset(u, n) + u + 1;
    return Triple{static_cast<Index>(u), static_cast<Index>(v), static_cast<Index>(t)};
}

bool DdiHypergraph::contains(const Triple& e) const {
    if (e.u < 0 || e.v < 0 || e.t < 0 || e.u >= num_drugs_ || e.v >= num_drugs_ ||
        e.t >= num_side_effects_)
        throw Error("triple index out of range");
    if (e.u == e.v) return false;
    const Triple c = canonicalize(e.u, e.v, e.t);
    return std::binary_search(keys_.begin(), keys_.end(), triple_key(c));
}

bool DdiHypergraph::contains_key(std::uint64_t key) const {
    return std::binary_search(keys_.begin(), keys_.end(), key);
}

DdiHypergraph DdiHypergraph::with_edges(std::span<const Triple> edges) const {
    return build_hypergraph(num_drugs_, num_side_effects_, edges, drug_features_);
}

DdiHypergraph build_hypergraph(Index num_drugs, Index num_side_effects,
                               std::span<const Triple> raw_triples, Matrix drug_features) {
    if (num_drugs < 0 || num_side_effects < 0) throw Error("negative node count");
    if (drug_features.rows() != num_drugs)
        throw Error("drug feature matrix has " + std::to_string(drug_features.rows()) +
                    " rows but there are " + std::to_string(num_drugs) + " drugs");

    DdiHypergraph g;
    g.num_drugs_ = num_drugs;
    g.num_side_effects_ = num_side_effects;
    g.drug_features_ = std::move(drug_features);

    g.edges_.reserve(raw_triples.size());
    for (const Triple& raw : raw_triples)
        g.edges_.push_back(canonicalize(raw.u, raw.v, raw.t, num_drugs, num_side_effects));
    std::sort(g.edges_.begin(), g.edges_.end());
    g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

    g.keys_.reserve(g.edges_.size());
    for (const Triple& e : g.edges_) g.keys_.push_back(g.triple_key(e));
    return g;
}

bool negative_complement_contains(const DdiHypergraph& g, const Triple& triple) {
    return !g.contains(triple);
}

}  // namespace centsmooth
