#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace centsmooth {

using Index = std::int64_t;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class NodeKind { Drug, SideEffect };

struct NodeId {
    NodeKind kind;
    Index index;

    /// Flat row/column in every |V| x |V| operator: drugs first, then side effects.
    Index flat(Index num_drugs) const { return kind == NodeKind::Drug ? index : num_drugs + index; }
};

/// A (drug, drug, side effect) hyperedge. Canonical form has u < v.
struct Triple {
    Index u = 0;
    Index v = 0;
    Index t = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Returns (min(u,v), max(u,v), t). Throws on self-pairs and negative indices.
Triple canonicalize(Index u, Index v, Index t);

/// Range-checked variant.
Triple canonicalize(Index u, Index v, Index t, Index num_drugs, Index num_side_effects);

struct TripleHash {
    std::size_t operator()(const Triple& e) const noexcept;
};

class DdiHypergraph {
public:
    DdiHypergraph() = default;

    Index num_drugs() const { return num_drugs_; }
    Index num_side_effects() const { return num_side_effects_; }
    Index num_nodes() const { return num_drugs_ + num_side_effects_; }
    Index feature_width() const { return drug_features_.cols(); }

    /// Lexicographically sorted, deduplicated canonical edges.
    std::span<const Triple> edges() const { return edges_; }
    const Matrix& drug_features() const { return drug_features_; }

    bool contains(const Triple& e) const;
    bool contains_key(std::uint64_t key) const;

    /// Number of canonical triples in the universe V_D x V_D x V_S (unordered, distinct drugs).
    std::uint64_t universe_size() const;
    std::uint64_t complement_size() const { return universe_size() - edges_.size(); }

    /// Dense id of a canonical triple inside the universe; used for sampling and hashing.
    std::uint64_t triple_key(const Triple& e) const;
    Triple triple_from_key(std::uint64_t key) const;

    Index side_effect_node(Index t) const { return num_drugs_ + t; }

    /// Same nodes and features, different edge set.
    DdiHypergraph with_edges(std::span<const Triple> edges) const;

    friend DdiHypergraph build_hypergraph(Index, Index, std::span<const Triple>, Matrix);

private:
    Index num_drugs_ = 0;
    Index num_side_effects_ = 0;
    std::vector<Triple> edges_;
    std::vector<std::uint64_t> keys_;  // sorted, parallel to edges_
    Matrix drug_features_;
};

/// Canonicalizes, range-checks and deduplicates `raw_triples`.
DdiHypergraph build_hypergraph(Index num_drugs, Index num_side_effects,
                               std::span<const Triple> raw_triples, Matrix drug_features);

/// True iff the triple is a non-edge.
bool negative_complement_contains(const DdiHypergraph& g, const Triple& triple);

}  // namespace centsmooth
