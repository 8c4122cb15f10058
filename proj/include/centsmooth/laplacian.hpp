#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "centsmooth/hypergraph.hpp"
#include "centsmooth/sparse.hpp"

namespace centsmooth {

inline constexpr double kDegreeFloor = 1e-8;

/// Weighted oriented incidence matrix: per hyperedge (u, v, t) the column holds
/// 1/2 at drug rows u and v and -1 at the side-effect row.
struct IncidenceMatrix {
    struct Entry {
        Index row;
        double value;
    };
    Index num_rows = 0;
    std::vector<std::array<Entry, 3>> columns;  // lexicographic edge order

    Index num_cols() const { return static_cast<Index>(columns.size()); }
    Matrix dense() const;
};

/// K x |V_S| non-negative relevance of each side effect on each embedding dimension.
using SideEffectWeights = Matrix;

IncidenceMatrix build_incidence(const DdiHypergraph& g);

/// H diag(w) H^T evaluated as a dense triple product. Test oracle for the closed form.
SparseSymMatrix central_laplacian_oracle(const IncidenceMatrix& h, std::span<const double> edge_weights);

/// Per-edge weights w_k(e) = W[k][t_e] in edge order.
std::vector<double> edge_weights_for_dimension(const DdiHypergraph& g, const SideEffectWeights& w, Index k);

/// Hyperedge counters of the four-case closed form, gathered in one pass over E.
/// They depend only on the edge set, so a structure is built once per graph and
/// then assembled for any weight row in O(|E|).
class CentralLaplacianStructure {
public:
    explicit CentralLaplacianStructure(const DdiHypergraph& g);

    Index num_nodes() const { return pattern_->n; }
    Index num_side_effects() const { return num_side_effects_; }
    const std::shared_ptr<const SparsePattern>& pattern() const { return pattern_; }

    /// L_k for the weight row W[k][.] (length |V_S|).
    SparseSymMatrix assemble(std::span<const double> weight_row) const;

    /// Given dLoss/dL_k on the pattern (full storage, both triangles treated as
    /// independent entries), accumulates dLoss/dW[k][.] into `weight_grad`.
    void weight_gradient(std::span<const double> dlaplacian, std::span<double> weight_grad) const;

    /// Number of value writes performed by the last assemble() call.
    std::uint64_t last_write_count() const { return last_writes_; }

private:
    struct DrugPair {
        Index pos_ij, pos_ji;
        Index first_edge, last_edge;  // range into side_effect_of_edge_
    };
    struct DrugSideEffect {
        Index drug, side_effect;
        double count;  // n_d(i, t), which also equals m_d(i, t) for a deduplicated edge set
        Index pos_it, pos_ti;
    };

    std::shared_ptr<const SparsePattern> pattern_;
    Index num_drugs_ = 0;
    Index num_side_effects_ = 0;
    std::vector<Index> side_effect_of_edge_;
    std::vector<DrugPair> pairs_;
    std::vector<DrugSideEffect> drug_side_effects_;
    std::vector<double> side_effect_count_;  // q(t)
    mutable std::uint64_t last_writes_ = 0;
};

/// Closed-form L_k for dimension k.
SparseSymMatrix central_laplacian_closed_form(const DdiHypergraph& g, const SideEffectWeights& w, Index k);

/// H H^T: the closed form with every side-effect weight fixed to 1.
SparseSymMatrix simple_laplacian(const DdiHypergraph& g);

/// Clique-expansion Laplacian: x^T L x = sum_e sum_{pairs p<q in e} (x_p - x_q)^2.
SparseSymMatrix baseline_smoothing_laplacian(const DdiHypergraph& g);

/// 2I - d^{-1/2} L d^{-1/2} with d = max(diag(L), eps).
SparseSymMatrix normalized_adjacency(const SparseSymMatrix& laplacian, double eps = kDegreeFloor);

/// D^{-1/2} A D^{-1/2} with D_ii = max(sum_j |A_ij|, eps).
SparseSymMatrix propagation_operator(const SparseSymMatrix& adjacency, double eps = kDegreeFloor);

/// Intermediates of L -> A -> P kept for differentiation.
struct PropagationTrace {
    SparseSymMatrix laplacian;
    std::vector<double> inv_sqrt_degree;      // d^{-1/2}
    std::vector<bool> degree_floored;
    SparseSymMatrix adjacency;
    std::vector<double> inv_sqrt_abs_degree;  // D^{-1/2}
    std::vector<bool> abs_degree_floored;
    SparseSymMatrix propagation;
};

PropagationTrace trace_propagation(SparseSymMatrix laplacian, double eps = kDegreeFloor);

/// Back-propagates dLoss/dP (values on P's pattern, entries treated independently)
/// to dLoss/dL on the same pattern.
std::vector<double> propagation_backward(const PropagationTrace& trace, std::span<const double> dprop);

}  // namespace centsmooth
