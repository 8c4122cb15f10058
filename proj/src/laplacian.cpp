#include "centsmooth/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace centsmooth {

Matrix IncidenceMatrix::dense() const {
    Matrix h = Matrix::Zero(num_rows, num_cols());
    for (Index e = 0; e < num_cols(); ++e)
        for (const auto& entry : columns[e]) h(entry.row, e) += entry.value;
    return h;
}

IncidenceMatrix build_incidence(const DdiHypergraph& g) {
    IncidenceMatrix h;
    h.num_rows = g.num_nodes();
    h.columns.reserve(g.edges().size());
    for (const Triple& e : g.edges())
        h.columns.push_back({{{e.u, 0.5}, {e.v, 0.5}, {g.side_effect_node(e.t), -1.0}}});
    return h;
}

SparseSymMatrix central_laplacian_oracle(const IncidenceMatrix& h, std::span<const double> edge_weights) {
    if (static_cast<Index>(edge_weights.size()) != h.num_cols())
        throw Error("expected " + std::to_string(h.num_cols()) + " edge weights, got " +
                    std::to_string(edge_weights.size()));
    for (double w : edge_weights)
        if (w < 0.0) throw Error("negative hyperedge weight");
    const Matrix dense_h = h.dense();
    Vector w(h.num_cols());
    for (Index e = 0; e < h.num_cols(); ++e) w[e] = edge_weights[e];
    const Matrix l = dense_h * w.asDiagonal() * dense_h.transpose();
    return SparseSymMatrix::from_dense(l);
}

std::vector<double> edge_weights_for_dimension(const DdiHypergraph& g, const SideEffectWeights& w, Index k) {
    if (k < 0 || k >= w.rows()) throw Error("dimension " + std::to_string(k) + " out of range");
    std::vector<double> out;
    out.reserve(g.edges().size());
    for (const Triple& e : g.edges()) out.push_back(w(k, e.t));
    return out;
}

CentralLaplacianStructure::CentralLaplacianStructure(const DdiHypergraph& g)
    : num_drugs_(g.num_drugs()), num_side_effects_(g.num_side_effects()) {
    const auto edges = g.edges();
    side_effect_of_edge_.reserve(edges.size());
    side_effect_count_.assign(static_cast<std::size_t>(num_side_effects_), 0.0);
    std::map<std::pair<Index, Index>, double> n_d;  // (drug, side effect) -> n_d

    std::vector<std::pair<Index, Index>> upper;
    std::vector<std::pair<Index, Index>> pair_ranges;  // edge range per unique drug pair
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Triple& e = edges[i];
        side_effect_of_edge_.push_back(e.t);
        if (i == 0 || edges[i - 1].u != e.u || edges[i - 1].v != e.v) {
            pair_ranges.emplace_back(static_cast<Index>(i), static_cast<Index>(i));
            upper.emplace_back(e.u, e.v);
        }
        ++pair_ranges.back().second;
        n_d[{e.u, e.t}] += 1.0;
        n_d[{e.v, e.t}] += 1.0;
        side_effect_count_[e.t] += 1.0;
    }
    for (const auto& [key, count] : n_d) upper.emplace_back(key.first, num_drugs_ + key.second);
    pattern_ = SparsePattern::from_upper(g.num_nodes(), upper);

    pairs_.reserve(pair_ranges.size());
    for (const auto& [first, last] : pair_ranges) {
        const Triple& e = edges[first];
        const Index pos = pattern_->find(e.u, e.v);
        pairs_.push_back({pos, pattern_->transpose_pos[pos], first, last});
    }
    drug_side_effects_.reserve(n_d.size());
    for (const auto& [key, count] : n_d) {
        const Index pos = pattern_->find(key.first, num_drugs_ + key.second);
        drug_side_effects_.push_back({key.first, key.second, count, pos, pattern_->transpose_pos[pos]});
    }
}

SparseSymMatrix CentralLaplacianStructure::assemble(std::span<const double> weight_row) const {
    if (static_cast<Index>(weight_row.size()) != num_side_effects_)
        throw Error("weight row has " + std::to_string(weight_row.size()) + " entries, expected " +
                    std::to_string(num_side_effects_));
    std::vector<double> values(static_cast<std::size_t>(pattern_->nnz()), 0.0);
    std::uint64_t writes = 0;

    // drug-drug: 1/4 sum_{t : (i,j,t) in E} W[t]
    for (const auto& p : pairs_) {
        double acc = 0.0;
        for (Index e = p.first_edge; e < p.last_edge; ++e) acc += weight_row[side_effect_of_edge_[e]];
        values[p.pos_ij] = values[p.pos_ji] = 0.25 * acc;
        writes += 2;
    }
    // drug-side effect: -1/2 n_d(i,t) W[t]; drug diagonal: 1/4 sum_t m_d(i,t) W[t]
    for (const auto& ds : drug_side_effects_) {
        const double w = weight_row[ds.side_effect];
        values[ds.pos_it] = values[ds.pos_ti] = -0.5 * ds.count * w;
        values[pattern_->diag_pos[ds.drug]] += 0.25 * ds.count * w;
        writes += 3;
    }
    // side-effect diagonal: q(t) W[t]
    for (Index t = 0; t < num_side_effects_; ++t) {
        if (side_effect_count_[t] == 0.0) continue;
        values[pattern_->diag_pos[num_drugs_ + t]] = side_effect_count_[t] * weight_row[t];
        ++writes;
    }
    last_writes_ = writes;
    return {pattern_, std::move(values)};
}

void CentralLaplacianStructure::weight_gradient(std::span<const double> dlaplacian,
                                                std::span<double> weight_grad) const {
    for (const auto& p : pairs_) {
        const double g = 0.25 * (dlaplacian[p.pos_ij] + dlaplacian[p.pos_ji]);
        for (Index e = p.first_edge; e < p.last_edge; ++e) weight_grad[side_effect_of_edge_[e]] += g;
    }
    for (const auto& ds : drug_side_effects_) {
        weight_grad[ds.side_effect] += ds.count * (-0.5 * (dlaplacian[ds.pos_it] + dlaplacian[ds.pos_ti]) +
                                                   0.25 * dlaplacian[pattern_->diag_pos[ds.drug]]);
    }
    for (Index t = 0; t < num_side_effects_; ++t)
        weight_grad[t] += side_effect_count_[t] * dlaplacian[pattern_->diag_pos[num_drugs_ + t]];
}

SparseSymMatrix central_laplacian_closed_form(const DdiHypergraph& g, const SideEffectWeights& w, Index k) {
    if (k < 0 || k >= w.rows()) throw Error("dimension " + std::to_string(k) + " out of range");
    if (w.cols() != g.num_side_effects()) throw Error("weight matrix width does not match side-effect count");
    const CentralLaplacianStructure structure(g);
    std::vector<double> row(w.row(k).begin(), w.row(k).end());
    return structure.assemble(row);
}

SparseSymMatrix simple_laplacian(const DdiHypergraph& g) {
    const CentralLaplacianStructure structure(g);
    const std::vector<double> ones(static_cast<std::size_t>(g.num_side_effects()), 1.0);
    return structure.assemble(ones);
}

SparseSymMatrix baseline_smoothing_laplacian(const DdiHypergraph& g) {
    SymCooBuilder b(g.num_nodes());
    for (const Triple& e : g.edges()) {
        const std::array<Index, 3> nodes{e.u, e.v, g.side_effect_node(e.t)};
        for (int p = 0; p < 3; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                b.add(nodes[p], nodes[p], 1.0);
                b.add(nodes[q], nodes[q], 1.0);
                b.add(nodes[p], nodes[q], -1.0);
            }
        }
    }
    return b.finalize();
}

namespace {

std::vector<double> floored_inv_sqrt(std::span<const double> degree, double eps, std::vector<bool>& floored) {
    std::vector<double> out(degree.size());
    floored.assign(degree.size(), false);
    for (std::size_t i = 0; i < degree.size(); ++i) {
        if (degree[i] > eps) {
            out[i] = 1.0 / std::sqrt(degree[i]);
        } else {
            out[i] = 1.0 / std::sqrt(eps);
            floored[i] = true;
        }
    }
    return out;
}

std::vector<double> diagonal_of(const SparseSymMatrix& m) {
    std::vector<double> d(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.size(); ++i) d[i] = m.diagonal(i);
    return d;
}

std::vector<double> abs_row_sums(const SparseSymMatrix& m) {
    const auto& p = m.pattern();
    const auto v = m.values();
    std::vector<double> d(static_cast<std::size_t>(p.n), 0.0);
    for (Index i = 0; i < p.n; ++i)
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos) d[i] += std::abs(v[pos]);
    return d;
}

SparseSymMatrix normalize_adjacency(const SparseSymMatrix& l, std::span<const double> r) {
    const auto& p = l.pattern();
    const auto lv = l.values();
    std::vector<double> values(lv.size());
    for (Index i = 0; i < p.n; ++i) {
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos) {
            const Index j = p.col[pos];
            // r_i * r_j commutes exactly, which keeps (i,j) and (j,i) bit-identical
            values[pos] = (i == j ? 2.0 : 0.0) - lv[pos] * (r[i] * r[j]);
        }
    }
    return {l.shared_pattern(), std::move(values)};
}

SparseSymMatrix scale_symmetric(const SparseSymMatrix& a, std::span<const double> s) {
    const auto& p = a.pattern();
    const auto av = a.values();
    std::vector<double> values(av.size());
    for (Index i = 0; i < p.n; ++i)
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos)
            values[pos] = av[pos] * (s[i] * s[p.col[pos]]);
    return {a.shared_pattern(), std::move(values)};
}

}  // namespace

SparseSymMatrix normalized_adjacency(const SparseSymMatrix& laplacian, double eps) {
    std::vector<bool> floored;
    const auto r = floored_inv_sqrt(diagonal_of(laplacian), eps, floored);
    return normalize_adjacency(laplacian, r);
}

SparseSymMatrix propagation_operator(const SparseSymMatrix& adjacency, double eps) {
    std::vector<bool> floored;
    const auto s = floored_inv_sqrt(abs_row_sums(adjacency), eps, floored);
    return scale_symmetric(adjacency, s);
}

PropagationTrace trace_propagation(SparseSymMatrix laplacian, double eps) {
    PropagationTrace t;
    t.laplacian = std::move(laplacian);
    t.inv_sqrt_degree = floored_inv_sqrt(diagonal_of(t.laplacian), eps, t.degree_floored);
    t.adjacency = normalize_adjacency(t.laplacian, t.inv_sqrt_degree);
    t.inv_sqrt_abs_degree = floored_inv_sqrt(abs_row_sums(t.adjacency), eps, t.abs_degree_floored);
    t.propagation = scale_symmetric(t.adjacency, t.inv_sqrt_abs_degree);
    return t;
}

std::vector<double> propagation_backward(const PropagationTrace& trace, std::span<const double> dprop) {
    const auto& p = trace.laplacian.pattern();
    const auto av = trace.adjacency.values();
    const auto lv = trace.laplacian.values();
    const auto& s = trace.inv_sqrt_abs_degree;
    const auto& r = trace.inv_sqrt_degree;
    const auto& tpos = p.transpose_pos;

    // P_ij = A_ij s_i s_j,  s_i = (sum_j |A_ij|)^{-1/2}
    std::vector<double> dadj(av.size());
    std::vector<double> ds(static_cast<std::size_t>(p.n), 0.0);
    for (Index i = 0; i < p.n; ++i) {
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos) {
            const Index j = p.col[pos];
            dadj[pos] = dprop[pos] * (s[i] * s[j]);
            ds[i] += (dprop[pos] + dprop[tpos[pos]]) * av[pos] * s[j];
        }
    }
    for (Index i = 0; i < p.n; ++i) {
        if (trace.abs_degree_floored[i]) continue;
        const double ddeg = -0.5 * ds[i] * s[i] * s[i] * s[i];
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos) {
            if (av[pos] > 0.0)
                dadj[pos] += ddeg;
            else if (av[pos] < 0.0)
                dadj[pos] -= ddeg;
        }
    }

    // A_ij = 2 delta_ij - L_ij r_i r_j,  r_i = max(L_ii, eps)^{-1/2}
    std::vector<double> dlap(lv.size());
    std::vector<double> dr(static_cast<std::size_t>(p.n), 0.0);
    for (Index i = 0; i < p.n; ++i) {
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos) {
            const Index j = p.col[pos];
            dlap[pos] = -dadj[pos] * (r[i] * r[j]);
            dr[i] -= (dadj[pos] + dadj[tpos[pos]]) * lv[pos] * r[j];
        }
    }
    for (Index i = 0; i < p.n; ++i) {
        if (trace.degree_floored[i]) continue;
        dlap[p.diag_pos[i]] += -0.5 * dr[i] * r[i] * r[i] * r[i];
    }
    return dlap;
}

}  // namespace centsmooth
