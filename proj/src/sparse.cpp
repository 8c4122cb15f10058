#include "centsmooth/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace centsmooth {

Index SparsePattern::find(Index i, Index j) const {
    const auto first = col.begin() + row_ptr[i];
    const auto last = col.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return it != last && *it == j ? static_cast<Index>(it - col.begin()) : -1;
}

std::shared_ptr<const SparsePattern> SparsePattern::from_upper(
    Index n, std::span<const std::pair<Index, Index>> upper) {
    std::vector<std::pair<Index, Index>> full;
    full.reserve(2 * upper.size() + static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) full.emplace_back(i, i);
    for (auto [i, j] : upper) {
        if (i < 0 || j < 0 || i >= n || j >= n) throw Error("sparse entry out of range");
        if (i == j) continue;
        full.emplace_back(i, j);
        full.emplace_back(j, i);
    }
    std::sort(full.begin(), full.end());
    full.erase(std::unique(full.begin(), full.end()), full.end());

    auto p = std::make_shared<SparsePattern>();
    p->n = n;
    p->row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    p->col.reserve(full.size());
    for (auto [i, j] : full) {
        ++p->row_ptr[i + 1];
        p->col.push_back(j);
    }
    for (Index i = 0; i < n; ++i) p->row_ptr[i + 1] += p->row_ptr[i];

    p->diag_pos.resize(static_cast<std::size_t>(n));
    p->transpose_pos.resize(full.size());
    // rows are visited in order, so a per-column cursor yields (j, i) positions in one sweep
    std::vector<Index> cursor(p->row_ptr.begin(), p->row_ptr.end() - 1);
    for (Index i = 0; i < n; ++i) {
        for (Index pos = p->row_ptr[i]; pos < p->row_ptr[i + 1]; ++pos) {
            const Index j = p->col[pos];
            if (j == i) p->diag_pos[i] = pos;
            p->transpose_pos[cursor[j]++] = pos;
        }
    }
    return p;
}

SparseSymMatrix::SparseSymMatrix(std::shared_ptr<const SparsePattern> pattern, std::vector<double> values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
    if (!pattern_ || static_cast<Index>(values_.size()) != pattern_->nnz())
        throw Error("value count does not match sparse pattern");
}

SparseSymMatrix SparseSymMatrix::zero(Index n) {
    auto p = SparsePattern::from_upper(n, {});
    std::vector<double> v(static_cast<std::size_t>(p->nnz()), 0.0);
    return {std::move(p), std::move(v)};
}

SparseSymMatrix SparseSymMatrix::identity(Index n) {
    auto m = zero(n);
    std::fill(m.values_.begin(), m.values_.end(), 1.0);
    return m;
}

SparseSymMatrix SparseSymMatrix::from_dense(const Matrix& dense, double drop_below) {
    if (dense.rows() != dense.cols()) throw Error("matrix is not square");
    SymCooBuilder b(dense.rows());
    for (Index i = 0; i < dense.rows(); ++i)
        for (Index j = i; j < dense.cols(); ++j)
            if (std::abs(dense(i, j)) > drop_below || i == j) b.add(i, j, dense(i, j));
    return b.finalize();
}

double SparseSymMatrix::at(Index i, Index j) const {
    if (i < 0 || j < 0 || i >= size() || j >= size()) throw Error("sparse index out of range");
    const Index pos = pattern_->find(i, j);
    return pos < 0 ? 0.0 : values_[pos];
}

void SparseSymMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    const auto& p = *pattern_;
    for (Index i = 0; i < p.n; ++i) {
        double acc = 0.0;
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos) acc += values_[pos] * x[p.col[pos]];
        y[i] = acc;
    }
}

Vector SparseSymMatrix::multiply(const Vector& x) const {
    if (x.size() != size()) throw Error("vector length does not match matrix");
    Vector y(size());
    multiply(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
    return y;
}

double SparseSymMatrix::quadratic_form(const Vector& x) const { return x.dot(multiply(x)); }

Matrix SparseSymMatrix::dense() const {
    Matrix d = Matrix::Zero(size(), size());
    const auto& p = *pattern_;
    for (Index i = 0; i < p.n; ++i)
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos) d(i, p.col[pos]) = values_[pos];
    return d;
}

std::vector<CooEntry> SparseSymMatrix::upper_entries() const {
    std::vector<CooEntry> out;
    const auto& p = *pattern_;
    for (Index i = 0; i < p.n; ++i)
        for (Index pos = p.row_ptr[i]; pos < p.row_ptr[i + 1]; ++pos)
            if (p.col[pos] >= i && values_[pos] != 0.0) out.push_back({i, p.col[pos], values_[pos]});
    return out;
}

void SymCooBuilder::add(Index i, Index j, double value) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw Error("sparse entry out of range");
    if (i > j) std::swap(i, j);
    entries_.push_back({i, j, value});
}

SparseSymMatrix SymCooBuilder::finalize() const {
    std::vector<std::pair<Index, Index>> coords;
    coords.reserve(entries_.size());
    for (const auto& e : entries_) coords.emplace_back(e.row, e.col);
    auto pattern = SparsePattern::from_upper(n_, coords);
    std::vector<double> values(static_cast<std::size_t>(pattern->nnz()), 0.0);
    for (const auto& e : entries_) {
        const Index pos = pattern->find(e.row, e.col);
        values[pos] += e.value;
        if (e.row != e.col) values[pattern->transpose_pos[pos]] += e.value;
    }
    return {std::move(pattern), std::move(values)};
}

double max_abs_difference(const SparseSymMatrix& a, const SparseSymMatrix& b) {
    if (a.size() != b.size()) throw Error("matrix sizes differ");
    if (a.size() == 0) return 0.0;
    return (a.dense() - b.dense()).cwiseAbs().maxCoeff();
}

}  // namespace centsmooth
