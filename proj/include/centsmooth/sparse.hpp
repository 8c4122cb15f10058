#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <tuple>
#include <vector>

#include "centsmooth/hypergraph.hpp"

namespace centsmooth {

/// Compressed-row layout of a symmetric matrix. Both triangles are stored, columns are
/// sorted within each row, and every diagonal entry is present.
struct SparsePattern {
    Index n = 0;
    std::vector<Index> row_ptr;
    std::vector<Index> col;
    std::vector<Index> diag_pos;       // position of (i, i)
    std::vector<Index> transpose_pos;  // position of (j, i) for the entry stored at (i, j)

    Index nnz() const { return static_cast<Index>(col.size()); }
    /// Position of (i, j) or -1 when the entry is structurally zero.
    Index find(Index i, Index j) const;

    static std::shared_ptr<const SparsePattern> from_upper(Index n,
                                                          std::span<const std::pair<Index, Index>> upper);
};

struct CooEntry {
    Index row;
    Index col;
    double value;
};

/// Symmetric sparse matrix over a shared pattern. Values at (i, j) and (j, i) are kept
/// identical by every builder in this library.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;
    SparseSymMatrix(std::shared_ptr<const SparsePattern> pattern, std::vector<double> values);

    /// n x n zero matrix with a diagonal-only pattern.
    static SparseSymMatrix zero(Index n);
    static SparseSymMatrix identity(Index n);
    static SparseSymMatrix from_dense(const Matrix& dense, double drop_below = 0.0);

    Index size() const { return pattern_ ? pattern_->n : 0; }
    Index nnz() const { return pattern_ ? pattern_->nnz() : 0; }
    const SparsePattern& pattern() const { return *pattern_; }
    const std::shared_ptr<const SparsePattern>& shared_pattern() const { return pattern_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double at(Index i, Index j) const;
    double diagonal(Index i) const { return values_[pattern_->diag_pos[i]]; }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    Vector multiply(const Vector& x) const;
    double quadratic_form(const Vector& x) const;

    Matrix dense() const;
    /// Nonzero entries with row <= col, sorted by (row, col).
    std::vector<CooEntry> upper_entries() const;

private:
    std::shared_ptr<const SparsePattern> pattern_;
    std::vector<double> values_;
};

/// Accumulates upper-triangle coordinates; duplicates are summed on finalize.
class SymCooBuilder {
public:
    explicit SymCooBuilder(Index n) : n_(n) {}

    void add(Index i, Index j, double value);
    std::uint64_t write_count() const { return entries_.size(); }
    SparseSymMatrix finalize() const;

private:
    Index n_;
    std::vector<CooEntry> entries_;
};

double max_abs_difference(const SparseSymMatrix& a, const SparseSymMatrix& b);

}  // namespace centsmooth
