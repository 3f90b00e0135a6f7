#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace torsionlab {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are sorted and unique within
/// each row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                 std::vector<int> col_indices, std::vector<double> values);

    /// Duplicates are summed in insertion order, so two triplet streams that
    /// list the contributions of (i, j) and (j, i) in the same order produce
    /// bit-identical symmetric entries.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    std::span<const std::size_t> row_offsets() const { return row_offsets_; }
    std::span<const int> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

    double at(std::size_t row, std::size_t col) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;

    /// x^T A y
    double bilinear(std::span<const double> x, std::span<const double> y) const;
    double quadratic_form(std::span<const double> x) const { return bilinear(x, x); }

    std::vector<double> diagonal() const;
    std::vector<double> row_sums() const;

    bool is_symmetric() const;

    /// this + scale * other (pattern union)
    SparseMatrix added(const SparseMatrix& other, double scale) const;

    /// Principal submatrix. `keep[i]` is the new index of row/column i, or -1.
    SparseMatrix principal_submatrix(std::span<const int> keep, std::size_t new_size) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace torsionlab
