#include "torsionlab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "torsionlab/errors.hpp"

namespace torsionlab {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<int> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != rows_ + 1 || col_indices_.size() != values_.size() ||
        row_offsets_.back() != values_.size())
        throw InvalidParameter("inconsistent CSR arrays");
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(rows + 1, 0);
    std::vector<int> cols_out;
    std::vector<double> vals;
    cols_out.reserve(triplets.size());
    vals.reserve(triplets.size());
    int last_row = -1, last_col = -1;
    for (const Triplet& t : triplets) {
        if (t.row < 0 || static_cast<std::size_t>(t.row) >= rows || t.col < 0 || static_cast<std::size_t>(t.col) >= cols)
            throw InvalidParameter("triplet index out of range");
        if (t.row == last_row && t.col == last_col) {
            vals.back() += t.value;
            continue;
        }
        cols_out.push_back(t.col);
        vals.push_back(t.value);
        offsets[static_cast<std::size_t>(t.row) + 1] += 1;
        last_row = t.row;
        last_col = t.col;
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::iota(offsets.begin(), offsets.end(), std::size_t{0});
    std::vector<int> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
    const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row]);
    const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row + 1]);
    const auto it = std::lower_bound(first, last, static_cast<int>(col));
    if (it == last || *it != static_cast<int>(col)) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[col_indices_[k]];
        y[i] = s;
    }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
}

double SparseMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
    double total = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * y[col_indices_[k]];
        total += x[i] * s;
    }
    return total;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(std::min(rows_, cols_));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> s(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s[i] += values_[k];
    return s;
}

bool SparseMatrix::is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            if (at(static_cast<std::size_t>(col_indices_[k]), i) != values_[k]) return false;
    return true;
}

SparseMatrix SparseMatrix::added(const SparseMatrix& other, double scale) const {
    if (other.rows_ != rows_ || other.cols_ != cols_) throw InvalidParameter("matrix shapes differ");
    std::vector<std::size_t> offsets(rows_ + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    cols.reserve(nnz() + other.nnz());
    vals.reserve(nnz() + other.nnz());
    for (std::size_t i = 0; i < rows_; ++i) {
        std::size_t a = row_offsets_[i], ae = row_offsets_[i + 1];
        std::size_t b = other.row_offsets_[i], be = other.row_offsets_[i + 1];
        while (a < ae || b < be) {
            const int ca = a < ae ? col_indices_[a] : std::numeric_limits<int>::max();
            const int cb = b < be ? other.col_indices_[b] : std::numeric_limits<int>::max();
            if (ca == cb) {
                cols.push_back(ca);
                vals.push_back(values_[a++] + scale * other.values_[b++]);
            } else if (ca < cb) {
                cols.push_back(ca);
                vals.push_back(values_[a++]);
            } else {
                cols.push_back(cb);
                vals.push_back(scale * other.values_[b++]);
            }
        }
        offsets[i + 1] = cols.size();
    }
    return SparseMatrix(rows_, cols_, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::principal_submatrix(std::span<const int> keep, std::size_t new_size) const {
    std::vector<std::size_t> offsets(new_size + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < rows_; ++i) {
        if (keep[i] < 0) continue;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            const int c = keep[static_cast<std::size_t>(col_indices_[k])];
            if (c < 0) continue;
            cols.push_back(c);
            vals.push_back(values_[k]);
        }
        offsets[static_cast<std::size_t>(keep[i]) + 1] = cols.size();
    }
    // rows are visited in increasing order and keep[] is monotone
    for (std::size_t i = 1; i <= new_size; ++i) offsets[i] = std::max(offsets[i], offsets[i - 1]);
    return SparseMatrix(new_size, new_size, std::move(offsets), std::move(cols), std::move(vals));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace torsionlab
