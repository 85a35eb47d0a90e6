#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "pinning/log_weight.hpp"

namespace pinning {

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}
    explicit DenseMatrix(std::vector<std::vector<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    // drop the listed rows and columns (0-based, sorted or not)
    DenseMatrix without(const std::vector<int>& indices) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// LU with partial pivoting. Throws UsageError when not square.
double dense_determinant(const DenseMatrix& m);

// Bareiss fraction-free elimination; exact for integer matrices.
std::int64_t exact_integer_determinant(const std::vector<std::vector<std::int64_t>>& m);

struct BandedMatrixSpec {
    int dimension = 0;
    int bandwidth = 1;
    std::map<std::pair<int, int>, double> entries;

    double entry(int i, int j) const;
    void set(int i, int j, double v); // writes both (i,j) and (j,i)
    void validate() const;
    DenseMatrix to_dense() const;
};

struct BandedDeterminant {
    LogWeight log_abs_det;
    bool positive_definite = true;
    int sign = 1;
};

// O(n) LDL^T. Exact zero pivot throws NotPositiveDefinite.
BandedDeterminant banded_ldl_determinant(const BandedMatrixSpec& spec);

// Hot-path variant on band arrays: diag[i], off1[i] = A(i,i+1), off2[i] = A(i,i+2).
// Returns log det; throws NotPositiveDefinite on a pivot <= 0.
double pentadiagonal_log_det(std::span<const double> diag, std::span<const double> off1, std::span<const double> off2);

} // namespace pinning
