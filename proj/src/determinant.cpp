#include "pinning/determinant.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>

#include "pinning/errors.hpp"

namespace pinning {

DenseMatrix::DenseMatrix(std::vector<std::vector<double>> rows)
{
    rows_ = static_cast<int>(rows.size());
    cols_ = rows.empty() ? 0 : static_cast<int>(rows[0].size());
    data_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != cols_)
            throw UsageError("ragged matrix rows");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::without(const std::vector<int>& indices) const
{
    std::vector<char> drop(std::max(rows_, cols_), 0);
    for (int i : indices)
        if (i >= 0 && i < static_cast<int>(drop.size()))
            drop[i] = 1;
    std::vector<int> keep_r, keep_c;
    for (int i = 0; i < rows_; ++i)
        if (!drop[i])
            keep_r.push_back(i);
    for (int j = 0; j < cols_; ++j)
        if (!drop[j])
            keep_c.push_back(j);
    DenseMatrix out(static_cast<int>(keep_r.size()), static_cast<int>(keep_c.size()));
    for (std::size_t a = 0; a < keep_r.size(); ++a)
        for (std::size_t b = 0; b < keep_c.size(); ++b)
            out(static_cast<int>(a), static_cast<int>(b)) = (*this)(keep_r[a], keep_c[b]);
    return out;
}

double dense_determinant(const DenseMatrix& m)
{
    if (m.rows() != m.cols())
        throw UsageError("determinant of a non-square matrix");
    const int n = m.rows();
    DenseMatrix a = m;
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(a(i, k)) > std::fabs(a(p, k)))
                p = i;
        if (a(p, k) == 0.0)
            return 0.0;
        if (p != k) {
            for (int j = 0; j < n; ++j)
                std::swap(a(p, j), a(k, j));
            det = -det;
        }
        det *= a(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (int j = k + 1; j < n; ++j)
                a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

std::int64_t exact_integer_determinant(const std::vector<std::vector<std::int64_t>>& m)
{
    using boost::multiprecision::cpp_int;
    const std::size_t n = m.size();
    for (const auto& r : m)
        if (r.size() != n)
            throw UsageError("determinant of a non-square matrix");
    if (n == 0)
        return 1;
    std::vector<std::vector<cpp_int>> a(n, std::vector<cpp_int>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i][j] = m[i][j];
    cpp_int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p][k] == 0)
                ++p;
            if (p == n)
                return 0;
            std::swap(a[p], a[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    cpp_int d = a[n - 1][n - 1] * sign;
    return d.convert_to<std::int64_t>();
}

double BandedMatrixSpec::entry(int i, int j) const
{
    auto it = entries.find({i, j});
    return it == entries.end() ? 0.0 : it->second;
}

void BandedMatrixSpec::set(int i, int j, double v)
{
    entries[{i, j}] = v;
    entries[{j, i}] = v;
}

void BandedMatrixSpec::validate() const
{
    if (dimension < 0)
        throw UsageError("negative dimension");
    if (bandwidth != 1 && bandwidth != 2)
        throw UsageError("bandwidth must be 1 or 2");
    for (const auto& [ij, v] : entries) {
        const auto [i, j] = ij;
        if (i < 0 || j < 0 || i >= dimension || j >= dimension)
            throw UsageError("banded entry out of range");
        if (std::abs(i - j) > bandwidth && v != 0.0)
            throw UsageError("entry outside the band");
        if (entry(j, i) != v)
            throw UsageError("banded spec is not symmetric");
    }
}

DenseMatrix BandedMatrixSpec::to_dense() const
{
    DenseMatrix m(dimension, dimension);
    for (const auto& [ij, v] : entries)
        m(ij.first, ij.second) = v;
    return m;
}

namespace {

// LDL^T on a symmetric pentadiagonal band. Returns sum log|pivot|, counts negative pivots.
struct LdlOut {
    double log_abs = 0.0;
    int negatives = 0;
    bool zero_pivot = false;
};

LdlOut ldl_band(std::span<const double> diag, std::span<const double> off1, std::span<const double> off2)
{
    const std::size_t n = diag.size();
    LdlOut out;
    // L has two subdiagonals: l1[i] = L(i,i-1), l2[i] = L(i,i-2)
    double dm1 = 0.0, dm2 = 0.0;     // pivots i-1, i-2
    double l1m1 = 0.0;               // L(i-1, i-2)
    for (std::size_t i = 0; i < n; ++i) {
        const double a2 = (i >= 2) ? off2[i - 2] : 0.0; // A(i, i-2)
        const double a1 = (i >= 1) ? off1[i - 1] : 0.0; // A(i, i-1)
        const double l2 = (i >= 2) ? a2 / dm2 : 0.0;
        const double l1 = (i >= 1) ? (a1 - l2 * dm2 * l1m1) / dm1 : 0.0;
        const double d = diag[i] - l1 * l1 * dm1 - l2 * l2 * dm2;
        if (d == 0.0 || std::isnan(d)) {
            out.zero_pivot = true;
            return out;
        }
        if (d < 0.0)
            ++out.negatives;
        out.log_abs += std::log(std::fabs(d));
        dm2 = dm1;
        dm1 = d;
        l1m1 = l1;
    }
    return out;
}

} // namespace

BandedDeterminant banded_ldl_determinant(const BandedMatrixSpec& spec)
{
    spec.validate();
    const int n = spec.dimension;
    std::vector<double> d(n), o1(std::max(n - 1, 0)), o2(std::max(n - 2, 0));
    for (int i = 0; i < n; ++i)
        d[i] = spec.entry(i, i);
    for (int i = 0; i + 1 < n; ++i)
        o1[i] = spec.entry(i, i + 1);
    for (int i = 0; i + 2 < n; ++i)
        o2[i] = spec.entry(i, i + 2);
    const LdlOut r = ldl_band(d, o1, o2);
    if (r.zero_pivot)
        throw NotPositiveDefinite("zero pivot in banded LDL");
    BandedDeterminant out;
    out.log_abs_det = LogWeight(r.log_abs);
    out.positive_definite = r.negatives == 0;
    out.sign = (r.negatives % 2 == 0) ? 1 : -1;
    return out;
}

double pentadiagonal_log_det(std::span<const double> diag, std::span<const double> off1, std::span<const double> off2)
{
    const LdlOut r = ldl_band(diag, off1, off2);
    if (r.zero_pivot || r.negatives > 0)
        throw NotPositiveDefinite("nonpositive pivot in pentadiagonal LDL (dimension " + std::to_string(diag.size()) + ")");
    return r.log_abs;
}

} // namespace pinning
