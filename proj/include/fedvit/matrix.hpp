#pragma once

#include <cstddef>
#include <vector>

#include "fedvit/rng.hpp"

namespace fedvit {

/// Dense row-major matrix of 64-bit reals. Immutable by convention once
/// built; every operation below returns a fresh value.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0);

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

/// Relative pivot tolerance shared by invert and solve_least_squares.
inline constexpr double kPivotTolerance = 1e-12;

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double s);

/// a <- a + s * b, shapes must match.
void axpy_inplace(Matrix& a, double s, const Matrix& b);

double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Inverse via LU with partial pivoting. Pivots below
/// kPivotTolerance * max|a| raise SingularMatrixError with the failing
/// pivot index.
Matrix invert(const Matrix& a);

/// LU factorization with partial pivoting, reusable for solves.
struct LuFactors {
    Matrix lu;                     // L below diagonal (unit), U on and above
    std::vector<std::size_t> piv;  // row permutation
};

/// Factor a square matrix; throws SingularMatrixError on a failing pivot.
LuFactors lu_factor(const Matrix& a);

/// Solve a * x = b given the factorization of a (b may have many columns).
Matrix lu_solve(const LuFactors& f, const Matrix& b);

/// Least squares for the stacked system y = X^T g with g (N x D), N <= D,
/// y (L x D): returns the (N x L) minimizer of ||X^T g - y||_F via normal
/// equations on g g^T. Rank-deficient g raises RankDeficiencyError carrying
/// the numerical rank.
Matrix solve_least_squares(const Matrix& g, const Matrix& y);

enum class Distribution { StandardNormal, Uniform01 };

/// Matrix with i.i.d. entries from the named distribution, deterministic
/// per generator state.
Matrix rng_matrix(Rng& rng, std::size_t rows, std::size_t cols, Distribution dist);

/// Uniformly random permutation of {1, ..., n} (Fisher-Yates), 1-based
/// values as used by the position-embedding key.
std::vector<std::uint32_t> rng_permutation(Rng& rng, std::size_t n);

}  // namespace fedvit
