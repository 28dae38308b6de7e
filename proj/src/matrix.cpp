#include "fedvit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedvit/errors.hpp"

namespace fedvit {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, double fill)
    : rows(r), cols(c), data(r * c, fill) {
    if (r == 0 || c == 0) throw ShapeError("Matrix: rows and cols must be >= 1");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a) + " * " + shape_str(b));
    }
    Matrix out(a.rows, b.cols);
    // i-k-j order keeps the inner loop contiguous over b and out rows.
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Matrix scaled(const Matrix& a, double s) {
    Matrix out = a;
    for (double& v : out.data) v *= s;
    return out;
}

void axpy_inplace(Matrix& a, double s, const Matrix& b) {
    require_same_shape(a, b, "axpy");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

LuFactors lu_factor(const Matrix& a) {
    if (a.rows != a.cols) throw ShapeError("lu_factor: matrix must be square, got " + shape_str(a));
    const std::size_t n = a.rows;
    const double tol = kPivotTolerance * max_abs(a);

    LuFactors f{a, std::vector<std::size_t>(n)};
    std::iota(f.piv.begin(), f.piv.end(), std::size_t{0});
    Matrix& lu = f.lu;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::fabs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::fabs(lu(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (!(best > tol)) {
            throw SingularMatrixError(
                "lu_factor: pivot " + std::to_string(k) + " has magnitude " + std::to_string(best) +
                    " below tolerance",
                k);
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
            std::swap(f.piv[k], f.piv[p]);
        }
        const double inv_pivot = 1.0 / lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = lu(i, k) * inv_pivot;
            lu(i, k) = m;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
        }
    }
    return f;
}

Matrix lu_solve(const LuFactors& f, const Matrix& b) {
    const std::size_t n = f.lu.rows;
    if (b.rows != n) throw ShapeError("lu_solve: rhs rows " + std::to_string(b.rows) + " != " + std::to_string(n));
    Matrix x(n, b.cols);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) x(i, j) = b(f.piv[i], j);
    // forward substitution (unit lower)
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t k = 0; k < i; ++k) {
            const double m = f.lu(i, k);
            if (m == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) x(i, j) -= m * x(k, j);
        }
    // back substitution
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t k = ii + 1; k < n; ++k) {
            const double m = f.lu(ii, k);
            if (m == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) x(ii, j) -= m * x(k, j);
        }
        const double d = 1.0 / f.lu(ii, ii);
        for (std::size_t j = 0; j < b.cols; ++j) x(ii, j) *= d;
    }
    return x;
}

Matrix invert(const Matrix& a) {
    const LuFactors f = lu_factor(a);
    return lu_solve(f, Matrix::identity(a.rows));
}

Matrix solve_least_squares(const Matrix& g, const Matrix& y) {
    const std::size_t n = g.rows;
    if (n > g.cols) {
        throw ShapeError("solve_least_squares: expected N <= D, got " + shape_str(g));
    }
    if (y.cols != g.cols) {
        throw ShapeError("solve_least_squares: y is " + shape_str(y) + " but g has " +
                         std::to_string(g.cols) + " columns");
    }
    const Matrix gram = matmul(g, transpose(g));  // N x N
    LuFactors f{Matrix(1, 1), {}};
    try {
        f = lu_factor(gram);
    } catch (const SingularMatrixError& e) {
        // Pivot index = number of independent rows found before failure.
        throw RankDeficiencyError(
            "solve_least_squares: g has numerical rank " + std::to_string(e.pivot_index) + " < " +
                std::to_string(n),
            e.pivot_index);
    }
    return lu_solve(f, matmul(g, transpose(y)));  // N x L
}

Matrix rng_matrix(Rng& rng, std::size_t rows, std::size_t cols, Distribution dist) {
    Matrix out(rows, cols);
    if (dist == Distribution::StandardNormal) {
        for (double& v : out.data) v = rng.normal();
    } else {
        for (double& v : out.data) v = rng.uniform01();
    }
    return out;
}

std::vector<std::uint32_t> rng_permutation(Rng& rng, std::size_t n) {
    std::vector<std::uint32_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i + 1);
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(p[i], p[j]);
    }
    return p;
}

}  // namespace fedvit
