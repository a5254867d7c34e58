#pragma once

#include <vector>

namespace proxid {

// Small dense matrices, row-major. Everything here targets the tiny systems
// (tens of rows/columns) that discrete bridge solving and the GMM estimators
// produce; no attempt is made at large-scale performance.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
    double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

struct Svd {
    Matrix u;                // rows x k
    std::vector<double> s;   // k singular values, descending
    Matrix v;                // cols x k   (A = U diag(s) V^T)
};

Svd svd(const Matrix& m);

// Minimum-norm least-squares solution of A x = b. Singular values below
// rcond * s_max are treated as zero.
std::vector<double> lstsq_min_norm(const Matrix& a, const std::vector<double>& b,
                                   double rcond = 1e-12);

int numeric_rank(const Matrix& a, double rel_tol = 1e-9);
// smallest/largest singular value ratio; 0 for a zero matrix
double singular_ratio(const Matrix& a);

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x);
Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// Solves the square system A x = b via lstsq (convenience for estimators).
std::vector<double> solve_linear(const Matrix& a, const std::vector<double>& b);

}  // namespace proxid
