#include "proxid/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace proxid {

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; i++)
        for (int j = 0; j < a.cols; j++) t.at(j, i) = a.at(i, j);
    return t;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("mat_mul shape mismatch");
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; i++)
        for (int k = 0; k < a.cols; k++) {
            double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; j++) c.at(i, j) += aik * b.at(k, j);
        }
    return c;
}

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != a.cols) throw std::invalid_argument("mat_vec shape mismatch");
    std::vector<double> y(a.rows, 0.0);
    for (int i = 0; i < a.rows; i++)
        for (int j = 0; j < a.cols; j++) y[i] += a.at(i, j) * x[j];
    return y;
}

// One-sided Jacobi SVD on the columns of m (requires rows >= cols; the
// public svd() transposes when needed). Accurate enough for the tiny,
// well-scaled probability systems used here.
static Svd jacobi_svd_tall(const Matrix& m) {
    int rows = m.rows, cols = m.cols;
    Matrix u = m;
    Matrix v(cols, cols);
    for (int i = 0; i < cols; i++) v.at(i, i) = 1.0;

    const int max_sweeps = 60;
    const double eps = 1e-15;
    for (int sweep = 0; sweep < max_sweeps; sweep++) {
        double off = 0.0;
        for (int p = 0; p < cols - 1; p++) {
            for (int q = p + 1; q < cols; q++) {
                double app = 0, aqq = 0, apq = 0;
                for (int i = 0; i < rows; i++) {
                    app += u.at(i, p) * u.at(i, p);
                    aqq += u.at(i, q) * u.at(i, q);
                    apq += u.at(i, p) * u.at(i, q);
                }
                off = std::max(off, std::fabs(apq) / std::max(std::sqrt(app * aqq), 1e-300));
                if (std::fabs(apq) < eps * std::sqrt(app * aqq)) continue;
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (int i = 0; i < rows; i++) {
                    double up = u.at(i, p), uq = u.at(i, q);
                    u.at(i, p) = c * up - s * uq;
                    u.at(i, q) = s * up + c * uq;
                }
                for (int i = 0; i < cols; i++) {
                    double vp = v.at(i, p), vq = v.at(i, q);
                    v.at(i, p) = c * vp - s * vq;
                    v.at(i, q) = s * vp + c * vq;
                }
            }
        }
        if (off < 1e-14) break;
    }

    std::vector<double> s(cols, 0.0);
    for (int j = 0; j < cols; j++) {
        double norm = 0;
        for (int i = 0; i < rows; i++) norm += u.at(i, j) * u.at(i, j);
        s[j] = std::sqrt(norm);
        if (s[j] > 0) {
            for (int i = 0; i < rows; i++) u.at(i, j) /= s[j];
        }
    }
    // sort descending
    std::vector<int> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return s[i] > s[j]; });
    Svd out;
    out.u = Matrix(rows, cols);
    out.v = Matrix(cols, cols);
    out.s.resize(cols);
    for (int j = 0; j < cols; j++) {
        out.s[j] = s[order[j]];
        for (int i = 0; i < rows; i++) out.u.at(i, j) = u.at(i, order[j]);
        for (int i = 0; i < cols; i++) out.v.at(i, j) = v.at(i, order[j]);
    }
    return out;
}

Svd svd(const Matrix& m) {
    if (m.rows == 0 || m.cols == 0) return Svd{Matrix(m.rows, 0), {}, Matrix(m.cols, 0)};
    if (m.rows >= m.cols) return jacobi_svd_tall(m);
    Svd t = jacobi_svd_tall(transpose(m));
    return Svd{t.v, t.s, t.u};
}

std::vector<double> lstsq_min_norm(const Matrix& a, const std::vector<double>& b, double rcond) {
    if (static_cast<int>(b.size()) != a.rows) throw std::invalid_argument("lstsq shape mismatch");
    Svd d = svd(a);
    double smax = d.s.empty() ? 0.0 : d.s[0];
    std::vector<double> x(a.cols, 0.0);
    for (size_t k = 0; k < d.s.size(); k++) {
        if (smax == 0.0 || d.s[k] <= rcond * smax) continue;
        double coef = 0;
        for (int i = 0; i < a.rows; i++) coef += d.u.at(i, static_cast<int>(k)) * b[i];
        coef /= d.s[k];
        for (int j = 0; j < a.cols; j++) x[j] += coef * d.v.at(j, static_cast<int>(k));
    }
    return x;
}

int numeric_rank(const Matrix& a, double rel_tol) {
    Svd d = svd(a);
    if (d.s.empty() || d.s[0] == 0.0) return 0;
    int r = 0;
    for (double s : d.s)
        if (s > rel_tol * d.s[0]) r++;
    return r;
}

double singular_ratio(const Matrix& a) {
    Svd d = svd(a);
    if (d.s.empty() || d.s[0] == 0.0) return 0.0;
    return d.s.back() / d.s[0];
}

std::vector<double> solve_linear(const Matrix& a, const std::vector<double>& b) {
    return lstsq_min_norm(a, b, 1e-13);
}

}  // namespace proxid
