#include "csid/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "csid/errors.hpp"

namespace csid {

Matrix matrix_power(const Matrix& a, unsigned t) {
    if (a.rows() != a.cols()) throw ConfigError("matrix_power: matrix not square");
    Matrix result = Matrix::identity(a.rows());
    for (unsigned k = 0; k < t; ++k) result = multiply(result, a);
    return result;
}

Matrix symmetrize(const Matrix& s) {
    if (s.rows() != s.cols()) throw ConfigError("symmetrize: matrix not square");
    Matrix out(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.rows(); ++i) {
        for (std::size_t j = 0; j < s.cols(); ++j) {
            out(i, j) = 0.5 * (s(i, j) + s(j, i));
        }
    }
    return out;
}

std::vector<double> symmetric_eigenvalues(const Matrix& s) {
    if (s.rows() != s.cols()) throw ConfigError("symmetric_eigenvalues: matrix not square");
    const std::size_t n = s.rows();
    Matrix a = symmetrize(s);

    auto off_diag_sq = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) sum += a(i, j) * a(i, j);
        }
        return sum;
    };

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    scale = std::max(scale, std::sqrt(off_diag_sq()));
    const double stop = (scale > 0.0) ? scale * scale * 1e-30 : 0.0;

    for (int sweep = 0; sweep < 64 && off_diag_sq() > stop; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    // Gram on the smaller side keeps the eigenproblem as small as possible.
    const Matrix gram = (m.rows() <= m.cols()) ? multiply_bt(m, m)
                                               : multiply(transpose(m), m);
    const std::vector<double> eig = symmetric_eigenvalues(gram);
    const double top = eig.empty() ? 0.0 : eig.back();
    return std::sqrt(std::max(top, 0.0));
}

Matrix solve_spd(const Matrix& s, const Matrix& b) {
    if (s.rows() != s.cols()) throw ConfigError("solve_spd: matrix not square");
    if (s.rows() != b.rows()) throw ConfigError("solve_spd: right-hand side row mismatch");
    const std::size_t n = s.rows();

    Matrix chol(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = j; i < n; ++i) {
            double sum = s(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= chol(i, k) * chol(j, k);
            if (i == j) {
                if (sum <= 0.0 || !std::isfinite(sum)) {
                    throw DegeneracyError("solve_spd: matrix not positive definite");
                }
                chol(j, j) = std::sqrt(sum);
            } else {
                chol(i, j) = sum / chol(j, j);
            }
        }
    }

    // Forward then backward substitution, one right-hand-side column at a time.
    Matrix x(n, b.cols());
    std::vector<double> y(n);
    for (std::size_t col = 0; col < b.cols(); ++col) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = b(i, col);
            for (std::size_t k = 0; k < i; ++k) sum -= chol(i, k) * y[k];
            y[i] = sum / chol(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double sum = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) sum -= chol(k, ii) * x(k, col);
            x(ii, col) = sum / chol(ii, ii);
        }
    }
    return x;
}

} // namespace csid
