#include "csid/matrix.hpp"

#include <cmath>

#include "csid/errors.hpp"
#include "csid/kernels.hpp"

namespace csid {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw ConfigError("matrix literal has ragged rows");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) throw ConfigError("matrix addition: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (!same_shape(other)) throw ConfigError("matrix subtraction: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double scale) {
    for (double& v : data_) v *= scale;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { a += b; return a; }
Matrix operator-(Matrix a, const Matrix& b) { a -= b; return a; }
Matrix operator*(double scale, Matrix m) { m *= scale; return m; }

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ConfigError("matrix multiply: inner dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            kernels::axpy(aik, b.row(k), c.row(i), b.cols());
        }
    }
    return c;
}

Matrix multiply_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ConfigError("matrix multiply_bt: column count mismatch");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            c(i, j) = kernels::dot(a.row(i), b.row(j), a.cols());
        }
    }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    }
    return t;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ConfigError("hcat: row count mismatch");
    Matrix c(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* out = c.row(i);
        const double* ra = a.row(i);
        const double* rb = b.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] = ra[j];
        for (std::size_t j = 0; j < b.cols(); ++j) out[a.cols() + j] = rb[j];
    }
    return c;
}

double frobenius_norm(const Matrix& m) {
    return std::sqrt(kernels::sum_sq(m.data(), m.size()));
}

double max_abs(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        best = std::max(best, std::abs(m.data()[i]));
    }
    return best;
}

double trace(const Matrix& m) {
    const std::size_t n = std::min(m.rows(), m.cols());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += m(i, i);
    return s;
}

} // namespace csid
