#include "qnw/dense.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qnw {

Matrix Matrix::identity(size_t n) {
    Matrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::row(size_t r) const {
    return std::vector<double>(a_.begin() + r * cols_, a_.begin() + (r + 1) * cols_);
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("dense: dimension mismatch in multiply");
    Matrix c(a.rows(), b.cols());
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (size_t k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, j);
            c.at(i, j) = acc;
        }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (size_t i = 0; i < m.rows(); ++i)
        for (size_t j = 0; j < m.cols(); ++j) t.at(j, i) = m.at(i, j);
    return t;
}

Matrix add_scaled(const Matrix& a, double alpha, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("dense: dimension mismatch in add_scaled");
    Matrix c(a.rows(), a.cols());
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j) c.at(i, j) = a.at(i, j) + alpha * b.at(i, j);
    return c;
}

std::vector<double> apply(const Matrix& m, const std::vector<double>& v) {
    if (m.cols() != v.size()) throw std::invalid_argument("dense: dimension mismatch in apply");
    std::vector<double> out(m.rows(), 0.0);
    for (size_t i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (size_t k = 0; k < m.cols(); ++k) acc += m.at(i, k) * v[k];
        out[i] = acc;
    }
    return out;
}

double max_abs(const Matrix& m) {
    double r = 0.0;
    for (double x : m.data()) r = std::max(r, std::fabs(x));
    return r;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("dense: dimension mismatch in max_abs_diff");
    double r = 0.0;
    for (size_t i = 0; i < a.data().size(); ++i) r = std::max(r, std::fabs(a.data()[i] - b.data()[i]));
    return r;
}

double orthogonality_defect(const Matrix& m) {
    return max_abs_diff(multiply(transpose(m), m), Matrix::identity(m.cols()));
}

void write_csv(std::ostream& out, const Matrix& m) {
    out.precision(17);
    for (size_t i = 0; i < m.rows(); ++i) {
        for (size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m.at(i, j);
        }
        out << '\n';
    }
}

}  // namespace qnw
