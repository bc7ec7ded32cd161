#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace qnw {

/// Small dense real matrix, row-major. Products accumulate in a fixed order so
/// results are bit-identical for fixed operands.
class Matrix {
  public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    static Matrix identity(size_t n);

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    double& at(size_t r, size_t c) { return a_[r * cols_ + c]; }
    double at(size_t r, size_t c) const { return a_[r * cols_ + c]; }
    const std::vector<double>& data() const { return a_; }

    std::vector<double> row(size_t r) const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

  private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<double> a_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add_scaled(const Matrix& a, double alpha, const Matrix& b);  // a + alpha*b
std::vector<double> apply(const Matrix& m, const std::vector<double>& v);

double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
/// ||M^T M - I||_max
double orthogonality_defect(const Matrix& m);

void write_csv(std::ostream& out, const Matrix& m);

}  // namespace qnw
