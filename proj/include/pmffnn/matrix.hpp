#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace pmffnn {

/// Dense row-major matrix of 64-bit floats. The only numeric container in
/// the library: batches are rows, features are columns.
class Matrix2D {
 public:
  Matrix2D() = default;
  Matrix2D(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix2D from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix2D identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& flat() { return data_; }
  const std::vector<double>& flat() const { return data_; }

  bool same_shape(const Matrix2D& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  /// "3x4", used by shape-error messages.
  std::string shape_str() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Standard matrix product. Throws ShapeError naming both shapes when the
/// inner dimensions disagree.
Matrix2D matmul(const Matrix2D& a, const Matrix2D& b);

Matrix2D transpose(const Matrix2D& m);

struct ColumnMoments {
  Matrix2D mean;      // 1 x cols
  Matrix2D variance;  // 1 x cols, biased (divide by rows)
};

/// Per-column mean and biased variance; DomainError on an empty matrix.
ColumnMoments column_moments(const Matrix2D& x);

/// Copies the named columns, in the given order. ShapeError on a bad index.
Matrix2D select_cols(const Matrix2D& x, const std::vector<int>& cols);

/// Horizontal concatenation; all parts must share a row count.
Matrix2D concat_cols(const std::vector<Matrix2D>& parts);

/// 1 x cols vector of column sums.
Matrix2D colsum(const Matrix2D& x);

double max_abs_diff(const Matrix2D& a, const Matrix2D& b);

}  // namespace pmffnn
