#include "pmffnn/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "pmffnn/errors.hpp"

namespace pmffnn {

Matrix2D::Matrix2D(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix2D Matrix2D::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix2D m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != m.cols_) {
      throw ShapeError("from_rows: ragged row " + std::to_string(r));
    }
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Matrix2D Matrix2D::identity(std::size_t n) {
  Matrix2D m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix2D::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Matrix2D::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix2D matmul(const Matrix2D& a, const Matrix2D& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + a.shape_str() + " * " +
                     b.shape_str());
  }
  Matrix2D out(a.rows(), b.cols());
  // i-k-j order keeps the inner loop contiguous in both b and out.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data() + k * b.cols();
      double* orow = out.data() + i * out.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix2D transpose(const Matrix2D& m) {
  Matrix2D out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  }
  return out;
}

ColumnMoments column_moments(const Matrix2D& x) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw DomainError("column_moments: empty matrix " + x.shape_str());
  }
  ColumnMoments m{Matrix2D(1, x.cols()), Matrix2D(1, x.cols())};
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) sum += x(r, c);
    m.mean(0, c) = sum * inv_n;
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double d = x(r, c) - m.mean(0, c);
      acc += d * d;
    }
    m.variance(0, c) = acc * inv_n;
  }
  return m;
}

Matrix2D select_cols(const Matrix2D& x, const std::vector<int>& cols) {
  Matrix2D out(x.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const int c = cols[j];
    if (c < 0 || static_cast<std::size_t>(c) >= x.cols()) {
      throw ShapeError("select_cols: column " + std::to_string(c) + " out of range for " +
                       x.shape_str());
    }
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, j) = x(r, static_cast<std::size_t>(c));
  }
  return out;
}

Matrix2D concat_cols(const std::vector<Matrix2D>& parts) {
  if (parts.empty()) return {};
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != parts.front().rows()) {
      throw ShapeError("concat_cols: row counts disagree, " + parts.front().shape_str() +
                       " vs " + p.shape_str());
    }
    total += p.cols();
  }
  Matrix2D out(parts.front().rows(), total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < p.rows(); ++r) {
      for (std::size_t c = 0; c < p.cols(); ++c) out(r, offset + c) = p(r, c);
    }
    offset += p.cols();
  }
  return out;
}

Matrix2D colsum(const Matrix2D& x) {
  Matrix2D out(1, x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(0, c) += x(r, c);
  }
  return out;
}

double max_abs_diff(const Matrix2D& a, const Matrix2D& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("max_abs_diff: shapes disagree, " + a.shape_str() + " vs " + b.shape_str());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.flat()[i] - b.flat()[i]));
  }
  return worst;
}

}  // namespace pmffnn
