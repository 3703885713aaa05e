#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cad/error.hpp"

namespace cad {

using Complex = std::complex<double>;

// Real-domain tensors hold entries with an imaginary part of exactly zero.
enum class Domain { Real, Complex };

// Extents of a rank 0, 1 or 2 tensor.
class Shape {
 public:
  Shape() = default;

  static Shape scalar() { return {}; }
  static Shape vector(std::size_t n) { return Shape(1, {n, 1}); }
  static Shape matrix(std::size_t rows, std::size_t cols) {
    return Shape(2, {rows, cols});
  }

  std::size_t rank() const { return rank_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  // Vectors count as a single column.
  std::size_t rows() const { return rank_ == 0 ? 1 : dims_[0]; }
  std::size_t cols() const { return rank_ == 2 ? dims_[1] : 1; }
  std::size_t size() const { return rows() * cols(); }

  bool operator==(const Shape&) const = default;

  std::string str() const {
    switch (rank_) {
      case 0:
        return "()";
      case 1:
        return "(" + std::to_string(dims_[0]) + ")";
      default:
        return "(" + std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) +
               ")";
    }
  }

 private:
  Shape(std::size_t rank, std::array<std::size_t, 2> dims)
      : rank_(rank), dims_(dims) {}

  std::size_t rank_ = 0;
  std::array<std::size_t, 2> dims_{1, 1};
};

// Dense row-major array of complex doubles. Immutable once constructed.
class Tensor {
 public:
  Tensor() : data_(1) {}

  Tensor(Shape shape, std::vector<Complex> data, Domain domain = Domain::Complex)
      : shape_(shape), data_(std::move(data)), domain_(domain) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    }
    if (domain_ == Domain::Real) {
      for (const auto& v : data_) {
        if (v.imag() != 0.0) {
          throw DomainError("real-domain tensor with a nonzero imaginary part");
        }
      }
    }
  }

  static Tensor scalar(Complex v) { return Tensor(Shape::scalar(), {v}); }
  static Tensor real_scalar(double v) {
    return Tensor(Shape::scalar(), {Complex(v, 0.0)}, Domain::Real);
  }
  static Tensor vector(std::vector<Complex> v) {
    const auto n = v.size();
    return Tensor(Shape::vector(n), std::move(v));
  }
  static Tensor real_vector(std::span<const double> v) {
    std::vector<Complex> data(v.begin(), v.end());
    return Tensor(Shape::vector(v.size()), std::move(data), Domain::Real);
  }
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<Complex> data) {
    return Tensor(Shape::matrix(rows, cols), std::move(data));
  }
  static Tensor zeros(Shape shape, Domain domain = Domain::Complex) {
    return Tensor(shape, std::vector<Complex>(shape.size()), domain);
  }
  static Tensor identity(std::size_t n) {
    std::vector<Complex> data(n * n);
    for (std::size_t i = 0; i < n; ++i) data[i * n + i] = 1.0;
    return Tensor(Shape::matrix(n, n), std::move(data), Domain::Real);
  }

  const Shape& shape() const { return shape_; }
  Domain domain() const { return domain_; }
  bool is_real() const { return domain_ == Domain::Real; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.rows(); }
  std::size_t cols() const { return shape_.cols(); }

  std::span<const Complex> data() const { return data_; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }
  const Complex& operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_.cols() + c];
  }

  // Value of a single-element tensor.
  Complex item() const {
    if (data_.size() != 1) {
      throw ShapeError("item() on tensor of shape " + shape_.str());
    }
    return data_[0];
  }

  // Same shape and data, reinterpreted as Real (imaginary parts dropped).
  Tensor real_projection() const {
    std::vector<Complex> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i].real();
    return Tensor(shape_, std::move(out), Domain::Real);
  }

  Tensor reshaped(Shape shape) const {
    return Tensor(shape, data_, domain_);
  }

 private:
  Shape shape_;
  std::vector<Complex> data_;
  Domain domain_ = Domain::Complex;
};

// ---------------------------------------------------------------------------
// Elementwise helpers

template <class F>
Tensor map(const Tensor& t, F&& f, Domain domain = Domain::Complex) {
  std::vector<Complex> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = f(t[i]);
  return Tensor(t.shape(), std::move(out), domain);
}

inline void require_same_shape(const Tensor& a, const Tensor& b,
                               const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shapes " + a.shape().str() +
                     " and " + b.shape().str() + " differ");
  }
}

template <class F>
Tensor zip(const Tensor& a, const Tensor& b, F&& f,
           Domain domain = Domain::Complex) {
  require_same_shape(a, b, "elementwise");
  std::vector<Complex> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return Tensor(a.shape(), std::move(out), domain);
}

inline Domain joint_domain(const Tensor& a, const Tensor& b) {
  return a.is_real() && b.is_real() ? Domain::Real : Domain::Complex;
}

inline Tensor conj(const Tensor& t) {
  return map(t, [](Complex v) { return std::conj(v); }, t.domain());
}

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  return zip(a, b, std::plus<>{}, joint_domain(a, b));
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
  return zip(a, b, std::minus<>{}, joint_domain(a, b));
}

inline Tensor operator-(const Tensor& a) {
  return map(a, std::negate<>{}, a.domain());
}

inline Tensor operator*(Complex c, const Tensor& t) {
  const Domain d = (c.imag() == 0.0 && t.is_real()) ? Domain::Real
                                                     : Domain::Complex;
  return map(t, [c](Complex v) { return c * v; }, d);
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
  return zip(a, b, std::multiplies<>{}, joint_domain(a, b));
}

// Division that stays componentwise exact when the divisor is real.
inline Complex divide(Complex num, Complex den) {
  if (den.imag() == 0.0) return {num.real() / den.real(), num.imag() / den.real()};
  return num / den;
}

// ---------------------------------------------------------------------------
// Matrix helpers. Rank-1 operands act as column vectors.

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().rank() != 2 || b.shape().rank() == 0 ||
      a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + a.shape().str() + " by " +
                     b.shape().str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<Complex> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      Complex acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a(i, p) * b(p, j);
      out[i * m + j] = acc;
    }
  }
  const Shape shape =
      b.shape().rank() == 1 ? Shape::vector(n) : Shape::matrix(n, m);
  return Tensor(shape, std::move(out), joint_domain(a, b));
}

inline Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<Complex> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a(i, j);
  return Tensor(Shape::matrix(c, r), std::move(out), a.domain());
}

// Conjugate transpose.
inline Tensor dagger(const Tensor& a) { return conj(transpose(a)); }

inline double frobenius_norm(const Tensor& t) {
  double s = 0.0;
  for (const auto& v : t.data()) s += std::norm(v);
  return std::sqrt(s);
}

inline double max_abs(const Tensor& t) {
  double m = 0.0;
  for (const auto& v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// max|a - ref| / max(1, max|ref|): the error metric used by every oracle
// comparison.
inline double rel_err(const Tensor& a, const Tensor& ref) {
  return max_abs_diff(a, ref) / std::max(1.0, max_abs(ref));
}

inline bool all_finite(const Tensor& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](Complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

}  // namespace cad
