#pragma once

#include <numbers>

#include <Eigen/Dense>

#include "cad/tensor.hpp"

namespace cad {

namespace detail {

// exp(-2*pi*i*r/n) with the quarter turns returned exactly.
inline Complex twiddle(std::size_t r, std::size_t n) {
  r %= n;
  if ((4 * r) % n == 0) {
    constexpr std::array<Complex, 4> quarter{Complex(1, 0), Complex(0, -1),
                                             Complex(-1, 0), Complex(0, 1)};
    return quarter[(4 * r) / n];
  }
  return std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(r) /
                             static_cast<double>(n));
}

}  // namespace detail

// Unnormalized forward DFT matrix, entry (k, m) = exp(-2*pi*i*k*m/n).
inline Tensor dft_matrix(std::size_t n) {
  if (n == 0) throw InvalidInputError("dft_matrix: n must be positive");
  std::vector<Complex> data(n * n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m < n; ++m) data[k * n + m] = detail::twiddle(k * m, n);
  return Tensor::matrix(n, n, std::move(data));
}

// Inverse DFT matrix, conj(dft_matrix(n)) / n.
inline Tensor idft_matrix(std::size_t n) {
  return Complex(1.0 / static_cast<double>(n)) * conj(dft_matrix(n));
}

// Solves a * x = b with partial pivoting.
inline Tensor solve_linear(const Tensor& a, const Tensor& b) {
  if (a.shape().rank() != 2 || a.rows() != a.cols()) {
    throw ShapeError("solve_linear: coefficient matrix " + a.shape().str() +
                     " is not square");
  }
  if (b.shape().rank() == 0 || b.rows() != a.rows()) {
    throw ShapeError("solve_linear: right-hand side " + b.shape().str() +
                     " does not match " + a.shape().str());
  }
  const auto n = static_cast<Eigen::Index>(a.rows());
  const auto m = static_cast<Eigen::Index>(b.cols());
  using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>;
  const Mat lhs = Eigen::Map<const Mat>(a.data().data(), n, n);
  const Mat rhs = Eigen::Map<const Mat>(b.data().data(), n, m);

  const Eigen::PartialPivLU<Mat> lu(lhs);
  const double threshold = 1e-14 * frobenius_norm(a);
  const auto& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(packed(i, i)) >= threshold) || packed(i, i) == Complex(0)) {
      throw SingularMatrixError("solve_linear: matrix is numerically singular");
    }
  }
  const Mat x = lu.solve(rhs);
  std::vector<Complex> out(x.data(), x.data() + x.size());
  return Tensor(b.shape(), std::move(out));
}

// ||W^H W - I||_F.
inline double unitarity_defect(const Tensor& w) {
  if (w.shape().rank() != 2 || w.rows() != w.cols()) {
    throw ShapeError("unitarity_defect: " + w.shape().str() + " is not square");
  }
  return frobenius_norm(matmul(dagger(w), w) - Tensor::identity(w.rows()));
}

}  // namespace cad
