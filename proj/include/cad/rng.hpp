#pragma once

// Seeded generator used by every command and test.
//
// Raw bits come from std::mt19937_64 (MT19937-64, whose output sequence is
// fixed by the C++ standard). Conversions are done here rather than with
// <random> distributions, whose algorithms are implementation-defined:
//   uniform()        = (x >> 11) * 2^-53               in [0, 1)
//   uniform(lo, hi)  = lo + (hi - lo) * uniform()
//   complex()        = uniform(-1, 1) + i uniform(-1, 1)  (real part drawn first)
//   below(n)         = x mod n
//   permutation(n)   = Fisher-Yates, i from n-1 down to 1, swap(i, below(i+1))

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "cad/tensor.hpp"

namespace cad {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  Complex complex() {
    const double re = uniform(-1.0, 1.0);
    const double im = uniform(-1.0, 1.0);
    return {re, im};
  }

  // A complex value with modulus in [min_abs, sqrt(2)], rejection sampled.
  Complex complex_away_from_zero(double min_abs) {
    for (;;) {
      const Complex z = complex();
      if (std::abs(z) >= min_abs) return z;
    }
  }

  Tensor complex_scalar() { return Tensor::scalar(complex()); }

  Tensor complex_vector(std::size_t n) {
    std::vector<Complex> v(n);
    for (auto& x : v) x = complex();
    return Tensor::vector(std::move(v));
  }

  Tensor complex_matrix(std::size_t rows, std::size_t cols) {
    std::vector<Complex> v(rows * cols);
    for (auto& x : v) x = complex();
    return Tensor::matrix(rows, cols, std::move(v));
  }

  Tensor real_vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return Tensor::real_vector(v);
  }

  Tensor real_matrix(std::size_t rows, std::size_t cols) {
    std::vector<Complex> v(rows * cols);
    for (auto& x : v) x = uniform(-1.0, 1.0);
    return Tensor(Shape::matrix(rows, cols), std::move(v), Domain::Real);
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i-- > 1;) std::swap(p[i], p[below(i + 1)]);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cad
