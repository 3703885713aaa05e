#pragma once

// Central differences over the real coordinates of every input entry:
//   g = [F(z+h) - F(z-h)]/(2h) + i [F(z+ih) - F(z-ih)]/(2h)
// which is dF/dx + i dF/dy, the quantity the engine must reproduce.
// Real-domain inputs are only perturbed along the real axis.

#include <functional>
#include <span>
#include <vector>

#include "cad/tape.hpp"

namespace cad::oracles {

using ScalarFunction = std::function<Complex(std::span<const Tensor>)>;

inline constexpr double kDefaultStep = 1e-6;

inline double real_value(Complex v) {
  if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real()))) {
    throw InvalidLossError("finite differences: loss value is not real");
  }
  return v.real();
}

namespace detail {

inline Tensor perturbed(const Tensor& t, std::size_t i, Complex delta) {
  std::vector<Complex> data(t.data().begin(), t.data().end());
  data[i] += delta;
  return Tensor(t.shape(), std::move(data), t.domain());
}

}  // namespace detail

inline std::vector<Tensor> fd_gradients(const ScalarFunction& loss,
                                        std::span<const Tensor> point,
                                        double step = kDefaultStep) {
  if (!(step > 0.0)) throw InvalidInputError("fd_gradients: step must be positive");
  real_value(loss(point));

  std::vector<Tensor> args(point.begin(), point.end());
  auto eval_with = [&](std::size_t which, const Tensor& t) {
    const Tensor saved = args[which];
    args[which] = t;
    const double v = real_value(loss(args));
    args[which] = saved;
    return v;
  };

  std::vector<Tensor> grads;
  for (std::size_t a = 0; a < point.size(); ++a) {
    const Tensor& base = point[a];
    std::vector<Complex> g(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double fx = (eval_with(a, detail::perturbed(base, i, step)) -
                         eval_with(a, detail::perturbed(base, i, -step))) /
                        (2.0 * step);
      double fy = 0.0;
      if (!base.is_real()) {
        fy = (eval_with(a, detail::perturbed(base, i, Complex(0, step))) -
              eval_with(a, detail::perturbed(base, i, Complex(0, -step)))) /
             (2.0 * step);
      }
      g[i] = Complex(fx, fy);
    }
    grads.emplace_back(base.shape(), std::move(g), base.domain());
  }
  return grads;
}

inline Tensor fd_gradient(const std::function<Complex(const Tensor&)>& loss,
                          const Tensor& point, double step = kDefaultStep) {
  const Tensor pts[] = {point};
  return fd_gradients(
      [&](std::span<const Tensor> args) { return loss(args[0]); }, pts, step)[0];
}

// Finite differences of a tape-built loss, evaluated forward only.
inline std::vector<Tensor> fd_gradients(const LossBuilder& build,
                                        std::span<const Tensor> point,
                                        double step = kDefaultStep) {
  return fd_gradients(
      [&](std::span<const Tensor> args) { return evaluate(build, args); }, point,
      step);
}

}  // namespace cad::oracles
