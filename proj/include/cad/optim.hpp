#pragma once

// Gradient-based updates for complex parameters.
//
// The engine already returns the full descent direction 2 dF/dconj(z), so a
// gradient-descent step is z - lr * grad. Do not multiply by 2 again.

#include <span>
#include <vector>

#include "cad/tape.hpp"

namespace cad {

struct GdConfig {
  double learning_rate = 0.01;
  std::size_t steps = 1;

  void validate() const {
    if (!(learning_rate > 0.0)) {
      throw InvalidInputError("learning rate must be positive");
    }
    if (steps == 0) throw InvalidInputError("steps must be positive");
  }
};

inline Tensor gd_step(const Tensor& params, const Tensor& grad, double lr) {
  if (!(lr > 0.0)) throw InvalidInputError("gd_step: learning rate must be positive");
  require_same_shape(params, grad, "gd_step");
  const Tensor step = params.is_real() ? grad.real_projection() : grad;
  return params - Complex(lr) * step;
}

inline std::vector<Tensor> gd_step(std::span<const Tensor> params,
                                   std::span<const Tensor> grads, double lr) {
  if (params.size() != grads.size()) {
    throw ShapeError("gd_step: parameter and gradient counts differ");
  }
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    out.push_back(gd_step(params[i], grads[i], lr));
  return out;
}

// Sum of |g_i|^2 over every entry of every tensor. Equals
// (dF/dx)^2 + (dF/dy)^2 summed over coordinates.
inline double squared_norm(std::span<const Tensor> grads) {
  double s = 0.0;
  for (const auto& g : grads)
    for (const auto& v : g.data()) s += std::norm(v);
  return s;
}

struct LossDecrease {
  double measured;   // F(z - lr g) - F(z)
  double predicted;  // -lr ||g||^2, exact to first order in lr
};

inline LossDecrease loss_decrease_check(const LossBuilder& loss,
                                        std::span<const Tensor> point,
                                        double lr) {
  const ValueAndGradients vg = value_and_gradients(loss, point);
  const double norm2 = squared_norm(vg.gradients);
  if (norm2 == 0.0) return {0.0, 0.0};
  const std::vector<Tensor> moved = gd_step(point, vg.gradients, lr);
  const double after = evaluate(loss, moved).real();
  return {after - vg.value, -lr * norm2};
}

// Normalized curvature along the descent direction, phi(s) = F(z - s g):
//   C = max |phi''(s)| / (2 ||g||^2) over s in [0, span],
// sampled at `samples` evenly spaced points with central second differences
// of step h. By Taylor's theorem F(z - lr g) - F(z) = -lr ||g||^2 (1 + e)
// with |e| <= lr C for any lr <= span.
inline double descent_curvature(const LossBuilder& loss,
                                std::span<const Tensor> point,
                                std::span<const Tensor> grads, double span = 0.0,
                                std::size_t samples = 5, double h = 1e-3) {
  const double norm2 = squared_norm(grads);
  if (norm2 == 0.0) return 0.0;
  auto phi = [&](double t) {
    std::vector<Tensor> out;
    for (std::size_t i = 0; i < point.size(); ++i) {
      const Tensor step = point[i].is_real() ? grads[i].real_projection() : grads[i];
      out.push_back(point[i] - Complex(t) * step);
    }
    return evaluate(loss, out).real();
  };
  const std::size_t n = span > 0.0 ? std::max<std::size_t>(samples, 2) : 1;
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = n == 1 ? 0.0 : span * static_cast<double>(j) / static_cast<double>(n - 1);
    const double second = (phi(s + h) - 2.0 * phi(s) + phi(s - h)) / (h * h);
    worst = std::max(worst, std::abs(second));
  }
  return worst / (2.0 * norm2);
}

// Skew-Hermitian generator A = G W^H - W G^H with G = dF/dconj(W), i.e. half
// the engine cotangent at W.
inline Tensor cayley_generator(const Tensor& w, const Tensor& grad_w) {
  require_same_shape(w, grad_w, "cayley_generator");
  const Tensor g = Complex(0.5) * grad_w;
  return matmul(g, dagger(w)) - matmul(w, dagger(g));
}

// W <- (I + lr/2 A)^{-1} (I - lr/2 A) W. Stays on the unitary group.
inline Tensor cayley_update(const Tensor& w, const Tensor& grad_w, double lr) {
  if (!(lr > 0.0)) {
    throw InvalidInputError("cayley_update: learning rate must be positive");
  }
  if (unitarity_defect(w) > 1e-8) {
    throw DomainError("cayley_update: W is not unitary");
  }
  const std::size_t n = w.rows();
  const Tensor a = cayley_generator(w, grad_w);
  const Tensor half = Complex(lr / 2.0) * a;
  const Tensor eye = Tensor::identity(n);
  try {
    return solve_linear(eye + half, matmul(eye - half, w));
  } catch (const SingularMatrixError&) {
    // I + lr/2 A has eigenvalues 1 + i t for skew-Hermitian A.
    throw SingularMatrixError(
        "cayley_update: I + lr/2 A is singular; the generator is not "
        "skew-Hermitian");
  }
}

}  // namespace cad
