#pragma once

// Elementary functions of the engine. Each op supplies
//   - a forward rule, which also caches the operands its adjoint reads
//     (conjugated where the adjoint uses the conjugate),
//   - the simplified complex adjoint
//       nu_bar -> sum_i ( nu_i dg_i/dconj(z_j) + nu_bar_i dconj(g_i)/dconj(z_j) ),
//     written in closed form, and
//   - the dense Wirtinger Jacobian (dg/dz, dg/dconj(z)), used only by the
//     conjugate-pair oracle and by tests.
// Binary elementwise ops require equal shapes. Matrix-shaped ops treat a
// rank-1 operand as a column.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cad/linalg.hpp"

namespace cad {

enum class OpKind : std::uint8_t {
  Variable,
  Constant,
  Sin,
  Exp,
  Log,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Conj,
  Re,
  Im,
  Abs,
  Inner,
  Outer,
  Matmul,
  Dft,
  Idft,
  Sum,
  ScaleConst,
  ScalarMul,
  Relu,
  Phase,
  Diag,
  Gather,
};

// Which special case of the adjoint an op falls under.
enum class WirtingerClass {
  Holomorphic,      // adjoint = nu_bar * conj(dg/dz)
  AntiHolomorphic,  // adjoint = nu * dg/dconj(z)
  RealOutput,       // adjoint = 2 Re(nu) * dg/dconj(z)
  RealInput,        // adjoint = 2 Re(nu * dg/dconj(z))
  General,
};

struct OpAttrs {
  Complex constant{};               // ScaleConst factor
  std::vector<std::size_t> index;   // Gather row indices
  bool lenient = false;             // Abs/Phase: zero derivative at the origin
};

struct ForwardResult {
  Tensor value;
  std::vector<Tensor> saved;
};

struct AdjointContext {
  std::span<const Shape> input_shapes;
  const Tensor& value;
  std::span<const Tensor> saved;
  const OpAttrs& attrs;
};

// Dense derivative of every output entry with respect to every entry of one
// input: holo(o, i) = dg_o/dz_i, anti(o, i) = dg_o/dconj(z_i).
struct WirtingerJacobian {
  WirtingerJacobian(std::size_t out, std::size_t in)
      : out_size(out), in_size(in), holo_(out * in), anti_(out * in) {}

  Complex& holo(std::size_t o, std::size_t i) { return holo_[o * in_size + i]; }
  Complex& anti(std::size_t o, std::size_t i) { return anti_[o * in_size + i]; }
  Complex holo(std::size_t o, std::size_t i) const {
    return holo_[o * in_size + i];
  }
  Complex anti(std::size_t o, std::size_t i) const {
    return anti_[o * in_size + i];
  }

  std::size_t out_size;
  std::size_t in_size;

 private:
  std::vector<Complex> holo_;
  std::vector<Complex> anti_;
};

using Inputs = std::span<const Tensor* const>;
using ShapeFn = Shape (*)(std::span<const Shape>, const OpAttrs&);
using ForwardFn = ForwardResult (*)(Inputs, const OpAttrs&);
using AdjointFn = std::vector<Tensor> (*)(const AdjointContext&, const Tensor&);
using JacobianFn = std::vector<WirtingerJacobian> (*)(Inputs, const OpAttrs&);

struct OpDescriptor {
  std::string_view name;
  std::size_t arity;
  WirtingerClass wirtinger_class;
  // Real inputs give a real output (unless the value leaves the real line,
  // as log of a negative number does).
  bool real_closed;
  ShapeFn shape;
  ForwardFn forward;
  AdjointFn adjoint;
  JacobianFn jacobian;
};

namespace detail {

inline Shape same_shape(std::span<const Shape> in, const OpAttrs&) {
  return in[0];
}

inline Shape elementwise2(std::span<const Shape> in, const OpAttrs&) {
  if (in[0] != in[1]) {
    throw ShapeError("elementwise op: shapes " + in[0].str() + " and " +
                     in[1].str() + " differ");
  }
  return in[0];
}

inline Shape to_scalar(std::span<const Shape>, const OpAttrs&) {
  return Shape::scalar();
}

inline WirtingerJacobian diagonal_jacobian(const Tensor& holo,
                                           const Tensor& anti) {
  WirtingerJacobian j(holo.size(), holo.size());
  for (std::size_t i = 0; i < holo.size(); ++i) {
    j.holo(i, i) = holo[i];
    j.anti(i, i) = anti[i];
  }
  return j;
}

inline Tensor constant_like(const Tensor& t, Complex c) {
  return map(t, [c](Complex) { return c; });
}

inline Tensor zeros_like(const Tensor& t) { return Tensor::zeros(t.shape()); }

inline void require_nonzero(const Tensor& t, const char* what) {
  for (const auto& v : t.data()) {
    if (v == Complex(0.0)) throw DomainError(what);
  }
}

// -- sin ---------------------------------------------------------------------

inline ForwardResult sin_forward(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {map(z, [](Complex v) { return std::sin(v); }), {conj(z)}};
}
inline std::vector<Tensor> sin_adjoint(const AdjointContext& c,
                                       const Tensor& nu_bar) {
  return {zip(nu_bar, c.saved[0],
              [](Complex n, Complex zc) { return n * std::cos(zc); })};
}
inline std::vector<WirtingerJacobian> sin_jacobian(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {diagonal_jacobian(map(z, [](Complex v) { return std::cos(v); }),
                            zeros_like(z))};
}

// -- exp ---------------------------------------------------------------------

inline ForwardResult exp_forward(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {map(z, [](Complex v) { return std::exp(v); }), {conj(z)}};
}
inline std::vector<Tensor> exp_adjoint(const AdjointContext& c,
                                       const Tensor& nu_bar) {
  return {zip(nu_bar, c.saved[0],
              [](Complex n, Complex zc) { return n * std::exp(zc); })};
}
inline std::vector<WirtingerJacobian> exp_jacobian(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {diagonal_jacobian(map(z, [](Complex v) { return std::exp(v); }),
                            zeros_like(z))};
}

// -- log (principal branch) --------------------------------------------------

inline ForwardResult log_forward(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  require_nonzero(z, "log: argument is zero");
  return {map(z, [](Complex v) { return std::log(v); }), {conj(z)}};
}
inline std::vector<Tensor> log_adjoint(const AdjointContext& c,
                                       const Tensor& nu_bar) {
  return {zip(nu_bar, c.saved[0],
              [](Complex n, Complex zc) { return divide(n, zc); })};
}
inline std::vector<WirtingerJacobian> log_jacobian(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {diagonal_jacobian(map(z, [](Complex v) { return divide(1.0, v); }),
                            zeros_like(z))};
}

// -- add / sub / neg ---------------------------------------------------------

inline ForwardResult add_forward(Inputs in, const OpAttrs&) {
  return {*in[0] + *in[1], {}};
}
inline std::vector<Tensor> add_adjoint(const AdjointContext&,
                                       const Tensor& nu_bar) {
  return {nu_bar, nu_bar};
}
inline std::vector<WirtingerJacobian> add_jacobian(Inputs in, const OpAttrs&) {
  const Tensor ones = constant_like(*in[0], 1.0);
  return {diagonal_jacobian(ones, zeros_like(ones)),
          diagonal_jacobian(ones, zeros_like(ones))};
}

inline ForwardResult sub_forward(Inputs in, const OpAttrs&) {
  return {*in[0] - *in[1], {}};
}
inline std::vector<Tensor> sub_adjoint(const AdjointContext&,
                                       const Tensor& nu_bar) {
  return {nu_bar, -nu_bar};
}
inline std::vector<WirtingerJacobian> sub_jacobian(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {diagonal_jacobian(constant_like(z, 1.0), zeros_like(z)),
          diagonal_jacobian(constant_like(z, -1.0), zeros_like(z))};
}

inline ForwardResult neg_forward(Inputs in, const OpAttrs&) {
  return {-*in[0], {}};
}
inline std::vector<Tensor> neg_adjoint(const AdjointContext&,
                                       const Tensor& nu_bar) {
  return {-nu_bar};
}
inline std::vector<WirtingerJacobian> neg_jacobian(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {diagonal_jacobian(constant_like(z, -1.0), zeros_like(z))};
}

// -- mul / div ---------------------------------------------------------------

inline ForwardResult mul_forward(Inputs in, const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  return {hadamard(z, w), {conj(z), conj(w)}};
}
inline std::vector<Tensor> mul_adjoint(const AdjointContext& c,
                                       const Tensor& nu_bar) {
  const Tensor &z_bar = c.saved[0], &w_bar = c.saved[1];
  return {hadamard(nu_bar, w_bar), hadamard(nu_bar, z_bar)};
}
inline std::vector<WirtingerJacobian> mul_jacobian(Inputs in, const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  return {diagonal_jacobian(w, zeros_like(w)),
          diagonal_jacobian(z, zeros_like(z))};
}

inline ForwardResult div_forward(Inputs in, const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  require_nonzero(w, "div: division by zero");
  return {zip(z, w, [](Complex a, Complex b) { return divide(a, b); }),
          {conj(z), conj(w)}};
}
inline std::vector<Tensor> div_adjoint(const AdjointContext& c,
                                       const Tensor& nu_bar) {
  const Tensor &z_bar = c.saved[0], &w_bar = c.saved[1];
  std::vector<Complex> dz(nu_bar.size()), dw(nu_bar.size());
  for (std::size_t i = 0; i < nu_bar.size(); ++i) {
    dz[i] = divide(nu_bar[i], w_bar[i]);
    dw[i] = -divide(nu_bar[i] * z_bar[i], w_bar[i] * w_bar[i]);
  }
  return {Tensor(nu_bar.shape(), std::move(dz)),
          Tensor(nu_bar.shape(), std::move(dw))};
}
inline std::vector<WirtingerJacobian> div_jacobian(Inputs in, const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  const Tensor dz = map(w, [](Complex b) { return divide(1.0, b); });
  const Tensor dw =
      zip(z, w, [](Complex a, Complex b) { return -divide(a, b * b); });
  return {diagonal_jacobian(dz, zeros_like(z)),
          diagonal_jacobian(dw, zeros_like(w))};
}

// -- conj ----------------------------------------------------------------------

inline ForwardResult conj_forward(Inputs in, const OpAttrs&) {
  return {conj(*in[0]), {}};
}
inline std::vector<Tensor> conj_adjoint(const AdjointContext&,
                                        const Tensor& nu_bar) {
  return {conj(nu_bar)};
}
inline std::vector<WirtingerJacobian> conj_jacobian(Inputs in,
                                                    const OpAttrs&) {
  const Tensor& z = *in[0];
  return {diagonal_jacobian(zeros_like(z), constant_like(z, 1.0))};
}

// -- re / im / abs -------------------------------------------------------------

inline ForwardResult re_forward(Inputs in, const OpAttrs&) {
  return {map(*in[0], [](Complex v) { return Complex(v.real()); }), {}};
}
inline std::vector<Tensor> re_adjoint(const AdjointContext&,
                                      const Tensor& nu_bar) {
  return {map(nu_bar, [](Complex n) { return Complex(n.real()); })};
}
inline std::vector<WirtingerJacobian> re_jacobian(Inputs in, const OpAttrs&) {
  const Tensor half = constant_like(*in[0], 0.5);
  return {diagonal_jacobian(half, half)};
}

inline ForwardResult im_forward(Inputs in, const OpAttrs&) {
  return {map(*in[0], [](Complex v) { return Complex(v.imag()); }), {}};
}
inline std::vector<Tensor> im_adjoint(const AdjointContext&,
                                      const Tensor& nu_bar) {
  return {map(nu_bar, [](Complex n) { return Complex(0.0, n.real()); })};
}
inline std::vector<WirtingerJacobian> im_jacobian(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {diagonal_jacobian(constant_like(z, Complex(0, -0.5)),
                            constant_like(z, Complex(0, 0.5)))};
}

inline ForwardResult abs_forward(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  Tensor value = map(z, [](Complex v) { return Complex(std::abs(v)); });
  return {value, {z, value}};
}
inline std::vector<Tensor> abs_adjoint(const AdjointContext& c,
                                       const Tensor& nu_bar) {
  const Tensor &z = c.saved[0], &mag = c.saved[1];
  std::vector<Complex> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mag[i].real() == 0.0) {
      if (!c.attrs.lenient) {
        throw DomainError("abs: adjoint is undefined at z = 0");
      }
      continue;
    }
    const Complex nu = std::conj(nu_bar[i]);
    out[i] = nu.real() * z[i] / mag[i].real();
  }
  return {Tensor(z.shape(), std::move(out))};
}
inline std::vector<WirtingerJacobian> abs_jacobian(Inputs in,
                                                   const OpAttrs& attrs) {
  const Tensor& z = *in[0];
  WirtingerJacobian j(z.size(), z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = std::abs(z[i]);
    if (r == 0.0) {
      if (!attrs.lenient) throw DomainError("abs: derivative undefined at z = 0");
      continue;
    }
    j.holo(i, i) = std::conj(z[i]) / (2.0 * r);
    j.anti(i, i) = z[i] / (2.0 * r);
  }
  return {j};
}

// -- inner product: sum_i conj(z_i) w_i ----------------------------------------

inline Shape inner_shape(std::span<const Shape> in, const OpAttrs&) {
  if (in[0].rank() != 1 || in[0] != in[1]) {
    throw ShapeError("inner: expects equal-length vectors, got " +
                     in[0].str() + " and " + in[1].str());
  }
  return Shape::scalar();
}
inline ForwardResult inner_forward(Inputs in, const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  Complex acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += std::conj(z[i]) * w[i];
  return {Tensor::scalar(acc), {z, w}};
}
inline std::vector<Tensor> inner_adjoint(const AdjointContext& c,
                                         const Tensor& nu_bar) {
  const Tensor &z = c.saved[0], &w = c.saved[1];
  const Complex nb = nu_bar.item();
  const Complex nu = std::conj(nb);
  // The first slot takes nu, not nu_bar.
  return {nu * w, nb * z};
}
inline std::vector<WirtingerJacobian> inner_jacobian(Inputs in,
                                                     const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  WirtingerJacobian jz(1, z.size()), jw(1, w.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    jz.anti(0, i) = w[i];
    jw.holo(0, i) = std::conj(z[i]);
  }
  return {jz, jw};
}

// -- outer product: z_i w_j --------------------------------------------------------

inline Shape outer_shape(std::span<const Shape> in, const OpAttrs&) {
  if (in[0].rank() != 1 || in[1].rank() != 1) {
    throw ShapeError("outer: expects two vectors, got " + in[0].str() +
                     " and " + in[1].str());
  }
  return Shape::matrix(in[0].dim(0), in[1].dim(0));
}
inline ForwardResult outer_forward(Inputs in, const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  const std::size_t n = z.size(), m = w.size();
  std::vector<Complex> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = z[i] * w[j];
  return {Tensor::matrix(n, m, std::move(out)), {conj(z), conj(w)}};
}
inline std::vector<Tensor> outer_adjoint(const AdjointContext& c,
                                         const Tensor& nu_bar) {
  const Tensor &z_bar = c.saved[0], &w_bar = c.saved[1];
  const std::size_t n = z_bar.size(), m = w_bar.size();
  std::vector<Complex> dz(n), dw(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      dz[i] += nu_bar(i, j) * w_bar[j];
      dw[j] += z_bar[i] * nu_bar(i, j);
    }
  }
  return {Tensor::vector(std::move(dz)), Tensor::vector(std::move(dw))};
}
inline std::vector<WirtingerJacobian> outer_jacobian(Inputs in,
                                                     const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  const std::size_t n = z.size(), m = w.size();
  WirtingerJacobian jz(n * m, n), jw(n * m, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      jz.holo(i * m + j, i) = w[j];
      jw.holo(i * m + j, j) = z[i];
    }
  }
  return {jz, jw};
}

// -- matrix product --------------------------------------------------------------

inline Shape matmul_shape(std::span<const Shape> in, const OpAttrs&) {
  const Shape &a = in[0], &b = in[1];
  if (a.rank() != 2 || b.rank() == 0 || a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + a.str() + " by " + b.str());
  }
  return b.rank() == 1 ? Shape::vector(a.rows())
                       : Shape::matrix(a.rows(), b.cols());
}
inline ForwardResult matmul_forward(Inputs in, const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  return {matmul(z, w), {conj(z), conj(w)}};
}
inline std::vector<Tensor> matmul_adjoint(const AdjointContext& c,
                                          const Tensor& nu_bar) {
  const Tensor &z_bar = c.saved[0], &w_bar = c.saved[1];
  const std::size_t n = z_bar.rows(), k = z_bar.cols(), m = w_bar.cols();
  std::vector<Complex> dz(n * k), dw(k * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t col = 0; col < m; ++col) {
        const Complex nb = nu_bar.data()[i * m + col];
        dz[i * k + j] += nb * w_bar(j, col);
        dw[j * m + col] += z_bar(i, j) * nb;
      }
    }
  }
  return {Tensor(z_bar.shape(), std::move(dz)),
          Tensor(w_bar.shape(), std::move(dw))};
}
inline std::vector<WirtingerJacobian> matmul_jacobian(Inputs in,
                                                      const OpAttrs&) {
  const Tensor &z = *in[0], &w = *in[1];
  const std::size_t n = z.rows(), k = z.cols(), m = w.cols();
  WirtingerJacobian jz(n * m, n * k), jw(n * m, k * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t col = 0; col < m; ++col) {
      for (std::size_t j = 0; j < k; ++j) {
        jz.holo(i * m + col, i * k + j) = w(j, col);
        jw.holo(i * m + col, j * m + col) = z(i, j);
      }
    }
  }
  return {jz, jw};
}

// -- Fourier transforms (along the first axis) ----------------------------------------

inline Shape fourier_shape(std::span<const Shape> in, const OpAttrs&) {
  if (in[0].rank() == 0) {
    throw ShapeError("fourier transform: expects a vector or matrix");
  }
  return in[0];
}

// out(k, c) = scale * sum_n phase(k n) z(n, c), phase(r) = exp(sign 2 pi i r / N)
inline Tensor fourier_apply(const Tensor& z, bool inverse_sign, double scale) {
  const std::size_t n = z.rows(), m = z.cols();
  std::vector<Complex> out(n * m);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t col = 0; col < m; ++col) {
      Complex acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        const Complex t = twiddle(k * p, n);
        acc += (inverse_sign ? std::conj(t) : t) * z(p, col);
      }
      out[k * m + col] = scale * acc;
    }
  }
  return Tensor(z.shape(), std::move(out));
}

inline WirtingerJacobian fourier_jacobian(const Tensor& z, bool inverse_sign,
                                          double scale) {
  const std::size_t n = z.rows(), m = z.cols();
  WirtingerJacobian j(n * m, n * m);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t p = 0; p < n; ++p) {
      const Complex t = twiddle(k * p, n);
      for (std::size_t col = 0; col < m; ++col) {
        j.holo(k * m + col, p * m + col) = scale * (inverse_sign ? std::conj(t) : t);
      }
    }
  }
  return j;
}

inline ForwardResult dft_forward(Inputs in, const OpAttrs&) {
  return {fourier_apply(*in[0], false, 1.0), {}};
}
inline std::vector<Tensor> dft_adjoint(const AdjointContext&,
                                       const Tensor& nu_bar) {
  // nu_bar_k -> sum_k nu_bar_k exp(+2 pi i k n / N)
  return {fourier_apply(nu_bar, true, 1.0)};
}
inline std::vector<WirtingerJacobian> dft_jacobian(Inputs in, const OpAttrs&) {
  return {fourier_jacobian(*in[0], false, 1.0)};
}

inline ForwardResult idft_forward(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {fourier_apply(z, true, 1.0 / static_cast<double>(z.rows())), {}};
}
inline std::vector<Tensor> idft_adjoint(const AdjointContext&,
                                        const Tensor& nu_bar) {
  // nu_bar_n -> (1/N) sum_n nu_bar_n exp(-2 pi i k n / N)
  return {fourier_apply(nu_bar, false, 1.0 / static_cast<double>(nu_bar.rows()))};
}
inline std::vector<WirtingerJacobian> idft_jacobian(Inputs in,
                                                    const OpAttrs&) {
  const Tensor& z = *in[0];
  return {fourier_jacobian(z, true, 1.0 / static_cast<double>(z.rows()))};
}

// -- sum -------------------------------------------------------------------------------

inline ForwardResult sum_forward(Inputs in, const OpAttrs&) {
  Complex acc = 0.0;
  for (const auto& v : in[0]->data()) acc += v;
  return {Tensor::scalar(acc), {}};
}
inline std::vector<Tensor> sum_adjoint(const AdjointContext& c,
                                       const Tensor& nu_bar) {
  const Complex nb = nu_bar.item();
  return {Tensor(c.input_shapes[0],
                 std::vector<Complex>(c.input_shapes[0].size(), nb))};
}
inline std::vector<WirtingerJacobian> sum_jacobian(Inputs in, const OpAttrs&) {
  WirtingerJacobian j(1, in[0]->size());
  for (std::size_t i = 0; i < in[0]->size(); ++i) j.holo(0, i) = 1.0;
  return {j};
}

// -- c * z for a fixed constant c ---------------------------------------------------------

inline ForwardResult scale_const_forward(Inputs in, const OpAttrs& a) {
  return {a.constant * *in[0], {}};
}
inline std::vector<Tensor> scale_const_adjoint(const AdjointContext& c,
                                               const Tensor& nu_bar) {
  return {std::conj(c.attrs.constant) * nu_bar};
}
inline std::vector<WirtingerJacobian> scale_const_jacobian(Inputs in,
                                                           const OpAttrs& a) {
  const Tensor& z = *in[0];
  return {diagonal_jacobian(constant_like(z, a.constant), zeros_like(z))};
}

// -- s * T for a scalar node s -----------------------------------------------------------

inline Shape scalar_mul_shape(std::span<const Shape> in, const OpAttrs&) {
  if (in[0].rank() != 0) {
    throw ShapeError("scalar_mul: first operand must be a scalar, got " +
                     in[0].str());
  }
  return in[1];
}
inline ForwardResult scalar_mul_forward(Inputs in, const OpAttrs&) {
  const Tensor &s = *in[0], &t = *in[1];
  const Complex sv = s.item();
  return {map(t, [sv](Complex v) { return sv * v; }), {conj(s), conj(t)}};
}
inline std::vector<Tensor> scalar_mul_adjoint(const AdjointContext& c,
                                              const Tensor& nu_bar) {
  const Tensor &s_bar = c.saved[0], &t_bar = c.saved[1];
  Complex ds = 0.0;
  for (std::size_t i = 0; i < nu_bar.size(); ++i) ds += nu_bar[i] * t_bar[i];
  return {Tensor::scalar(ds), s_bar.item() * nu_bar};
}
inline std::vector<WirtingerJacobian> scalar_mul_jacobian(Inputs in,
                                                          const OpAttrs&) {
  const Tensor &s = *in[0], &t = *in[1];
  WirtingerJacobian js(t.size(), 1), jt(t.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    js.holo(i, 0) = t[i];
    jt.holo(i, i) = s.item();
  }
  return {js, jt};
}

// -- relu (real input only) -----------------------------------------------------------------

inline ForwardResult relu_forward(Inputs in, const OpAttrs&) {
  const Tensor& x = *in[0];
  if (!x.is_real()) throw DomainError("relu: input must be real-domain");
  return {map(x, [](Complex v) { return Complex(std::max(v.real(), 0.0)); }),
          {x}};
}
inline std::vector<Tensor> relu_adjoint(const AdjointContext& c,
                                        const Tensor& nu_bar) {
  // Subgradient 0 at the kink.
  return {zip(nu_bar, c.saved[0], [](Complex n, Complex x) {
    return Complex(x.real() > 0.0 ? n.real() : 0.0);
  })};
}
inline std::vector<WirtingerJacobian> relu_jacobian(Inputs in,
                                                    const OpAttrs&) {
  const Tensor step = map(*in[0], [](Complex x) {
    return Complex(x.real() > 0.0 ? 0.5 : 0.0);
  });
  return {diagonal_jacobian(step, step)};
}

// -- phase: z / |z|, zero at the origin -----------------------------------------------------

inline ForwardResult phase_forward(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  return {map(z,
              [](Complex v) {
                const double r = std::abs(v);
                return r == 0.0 ? Complex(0.0) : v / r;
              }),
          {z}};
}
inline std::vector<Tensor> phase_adjoint(const AdjointContext& c,
                                         const Tensor& nu_bar) {
  const Tensor& z = c.saved[0];
  std::vector<Complex> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = std::abs(z[i]);
    if (r == 0.0) continue;
    const Complex nu = std::conj(nu_bar[i]);
    // dg/dz = 1/(2r), dg/dconj(z) = -z^2/(2 r^3)
    out[i] = -nu * z[i] * z[i] / (2.0 * r * r * r) + nu_bar[i] / (2.0 * r);
  }
  return {Tensor(z.shape(), std::move(out))};
}
inline std::vector<WirtingerJacobian> phase_jacobian(Inputs in,
                                                     const OpAttrs&) {
  const Tensor& z = *in[0];
  WirtingerJacobian j(z.size(), z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = std::abs(z[i]);
    if (r == 0.0) continue;
    j.holo(i, i) = 1.0 / (2.0 * r);
    j.anti(i, i) = -z[i] * z[i] / (2.0 * r * r * r);
  }
  return {j};
}

// -- diag: vector -> diagonal matrix --------------------------------------------------------

inline Shape diag_shape(std::span<const Shape> in, const OpAttrs&) {
  if (in[0].rank() != 1) {
    throw ShapeError("diag: expects a vector, got " + in[0].str());
  }
  return Shape::matrix(in[0].dim(0), in[0].dim(0));
}
inline ForwardResult diag_forward(Inputs in, const OpAttrs&) {
  const Tensor& z = *in[0];
  const std::size_t n = z.size();
  std::vector<Complex> out(n * n);
  for (std::size_t i = 0; i < n; ++i) out[i * n + i] = z[i];
  return {Tensor::matrix(n, n, std::move(out)), {}};
}
inline std::vector<Tensor> diag_adjoint(const AdjointContext& c,
                                        const Tensor& nu_bar) {
  const std::size_t n = c.input_shapes[0].dim(0);
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = nu_bar(i, i);
  return {Tensor::vector(std::move(out))};
}
inline std::vector<WirtingerJacobian> diag_jacobian(Inputs in,
                                                    const OpAttrs&) {
  const std::size_t n = in[0]->size();
  WirtingerJacobian j(n * n, n);
  for (std::size_t i = 0; i < n; ++i) j.holo(i * n + i, i) = 1.0;
  return {j};
}

// -- gather: row i of the output is row index[i] of the input -------------------------------

inline Shape gather_shape(std::span<const Shape> in, const OpAttrs& a) {
  if (in[0].rank() == 0 || a.index.size() != in[0].rows()) {
    throw ShapeError("gather: index list does not match " + in[0].str());
  }
  for (auto i : a.index) {
    if (i >= in[0].rows()) throw ShapeError("gather: index out of range");
  }
  return in[0];
}
inline ForwardResult gather_forward(Inputs in, const OpAttrs& a) {
  const Tensor& z = *in[0];
  const std::size_t m = z.cols();
  std::vector<Complex> out(z.size());
  for (std::size_t i = 0; i < a.index.size(); ++i)
    for (std::size_t c = 0; c < m; ++c) out[i * m + c] = z(a.index[i], c);
  return {Tensor(z.shape(), std::move(out)), {}};
}
inline std::vector<Tensor> gather_adjoint(const AdjointContext& c,
                                          const Tensor& nu_bar) {
  const std::size_t m = nu_bar.cols();
  std::vector<Complex> out(nu_bar.size());
  for (std::size_t i = 0; i < c.attrs.index.size(); ++i)
    for (std::size_t col = 0; col < m; ++col)
      out[c.attrs.index[i] * m + col] += nu_bar(i, col);
  return {Tensor(c.input_shapes[0], std::move(out))};
}
inline std::vector<WirtingerJacobian> gather_jacobian(Inputs in,
                                                      const OpAttrs& a) {
  const Tensor& z = *in[0];
  const std::size_t m = z.cols();
  WirtingerJacobian j(z.size(), z.size());
  for (std::size_t i = 0; i < a.index.size(); ++i)
    for (std::size_t c = 0; c < m; ++c) j.holo(i * m + c, a.index[i] * m + c) = 1.0;
  return {j};
}

}  // namespace detail

inline const OpDescriptor& descriptor(OpKind op) {
  using WC = WirtingerClass;
  namespace d = detail;
  static const OpDescriptor sin{"sin", 1, WC::Holomorphic, true, d::same_shape,
                                d::sin_forward, d::sin_adjoint, d::sin_jacobian};
  static const OpDescriptor exp{"exp", 1, WC::Holomorphic, true, d::same_shape,
                                d::exp_forward, d::exp_adjoint, d::exp_jacobian};
  static const OpDescriptor log{"log", 1, WC::Holomorphic, true, d::same_shape,
                                d::log_forward, d::log_adjoint, d::log_jacobian};
  static const OpDescriptor add{"add", 2, WC::Holomorphic, true, d::elementwise2,
                                d::add_forward, d::add_adjoint, d::add_jacobian};
  static const OpDescriptor sub{"sub", 2, WC::Holomorphic, true, d::elementwise2,
                                d::sub_forward, d::sub_adjoint, d::sub_jacobian};
  static const OpDescriptor mul{"mul", 2, WC::Holomorphic, true, d::elementwise2,
                                d::mul_forward, d::mul_adjoint, d::mul_jacobian};
  static const OpDescriptor div{"div", 2, WC::Holomorphic, true, d::elementwise2,
                                d::div_forward, d::div_adjoint, d::div_jacobian};
  static const OpDescriptor neg{"neg", 1, WC::Holomorphic, true, d::same_shape,
                                d::neg_forward, d::neg_adjoint, d::neg_jacobian};
  static const OpDescriptor cnj{"conj", 1, WC::AntiHolomorphic, true,
                                d::same_shape, d::conj_forward, d::conj_adjoint,
                                d::conj_jacobian};
  static const OpDescriptor re{"re", 1, WC::RealOutput, true, d::same_shape,
                               d::re_forward, d::re_adjoint, d::re_jacobian};
  static const OpDescriptor im{"im", 1, WC::RealOutput, true, d::same_shape,
                               d::im_forward, d::im_adjoint, d::im_jacobian};
  static const OpDescriptor abs{"abs", 1, WC::RealOutput, true, d::same_shape,
                                d::abs_forward, d::abs_adjoint, d::abs_jacobian};
  static const OpDescriptor inner{"inner", 2, WC::General, true, d::inner_shape,
                                  d::inner_forward, d::inner_adjoint,
                                  d::inner_jacobian};
  static const OpDescriptor outer{"outer", 2, WC::Holomorphic, true,
                                  d::outer_shape, d::outer_forward,
                                  d::outer_adjoint, d::outer_jacobian};
  static const OpDescriptor matmul{"matmul", 2, WC::Holomorphic, true,
                                   d::matmul_shape, d::matmul_forward,
                                   d::matmul_adjoint, d::matmul_jacobian};
  static const OpDescriptor dft{"dft", 1, WC::Holomorphic, false,
                                d::fourier_shape, d::dft_forward, d::dft_adjoint,
                                d::dft_jacobian};
  static const OpDescriptor idft{"idft", 1, WC::Holomorphic, false,
                                 d::fourier_shape, d::idft_forward,
                                 d::idft_adjoint, d::idft_jacobian};
  static const OpDescriptor sum{"sum", 1, WC::Holomorphic, true, d::to_scalar,
                                d::sum_forward, d::sum_adjoint, d::sum_jacobian};
  static const OpDescriptor scale{"scale_const", 1, WC::Holomorphic, true,
                                  d::same_shape, d::scale_const_forward,
                                  d::scale_const_adjoint, d::scale_const_jacobian};
  static const OpDescriptor smul{"scalar_mul", 2, WC::Holomorphic, true,
                                 d::scalar_mul_shape, d::scalar_mul_forward,
                                 d::scalar_mul_adjoint, d::scalar_mul_jacobian};
  static const OpDescriptor relu{"relu", 1, WC::RealInput, true, d::same_shape,
                                 d::relu_forward, d::relu_adjoint,
                                 d::relu_jacobian};
  static const OpDescriptor phase{"phase", 1, WC::General, false, d::same_shape,
                                  d::phase_forward, d::phase_adjoint,
                                  d::phase_jacobian};
  static const OpDescriptor diag{"diag", 1, WC::Holomorphic, true, d::diag_shape,
                                 d::diag_forward, d::diag_adjoint,
                                 d::diag_jacobian};
  static const OpDescriptor gather{"gather", 1, WC::Holomorphic, true,
                                   d::gather_shape, d::gather_forward,
                                   d::gather_adjoint, d::gather_jacobian};

  switch (op) {
    case OpKind::Sin: return sin;
    case OpKind::Exp: return exp;
    case OpKind::Log: return log;
    case OpKind::Add: return add;
    case OpKind::Sub: return sub;
    case OpKind::Mul: return mul;
    case OpKind::Div: return div;
    case OpKind::Neg: return neg;
    case OpKind::Conj: return cnj;
    case OpKind::Re: return re;
    case OpKind::Im: return im;
    case OpKind::Abs: return abs;
    case OpKind::Inner: return inner;
    case OpKind::Outer: return outer;
    case OpKind::Matmul: return matmul;
    case OpKind::Dft: return dft;
    case OpKind::Idft: return idft;
    case OpKind::Sum: return sum;
    case OpKind::ScaleConst: return scale;
    case OpKind::ScalarMul: return smul;
    case OpKind::Relu: return relu;
    case OpKind::Phase: return phase;
    case OpKind::Diag: return diag;
    case OpKind::Gather: return gather;
    case OpKind::Variable:
    case OpKind::Constant:
      break;
  }
  throw LookupError("no descriptor for leaf nodes");
}

// Output domain of `op` applied to inputs of the given domains, given the
// computed value.
inline Domain output_domain(OpKind op, std::span<const Tensor* const> inputs,
                            const Tensor& value) {
  const auto& desc = descriptor(op);
  if (desc.wirtinger_class == WirtingerClass::RealOutput ||
      desc.wirtinger_class == WirtingerClass::RealInput) {
    return Domain::Real;
  }
  if (!desc.real_closed) return Domain::Complex;
  for (const Tensor* t : inputs) {
    if (!t->is_real()) return Domain::Complex;
  }
  for (const auto& v : value.data()) {
    if (v.imag() != 0.0) return Domain::Complex;
  }
  return Domain::Real;
}

// Shape check, forward evaluation and domain tagging in one step.
inline ForwardResult evaluate_op(OpKind op, Inputs inputs,
                                 const OpAttrs& attrs = {}) {
  const auto& desc = descriptor(op);
  if (inputs.size() != desc.arity) {
    throw InvalidInputError(std::string(desc.name) + ": expected " +
                            std::to_string(desc.arity) + " inputs");
  }
  std::vector<Shape> shapes;
  for (const Tensor* t : inputs) shapes.push_back(t->shape());
  const Shape expected = desc.shape(shapes, attrs);
  ForwardResult result = desc.forward(inputs, attrs);
  if (result.value.shape() != expected) {
    throw ShapeError(std::string(desc.name) + ": forward produced " +
                     result.value.shape().str() + ", expected " + expected.str());
  }
  if (!all_finite(result.value)) {
    throw NumericError(std::string(desc.name) + ": non-finite forward value");
  }
  if (output_domain(op, inputs, result.value) == Domain::Real) {
    result.value = result.value.real_projection();
  }
  return result;
}

// Runs the op forward on `inputs` and applies its adjoint to `nu_bar`.
inline std::vector<Tensor> apply_adjoint(OpKind op, Inputs inputs,
                                         const Tensor& nu_bar,
                                         const OpAttrs& attrs = {},
                                         AdjointFn adjoint = nullptr) {
  const ForwardResult fwd = evaluate_op(op, inputs, attrs);
  std::vector<Shape> shapes;
  for (const Tensor* t : inputs) shapes.push_back(t->shape());
  const AdjointContext ctx{shapes, fwd.value, fwd.saved, attrs};
  return (adjoint ? adjoint : descriptor(op).adjoint)(ctx, nu_bar);
}

}  // namespace cad
