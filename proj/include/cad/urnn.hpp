#pragma once

// Unitary recurrent network pieces: the structured unitary matrix
//   W = D3 R2 F^-1 D2 P R1 F D1
// with D = diag(exp(i omega)), R = I - 2 v v^H / |v|^2, P a fixed row
// permutation and F the DFT in its unitary normalization (F/sqrt(n) and
// sqrt(n) F^-1), plus the recurrent cell
//   h_t = modReLU(W h_{t-1} + V x_t; b),   y_t = U h_t + c
// and a mean squared sequence loss. Everything on the tape is composed from
// elementary ops, so every gradient comes out of the generic backward pass.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cad/rng.hpp"
#include "cad/tape.hpp"

namespace cad::urnn {

struct UnitaryParams {
  Tensor omega1, omega2, omega3;  // real phases, radians
  Tensor v1, v2;                  // reflection vectors
  std::vector<std::size_t> perm;  // fixed, not trained

  std::size_t dim() const { return omega1.size(); }

  void validate() const {
    const std::size_t n = dim();
    if (n == 0) throw InvalidInputError("unitary params: dimension is zero");
    for (const Tensor* w : {&omega1, &omega2, &omega3}) {
      if (w->shape() != Shape::vector(n) || !w->is_real()) {
        throw InvalidInputError("unitary params: phases must be real vectors of length " +
                                std::to_string(n));
      }
    }
    for (const Tensor* v : {&v1, &v2}) {
      if (v->shape() != Shape::vector(n)) {
        throw ShapeError("unitary params: reflection vector has shape " +
                         v->shape().str());
      }
      if (frobenius_norm(*v) <= 1e-12) {
        throw DomainError("unitary params: degenerate reflection vector");
      }
    }
    std::vector<bool> seen(n, false);
    if (perm.size() != n) throw InvalidInputError("unitary params: bad permutation");
    for (auto p : perm) {
      if (p >= n || seen[p]) throw InvalidInputError("unitary params: bad permutation");
      seen[p] = true;
    }
  }

  // Trainable tensors in a fixed order: omega1, omega2, omega3, v1, v2.
  std::vector<Tensor> tensors() const { return {omega1, omega2, omega3, v1, v2}; }

  UnitaryParams with_tensors(std::span<const Tensor> t) const {
    UnitaryParams p{t[0], t[1], t[2], t[3], t[4], perm};
    p.validate();
    return p;
  }

  static UnitaryParams random(std::size_t n, Rng& rng) {
    const double pi = std::numbers::pi;
    UnitaryParams p{rng.real_vector(n, -pi, pi), rng.real_vector(n, -pi, pi),
                    rng.real_vector(n, -pi, pi), rng.complex_vector(n),
                    rng.complex_vector(n), rng.permutation(n)};
    p.validate();
    return p;
  }
};

// ---------------------------------------------------------------------------
// Plain evaluation

inline Tensor reflection(const Tensor& v) {
  if (v.shape().rank() != 1) throw ShapeError("reflection: expects a vector");
  const double norm = frobenius_norm(v);
  if (norm <= 1e-12) throw DomainError("reflection: degenerate reflection vector");
  const std::size_t n = v.size();
  std::vector<Complex> r(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      r[i * n + j] = (i == j ? 1.0 : 0.0) - 2.0 * v[i] * std::conj(v[j]) / (norm * norm);
    }
  }
  return Tensor::matrix(n, n, std::move(r));
}

inline Tensor phase_diagonal(const Tensor& omega) {
  const std::size_t n = omega.size();
  std::vector<Complex> d(n * n);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = std::polar(1.0, omega[i].real());
  return Tensor::matrix(n, n, std::move(d));
}

// Rows of the result are rows perm[i] of m.
inline Tensor permute_rows(const Tensor& m, std::span<const std::size_t> perm) {
  const std::size_t cols = m.cols();
  std::vector<Complex> out(m.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c) out[i * cols + c] = m(perm[i], c);
  return Tensor(m.shape(), std::move(out));
}

inline Tensor permutation_matrix(std::span<const std::size_t> perm) {
  return permute_rows(Tensor::identity(perm.size()), perm);
}

// The seven factors of W, rightmost first: D1, F, R1, P, D2, F^-1, R2, D3.
inline std::vector<Tensor> unitary_factors(const UnitaryParams& p) {
  p.validate();
  const std::size_t n = p.dim();
  const double root = std::sqrt(static_cast<double>(n));
  return {phase_diagonal(p.omega1),
          Complex(1.0 / root) * dft_matrix(n),
          reflection(p.v1),
          permutation_matrix(p.perm),
          phase_diagonal(p.omega2),
          Complex(root) * idft_matrix(n),
          reflection(p.v2),
          phase_diagonal(p.omega3)};
}

inline Tensor build_w(const UnitaryParams& p) {
  const std::vector<Tensor> factors = unitary_factors(p);
  Tensor w = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) {
    w = i == 3 ? permute_rows(w, p.perm) : matmul(factors[i], w);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Differentiable construction

inline Var phase_diagonal(const Var& omega) {
  return diag(exp(scale(Complex(0.0, 1.0), omega)));
}

inline Var reflection(const Var& v) {
  if (v.shape().rank() != 1) throw ShapeError("reflection: expects a vector");
  if (frobenius_norm(v.value()) <= 1e-12) {
    throw DomainError("reflection: degenerate reflection vector");
  }
  Tape& t = v.tape();
  const Var norm2 = re(inner(v, v));
  const Var coef = constant(t, Tensor::real_scalar(-2.0)) / norm2;
  return constant(t, Tensor::identity(v.shape().dim(0))) +
         scalar_mul(coef, outer(v, conj(v)));
}

struct UnitaryVars {
  Var omega1, omega2, omega3, v1, v2;
  std::vector<std::size_t> perm;
};

inline Var build_w(const UnitaryVars& p) {
  const std::size_t n = p.omega1.shape().dim(0);
  const double root = std::sqrt(static_cast<double>(n));
  Var m = phase_diagonal(p.omega1);
  m = scale(1.0 / root, dft(m));
  m = matmul(reflection(p.v1), m);
  m = gather(m, p.perm);
  m = matmul(phase_diagonal(p.omega2), m);
  m = scale(root, idft(m));
  m = matmul(reflection(p.v2), m);
  return matmul(phase_diagonal(p.omega3), m);
}

// modReLU(z; b) = z relu(|z| + b) / |z|, and 0 where z = 0.
inline Var mod_relu(const Var& z, const Var& bias) {
  return phase(z) * relu(abs(z, AbsMode::Lenient) + bias);
}

// ---------------------------------------------------------------------------
// Recurrent cell

struct RnnParams {
  std::variant<UnitaryParams, Tensor> w;  // structured or free unitary matrix
  Tensor V;  // hidden x input
  Tensor U;  // output x hidden
  Tensor c;  // output bias
  Tensor b;  // real modReLU bias, hidden

  bool structured() const { return std::holds_alternative<UnitaryParams>(w); }

  std::size_t hidden() const { return b.size(); }
  std::size_t input_dim() const { return V.cols(); }
  std::size_t output_dim() const { return U.rows(); }

  Tensor w_matrix() const {
    return structured() ? build_w(std::get<UnitaryParams>(w)) : std::get<Tensor>(w);
  }

  void validate() const {
    const std::size_t n = hidden();
    if (n == 0) throw InvalidInputError("rnn params: hidden size is zero");
    if (!b.is_real() || b.shape() != Shape::vector(n)) {
      throw InvalidInputError("rnn params: b must be a real vector");
    }
    if (structured()) {
      const auto& up = std::get<UnitaryParams>(w);
      up.validate();
      if (up.dim() != n) throw ShapeError("rnn params: W dimension mismatch");
    } else if (std::get<Tensor>(w).shape() != Shape::matrix(n, n)) {
      throw ShapeError("rnn params: W must be " + Shape::matrix(n, n).str());
    }
    if (V.shape().rank() != 2 || V.rows() != n) throw ShapeError("rnn params: bad V");
    if (U.shape().rank() != 2 || U.cols() != n) throw ShapeError("rnn params: bad U");
    if (c.shape() != Shape::vector(U.rows())) throw ShapeError("rnn params: bad c");
  }

  // Trainable tensors: [omega1, omega2, omega3, v1, v2 | W], V, U, c, b.
  std::vector<Tensor> tensors() const {
    std::vector<Tensor> out =
        structured() ? std::get<UnitaryParams>(w).tensors()
                     : std::vector<Tensor>{std::get<Tensor>(w)};
    out.insert(out.end(), {V, U, c, b});
    return out;
  }

  std::vector<std::string> tensor_names() const {
    std::vector<std::string> out =
        structured() ? std::vector<std::string>{"omega1", "omega2", "omega3", "v1", "v2"}
                     : std::vector<std::string>{"W"};
    out.insert(out.end(), {"V", "U", "c", "b"});
    return out;
  }

  RnnParams with_tensors(std::span<const Tensor> t) const {
    RnnParams p = *this;
    std::size_t k = 0;
    if (structured()) {
      p.w = std::get<UnitaryParams>(w).with_tensors(t.subspan(0, 5));
      k = 5;
    } else {
      p.w = t[0];
      k = 1;
    }
    p.V = t[k];
    p.U = t[k + 1];
    p.c = t[k + 2];
    p.b = t[k + 3];
    p.validate();
    return p;
  }

  static RnnParams random(std::size_t n, std::size_t d_in, std::size_t d_out,
                          Rng& rng, bool structured) {
    UnitaryParams up = UnitaryParams::random(n, rng);
    RnnParams p{structured ? std::variant<UnitaryParams, Tensor>(up)
                           : std::variant<UnitaryParams, Tensor>(build_w(up)),
                Complex(1.0 / std::sqrt(static_cast<double>(d_in))) *
                    rng.complex_matrix(n, d_in),
                Complex(1.0 / std::sqrt(static_cast<double>(n))) *
                    rng.complex_matrix(d_out, n),
                rng.complex_vector(d_out), rng.real_vector(n, -0.3, 0.3)};
    p.validate();
    return p;
  }
};

// Parameters as tape nodes, with W already assembled.
struct RnnVars {
  Var w, V, U, c, b;
};

// `vars` follows the order of RnnParams::tensors().
inline RnnVars bind(const RnnParams& proto, std::span<const Var> vars) {
  if (proto.structured()) {
    const UnitaryVars uv{vars[0], vars[1], vars[2], vars[3], vars[4],
                         std::get<UnitaryParams>(proto.w).perm};
    return {build_w(uv), vars[5], vars[6], vars[7], vars[8]};
  }
  return {vars[0], vars[1], vars[2], vars[3], vars[4]};
}

struct CellOutput {
  Var h;
  Var y;
};

inline CellOutput rnn_cell(const RnnVars& p, const Var& h_prev, const Var& x) {
  const Var h = mod_relu(matmul(p.w, h_prev) + matmul(p.V, x), p.b);
  return {h, matmul(p.U, h) + p.c};
}

// Plain evaluation of one step.
inline std::pair<Tensor, Tensor> rnn_cell(const RnnParams& p, const Tensor& h_prev,
                                          const Tensor& x) {
  Tape t;
  const RnnVars v{constant(t, p.w_matrix()), constant(t, p.V), constant(t, p.U),
                  constant(t, p.c), constant(t, p.b)};
  const CellOutput out = rnn_cell(v, constant(t, h_prev), constant(t, x));
  return {out.h.value(), out.y.value()};
}

inline void check_sequences(std::span<const Tensor> inputs,
                            std::span<const Tensor> targets) {
  if (inputs.empty()) throw InvalidInputError("sequence_loss: empty sequence");
  if (inputs.size() != targets.size()) {
    throw InvalidInputError("sequence_loss: inputs and targets differ in length");
  }
}

// mean_t sum_k |y_t,k - target_t,k|^2 with h_0 = 0.
inline Var sequence_loss(Tape& t, const RnnVars& p, std::span<const Tensor> inputs,
                         std::span<const Tensor> targets) {
  check_sequences(inputs, targets);
  Var h = constant(t, Tensor::zeros(Shape::vector(p.b.shape().dim(0))));
  std::optional<Var> total;
  for (std::size_t step = 0; step < inputs.size(); ++step) {
    const CellOutput out = rnn_cell(p, h, constant(t, inputs[step]));
    h = out.h;
    const Var d = out.y - constant(t, targets[step]);
    const Var e = sum(re(conj(d) * d));
    total = total ? *total + e : e;
  }
  return scale(1.0 / static_cast<double>(inputs.size()), *total);
}

inline double sequence_loss(const RnnParams& p, std::span<const Tensor> inputs,
                            std::span<const Tensor> targets) {
  check_sequences(inputs, targets);
  Tape t;
  const RnnVars v{constant(t, p.w_matrix()), constant(t, p.V), constant(t, p.U),
                  constant(t, p.c), constant(t, p.b)};
  return sequence_loss(t, v, inputs, targets).value().item().real();
}

// Loss as a function of the tensors in RnnParams::tensors() order.
inline LossBuilder sequence_loss_builder(RnnParams proto, std::vector<Tensor> inputs,
                                         std::vector<Tensor> targets) {
  check_sequences(inputs, targets);
  return [proto = std::move(proto), inputs = std::move(inputs),
          targets = std::move(targets)](Tape& t, std::span<const Var> vars) {
    return sequence_loss(t, bind(proto, vars), inputs, targets);
  };
}

struct SequenceTask {
  std::vector<Tensor> inputs;
  std::vector<Tensor> targets;
};

// Inputs drawn at random; targets produced by a random teacher network of
// the same architecture, so the task is realizable.
inline SequenceTask make_task(std::size_t n, std::size_t d_in, std::size_t d_out,
                              std::size_t length, Rng& rng) {
  const RnnParams teacher = RnnParams::random(n, d_in, d_out, rng, true);
  SequenceTask task;
  Tensor h = Tensor::zeros(Shape::vector(n));
  for (std::size_t i = 0; i < length; ++i) {
    task.inputs.push_back(rng.complex_vector(d_in));
    auto [h_next, y] = rnn_cell(teacher, h, task.inputs.back());
    h = h_next;
    task.targets.push_back(y);
  }
  return task;
}

}  // namespace cad::urnn
