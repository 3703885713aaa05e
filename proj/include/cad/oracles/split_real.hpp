#pragma once

// Complex numbers as (re, im) tuples of real scalars on a purely real
// reverse-mode tape. Complex operations are expanded into real arithmetic,
// e.g. z w = (a_z a_w - b_z b_w, a_z b_w + b_z a_w), and Re/Im simply select
// a component, so their adjoints are (nu, 0) and (0, nu). The real adjoint
// chain then yields (dF/dx, dF/dy) at every leaf.
//
// Only the operations needed by the oracle corpus are provided.

#include <functional>
#include <span>
#include <vector>

#include "cad/linalg.hpp"

namespace cad::split {

class Tape {
 public:
  enum class Op { Leaf, Constant, Add, Sub, Mul, Div, Neg };

  std::size_t leaf(double v) { return push(Op::Leaf, 0, 0, v); }
  std::size_t constant(double v) { return push(Op::Constant, 0, 0, v); }

  std::size_t apply(Op op, std::size_t a, std::size_t b = 0) {
    const double x = nodes_.at(a).value, y = nodes_.at(b).value;
    double v = 0.0;
    switch (op) {
      case Op::Add: v = x + y; break;
      case Op::Sub: v = x - y; break;
      case Op::Mul: v = x * y; break;
      case Op::Div:
        if (y == 0.0) throw DomainError("split: division by zero");
        v = x / y;
        break;
      case Op::Neg: v = -x; break;
      default: throw InvalidInputError("split: not an arithmetic op");
    }
    return push(op, a, b, v);
  }

  double value(std::size_t id) const { return nodes_.at(id).value; }
  std::size_t size() const { return nodes_.size(); }

  // Real adjoints d output / d node for every node, seeded with 1.
  std::vector<double> backward(std::size_t output) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    adj.at(output) = 1.0;
    for (std::size_t k = output + 1; k-- > 0;) {
      const Node& n = nodes_[k];
      const double g = adj[k];
      switch (n.op) {
        case Op::Leaf:
        case Op::Constant:
          break;
        case Op::Add:
          adj[n.a] += g;
          adj[n.b] += g;
          break;
        case Op::Sub:
          adj[n.a] += g;
          adj[n.b] -= g;
          break;
        case Op::Mul:
          adj[n.a] += g * nodes_[n.b].value;
          adj[n.b] += g * nodes_[n.a].value;
          break;
        case Op::Div: {
          const double y = nodes_[n.b].value;
          adj[n.a] += g / y;
          adj[n.b] -= g * nodes_[n.a].value / (y * y);
          break;
        }
        case Op::Neg:
          adj[n.a] -= g;
          break;
      }
    }
    return adj;
  }

 private:
  struct Node {
    Op op;
    std::size_t a, b;
    double value;
  };

  std::size_t push(Op op, std::size_t a, std::size_t b, double v) {
    nodes_.push_back({op, a, b, v});
    return nodes_.size() - 1;
  }

  std::vector<Node> nodes_;
};

class Scalar {
 public:
  Scalar(Tape& tape, std::size_t id) : tape_(&tape), id_(id) {}
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  double value() const { return tape_->value(id_); }

 private:
  Tape* tape_;
  std::size_t id_;
};

inline Scalar real_constant(Tape& t, double v) { return {t, t.constant(v)}; }

inline Scalar operator+(Scalar a, Scalar b) {
  return {a.tape(), a.tape().apply(Tape::Op::Add, a.id(), b.id())};
}
inline Scalar operator-(Scalar a, Scalar b) {
  return {a.tape(), a.tape().apply(Tape::Op::Sub, a.id(), b.id())};
}
inline Scalar operator*(Scalar a, Scalar b) {
  return {a.tape(), a.tape().apply(Tape::Op::Mul, a.id(), b.id())};
}
inline Scalar operator/(Scalar a, Scalar b) {
  return {a.tape(), a.tape().apply(Tape::Op::Div, a.id(), b.id())};
}
inline Scalar operator-(Scalar a) {
  return {a.tape(), a.tape().apply(Tape::Op::Neg, a.id())};
}

// A complex value as a (re, im) tuple.
struct CScalar {
  Scalar re;
  Scalar im;
};

inline CScalar operator+(const CScalar& z, const CScalar& w) {
  return {z.re + w.re, z.im + w.im};
}
inline CScalar operator-(const CScalar& z, const CScalar& w) {
  return {z.re - w.re, z.im - w.im};
}
inline CScalar operator*(const CScalar& z, const CScalar& w) {
  return {z.re * w.re - z.im * w.im, z.re * w.im + z.im * w.re};
}
inline CScalar operator/(const CScalar& z, const CScalar& w) {
  const Scalar den = w.re * w.re + w.im * w.im;
  return {(z.re * w.re + z.im * w.im) / den, (z.im * w.re - z.re * w.im) / den};
}
inline CScalar conj(const CScalar& z) { return {z.re, -z.im}; }

// Dense tensor of tuples, row-major like cad::Tensor.
struct CTensor {
  Shape shape;
  std::vector<CScalar> data;

  const CScalar& operator()(std::size_t r, std::size_t c) const {
    return data[r * shape.cols() + c];
  }
};

inline CTensor leaf(Tape& t, const Tensor& value) {
  CTensor out{value.shape(), {}};
  for (const auto& v : value.data()) {
    const Scalar re{t, t.leaf(v.real())};
    const Scalar im{t, t.leaf(v.imag())};
    out.data.push_back({re, im});
  }
  return out;
}

inline CTensor constant(Tape& t, const Tensor& value) {
  CTensor out{value.shape(), {}};
  for (const auto& v : value.data()) {
    out.data.push_back({real_constant(t, v.real()), real_constant(t, v.imag())});
  }
  return out;
}

template <class F>
CTensor zip(const CTensor& a, const CTensor& b, F&& f) {
  if (a.shape != b.shape) throw ShapeError("split: shape mismatch");
  CTensor out{a.shape, {}};
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data.push_back(f(a.data[i], b.data[i]));
  return out;
}

inline CTensor operator+(const CTensor& a, const CTensor& b) {
  return zip(a, b, [](const CScalar& x, const CScalar& y) { return x + y; });
}
inline CTensor operator-(const CTensor& a, const CTensor& b) {
  return zip(a, b, [](const CScalar& x, const CScalar& y) { return x - y; });
}
inline CTensor hadamard(const CTensor& a, const CTensor& b) {
  return zip(a, b, [](const CScalar& x, const CScalar& y) { return x * y; });
}
inline CTensor conj(const CTensor& a) {
  CTensor out{a.shape, {}};
  for (const auto& v : a.data) out.data.push_back(conj(v));
  return out;
}

// sum_i conj(z_i) w_i
inline CScalar inner(const CTensor& z, const CTensor& w) {
  if (z.shape.rank() != 1 || z.shape != w.shape) {
    throw ShapeError("split inner: expects equal-length vectors");
  }
  CScalar acc = conj(z.data[0]) * w.data[0];
  for (std::size_t i = 1; i < z.data.size(); ++i)
    acc = acc + conj(z.data[i]) * w.data[i];
  return acc;
}

inline CScalar sum(const CTensor& z) {
  CScalar acc = z.data.at(0);
  for (std::size_t i = 1; i < z.data.size(); ++i) acc = acc + z.data[i];
  return acc;
}

inline CTensor matmul(const CTensor& a, const CTensor& b) {
  if (a.shape.rank() != 2 || a.shape.cols() != b.shape.rows()) {
    throw ShapeError("split matmul: shape mismatch");
  }
  const std::size_t n = a.shape.rows(), k = a.shape.cols(), m = b.shape.cols();
  CTensor out{b.shape.rank() == 1 ? Shape::vector(n) : Shape::matrix(n, m), {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      CScalar acc = a(i, 0) * b(0, j);
      for (std::size_t p = 1; p < k; ++p) acc = acc + a(i, p) * b(p, j);
      out.data.push_back(acc);
    }
  }
  return out;
}

inline CTensor scale(Tape& t, Complex c, const CTensor& z) {
  const CScalar k{real_constant(t, c.real()), real_constant(t, c.imag())};
  CTensor out{z.shape, {}};
  for (const auto& v : z.data) out.data.push_back(k * v);
  return out;
}

inline CTensor dft(Tape& t, const CTensor& z) {
  return matmul(constant(t, dft_matrix(z.shape.rows())), z);
}

inline CTensor idft(Tape& t, const CTensor& z) {
  return matmul(constant(t, idft_matrix(z.shape.rows())), z);
}

// Real loss over tuple-valued inputs.
using LossBuilder = std::function<Scalar(Tape&, std::span<const CTensor>)>;

struct SplitGradients {
  double value;
  // dF/dx + i dF/dy per input; real-domain inputs keep only dF/dx.
  std::vector<Tensor> gradients;
};

inline SplitGradients split_real_backward(const LossBuilder& build,
                                          std::span<const Tensor> point) {
  Tape tape;
  std::vector<CTensor> leaves;
  for (const auto& t : point) leaves.push_back(leaf(tape, t));
  const Scalar out = build(tape, leaves);
  const std::vector<double> adj = tape.backward(out.id());

  SplitGradients result{out.value(), {}};
  for (std::size_t a = 0; a < point.size(); ++a) {
    std::vector<Complex> g;
    for (const auto& v : leaves[a].data) {
      g.emplace_back(adj[v.re.id()], point[a].is_real() ? 0.0 : adj[v.im.id()]);
    }
    result.gradients.emplace_back(point[a].shape(), std::move(g),
                                  point[a].domain());
  }
  return result;
}

}  // namespace cad::split
