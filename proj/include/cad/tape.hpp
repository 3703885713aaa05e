#pragma once

// Define-by-run tape. Every op application appends one node; parents always
// precede their children, so reverse index order is a reverse topological
// order. backward() seeds the real scalar output with 1 and pushes cotangents
// through each op's adjoint. At a complex leaf the accumulated cotangent is
// 2 dF/dconj(z) = dF/dx + i dF/dy, the steepest-ascent direction in (x, y);
// at a real leaf it is dF/dx.

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cad/ops.hpp"

namespace cad {

struct NodeId {
  std::size_t index = 0;
  auto operator<=>(const NodeId&) const = default;
};

struct TapeNode {
  OpKind op;
  std::vector<NodeId> parents;
  Tensor value;
  std::vector<Tensor> saved;
  OpAttrs attrs;
};

class Gradients;

class Tape {
 public:
  // Registers a differentiable input.
  NodeId variable(Tensor value) { return push_leaf(OpKind::Variable, std::move(value)); }

  // Registers a fixed operand; no gradient is reported for it.
  NodeId constant(Tensor value) { return push_leaf(OpKind::Constant, std::move(value)); }

  NodeId record(OpKind op, std::span<const NodeId> parents,
                OpAttrs attrs = {}) {
    std::vector<const Tensor*> inputs;
    inputs.reserve(parents.size());
    for (NodeId p : parents) inputs.push_back(&node(p).value);
    ForwardResult fwd = evaluate_op(op, inputs, attrs);
    nodes_.push_back(TapeNode{op, {parents.begin(), parents.end()},
                              std::move(fwd.value), std::move(fwd.saved),
                              std::move(attrs)});
    return NodeId{nodes_.size() - 1};
  }

  NodeId record(OpKind op, std::initializer_list<NodeId> parents,
                OpAttrs attrs = {}) {
    return record(op, std::span<const NodeId>(parents.begin(), parents.size()),
                  std::move(attrs));
  }

  const TapeNode& node(NodeId id) const {
    if (id.index >= nodes_.size()) {
      throw LookupError("node " + std::to_string(id.index) + " is not on the tape");
    }
    return nodes_[id.index];
  }

  std::size_t size() const { return nodes_.size(); }

  bool is_variable(NodeId id) const {
    return id.index < nodes_.size() && nodes_[id.index].op == OpKind::Variable;
  }

  // Shapes of a node's parents, in order.
  std::vector<Shape> parent_shapes(const TapeNode& n) const {
    std::vector<Shape> shapes;
    for (NodeId p : n.parents) shapes.push_back(node(p).value.shape());
    return shapes;
  }

  Gradients backward(NodeId output) const;

 private:
  NodeId push_leaf(OpKind op, Tensor value) {
    if (!all_finite(value)) throw NumericError("leaf value is not finite");
    nodes_.push_back(TapeNode{op, {}, std::move(value), {}, {}});
    return NodeId{nodes_.size() - 1};
  }

  std::vector<TapeNode> nodes_;
};

// Cotangents of the registered variables after a backward pass.
class Gradients {
 public:
  const Tensor& operator[](NodeId leaf) const {
    auto it = leaves_.find(leaf);
    if (it == leaves_.end()) {
      throw LookupError("node " + std::to_string(leaf.index) +
                        " is not a registered variable");
    }
    return it->second;
  }

  std::size_t size() const { return leaves_.size(); }

 private:
  friend class Tape;
  std::map<NodeId, Tensor> leaves_;
};

inline Tensor gradient_of(const Gradients& g, NodeId leaf) { return g[leaf]; }

// |Im| <= 1e-12 max(1, |Re|) on a scalar node.
inline void require_real_scalar(const Tensor& value) {
  if (value.shape().rank() != 0) {
    throw InvalidLossError("backward: output has shape " + value.shape().str() +
                           ", expected a scalar");
  }
  const Complex v = value.item();
  if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real()))) {
    throw InvalidLossError("backward: output is not real");
  }
}

inline Gradients Tape::backward(NodeId output) const {
  require_real_scalar(node(output).value);

  std::vector<std::optional<Tensor>> cot(output.index + 1);
  cot[output.index] = Tensor::scalar(1.0);

  for (std::size_t k = output.index + 1; k-- > 0;) {
    if (!cot[k]) continue;
    const TapeNode& n = nodes_[k];
    if (n.op == OpKind::Variable || n.op == OpKind::Constant) continue;

    const std::vector<Shape> shapes = parent_shapes(n);
    const AdjointContext ctx{shapes, n.value, n.saved, n.attrs};
    const std::vector<Tensor> grads = descriptor(n.op).adjoint(ctx, *cot[k]);
    for (std::size_t p = 0; p < n.parents.size(); ++p) {
      auto& slot = cot[n.parents[p].index];
      slot = slot ? *slot + grads[p] : grads[p];
    }
  }

  Gradients out;
  for (std::size_t k = 0; k <= output.index; ++k) {
    const TapeNode& n = nodes_[k];
    if (n.op != OpKind::Variable) continue;
    Tensor g = cot[k] ? *cot[k] : Tensor::zeros(n.value.shape());
    if (n.value.is_real()) g = g.real_projection();
    out.leaves_.emplace(NodeId{k}, std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expression handles

class Var {
 public:
  Var(Tape& tape, NodeId id) : tape_(&tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  NodeId id() const { return id_; }
  const Tensor& value() const { return tape_->node(id_).value; }
  const Shape& shape() const { return value().shape(); }

 private:
  Tape* tape_;
  NodeId id_;
};

inline Var variable(Tape& tape, Tensor value) {
  return {tape, tape.variable(std::move(value))};
}

inline Var constant(Tape& tape, Tensor value) {
  return {tape, tape.constant(std::move(value))};
}

namespace detail {

inline Var apply(OpKind op, const Var& a, OpAttrs attrs = {}) {
  return {a.tape(), a.tape().record(op, {a.id()}, std::move(attrs))};
}

inline Var apply(OpKind op, const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) {
    throw InvalidInputError("operands live on different tapes");
  }
  return {a.tape(), a.tape().record(op, {a.id(), b.id()})};
}

}  // namespace detail

inline Var sin(const Var& z) { return detail::apply(OpKind::Sin, z); }
inline Var exp(const Var& z) { return detail::apply(OpKind::Exp, z); }
inline Var log(const Var& z) { return detail::apply(OpKind::Log, z); }
inline Var conj(const Var& z) { return detail::apply(OpKind::Conj, z); }
inline Var re(const Var& z) { return detail::apply(OpKind::Re, z); }
inline Var im(const Var& z) { return detail::apply(OpKind::Im, z); }
inline Var sum(const Var& z) { return detail::apply(OpKind::Sum, z); }
inline Var dft(const Var& z) { return detail::apply(OpKind::Dft, z); }
inline Var idft(const Var& z) { return detail::apply(OpKind::Idft, z); }
inline Var relu(const Var& x) { return detail::apply(OpKind::Relu, x); }
inline Var diag(const Var& z) { return detail::apply(OpKind::Diag, z); }

enum class AbsMode { Strict, Lenient };

// Strict mode rejects the adjoint at z = 0; lenient mode uses 0 there.
inline Var abs(const Var& z, AbsMode mode = AbsMode::Strict) {
  OpAttrs attrs;
  attrs.lenient = mode == AbsMode::Lenient;
  return detail::apply(OpKind::Abs, z, std::move(attrs));
}

// z / |z|, with value and derivative 0 at the origin.
inline Var phase(const Var& z) {
  OpAttrs attrs;
  attrs.lenient = true;
  return detail::apply(OpKind::Phase, z, std::move(attrs));
}

inline Var scale(Complex c, const Var& z) {
  OpAttrs attrs;
  attrs.constant = c;
  return detail::apply(OpKind::ScaleConst, z, std::move(attrs));
}

inline Var gather(const Var& z, std::vector<std::size_t> rows) {
  OpAttrs attrs;
  attrs.index = std::move(rows);
  return detail::apply(OpKind::Gather, z, std::move(attrs));
}

inline Var operator+(const Var& a, const Var& b) {
  return detail::apply(OpKind::Add, a, b);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::apply(OpKind::Sub, a, b);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::apply(OpKind::Mul, a, b);
}
inline Var operator/(const Var& a, const Var& b) {
  return detail::apply(OpKind::Div, a, b);
}
inline Var operator-(const Var& a) { return detail::apply(OpKind::Neg, a); }

// sum_i conj(z_i) w_i
inline Var inner(const Var& z, const Var& w) {
  return detail::apply(OpKind::Inner, z, w);
}
inline Var outer(const Var& z, const Var& w) {
  return detail::apply(OpKind::Outer, z, w);
}
inline Var matmul(const Var& a, const Var& b) {
  return detail::apply(OpKind::Matmul, a, b);
}
// s * t for a scalar node s.
inline Var scalar_mul(const Var& s, const Var& t) {
  return detail::apply(OpKind::ScalarMul, s, t);
}

// ---------------------------------------------------------------------------
// Losses as functions of a list of input tensors

// Builds a real scalar loss from the variables registered for each input.
using LossBuilder = std::function<Var(Tape&, std::span<const Var>)>;

// The tape is heap-allocated so the Vars stay valid when a Recording moves.
struct Recording {
  std::unique_ptr<Tape> tape = std::make_unique<Tape>();
  std::vector<Var> inputs;
  NodeId output;
};

inline Recording record_loss(const LossBuilder& build,
                             std::span<const Tensor> point) {
  Recording rec;
  rec.inputs.reserve(point.size());
  for (const auto& t : point) rec.inputs.push_back(variable(*rec.tape, t));
  rec.output = build(*rec.tape, rec.inputs).id();
  return rec;
}

// Raw (possibly complex) value of the loss output.
inline Complex evaluate(const LossBuilder& build, std::span<const Tensor> point) {
  const Recording rec = record_loss(build, point);
  return rec.tape->node(rec.output).value.item();
}

struct ValueAndGradients {
  double value;
  std::vector<Tensor> gradients;
};

inline ValueAndGradients value_and_gradients(const LossBuilder& build,
                                             std::span<const Tensor> point) {
  const Recording rec = record_loss(build, point);
  const Gradients g = rec.tape->backward(rec.output);
  ValueAndGradients out{rec.tape->node(rec.output).value.item().real(), {}};
  for (const Var& v : rec.inputs) out.gradients.push_back(g[v.id()]);
  return out;
}

}  // namespace cad
