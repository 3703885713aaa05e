#pragma once

// Generic conjugate-pair backward mode. Each node carries the row vector
// [nu, nu_bar] and each op maps it through its full 2x2 Wirtinger Jacobian:
//   first  <- nu dg/dz      + nu_bar dconj(g)/dz
//   second <- nu dg/dconj(z) + nu_bar dconj(g)/dconj(z)
// with dconj(g)/dz = conj(dg/dconj(z)) and dconj(g)/dconj(z) = conj(dg/dz).
// Seeded with [1, 1] at a real output, a leaf ends up holding
// [2 dF/dz, 2 dF/dconj(z)]. The two slots are propagated independently, so
// second == conj(first) is an observable property rather than an assumption.
//
// This path reads only the dense Jacobians, never the simplified adjoints.

#include <optional>
#include <vector>

#include "cad/tape.hpp"

namespace cad::oracles {

struct WirtingerPair {
  Tensor first;
  Tensor second;
};

// One input's share of the pair adjoint.
inline WirtingerPair pair_adjoint(const WirtingerJacobian& j,
                                  const WirtingerPair& out, Shape in_shape) {
  std::vector<Complex> first(j.in_size), second(j.in_size);
  for (std::size_t o = 0; o < j.out_size; ++o) {
    const Complex a = out.first[o], b = out.second[o];
    for (std::size_t i = 0; i < j.in_size; ++i) {
      const Complex h = j.holo(o, i), w = j.anti(o, i);
      first[i] += a * h + b * std::conj(w);
      second[i] += a * w + b * std::conj(h);
    }
  }
  return {Tensor(in_shape, std::move(first)), Tensor(in_shape, std::move(second))};
}

class PairGradients {
 public:
  explicit PairGradients(std::vector<std::optional<WirtingerPair>> nodes,
                         std::vector<bool> variables)
      : nodes_(std::move(nodes)), variables_(std::move(variables)) {}

  const WirtingerPair& operator[](NodeId leaf) const {
    if (leaf.index >= variables_.size() || !variables_[leaf.index]) {
      throw LookupError("pair_backward: node " + std::to_string(leaf.index) +
                        " is not a registered variable");
    }
    return *nodes_[leaf.index];
  }

  // Worst rel_err(second, conj(first)) over every node the pass reached.
  double max_conjugate_defect() const {
    double worst = 0.0;
    for (const auto& p : nodes_) {
      if (p) worst = std::max(worst, rel_err(p->second, conj(p->first)));
    }
    return worst;
  }

  std::size_t visited() const {
    std::size_t n = 0;
    for (const auto& p : nodes_) n += p.has_value();
    return n;
  }

 private:
  std::vector<std::optional<WirtingerPair>> nodes_;
  std::vector<bool> variables_;
};

inline PairGradients pair_backward(const Tape& tape, NodeId output) {
  require_real_scalar(tape.node(output).value);

  std::vector<std::optional<WirtingerPair>> pairs(output.index + 1);
  pairs[output.index] =
      WirtingerPair{Tensor::scalar(1.0), Tensor::scalar(1.0)};

  for (std::size_t k = output.index + 1; k-- > 0;) {
    if (!pairs[k]) continue;
    const TapeNode& n = tape.node(NodeId{k});
    if (n.op == OpKind::Variable || n.op == OpKind::Constant) continue;

    std::vector<const Tensor*> inputs;
    for (NodeId p : n.parents) inputs.push_back(&tape.node(p).value);
    const auto jacobians = descriptor(n.op).jacobian(inputs, n.attrs);
    for (std::size_t p = 0; p < n.parents.size(); ++p) {
      WirtingerPair contrib =
          pair_adjoint(jacobians[p], *pairs[k], inputs[p]->shape());
      auto& slot = pairs[n.parents[p].index];
      if (slot) {
        slot->first = slot->first + contrib.first;
        slot->second = slot->second + contrib.second;
      } else {
        slot = std::move(contrib);
      }
    }
  }

  std::vector<bool> variables(output.index + 1, false);
  for (std::size_t k = 0; k <= output.index; ++k) {
    const TapeNode& n = tape.node(NodeId{k});
    if (n.op != OpKind::Variable) continue;
    variables[k] = true;
    auto& slot = pairs[k];
    if (!slot) {
      slot = WirtingerPair{Tensor::zeros(n.value.shape()),
                           Tensor::zeros(n.value.shape())};
    }
    if (n.value.is_real()) {
      slot->first = slot->first.real_projection();
      slot->second = slot->second.real_projection();
    }
  }
  return PairGradients(std::move(pairs), std::move(variables));
}

}  // namespace cad::oracles
