#pragma once

#include <functional>
#include <vector>

#include "cad/ops.hpp"
#include "cad/rng.hpp"

namespace cad::testing {

inline std::vector<const Tensor*> pointers(const std::vector<Tensor>& v) {
  std::vector<const Tensor*> out;
  for (const auto& t : v) out.push_back(&t);
  return out;
}

inline Tensor forward(OpKind op, const std::vector<Tensor>& in, const OpAttrs& attrs = {}) {
  const auto p = pointers(in);
  return evaluate_op(op, p, attrs).value;
}

// Wirtinger derivatives of every output entry with respect to entry `i` of
// input `which`, from central differences on x and y.
struct NumericPartials {
  std::vector<Complex> dz;     // dg_o/dz_i
  std::vector<Complex> dzbar;  // dg_o/dconj(z_i)
};

inline Tensor nudged(const Tensor& t, std::size_t i, Complex delta) {
  std::vector<Complex> d(t.data().begin(), t.data().end());
  d[i] += delta;
  return Tensor(t.shape(), std::move(d));
}

inline NumericPartials numeric_partials(OpKind op, const std::vector<Tensor>& in,
                                        std::size_t which, std::size_t i,
                                        const OpAttrs& attrs = {}, double h = 1e-6) {
  auto eval = [&](Complex delta) {
    std::vector<Tensor> moved = in;
    moved[which] = nudged(in[which], i, delta);
    return forward(op, moved, attrs);
  };
  const Tensor xp = eval(h), xm = eval(-h);
  const Tensor yp = eval(Complex(0, h)), ym = eval(Complex(0, -h));
  NumericPartials out;
  for (std::size_t o = 0; o < xp.size(); ++o) {
    const Complex dx = (xp[o] - xm[o]) / (2 * h);
    const Complex dy = (yp[o] - ym[o]) / (2 * h);
    out.dz.push_back(0.5 * (dx - Complex(0, 1) * dy));
    out.dzbar.push_back(0.5 * (dx + Complex(0, 1) * dy));
  }
  return out;
}

// Adjoint predicted from numeric partials:
//   sum_o nu_o dg_o/dconj(z_i) + nu_bar_o conj(dg_o/dz_i).
inline std::vector<Tensor> numeric_adjoint(OpKind op, const std::vector<Tensor>& in,
                                           const Tensor& nu_bar, const OpAttrs& attrs = {}) {
  std::vector<Tensor> out;
  for (std::size_t a = 0; a < in.size(); ++a) {
    std::vector<Complex> g(in[a].size());
    for (std::size_t i = 0; i < in[a].size(); ++i) {
      const NumericPartials p = numeric_partials(op, in, a, i, attrs);
      for (std::size_t o = 0; o < nu_bar.size(); ++o) {
        g[i] += std::conj(nu_bar[o]) * p.dzbar[o] + nu_bar[o] * std::conj(p.dz[o]);
      }
    }
    out.push_back(Tensor(in[a].shape(), std::move(g)));
  }
  return out;
}

inline double max_rel_err(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, rel_err(a[i], b[i]));
  return e;
}

}  // namespace cad::testing
