#pragma once

// The four commands of the `cad` tool. Each returns a Report; the tool
// prints it as JSON and maps Report::ok() to the exit code.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "cad/cli/report.hpp"
#include "cad/corpus.hpp"
#include "cad/optim.hpp"
#include "cad/oracles/finite_difference.hpp"
#include "cad/oracles/pair_mode.hpp"

namespace cad::cli {

// Agreement required between routes that are algebraically identical
// (closed form vs implementation, simplified vs pair mode, split-real).
inline constexpr double kExactTol = 1e-12;

inline std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// verify-table

// One row of the adjoint table: a random input generator and the closed-form
// backward rule nu_bar -> (input cotangents).
struct TableRow {
  std::string name;
  OpKind op;
  std::function<std::vector<Tensor>(Rng&)> inputs;
  std::function<std::vector<Tensor>(std::span<const Tensor>, const Tensor&)> closed_form;
};

namespace detail {

inline Complex cis(double angle) { return std::polar(1.0, angle); }

inline Tensor scalar_away_from_zero(Rng& rng) {
  return Tensor::scalar(rng.complex_away_from_zero(0.3));
}

}  // namespace detail

inline std::vector<TableRow> adjoint_table() {
  using V = std::vector<Tensor>;
  using S = std::span<const Tensor>;
  auto scalar = [](Rng& r) { return V{r.complex_scalar()}; };
  auto two_scalars = [](Rng& r) { return V{r.complex_scalar(), r.complex_scalar()}; };
  auto cz = [](const Tensor& t) { return std::conj(t.item()); };
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<TableRow> rows;
  rows.push_back({"sine", OpKind::Sin, scalar, [=](S in, const Tensor& nb) {
                    return V{Tensor::scalar(nb.item() * std::cos(cz(in[0])))};
                  }});
  rows.push_back({"scalar_exponential", OpKind::Exp, scalar,
                  [=](S in, const Tensor& nb) {
                    return V{Tensor::scalar(nb.item() * std::exp(cz(in[0])))};
                  }});
  rows.push_back({"scalar_logarithm", OpKind::Log,
                  [](Rng& r) { return V{detail::scalar_away_from_zero(r)}; },
                  [=](S in, const Tensor& nb) {
                    return V{Tensor::scalar(nb.item() / cz(in[0]))};
                  }});
  rows.push_back({"scalar_addition", OpKind::Add, two_scalars,
                  [](S, const Tensor& nb) { return V{nb, nb}; }});
  rows.push_back({"scalars_multiplication", OpKind::Mul, two_scalars,
                  [=](S in, const Tensor& nb) {
                    return V{Tensor::scalar(nb.item() * cz(in[1])),
                             Tensor::scalar(nb.item() * cz(in[0]))};
                  }});
  rows.push_back({"scalars_division", OpKind::Div,
                  [](Rng& r) {
                    Tensor z = r.complex_scalar();
                    return V{z, detail::scalar_away_from_zero(r)};
                  },
                  [=](S in, const Tensor& nb) {
                    const Complex wb = cz(in[1]);
                    return V{Tensor::scalar(nb.item() / wb),
                             Tensor::scalar(-nb.item() * cz(in[0]) / (wb * wb))};
                  }});
  rows.push_back({"real_part", OpKind::Re, scalar, [](S, const Tensor& nb) {
                    return V{Tensor::scalar(nb.item().real())};
                  }});
  rows.push_back({"imaginary_part", OpKind::Im, scalar, [](S, const Tensor& nb) {
                    return V{Tensor::scalar(Complex(0, 1) * nb.item().real())};
                  }});
  rows.push_back({"absolute_value", OpKind::Abs,
                  [](Rng& r) { return V{detail::scalar_away_from_zero(r)}; },
                  [](S in, const Tensor& nb) {
                    const Complex z = in[0].item();
                    const Complex nu = std::conj(nb.item());
                    return V{Tensor::scalar(nu.real() * z / std::abs(z))};
                  }});
  rows.push_back({"inner_product", OpKind::Inner,
                  [](Rng& r) {
                    const std::size_t n = 1 + r.below(6);
                    return V{r.complex_vector(n), r.complex_vector(n)};
                  },
                  [](S in, const Tensor& nb) {
                    const Complex nu = std::conj(nb.item());
                    std::vector<Complex> dz, dw;
                    for (std::size_t i = 0; i < in[0].size(); ++i) {
                      dz.push_back(nu * in[1][i]);
                      dw.push_back(nb.item() * in[0][i]);
                    }
                    return V{Tensor::vector(dz), Tensor::vector(dw)};
                  }});
  rows.push_back({"outer_product", OpKind::Outer,
                  [](Rng& r) {
                    const std::size_t n = 1 + r.below(5), m = 1 + r.below(5);
                    return V{r.complex_vector(n), r.complex_vector(m)};
                  },
                  [](S in, const Tensor& nb) {
                    const std::size_t n = in[0].size(), m = in[1].size();
                    std::vector<Complex> dz(n), dw(m);
                    for (std::size_t i = 0; i < n; ++i) {
                      for (std::size_t j = 0; j < m; ++j) {
                        dz[i] += nb(i, j) * std::conj(in[1][j]);
                        dw[j] += std::conj(in[0][i]) * nb(i, j);
                      }
                    }
                    return V{Tensor::vector(dz), Tensor::vector(dw)};
                  }});
  rows.push_back({"matrix_multiplication", OpKind::Matmul,
                  [](Rng& r) {
                    const std::size_t n = 1 + r.below(4), k = 1 + r.below(4),
                                      m = 1 + r.below(4);
                    return V{r.complex_matrix(n, k), r.complex_matrix(k, m)};
                  },
                  [](S in, const Tensor& nb) {
                    const Tensor &z = in[0], &w = in[1];
                    const std::size_t n = z.rows(), k = z.cols(), m = w.cols();
                    std::vector<Complex> dz(n * k), dw(k * m);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t j = 0; j < k; ++j)
                        for (std::size_t c = 0; c < m; ++c) {
                          dz[i * k + j] += nb(i, c) * std::conj(w(j, c));
                          dw[j * m + c] += std::conj(z(i, j)) * nb(i, c);
                        }
                    return V{Tensor::matrix(n, k, dz), Tensor::matrix(k, m, dw)};
                  }});
  rows.push_back({"fourier", OpKind::Dft,
                  [](Rng& r) { return V{r.complex_vector(1 + r.below(8))}; },
                  [=](S in, const Tensor& nb) {
                    const std::size_t n = in[0].size();
                    std::vector<Complex> out(n);
                    for (std::size_t m = 0; m < n; ++m)
                      for (std::size_t k = 0; k < n; ++k)
                        out[m] += nb[k] * detail::cis(two_pi * double(k * m) / double(n));
                    return V{Tensor::vector(out)};
                  }});
  rows.push_back({"inverse_fourier", OpKind::Idft,
                  [](Rng& r) { return V{r.complex_vector(1 + r.below(8))}; },
                  [=](S in, const Tensor& nb) {
                    const std::size_t n = in[0].size();
                    std::vector<Complex> out(n);
                    for (std::size_t k = 0; k < n; ++k) {
                      for (std::size_t m = 0; m < n; ++m)
                        out[k] += nb[m] * detail::cis(-two_pi * double(k * m) / double(n));
                      out[k] /= double(n);
                    }
                    return V{Tensor::vector(out)};
                  }});
  return rows;
}

namespace fixtures {

// The inner-product adjoint with nu_bar in the first slot, the convention
// error that yields wrong gradients for complex losses. Used to show that
// verify-table catches it.
inline std::vector<Tensor> conjugated_inner_adjoint(const AdjointContext& c,
                                                    const Tensor& nu_bar) {
  const Complex nb = nu_bar.item();
  return {nb * c.saved[1], nb * c.saved[0]};
}

}  // namespace fixtures

struct VerifyTableOptions {
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double tol = 1e-5;
  std::map<OpKind, AdjointFn> adjoint_overrides;
};

// max_rel_err is the finite-difference error (gated by tol); the
// closed-form error is reported as closed_form_err and gated by kExactTol.
inline Report cmd_verify_table(const VerifyTableOptions& opt) {
  if (opt.trials == 0) throw InvalidInputError("verify-table: trials must be >= 1");
  Report report{"verify-table", opt.seed, opt.tol, {}};
  Rng rng(opt.seed);

  for (const TableRow& row : adjoint_table()) {
    const auto override_it = opt.adjoint_overrides.find(row.op);
    const AdjointFn adjoint =
        override_it == opt.adjoint_overrides.end() ? nullptr : override_it->second;
    double closed_err = 0.0, fd_err = 0.0;
    std::string failure;
    for (std::size_t t = 0; t < opt.trials; ++t) {
      const std::vector<Tensor> in = row.inputs(rng);
      std::vector<const Tensor*> ptrs;
      for (const auto& x : in) ptrs.push_back(&x);
      const Tensor value = evaluate_op(row.op, ptrs).value;
      const Tensor nu_bar = rng.complex_vector(value.size()).reshaped(value.shape());

      try {
        const std::vector<Tensor> impl = apply_adjoint(row.op, ptrs, nu_bar, {}, adjoint);
        const std::vector<Tensor> closed = row.closed_form(in, nu_bar);
        // F(inputs) = Re sum_o conj(nu_bar_o) g_o(inputs) has gradient adjoint(nu_bar).
        const auto wrapper = [&](std::span<const Tensor> args) {
          std::vector<const Tensor*> p;
          for (const auto& x : args) p.push_back(&x);
          const Tensor g = evaluate_op(row.op, p).value;
          Complex acc = 0.0;
          for (std::size_t o = 0; o < g.size(); ++o) acc += std::conj(nu_bar[o]) * g[o];
          return Complex(acc.real());
        };
        const std::vector<Tensor> fd = oracles::fd_gradients(wrapper, in);
        for (std::size_t s = 0; s < in.size(); ++s) {
          closed_err = std::max(closed_err, rel_err(impl[s], closed[s]));
          fd_err = std::max(fd_err, rel_err(impl[s], fd[s]));
        }
      } catch (const Error& e) {
        failure = e.what();
        closed_err = fd_err = INFINITY;
      }
    }
    Case c;
    c.name = row.name;
    c.max_rel_err = fd_err;
    c.pass = fd_err <= opt.tol && closed_err <= kExactTol;
    c.detail = "op=" + std::string(descriptor(row.op).name) +
               " trials=" + std::to_string(opt.trials) +
               " closed_form_err=" + sci(closed_err) + " fd_err=" + sci(fd_err) +
               (failure.empty() ? "" : " error=" + failure);
    c.extra["closed_form_err"] = closed_err;
    report.cases.push_back(std::move(c));
  }
  report.sort_cases();
  return report;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckOptions {
  std::string loss;
  std::size_t dims = 4;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  double tol = 1e-5;
  std::size_t seq_len = 5;
};

struct OracleComparison {
  double fd_err = 0.0;
  double pair_err = 0.0;
  double conjugate_defect = 0.0;
  std::optional<double> split_err;
  std::optional<double> analytic_err;
};

// Engine gradient against finite differences, conjugate-pair mode and (when
// available) the split-real backend, for one corpus instance.
inline OracleComparison compare_oracles(const corpus::CorpusLoss& loss) {
  OracleComparison out;
  const Recording rec = record_loss(loss.build, loss.point);
  const Gradients grads = rec.tape->backward(rec.output);
  const oracles::PairGradients pairs = oracles::pair_backward(*rec.tape, rec.output);
  const std::vector<Tensor> fd = oracles::fd_gradients(loss.build, loss.point);
  std::optional<split::SplitGradients> sp;
  if (loss.split) sp = split::split_real_backward(*loss.split, loss.point);

  out.conjugate_defect = pairs.max_conjugate_defect();
  for (std::size_t i = 0; i < rec.inputs.size(); ++i) {
    const NodeId id = rec.inputs[i].id();
    const Tensor& g = grads[id];
    out.fd_err = std::max(out.fd_err, rel_err(g, fd[i]));
    out.pair_err = std::max(out.pair_err, rel_err(g, pairs[id].second));
    if (sp) out.split_err = std::max(out.split_err.value_or(0.0), rel_err(g, sp->gradients[i]));
  }
  if (loss.id == "abs2") {
    out.analytic_err = rel_err(grads[rec.inputs[0].id()], Complex(2.0) * loss.point[0]);
  }
  return out;
}

inline std::string trial_name(const std::string& loss, std::size_t t) {
  std::string idx = std::to_string(t);
  idx.insert(0, idx.size() < 3 ? 3 - idx.size() : 0, '0');
  return loss + "/trial" + idx;
}

inline Report cmd_gradcheck(const GradcheckOptions& opt) {
  if (!corpus::is_known(opt.loss)) {
    throw InvalidInputError("unknown loss id '" + opt.loss + "'");
  }
  if (opt.trials == 0) throw InvalidInputError("gradcheck: trials must be >= 1");
  Report report{"gradcheck", opt.seed, opt.tol, {}};
  Rng rng(opt.seed);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    const corpus::CorpusLoss loss =
        corpus::make_loss(opt.loss, opt.dims, rng, corpus::Restriction::None, opt.seq_len);
    Case c;
    c.name = trial_name(opt.loss, t);
    try {
      const OracleComparison cmp = compare_oracles(loss);
      c.max_rel_err = cmp.fd_err;
      c.pass = cmp.fd_err <= opt.tol && cmp.pair_err <= kExactTol &&
               cmp.conjugate_defect <= kExactTol &&
               cmp.split_err.value_or(0.0) <= kExactTol &&
               cmp.analytic_err.value_or(0.0) <= kExactTol;
      c.detail = "fd_err=" + sci(cmp.fd_err) + " pair_err=" + sci(cmp.pair_err) +
                 " conjugate_defect=" + sci(cmp.conjugate_defect) + " split_err=" +
                 (cmp.split_err ? sci(*cmp.split_err) : std::string("n/a"));
      c.extra["fd_err"] = cmp.fd_err;
      c.extra["pair_err"] = cmp.pair_err;
      c.extra["conjugate_defect"] = cmp.conjugate_defect;
      c.extra["split_err"] = cmp.split_err ? Json(*cmp.split_err) : Json(nullptr);
      if (cmp.analytic_err) c.extra["analytic_err"] = *cmp.analytic_err;
    } catch (const Error& e) {
      c.max_rel_err = INFINITY;
      c.pass = false;
      c.detail = std::string("error: ") + e.what();
    }
    report.cases.push_back(std::move(c));
  }
  report.sort_cases();
  return report;
}

// ---------------------------------------------------------------------------
// demo-gd

struct DemoGdOptions {
  std::string loss;
  double lr = 0.1;
  std::size_t steps = 20;
  std::uint64_t seed = 0;
  std::size_t dims = 4;
  bool zero_start = false;
};

inline constexpr double kDivergence = 1e12;

inline std::string join_trace(const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) os << (i ? "," : "") << trace[i];
  return os.str();
}

inline Report cmd_demo_gd(const DemoGdOptions& opt) {
  if (!corpus::is_known(opt.loss)) {
    throw InvalidInputError("unknown loss id '" + opt.loss + "'");
  }
  GdConfig{opt.lr, opt.steps}.validate();
  Report report{"demo-gd", opt.seed, std::nullopt, {}};
  Rng rng(opt.seed);
  corpus::CorpusLoss loss = corpus::make_loss(opt.loss, opt.dims, rng);
  if (opt.zero_start) {
    for (auto& t : loss.point) t = Tensor::zeros(t.shape(), t.domain());
  }

  std::vector<double> trace;
  std::vector<Tensor> point = loss.point;
  bool diverged = false;
  std::string failure;
  try {
    for (std::size_t s = 0;; ++s) {
      const ValueAndGradients vg = value_and_gradients(loss.build, point);
      trace.push_back(vg.value);
      if (!std::isfinite(vg.value) || std::abs(vg.value) > kDivergence) {
        diverged = true;
        break;
      }
      if (s == opt.steps) break;
      point = gd_step(point, vg.gradients, opt.lr);
    }
  } catch (const Error& e) {
    failure = e.what();
  }

  // Monotone decrease, allowing rounding at the last few digits.
  std::size_t violations = 0;
  double worst_increase = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double rise = (trace[i] - trace[i - 1]) / std::max(1.0, std::abs(trace[i - 1]));
    worst_increase = std::max(worst_increase, rise);
    if (rise > 1e-12) ++violations;
  }
  Case mono{"descent", worst_increase, violations == 0 && failure.empty(),
            "violations=" + std::to_string(violations) + " trace=" + join_trace(trace) +
                (failure.empty() ? "" : " error=" + failure),
            Json::object()};
  mono.extra["violations"] = violations;
  mono.extra["trace"] = trace;
  report.cases.push_back(std::move(mono));

  Case div{"divergence", diverged ? INFINITY : 0.0, !diverged && failure.empty(),
           diverged ? "loss exceeded 1e12" : "bounded", Json::object()};
  report.cases.push_back(std::move(div));

  // First-order prediction at step 0: ratio = dF / (-lr ||g||^2) is within
  // 10 lr C of 1, C the largest normalized curvature on the step segment.
  Case ratio{"step0_ratio", 0.0, true, "", Json::object()};
  if (failure.empty()) {
    const LossDecrease d = loss_decrease_check(loss.build, loss.point, opt.lr);
    if (d.predicted == 0.0) {
      ratio.detail = "stationary start";
    } else {
      const ValueAndGradients vg = value_and_gradients(loss.build, loss.point);
      const double curvature = descent_curvature(loss.build, loss.point, vg.gradients, opt.lr);
      const double r = d.measured / d.predicted;
      ratio.max_rel_err = std::abs(r - 1.0);
      ratio.pass = ratio.max_rel_err <= 10.0 * opt.lr * curvature;
      ratio.detail = "ratio=" + std::to_string(r) + " bound=" +
                     sci(10.0 * opt.lr * curvature);
      ratio.extra["ratio"] = r;
      ratio.extra["curvature"] = curvature;
    }
  } else {
    ratio.pass = false;
    ratio.detail = "error: " + failure;
  }
  report.cases.push_back(std::move(ratio));
  report.sort_cases();
  return report;
}

// ---------------------------------------------------------------------------
// demo-urnn

struct DemoUrnnOptions {
  std::size_t dim = 8;
  std::size_t seq_len = 10;
  std::size_t steps = 50;
  std::uint64_t seed = 0;
  double lr = 0.05;
  bool structured = false;  // false: free unitary W with Cayley updates
};

struct UrnnTrainingRun {
  std::vector<double> trace;
  double final_defect = 0.0;
  double max_defect = 0.0;
};

inline UrnnTrainingRun train_urnn(const DemoUrnnOptions& opt) {
  GdConfig{opt.lr, opt.steps}.validate();
  if (opt.dim == 0 || opt.seq_len == 0) {
    throw InvalidInputError("demo-urnn: dim and seq-len must be positive");
  }
  Rng rng(opt.seed);
  const urnn::SequenceTask task =
      urnn::make_task(opt.dim, opt.dim, opt.dim, opt.seq_len, rng);
  urnn::RnnParams params =
      urnn::RnnParams::random(opt.dim, opt.dim, opt.dim, rng, opt.structured);

  UrnnTrainingRun run;
  for (std::size_t s = 0;; ++s) {
    const LossBuilder loss = urnn::sequence_loss_builder(params, task.inputs, task.targets);
    const std::vector<Tensor> tensors = params.tensors();
    const ValueAndGradients vg = value_and_gradients(loss, tensors);
    run.trace.push_back(vg.value);
    const double defect = unitarity_defect(params.w_matrix());
    run.final_defect = defect;
    run.max_defect = std::max(run.max_defect, defect);
    if (s == opt.steps) break;

    std::vector<Tensor> next = gd_step(tensors, vg.gradients, opt.lr);
    if (!params.structured()) next[0] = cayley_update(tensors[0], vg.gradients[0], opt.lr);
    params = params.with_tensors(next);
  }
  return run;
}

inline Report cmd_demo_urnn(const DemoUrnnOptions& opt) {
  Report report{"demo-urnn", opt.seed, std::nullopt, {}};
  const UrnnTrainingRun run = train_urnn(opt);
  const double ratio = run.trace.back() / run.trace.front();
  Case descent{"loss_halved", ratio, ratio < 0.5,
               "final/initial=" + std::to_string(ratio) + " trace=" + join_trace(run.trace),
               Json::object()};
  descent.extra["initial_loss"] = run.trace.front();
  descent.extra["final_loss"] = run.trace.back();
  descent.extra["trace"] = run.trace;
  report.cases.push_back(std::move(descent));

  Case unitary{"unitarity", run.max_defect, run.max_defect <= 1e-8,
               "max unitarity defect over the run=" + sci(run.max_defect), Json::object()};
  report.cases.push_back(std::move(unitary));
  report.sort_cases();
  return report;
}

}  // namespace cad::cli
