// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "cad/cli/commands.hpp"

using namespace cad;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Worst conjugate defect seen across the oracle-triangle runs.
double g_worst_conjugate_defect = -1.0;

Outcome table_conformance() {
  const auto start = Clock::now();
  const cli::Report r = cli::cmd_verify_table({20, 0, 1e-5, {}});
  const double elapsed = seconds_since(start);
  double fd = 0.0, closed = 0.0;
  for (const auto& c : r.cases) {
    fd = std::max(fd, c.max_rel_err);
    closed = std::max(closed, c.extra["closed_form_err"].get<double>());
  }
  const bool pass = r.cases.size() == 14 && r.ok() && fd <= 1e-5 && closed <= 1e-12 &&
                    elapsed <= 5.0;
  return {pass, std::to_string(r.passed()) + "/14 rows, closed_form_err=" + cli::sci(closed) +
                    " fd_err=" + cli::sci(fd) + " time=" + std::to_string(elapsed) + "s"};
}

Outcome oracle_triangle() {
  const auto start = Clock::now();
  Rng rng(2);
  double fd = 0.0, pair = 0.0, split_err = 0.0, defect = 0.0;
  std::size_t runs = 0;
  for (const auto id : corpus::kLossIds) {
    for (std::size_t dims = 1; dims <= 8; ++dims) {
      for (std::size_t seq_len : {1u, 5u, 10u}) {
        if (id != "urnn_unrolled" && seq_len != 5) continue;
        const auto loss = corpus::make_loss(id, dims, rng, corpus::Restriction::None, seq_len);
        const cli::OracleComparison cmp = cli::compare_oracles(loss);
        fd = std::max(fd, cmp.fd_err);
        pair = std::max(pair, cmp.pair_err);
        split_err = std::max(split_err, cmp.split_err.value_or(0.0));
        defect = std::max(defect, cmp.conjugate_defect);
        ++runs;
      }
    }
  }
  g_worst_conjugate_defect = defect;
  const double elapsed = seconds_since(start);
  const bool pass = fd <= 1e-5 && pair <= 1e-12 && split_err <= 1e-12 && elapsed <= 30.0;
  return {pass, std::to_string(runs) + " instances, fd_err=" + cli::sci(fd) +
                    " pair_err=" + cli::sci(pair) + " split_err=" + cli::sci(split_err) +
                    " time=" + std::to_string(elapsed) + "s"};
}

Outcome real_reduction() {
  Rng rng(3);
  double worst = 0.0;
  std::size_t runs = 0;
  for (const auto id : corpus::kLossIds) {
    if (!corpus::supports_real_restriction(id)) continue;
    for (std::size_t dims = 1; dims <= 8; ++dims) {
      const auto loss = corpus::make_loss(id, dims, rng, corpus::Restriction::Real);
      const auto vg = value_and_gradients(loss.build, loss.point);
      const auto sp = split::split_real_backward(*loss.split, loss.point);
      for (std::size_t i = 0; i < vg.gradients.size(); ++i) {
        if (!vg.gradients[i].is_real()) return {false, std::string(id) + ": complex gradient"};
        for (std::size_t k = 0; k < vg.gradients[i].size(); ++k) {
          const double a = vg.gradients[i][k].real(), b = sp.gradients[i][k].real();
          worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
      }
      ++runs;
    }
  }
  return {worst <= 1e-15,
          std::to_string(runs) + " real-restricted instances, max_rel_diff=" + cli::sci(worst)};
}

Outcome loss_decrease() {
  Rng rng(4);
  const double lrs[] = {1e-2, 1e-3, 1e-4};
  double worst_margin = 0.0;   // max |ratio - 1| / (10 lr C)
  double worst_shrink = 0.0;   // max dev(next) / (dev(prev) * lr_next / lr_prev)
  std::size_t points = 0;
  std::string failure;
  for (const auto id : corpus::kLossIds) {
    for (int p = 0; p < 5; ++p) {
      const auto loss = corpus::make_loss(id, 4, rng);
      const auto vg = value_and_gradients(loss.build, loss.point);
      const double curvature = descent_curvature(loss.build, loss.point, vg.gradients, lrs[0]);
      double prev_dev = -1.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const LossDecrease d = loss_decrease_check(loss.build, loss.point, lrs[k]);
        const double dev = std::abs(d.measured / d.predicted - 1.0);
        const double margin = dev / (10.0 * lrs[k] * curvature);
        worst_margin = std::max(worst_margin, margin);
        if (margin > 1.0 && failure.empty())
          failure = std::string(id) + " lr=" + cli::sci(lrs[k]) + " outside bound";
        if (prev_dev >= 0.0) {
          const double shrink = dev / (prev_dev * lrs[k] / lrs[k - 1]);
          worst_shrink = std::max(worst_shrink, shrink);
          if (shrink > 1.5 && failure.empty())
            failure = std::string(id) + " lr=" + cli::sci(lrs[k]) + " deviation not shrinking";
        }
        prev_dev = dev;
      }
      ++points;
    }
  }
  return {failure.empty(), std::to_string(points) + " points, worst |r-1|/(10 lr C)=" +
                               cli::sci(worst_margin) + " worst shrink factor=" +
                               cli::sci(worst_shrink) + (failure.empty() ? "" : " " + failure)};
}

Outcome conjugate_pairs() {
  if (g_worst_conjugate_defect < 0.0) oracle_triangle();
  return {g_worst_conjugate_defect <= 1e-12,
          "max |second - conj(first)| over all nodes=" + cli::sci(g_worst_conjugate_defect)};
}

Outcome unitarity() {
  Rng rng(6);
  double build = 0.0;
  const std::size_t dims[] = {2, 4, 8, 16};
  for (int t = 0; t < 50; ++t) {
    const auto p = urnn::UnitaryParams::random(dims[t % 4], rng);
    build = std::max(build, unitarity_defect(urnn::build_w(p)));
  }
  const std::size_t n = 8;
  const Tensor target = rng.complex_matrix(n, n);
  const LossBuilder loss = [&](Tape& t, std::span<const Var> v) {
    const Var d = v[0] - constant(t, target);
    return sum(sum(re(conj(d) * d)));
  };
  Tensor w = urnn::build_w(urnn::UnitaryParams::random(n, rng));
  double cayley = 0.0, skew = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::vector<Tensor> point{w};
    const auto vg = value_and_gradients(loss, point);
    const Tensor a = cayley_generator(w, vg.gradients[0]);
    skew = std::max(skew, frobenius_norm(a + dagger(a)));
    w = cayley_update(w, vg.gradients[0], 0.05);
    cayley = std::max(cayley, unitarity_defect(w));
  }
  return {build <= 1e-10 && cayley <= 1e-8 && skew <= 1e-12,
          "build_w defect=" + cli::sci(build) + " cayley defect=" + cli::sci(cayley) +
              " skew defect=" + cli::sci(skew)};
}

Outcome urnn_descent() {
  cli::DemoUrnnOptions opt;
  opt.dim = 8;
  opt.seq_len = 10;
  opt.steps = 50;
  const cli::UrnnTrainingRun run = cli::train_urnn(opt);
  const double ratio = run.trace.back() / run.trace.front();
  return {ratio < 0.5, "final/initial loss=" + cli::sci(ratio) +
                           " max unitarity defect=" + cli::sci(run.max_defect)};
}

Outcome bug_detector() {
  cli::VerifyTableOptions opt;
  opt.adjoint_overrides[OpKind::Inner] = cli::fixtures::conjugated_inner_adjoint;
  const cli::Report r = cli::cmd_verify_table(opt);
  bool inner_failed = false, others_pass = true;
  double err = 0.0;
  for (const auto& c : r.cases) {
    if (c.name == "inner_product") {
      inner_failed = !c.pass;
      err = c.max_rel_err;
    } else {
      others_pass = others_pass && c.pass;
    }
  }
  return {inner_failed && others_pass,
          std::string("corrupted inner product ") + (inner_failed ? "rejected" : "accepted") +
              ", fd_err=" + cli::sci(err)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 table conformance", table_conformance},
      {"2 oracle triangle", oracle_triangle},
      {"3 real-case reduction", real_reduction},
      {"4 first-order loss decrease", loss_decrease},
      {"5 conjugate-pair invariant", conjugate_pairs},
      {"6 unitarity", unitarity},
      {"7 urnn descent", urnn_descent},
      {"8 known-bug detector", bug_detector},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
