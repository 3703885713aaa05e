// cad: command-line front end for the adjoint table, gradient checks and
// optimizer demos. JSON report on stdout, human summary on stderr.
//
// Exit codes: 0 all cases pass, 1 some case fails, 2 usage error.

#include <iostream>

#include <CLI11.hpp>

#include "cad/cli/commands.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

int emit(const cad::cli::Report& report) {
  std::cout << report.to_json().dump(2) << '\n';
  for (const auto& c : report.cases) {
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name
              << "  max_rel_err=" << cad::cli::sci(c.max_rel_err) << "  " << c.detail
              << '\n';
  }
  std::cerr << report.command << ": " << report.passed() << "/" << report.cases.size()
            << " cases passed\n";
  return report.ok() ? kPass : kFail;
}

void add_positive_check(CLI::Option* opt) { opt->check(CLI::PositiveNumber); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reverse-mode complex differentiation checks"};
  app.require_subcommand(1);

  cad::cli::VerifyTableOptions vt;
  auto* verify = app.add_subcommand("verify-table", "Check every adjoint rule");
  add_positive_check(verify->add_option("--trials", vt.trials, "Random trials per row"));
  verify->add_option("--seed", vt.seed, "RNG seed");
  add_positive_check(verify->add_option("--tol", vt.tol, "Relative tolerance"));

  cad::cli::GradcheckOptions gc;
  auto* grad = app.add_subcommand("gradcheck", "Compare the engine with all oracles");
  grad->add_option("--loss", gc.loss, "Loss id")->required();
  add_positive_check(grad->add_option("--dims", gc.dims, "Problem size"));
  add_positive_check(grad->add_option("--trials", gc.trials, "Random instances"));
  grad->add_option("--seed", gc.seed, "RNG seed");
  add_positive_check(grad->add_option("--tol", gc.tol, "Relative tolerance"));

  cad::cli::DemoGdOptions gd;
  auto* demo_gd = app.add_subcommand("demo-gd", "Gradient descent on a corpus loss");
  demo_gd->add_option("--loss", gd.loss, "Loss id")->required();
  add_positive_check(demo_gd->add_option("--lr", gd.lr, "Learning rate"));
  add_positive_check(demo_gd->add_option("--steps", gd.steps, "Number of steps"));
  demo_gd->add_option("--seed", gd.seed, "RNG seed");

  cad::cli::DemoUrnnOptions ur;
  auto* demo_urnn = app.add_subcommand("demo-urnn", "Train a small unitary RNN");
  add_positive_check(demo_urnn->add_option("--dim", ur.dim, "Hidden size"));
  add_positive_check(demo_urnn->add_option("--seq-len", ur.seq_len, "Sequence length"));
  add_positive_check(demo_urnn->add_option("--steps", ur.steps, "Training steps"));
  demo_urnn->add_option("--seed", ur.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*verify) return emit(cad::cli::cmd_verify_table(vt));
    if (*grad || *demo_gd) {
      const std::string& id = *grad ? gc.loss : gd.loss;
      if (!cad::corpus::is_known(id)) {
        std::cerr << "error: unknown loss id '" << id << "'\n";
        return kUsage;
      }
      return emit(*grad ? cad::cli::cmd_gradcheck(gc) : cad::cli::cmd_demo_gd(gd));
    }
    if (*demo_urnn) return emit(cad::cli::cmd_demo_urnn(ur));
  } catch (const cad::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const cad::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
