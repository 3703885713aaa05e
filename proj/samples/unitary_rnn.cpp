// Trains a small recurrent network whose recurrence matrix stays unitary,
// once with the structured parametrization and once with a free matrix
// updated by Cayley steps.

#include <cstdio>

#include "cad/cli/commands.hpp"

using namespace cad;

int main() {
  for (bool structured : {true, false}) {
    cli::DemoUrnnOptions opt;
    opt.dim = 8;
    opt.seq_len = 10;
    opt.steps = 50;
    opt.structured = structured;
    const cli::UrnnTrainingRun run = cli::train_urnn(opt);
    std::printf("%s W\n", structured ? "structured" : "free (Cayley)");
    for (std::size_t k = 0; k < run.trace.size(); k += 10)
      std::printf("  step %2zu  loss %.6f\n", k, run.trace[k]);
    std::printf("  final loss %.6f, max unitarity defect %.2e\n", run.trace.back(),
                run.max_defect);
  }
}
