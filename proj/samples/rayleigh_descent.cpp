// Finds the smallest eigenvalue of a random Hermitian matrix by gradient
// descent on the Rayleigh quotient.

#include <cstdio>

#include <Eigen/Eigenvalues>

#include "cad/optim.hpp"
#include "cad/rng.hpp"

using namespace cad;

int main() {
  const std::size_t n = 6;
  Rng rng(7);
  const Tensor m = rng.complex_matrix(n, n);
  const Tensor a = Complex(0.5) * (m + dagger(m));

  const LossBuilder rayleigh = [&](Tape& t, std::span<const Var> v) {
    const Var& z = v[0];
    return re(inner(z, matmul(constant(t, a), z))) / re(inner(z, z));
  };

  std::vector<Tensor> z{rng.complex_vector(n)};
  for (int step = 0; step <= 400; ++step) {
    const ValueAndGradients vg = value_and_gradients(rayleigh, z);
    if (step % 50 == 0) std::printf("step %3d  quotient %.12f\n", step, vg.value);
    z = gd_step(z, vg.gradients, 0.5);
  }

  Eigen::MatrixXcd dense(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dense(i, j) = a(i, j);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dense);
  std::printf("smallest eigenvalue %.12f\n", eig.eigenvalues()(0));
}
