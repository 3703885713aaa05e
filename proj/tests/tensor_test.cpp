#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cad/linalg.hpp"
#include "cad/rng.hpp"

using namespace cad;

namespace {

const Complex I(0, 1);

TEST(Tensor, DataLengthMustMatchShape) {
  EXPECT_THROW(Tensor(Shape::vector(3), {1.0, 2.0}), ShapeError);
  EXPECT_NO_THROW(Tensor(Shape::matrix(2, 2), {1.0, 2.0, 3.0, 4.0}));
}

TEST(Tensor, RealDomainRejectsImaginaryParts) {
  EXPECT_THROW(Tensor(Shape::scalar(), {Complex(1, 1e-300)}, Domain::Real), DomainError);
  EXPECT_TRUE(Tensor::real_scalar(2.0).is_real());
}

TEST(Tensor, ItemNeedsOneElement) {
  EXPECT_EQ(Tensor::scalar(3.0).item(), Complex(3.0));
  EXPECT_THROW(Tensor::vector({1.0, 2.0}).item(), ShapeError);
}

TEST(Tensor, ConjIsAnExactInvolution) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Tensor m = rng.complex_matrix(3, 4);
    const Tensor back = conj(conj(m));
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(back[i], m[i]);
  }
}

TEST(Tensor, MatmulWithIdentity) {
  Rng rng(2);
  for (std::size_t n : {1u, 3u, 7u}) {
    const Tensor a = rng.complex_matrix(n, n);
    const Tensor eye = Tensor::identity(n);
    EXPECT_LE(max_abs_diff(matmul(a, eye), a), 1e-15);
    EXPECT_LE(max_abs_diff(matmul(eye, a), a), 1e-15);
  }
}

TEST(Tensor, MatmulShapeMismatch) {
  EXPECT_THROW(matmul(Tensor::zeros(Shape::matrix(2, 3)), Tensor::zeros(Shape::matrix(2, 3))),
               ShapeError);
}

TEST(Tensor, RelErrUsesUnitFloor) {
  EXPECT_DOUBLE_EQ(rel_err(Tensor::scalar(1e-3), Tensor::scalar(0.0)), 1e-3);
  EXPECT_DOUBLE_EQ(rel_err(Tensor::scalar(110.0), Tensor::scalar(100.0)), 0.1);
}

TEST(Dft, SmallMatrices) {
  EXPECT_EQ(dft_matrix(1)(0, 0), Complex(1.0));
  const Tensor f2 = dft_matrix(2);
  EXPECT_EQ(f2(0, 0), Complex(1.0));
  EXPECT_EQ(f2(0, 1), Complex(1.0));
  EXPECT_EQ(f2(1, 0), Complex(1.0));
  EXPECT_EQ(f2(1, 1), Complex(-1.0));
  EXPECT_LE(std::abs(dft_matrix(4)(1, 1) - (-I)), 1e-15);
}

TEST(Dft, EntriesMatchTheExponential) {
  const std::size_t n = 6;
  const Tensor f = dft_matrix(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m < n; ++m)
      EXPECT_LE(std::abs(f(k, m) - std::polar(1.0, -2 * std::numbers::pi * double(k * m) / n)),
                1e-14);
}

TEST(Dft, ZeroSizeIsInvalid) { EXPECT_THROW(dft_matrix(0), InvalidInputError); }

TEST(Dft, InverseRoundTrip) {
  for (std::size_t n = 1; n <= 64; ++n) {
    const Tensor p = matmul(dft_matrix(n), idft_matrix(n));
    EXPECT_LE(max_abs_diff(p, Tensor::identity(n)), 1e-12) << "n=" << n;
  }
}

TEST(Solve, Examples) {
  Rng rng(3);
  const Tensor b = rng.complex_matrix(3, 3);
  EXPECT_LE(max_abs_diff(solve_linear(Tensor::identity(3), b), b), 1e-15);

  const Tensor two_i = Complex(2.0) * Tensor::identity(2);
  EXPECT_LE(max_abs_diff(solve_linear(two_i, Tensor::identity(2)),
                         Complex(0.5) * Tensor::identity(2)),
            1e-15);

  const Tensor swap = Tensor::matrix(2, 2, {0.0, 1.0, 1.0, 0.0});
  const Tensor x = solve_linear(swap, Tensor::identity(2));
  EXPECT_LE(max_abs_diff(x, swap), 1e-15);
  EXPECT_LE(max_abs_diff(matmul(swap, x), Tensor::identity(2)), 1e-15);
}

TEST(Solve, RandomSystemsResidual) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(10);
    const Tensor a = rng.complex_matrix(n, n) + Complex(n) * Tensor::identity(n);
    const Tensor b = rng.complex_matrix(n, 2);
    EXPECT_LE(max_abs_diff(matmul(a, solve_linear(a, b)), b), 1e-12);
  }
}

TEST(Solve, SingularAndShapeErrors) {
  EXPECT_THROW(solve_linear(Tensor::zeros(Shape::matrix(2, 2)), Tensor::identity(2)),
               SingularMatrixError);
  EXPECT_THROW(solve_linear(Tensor::matrix(2, 2, {1.0, 2.0, 2.0, 4.0}), Tensor::identity(2)),
               SingularMatrixError);
  EXPECT_THROW(solve_linear(Tensor::zeros(Shape::matrix(2, 3)), Tensor::identity(2)),
               ShapeError);
  EXPECT_THROW(solve_linear(Tensor::identity(3), Tensor::identity(2)), ShapeError);
}

TEST(UnitarityDefect, Examples) {
  EXPECT_EQ(unitarity_defect(Tensor::identity(4)), 0.0);
  Rng rng(5);
  std::vector<Complex> d(16);
  for (std::size_t i = 0; i < 4; ++i) d[i * 4 + i] = std::polar(1.0, rng.uniform(-10, 10));
  EXPECT_LE(unitarity_defect(Tensor::matrix(4, 4, d)), 1e-15);
  EXPECT_NEAR(unitarity_defect(Complex(2.0) * Tensor::identity(2)), 3.0 * std::sqrt(2.0),
              1e-14);
  EXPECT_THROW(unitarity_defect(Tensor::zeros(Shape::matrix(2, 3))), ShapeError);
}

TEST(Rng, DeterministicPerSeed) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.bits();
    EXPECT_EQ(x, b.bits());
    EXPECT_NE(x, c.bits());
  }
}

TEST(Rng, RawStreamIsStandardMersenneTwister) {
  Rng rng(5489);
  for (int i = 0; i < 9999; ++i) rng.bits();
  EXPECT_EQ(rng.bits(), 9981545732273789042ull);
}

TEST(Rng, ConversionsFromRawBits) {
  Rng a(9), b(9);
  EXPECT_EQ(a.uniform(), static_cast<double>(b.bits() >> 11) * 0x1.0p-53);
  EXPECT_EQ(a.below(7), b.bits() % 7);
}

TEST(Rng, PermutationIsABijection) {
  Rng rng(6);
  for (std::size_t n : {1u, 2u, 9u}) {
    auto p = rng.permutation(n);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(p[i], i);
  }
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

}  // namespace
