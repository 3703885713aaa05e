#include <gtest/gtest.h>

#include <cmath>

#include "cad/corpus.hpp"
#include "cad/oracles/finite_difference.hpp"
#include "cad/optim.hpp"

using namespace cad;

namespace {

const LossBuilder kAbs2 = [](Tape&, std::span<const Var> v) {
  return sum(re(conj(v[0]) * v[0]));
};

TEST(GdStep, Examples) {
  Rng rng(51);
  const Tensor p = rng.complex_vector(3);
  EXPECT_EQ(max_abs_diff(gd_step(p, Tensor::zeros(p.shape()), 0.1), p), 0.0);

  const std::vector<Tensor> z{Tensor::scalar(1.0)};
  const auto vg = value_and_gradients(kAbs2, z);
  EXPECT_EQ(vg.gradients[0].item(), Complex(2.0));
  const auto fd = oracles::fd_gradients(kAbs2, z);
  EXPECT_LE(rel_err(vg.gradients[0], fd[0]), 1e-9);
  EXPECT_NEAR(std::abs(gd_step(z[0], vg.gradients[0], 0.1).item() - 0.8), 0.0, 1e-15);
}

TEST(GdStep, GeometricConvergenceOnSquaredModulus) {
  Rng rng(52);
  const double lr = 0.1;
  std::vector<Tensor> z{rng.complex_vector(4)};
  const double f0 = value_and_gradients(kAbs2, z).value;
  for (int k = 1; k <= 20; ++k) {
    z = gd_step(z, value_and_gradients(kAbs2, z).gradients, lr);
    EXPECT_NEAR(value_and_gradients(kAbs2, z).value, std::pow(1 - 2 * lr, 2 * k) * f0,
                1e-14 * f0);
  }
}

TEST(GdStep, RealParametersStayReal) {
  const Tensor x = Tensor::real_scalar(1.0);
  const Tensor out = gd_step(x, Tensor::scalar({0.5, 3.0}), 0.1);
  EXPECT_TRUE(out.is_real());
  EXPECT_DOUBLE_EQ(out.item().real(), 0.95);
}

TEST(GdStep, Errors) {
  EXPECT_THROW(gd_step(Tensor::scalar(1.0), Tensor::zeros(Shape::vector(2)), 0.1), ShapeError);
  EXPECT_THROW(gd_step(Tensor::scalar(1.0), Tensor::scalar(1.0), 0.0), InvalidInputError);
  EXPECT_THROW((GdConfig{-1.0, 1}.validate()), InvalidInputError);
  EXPECT_THROW((GdConfig{0.1, 0}.validate()), InvalidInputError);
}

TEST(LossDecrease, Examples) {
  const std::vector<Tensor> zero{Tensor::zeros(Shape::vector(3))};
  const LossDecrease s = loss_decrease_check(kAbs2, zero, 0.1);
  EXPECT_EQ(s.measured, 0.0);
  EXPECT_EQ(s.predicted, 0.0);

  const std::vector<Tensor> z{Tensor::scalar({1, 1})};
  const LossDecrease d = loss_decrease_check(kAbs2, z, 1e-4);
  EXPECT_DOUBLE_EQ(d.predicted, -1e-4 * 8.0);
  // |z (1 - 2 lr)|^2 - |z|^2 exactly
  EXPECT_NEAR(d.measured, 2.0 * (std::pow(1 - 2e-4, 2) - 1.0), 1e-15);
}

TEST(LossDecrease, RatioApproachesOneAsStepShrinks) {
  Rng rng(53);
  for (const auto id : corpus::kLossIds) {
    const auto loss = corpus::make_loss(id, 4, rng);
    double prev = INFINITY;
    for (double lr : {1e-2, 1e-3, 1e-4}) {
      const LossDecrease d = loss_decrease_check(loss.build, loss.point, lr);
      const double dev = std::abs(d.measured / d.predicted - 1.0);
      EXPECT_LE(dev, prev * 1.0001) << id << " lr=" << lr;
      prev = dev;
    }
  }
}

TEST(LossDecrease, SmallStepsDescend) {
  Rng rng(54);
  for (const auto id : corpus::kLossIds) {
    for (int t = 0; t < 5; ++t) {
      const auto loss = corpus::make_loss(id, 1 + rng.below(6), rng);
      const auto vg = value_and_gradients(loss.build, loss.point);
      if (std::sqrt(squared_norm(vg.gradients)) <= 1e-8) continue;
      EXPECT_LT(loss_decrease_check(loss.build, loss.point, 1e-4).measured, 0.0) << id;
    }
  }
}

TEST(LossDecrease, SecondOrderRemainderIsBounded) {
  Rng rng(55);
  for (const auto id : corpus::kLossIds) {
    const auto loss = corpus::make_loss(id, 4, rng);
    std::vector<double> c;
    for (double lr = 1e-2; c.size() < 5; lr /= 2) {
      const LossDecrease d = loss_decrease_check(loss.build, loss.point, lr);
      c.push_back(std::abs(d.measured - d.predicted) / (lr * lr));
    }
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    EXPECT_LE(*hi, 2.0 * *lo + 1e-6) << id;
  }
}

TEST(Curvature, QuadraticIsExact) {
  // F = |z|^2: second derivative along -g is 2||g||^2, so C = 1.
  const std::vector<Tensor> z{Tensor::vector({{1, 2}, {-0.5, 0.3}})};
  const auto vg = value_and_gradients(kAbs2, z);
  EXPECT_NEAR(descent_curvature(kAbs2, z, vg.gradients), 1.0, 1e-8);
}

TEST(Curvature, SegmentMaximumBoundsTheDeviation) {
  // F = Re(z^3) has phi'' growing along the segment.
  const LossBuilder cubic = [](Tape&, std::span<const Var> v) { return re(v[0] * v[0] * v[0]); };
  Rng rng(60);
  for (int t = 0; t < 20; ++t) {
    const std::vector<Tensor> z{rng.complex_scalar()};
    const auto vg = value_and_gradients(cubic, z);
    const double lr = 1e-2;
    const double c = descent_curvature(cubic, z, vg.gradients, lr);
    EXPECT_GE(c, descent_curvature(cubic, z, vg.gradients) * (1 - 1e-9));
    const LossDecrease d = loss_decrease_check(cubic, z, lr);
    EXPECT_LE(std::abs(d.measured / d.predicted - 1.0), lr * c * (1 + 1e-6));
  }
}

TEST(Cayley, GeneratorIsSkewHermitian) {
  Rng rng(56);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const Tensor a = cayley_generator(rng.complex_matrix(n, n), rng.complex_matrix(n, n));
    EXPECT_LE(frobenius_norm(a + dagger(a)), 1e-12);
  }
}

TEST(Cayley, ZeroGradientLeavesWUnchanged) {
  Rng rng(57);
  const Tensor w = dft_matrix(4);
  const Tensor u = Complex(0.5) * w;  // F/sqrt(4) is unitary
  EXPECT_LE(max_abs_diff(cayley_update(u, Tensor::zeros(u.shape()), 0.3), u), 1e-15);
}

TEST(Cayley, ManyStepsStayUnitary) {
  Rng rng(58);
  const std::size_t n = 8;
  const Tensor target = rng.complex_matrix(n, n);
  const LossBuilder loss = [&](Tape& t, std::span<const Var> v) {
    const Var d = v[0] - constant(t, target);
    return sum(sum(re(conj(d) * d)));
  };
  Tensor w = Complex(1.0 / std::sqrt(double(n))) * dft_matrix(n);
  double first = 0.0, last = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::vector<Tensor> p{w};
    const auto vg = value_and_gradients(loss, p);
    if (k == 0) first = vg.value;
    last = vg.value;
    const double before = unitarity_defect(w);
    w = cayley_update(w, vg.gradients[0], 0.05);
    EXPECT_LE(unitarity_defect(w), before + 1e-12 * n);
    ASSERT_LE(unitarity_defect(w), 1e-8);
  }
  EXPECT_LT(last, first);
}

TEST(Cayley, SmallStepDescends) {
  Rng rng(59);
  const std::size_t n = 5;
  const Tensor target = rng.complex_matrix(n, n);
  const LossBuilder loss = [&](Tape& t, std::span<const Var> v) {
    return sum(sum(re(v[0] * constant(t, target))));
  };
  const std::vector<Tensor> p{Complex(1.0 / std::sqrt(double(n))) * dft_matrix(n)};
  const auto vg = value_and_gradients(loss, p);
  const std::vector<Tensor> moved{cayley_update(p[0], vg.gradients[0], 1e-3)};
  EXPECT_LT(evaluate(loss, moved).real(), vg.value);
}

TEST(Cayley, Errors) {
  const Tensor w = Tensor::identity(2);
  EXPECT_THROW(cayley_update(Complex(2.0) * w, Tensor::zeros(w.shape()), 0.1), DomainError);
  EXPECT_THROW(cayley_update(w, Tensor::zeros(w.shape()), -0.1), InvalidInputError);
  EXPECT_THROW(cayley_update(w, Tensor::zeros(Shape::matrix(3, 3)), 0.1), ShapeError);
}

}  // namespace
