#include <gtest/gtest.h>

#include "cad/oracles/finite_difference.hpp"
#include "cad/rng.hpp"
#include "cad/tape.hpp"

using namespace cad;

namespace {

const Complex I(0, 1);

TEST(Record, Values) {
  Tape t;
  const Var z = variable(t, Tensor::scalar({1, 1}));
  const Var w = variable(t, Tensor::scalar(2.0));
  EXPECT_EQ((z * w).value().item(), Complex(2, 2));
  EXPECT_EQ(sin(constant(t, Tensor::scalar(0.0))).value().item(), Complex(0.0));
}

TEST(Record, MatmulShape) {
  Tape t;
  const Var a = variable(t, Tensor::zeros(Shape::matrix(2, 3)));
  const Var b = variable(t, Tensor::zeros(Shape::matrix(3, 4)));
  EXPECT_EQ(matmul(a, b).shape(), Shape::matrix(2, 4));
  EXPECT_THROW(matmul(b, b), ShapeError);
}

TEST(Record, ParentsPrecedeChildren) {
  Tape t;
  const Var z = variable(t, Tensor::scalar(0.5));
  const Var f = re(exp(z) * sin(z) + z);
  for (std::size_t k = 0; k <= f.id().index; ++k)
    for (const NodeId p : t.node(NodeId{k}).parents) EXPECT_LT(p.index, k);
}

TEST(Record, DomainTagging) {
  Tape t;
  const Var x = variable(t, Tensor::real_scalar(2.0));
  const Var z = variable(t, Tensor::scalar({1, 1}));
  EXPECT_TRUE((x * x).value().is_real());
  EXPECT_FALSE((x * z).value().is_real());
  EXPECT_TRUE(re(z).value().is_real());
  EXPECT_FALSE(log(constant(t, Tensor::real_scalar(-1.0))).value().is_real());
  EXPECT_THROW(relu(z), DomainError);
}

TEST(Backward, RealPartHasUnitCotangent) {
  Tape t;
  const Var z = variable(t, Tensor::scalar({3, 4}));
  const Var f = re(z);
  EXPECT_EQ(t.backward(f.id())[z.id()].item(), Complex(1.0));
}

TEST(Backward, SquaredModulus) {
  Tape t;
  const Var z = variable(t, Tensor::scalar({1, 2}));
  const Var f = z * conj(z);
  const Complex g = t.backward(f.id())[z.id()].item();
  EXPECT_LE(std::abs(g - Complex(2, 4)), 1e-15);
  const Tensor fd = oracles::fd_gradient(
      [](const Tensor& p) { return p.item() * std::conj(p.item()); }, z.value());
  EXPECT_LE(std::abs(g - fd.item()), 1e-8);
}

TEST(Backward, ProductRealPartAgainstFiniteDifferences) {
  Tape t;
  const Var z = variable(t, Tensor::scalar({1, 1}));
  const Var w = variable(t, Tensor::scalar({2, -1}));
  const Gradients g = t.backward(re(z * w).id());
  EXPECT_LE(std::abs(g[z.id()].item() - Complex(2, 1)), 1e-15);
  EXPECT_LE(std::abs(g[w.id()].item() - Complex(1, -1)), 1e-15);

  const LossBuilder build = [](Tape&, std::span<const Var> v) { return re(v[0] * v[1]); };
  const std::vector<Tensor> point{z.value(), w.value()};
  const auto fd = oracles::fd_gradients(build, point);
  EXPECT_LE(rel_err(g[z.id()], fd[0]), 1e-8);
  EXPECT_LE(rel_err(g[w.id()], fd[1]), 1e-8);
}

TEST(Backward, UnusedLeafGetsZeros) {
  Tape t;
  const Var z = variable(t, Tensor::scalar(1.0));
  const Var unused = variable(t, Tensor::zeros(Shape::matrix(2, 3)));
  const Gradients g = t.backward(re(z).id());
  EXPECT_EQ(gradient_of(g, unused.id()).shape(), Shape::matrix(2, 3));
  EXPECT_EQ(max_abs(g[unused.id()]), 0.0);
}

TEST(Backward, OutputLeafItself) {
  Tape t;
  const Var x = variable(t, Tensor::real_scalar(4.0));
  EXPECT_EQ(t.backward(x.id())[x.id()].item(), Complex(1.0));
}

TEST(Backward, FanOutSums) {
  Tape t;
  const Var z = variable(t, Tensor::scalar({0.3, -0.7}));
  const Gradients g = t.backward((re(z) + re(z)).id());
  EXPECT_EQ(g[z.id()].item(), Complex(2.0));
}

TEST(Backward, FanOutEqualsSumOfSingleUses) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor z0 = rng.complex_scalar();
    auto single = [&](int which) {
      Tape t;
      const Var z = variable(t, z0);
      const Var a = sin(z), b = exp(z);
      const Var f = which == 0 ? re(a * constant(t, b.value()))
                               : re(constant(t, a.value()) * b);
      return t.backward(f.id())[z.id()];
    };
    Tape t;
    const Var z = variable(t, z0);
    const Gradients both = t.backward(re(sin(z) * exp(z)).id());
    EXPECT_LE(rel_err(both[z.id()], single(0) + single(1)), 1e-14);
  }
}

TEST(Backward, RealLeafGetsRealGradient) {
  Tape t;
  const Var x = variable(t, Tensor::real_scalar(0.5));
  const Var c = constant(t, Tensor::scalar({0, 2}));
  const Gradients g = t.backward(re(exp(c * x)).id());
  EXPECT_TRUE(g[x.id()].is_real());
  // d/dx Re(e^{2ix}) = -2 sin(2x)
  EXPECT_NEAR(g[x.id()].item().real(), -2.0 * std::sin(1.0), 1e-15);
}

TEST(Backward, NonRealLossIsRejected) {
  Tape t;
  const Var z = variable(t, Tensor::scalar({1, 1}));
  EXPECT_THROW(t.backward(z.id()), InvalidLossError);
  EXPECT_THROW(t.backward((z + z).id()), InvalidLossError);
  const Var v = variable(t, Tensor::zeros(Shape::vector(2)));
  EXPECT_THROW(t.backward(re(v).id()), InvalidLossError);
}

TEST(Backward, ImaginaryDustIsTolerated) {
  Tape t;
  const Var z = variable(t, Tensor::scalar({1.0, 1e-14}));
  EXPECT_NO_THROW(t.backward(z.id()));
}

TEST(Backward, LookupErrors) {
  Tape t;
  const Var z = variable(t, Tensor::scalar(1.0));
  const Var c = constant(t, Tensor::scalar(2.0));
  const Gradients g = t.backward(re(z * c).id());
  EXPECT_THROW(g[c.id()], LookupError);
  EXPECT_THROW(g[NodeId{99}], LookupError);
  EXPECT_THROW(t.node(NodeId{99}), LookupError);
}

TEST(Backward, MixingTapesIsRejected) {
  Tape a, b;
  const Var x = variable(a, Tensor::scalar(1.0));
  const Var y = variable(b, Tensor::scalar(1.0));
  EXPECT_THROW(x + y, InvalidInputError);
}

TEST(Backward, RepeatedBackwardIsIdempotent) {
  Tape t;
  const Var z = variable(t, Tensor::scalar({0.2, 0.4}));
  const Var f = re(log(z) * z);
  const Tensor g1 = t.backward(f.id())[z.id()];
  const Tensor g2 = t.backward(f.id())[z.id()];
  EXPECT_EQ(g1[0], g2[0]);
}

TEST(ValueAndGradients, MatchesManualRecording) {
  const LossBuilder build = [](Tape&, std::span<const Var> v) {
    return sum(re(conj(v[0]) * v[0]));
  };
  Rng rng(12);
  const std::vector<Tensor> point{rng.complex_vector(5)};
  const ValueAndGradients vg = value_and_gradients(build, point);
  EXPECT_LE(rel_err(vg.gradients[0], Complex(2.0) * point[0]), 1e-15);
  EXPECT_NEAR(vg.value, std::pow(frobenius_norm(point[0]), 2), 1e-14);
}

}  // namespace
