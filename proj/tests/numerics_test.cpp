// Copyright 2026 The ActLoc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "actloc/graph.hpp"
#include "actloc/optim.hpp"
#include "actloc/tensor.hpp"
#include "test_util.hpp"

namespace actloc {
namespace {

using testing::random_tensor;

TEST(Tensor, ConstructionChecksLength) {
  EXPECT_NO_THROW(Tensor(Shape{2, 3}, std::vector<double>(6, 1.0)));
  EXPECT_THROW(Tensor(Shape{2, 3}, std::vector<double>(5, 1.0)), Error);
  EXPECT_EQ(Tensor(Shape{2, 3, 4}).size(), 24u);
  EXPECT_TRUE(Tensor::scalar(3.0).is_scalar());
  EXPECT_DOUBLE_EQ(Tensor::scalar(3.0).item(), 3.0);
}

TEST(Tensor, ReshapeKeepsData) {
  Tensor t(Shape{2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor r = t.reshaped(Shape{3, 2});
  EXPECT_EQ(r.values(), t.values());
  EXPECT_THROW(t.reshaped(Shape{4, 2}), Error);
}

TEST(ParameterSet, NamesAreUniqueAndOrdered) {
  ParameterSet p;
  p.add("b", Tensor(Shape{2}));
  p.add("a", Tensor(Shape{3}));
  EXPECT_THROW(p.add("a", Tensor(Shape{1})), Error);
  ASSERT_EQ(p.names().size(), 2u);
  EXPECT_EQ(p.names()[0], "b");
  EXPECT_EQ(p.grad("a").shape(), p.value("a").shape());
  EXPECT_EQ(p.total_size(), 5u);
  EXPECT_THROW(p.value("missing"), Error);
}

TEST(Ops, ElementwiseExamples) {
  Graph g;
  Var zero = g.constant(Tensor::scalar(0.0));
  EXPECT_DOUBLE_EQ(ops::sigmoid(zero).value().item(), 0.5);
  Var x = g.constant(Tensor(Shape{2}, {2, 3}));
  Var y = g.constant(Tensor(Shape{2}, {4, 5}));
  EXPECT_EQ(ops::mul(x, y).value().values(), (std::vector<double>{8, 15}));
  for (double v : ops::sub(x, x).value().data()) EXPECT_EQ(v, 0.0);
}

TEST(Ops, ShapeMismatchNamesBothShapes) {
  Graph g;
  Var a = g.constant(Tensor(Shape{2, 3}));
  Var b = g.constant(Tensor(Shape{3, 2}));
  try {
    ops::add(a, b);
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2,3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[3,2]"), std::string::npos) << msg;
  }
}

TEST(Ops, ScalarBroadcast) {
  Graph g;
  Var a = g.constant(Tensor(Shape{3}, {1, 2, 3}));
  Var s = g.constant(Tensor::scalar(2.0));
  EXPECT_EQ(ops::mul(a, s).value().values(), (std::vector<double>{2, 4, 6}));
  EXPECT_EQ(ops::add(s, a).value().values(), (std::vector<double>{3, 4, 5}));
}

TEST(Ops, SigmoidIsStableForLargeInputs) {
  Graph g;
  Var x = g.constant(Tensor(Shape{2}, {-800.0, 800.0}));
  Tensor y = ops::sigmoid(x).value();
  EXPECT_TRUE(y.all_finite());
  EXPECT_NEAR(y[0], 0.0, 1e-300);
  EXPECT_DOUBLE_EQ(y[1], 1.0);
}

TEST(Conv2d, IdentityKernelReproducesInput) {
  std::mt19937_64 rng(1);
  Graph g;
  Tensor img = random_tensor({2, 7, 9}, rng);
  Tensor k(Shape{2, 2, 3, 3}, 0.0);
  k.data()[((0 * 2 + 0) * 3 + 1) * 3 + 1] = 1.0;
  k.data()[((1 * 2 + 1) * 3 + 1) * 3 + 1] = 1.0;
  Tensor out = ops::conv2d(g.constant(img), g.constant(k), 1).value();
  EXPECT_EQ(out, img);
}

TEST(Conv2d, ZeroKernelGivesZeros) {
  std::mt19937_64 rng(2);
  Graph g;
  Tensor out = ops::conv2d(g.constant(random_tensor({1, 5, 5}, rng)),
                           g.constant(Tensor(Shape{3, 1, 3, 3}, 0.0)), 2)
                   .value();
  EXPECT_EQ(out.shape(), (Shape{3, 3, 3}));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2d, BoxKernelOnDeltaGivesPlateau) {
  Graph g;
  Tensor img(Shape{1, 7, 7}, 0.0);
  img.at(0, 3, 3) = 1.0;
  Tensor out = ops::conv2d(g.constant(img),
                           g.constant(Tensor(Shape{1, 1, 3, 3}, 1.0 / 9.0)), 1)
                   .value();
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      const bool inside = i >= 2 && i <= 4 && j >= 2 && j <= 4;
      EXPECT_DOUBLE_EQ(out.at(0, i, j), inside ? 1.0 / 9.0 : 0.0) << i << "," << j;
    }
  }
}

TEST(Conv2d, OutputShapeIsCeilOfStride) {
  Graph g;
  Var x = g.constant(Tensor(Shape{1, 112, 112}));
  EXPECT_EQ(ops::conv2d(x, g.constant(Tensor(Shape{8, 1, 3, 3})), 2).shape(),
            (Shape{8, 56, 56}));
  Var y = g.constant(Tensor(Shape{1, 7, 5}));
  EXPECT_EQ(ops::conv2d(y, g.constant(Tensor(Shape{1, 1, 3, 3})), 2).shape(),
            (Shape{1, 4, 3}));
}

TEST(Conv2d, EvenKernelRejected) {
  Graph g;
  Var x = g.constant(Tensor(Shape{1, 6, 6}));
  EXPECT_THROW(ops::conv2d(x, g.constant(Tensor(Shape{1, 1, 2, 2})), 1), Error);
}

TEST(Softmax2d, Examples) {
  Graph g;
  Tensor u = ops::softmax2d(g.constant(Tensor(Shape{4, 5}, 3.0))).value();
  for (double v : u.data()) EXPECT_NEAR(v, 1.0 / 20.0, 1e-15);

  Tensor e(Shape{14, 14}, 0.0);
  e.at(3, 4) = 20.0;
  EXPECT_GT(softmax2d_value(e).at(3, 4), 0.999);

  std::mt19937_64 rng(3);
  Tensor r = random_tensor({6, 6}, rng, -5, 5);
  Tensor shifted = r;
  for (double& v : shifted.data()) v += 123.0;
  const Tensor a = softmax2d_value(r), b = softmax2d_value(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Softmax2d, HandlesHugeMagnitudes) {
  Tensor e(Shape{2, 2}, {1e6, 1e6 - 1.0, -1e6, 0.0});
  Tensor s = softmax2d_value(e);
  EXPECT_TRUE(s.all_finite());
  double total = 0.0;
  for (double v : s.data()) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Backward, SumGivesOnes) {
  Graph g;
  Var x = g.leaf(Tensor(Shape{3}, {1, -2, 5}));
  g.backward(ops::sum(x));
  for (double v : g.grad(x).data()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, SquareGivesTwoX) {
  Graph g;
  Tensor xv(Shape{4}, {1, -2, 0.5, 3});
  Var x = g.leaf(xv);
  g.backward(ops::sum(ops::mul(x, x)));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g.grad(x)[i], 2.0 * xv[i]);
}

TEST(Backward, NonScalarLossRejected) {
  Graph g;
  Var x = g.leaf(Tensor(Shape{3}));
  EXPECT_THROW(g.backward(x), Error);
}

TEST(Backward, ForwardValuesUntouched) {
  Graph g;
  Var x = g.leaf(Tensor(Shape{3}, {1, 2, 3}));
  Var y = ops::tanh(ops::scale(x, 0.5));
  const Tensor before = y.value();
  g.backward(ops::sum(y));
  EXPECT_EQ(y.value(), before);
}

TEST(Backward, ForeignParameterSetRejected) {
  ParameterSet a, b;
  a.add("w", Tensor(Shape{2}, 1.0));
  Graph g;
  Var w = g.parameter(a, "w");
  EXPECT_THROW(backward(g, ops::sum(w), b), Error);
  EXPECT_NO_THROW(backward(g, ops::sum(w), a));
}

TEST(Backward, NormHasZeroSubgradientAtOrigin) {
  Graph g;
  Var x = g.leaf(Tensor(Shape{3}, 0.0));
  g.backward(ops::norm(x));
  for (double v : g.grad(x).data()) EXPECT_EQ(v, 0.0);
}

// Every op against central differences through a small composite loss.
class OpGradient : public ::testing::TestWithParam<int> {};

TEST_P(OpGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(100 + GetParam());
  ParameterSet p;
  p.add("x", random_tensor({2, 4, 4}, rng));
  p.add("k", random_tensor({3, 2, 3, 3}, rng));
  p.add("b", random_tensor({3}, rng));
  p.add("m", random_tensor({4, 4}, rng));
  p.add("w", random_tensor({5, 8}, rng));
  p.add("v", random_tensor({8}, rng));
  LossBuilder f;
  switch (GetParam()) {
    case 0:  // conv, bias, sigmoid, pooling
      f = [](Graph& g, ParameterSet& ps) {
        Var c = ops::conv2d(g.parameter(ps, "x"), g.parameter(ps, "k"), 1);
        Var h = ops::sigmoid(ops::add_channel_bias(c, g.parameter(ps, "b")));
        return ops::sum(ops::mul(ops::avg_pool2d(h, 2), ops::avg_pool2d(h, 2)));
      };
      break;
    case 1:  // strided conv
      f = [](Graph& g, ParameterSet& ps) {
        Var c = ops::conv2d(g.parameter(ps, "x"), g.parameter(ps, "k"), 2);
        return ops::sum(ops::tanh(c));
      };
      break;
    case 2:  // softmax, channel reductions, maps
      f = [](Graph& g, ParameterSet& ps) {
        Var x = g.parameter(ps, "x");
        Var a = ops::softmax2d(g.parameter(ps, "m"));
        Var e = ops::mul(ops::channel_norm(x), ops::sigmoid(ops::channel_mean(x)));
        Var s = ops::spatial_sum(ops::mul_map(x, a));
        return ops::add(ops::mean(ops::mul(e, a)), ops::norm(s));
      };
      break;
    case 3:  // matvec, slice, exp, reshape
      f = [](Graph& g, ParameterSet& ps) {
        Var y = ops::matvec(g.parameter(ps, "w"), g.parameter(ps, "v"));
        Var s = ops::slice(y, 1, 3);
        Var r = ops::reshape(g.parameter(ps, "m"), Shape{16});
        return ops::add(ops::sum(ops::exp(ops::scale(s, 0.3))),
                        ops::sum(ops::mul(ops::slice(r, 2, 3), s)));
      };
      break;
    default:  // sub and broadcast mul
      f = [](Graph& g, ParameterSet& ps) {
        Var m = g.parameter(ps, "m");
        Var d = ops::sub(m, ops::softmax2d(m));
        Var s = ops::slice(g.parameter(ps, "b"), 0, 1);
        return ops::norm(ops::mul(d, ops::reshape(s, Shape{})));
      };
  }
  const GradCheckReport r = finite_diff_check(f, p, {1e-5, 16, 7});
  EXPECT_LT(r.max_rel_error, 1e-6) << r.worst_param << "[" << r.worst_index
                                   << "] analytic " << r.worst_analytic
                                   << " numeric " << r.worst_numeric;
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::Range(0, 5));

TEST(FiniteDiffCheck, QuadraticIsExact) {
  ParameterSet p;
  std::mt19937_64 rng(4);
  p.add("x", random_tensor({10}, rng));
  auto f = [](Graph& g, ParameterSet& ps) {
    Var x = g.parameter(ps, "x");
    return ops::sum(ops::mul(ops::scale(x, 3.0), x));
  };
  EXPECT_LT(finite_diff_check(f, p).max_rel_error, 1e-6);
}

TEST(FiniteDiffCheck, ConstantFunctionReportsZero) {
  ParameterSet p;
  p.add("x", Tensor(Shape{4}, 1.0));
  auto f = [](Graph& g, ParameterSet& ps) {
    g.parameter(ps, "x");
    return g.constant(Tensor::scalar(2.5));
  };
  const GradCheckReport r = finite_diff_check(f, p);
  EXPECT_EQ(r.max_rel_error, 0.0);
  EXPECT_GT(r.coordinates, 0u);
}

TEST(SgdStep, Examples) {
  ParameterSet p;
  p.add("w", Tensor(Shape{3}, {1.0, 2.0, 3.0}));
  sgd_step(p, 0.1);
  EXPECT_EQ(p.value("w").values(), (std::vector<double>{1.0, 2.0, 3.0}));

  p.grad("w").fill(1.0);
  sgd_step(p, 0.1);
  EXPECT_NEAR(p.value("w")[0], 0.9, 1e-15);
  EXPECT_NEAR(p.value("w")[2], 2.9, 1e-15);

  p.grad("w").fill(100.0);
  sgd_step(p, 0.1, 1.0);
  EXPECT_NEAR(p.value("w")[0], 0.8, 1e-15);
  for (double g : p.grad("w").data()) EXPECT_EQ(g, 0.0);
}

TEST(SgdStep, NonFiniteGradientSkipsUpdate) {
  ParameterSet p;
  p.add("a", Tensor(Shape{2}, 1.0));
  p.add("b", Tensor(Shape{2}, 1.0));
  p.grad("a").fill(1.0);
  p.grad("b")[1] = std::numeric_limits<double>::quiet_NaN();
  const SgdOutcome r = sgd_step(p, 0.1);
  EXPECT_FALSE(r.applied);
  EXPECT_EQ(p.value("a")[0], 1.0);
  for (double g : p.grad("b").data()) EXPECT_EQ(g, 0.0);
}

TEST(AdaptiveLearningRate, DampsLargeLosses) {
  AdaptiveLearningRate lr({0.1, 0.1, 0.99, true});
  EXPECT_NEAR(lr.update(10.0), 0.1 / (1.0 + 0.1 * 10.0), 1e-15);
  const double next = lr.update(0.0);
  EXPECT_NEAR(lr.ema(), 0.99 * 10.0, 1e-12);
  EXPECT_NEAR(next, 0.1 / (1.0 + 0.1 * 9.9), 1e-15);
  AdaptiveLearningRate off({0.1, 0.1, 0.99, false});
  EXPECT_EQ(off.update(50.0), 0.1);
}

TEST(Determinism, OpsAreBitwiseRepeatable) {
  std::mt19937_64 rng(5);
  const Tensor x = random_tensor({2, 8, 8}, rng);
  const Tensor k = random_tensor({4, 2, 3, 3}, rng);
  auto run = [&] {
    Graph g;
    Var y = ops::sigmoid(ops::conv2d(g.constant(x), g.leaf(k), 2));
    Var loss = ops::norm(y);
    g.backward(loss);
    return std::make_pair(y.value(), g.grad(Var{&g, 1}));
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace actloc
