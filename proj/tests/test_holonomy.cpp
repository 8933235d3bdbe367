#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

namespace ppwave {
namespace {

using testing::random_strict_model;

CurveSpec random_polyline(Rng& rng, int n, int segments) {
  CurveSpec c;
  Vec x = rng.uniform_vec(n, 1.0);
  c.vertices.push_back(x);
  for (int k = 0; k < segments; ++k) {
    x += rng.uniform_vec(n, 0.5);
    c.vertices.push_back(x);
  }
  return c;
}

double metric_defect(const ModelSpec& m, const CurveSpec& c, const Mat& P) {
  const Mat g0 = metric_components(m, c.start());
  const Mat g1 = metric_components(m, c.end());
  return (P.transpose() * g1 * P - g0).cwiseAbs().maxCoeff();
}

TEST(Transport, NullDirectionIsParallel) {
  const ModelSpec m = random_strict_model(6, 100);
  Rng rng(100);
  for (int k = 0; k < 20; ++k) {
    const Mat P = parallel_transport(m, random_polyline(rng, 6, 3));
    EXPECT_LT((P.col(kS) - Vec::Unit(6, kS)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Transport, ConstantCurveIsIdentity) {
  const ModelSpec m = random_strict_model(5, 101);
  const Vec x = Vec::Constant(5, 0.3);
  EXPECT_EQ(parallel_transport(m, CurveSpec{{x, x}}), Mat::Identity(5, 5));
  EXPECT_EQ(parallel_transport(m, CurveSpec{{x}}), Mat::Identity(5, 5));
}

TEST(Transport, ReversedCurveUndoesTransport) {
  const ModelSpec m = random_strict_model(5, 102);
  Rng rng(102);
  for (int k = 0; k < 5; ++k) {
    const CurveSpec c = random_polyline(rng, 5, 4);
    const Mat P = parallel_transport(m, c), Q = parallel_transport(m, c.reversed());
    EXPECT_LT((Q * P - Mat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Transport, PreservesMetric) {
  const ModelSpec m = random_strict_model(6, 103);
  Rng rng(103);
  for (int k = 0; k < 10; ++k) {
    const CurveSpec c = random_polyline(rng, 6, 3);
    EXPECT_LT(metric_defect(m, c, parallel_transport(m, c)), 1e-8);
  }
}

TEST(Transport, RejectsLooseTolerance) {
  const ModelSpec m = random_strict_model(5, 104);
  const Vec x = Vec::Zero(5);
  EXPECT_THROW((void)parallel_transport(m, CurveSpec{{x, x}}, 1e-6), Error);
  EXPECT_THROW((void)parallel_transport(m, CurveSpec{}), Error);
}

struct SigmaFixture : ::testing::Test {
  ModelSpec model = random_strict_model(5, 105, 0.3);
  HillSpacePtr space = make_hill_space(model);
};

TEST_F(SigmaFixture, GeneratorCurveEndpoints) {
  const CurveSpec id = generator_curve(g_identity(space));
  EXPECT_EQ(id.vertices.front(), id.vertices.back());
  const CurveSpec k1 = generator_curve(GroupElement{1, 0.0, HillSolution::zero(space)});
  EXPECT_EQ(k1.end().t, model.period());
  EXPECT_EQ(k1.end().s, 0.0);
  EXPECT_EQ(k1.end().v, Vec::Zero(3));

  const Vec dw = (Vec(3) << 0.4, -0.7, 0.2).finished();
  const GroupElement sig{0, 0.0, HillSolution(space, Vec::Unit(3, 0), dw)};
  const Point end = generator_curve(sig).end();
  EXPECT_EQ(end.t, 0.0);
  EXPECT_EQ(end.s, -dw(0));
  EXPECT_EQ(end.v, Vec::Unit(3, 0));

  Rng rng(105);
  for (int k = 0; k < 10; ++k) {
    const GroupElement g{0, rng.uniform(-1.0, 1.0), HillSolution(space, rng.uniform_vec(3, 1.0), rng.uniform_vec(3, 2.0))};
    const Point back = g_act(g_inverse(g), generator_curve(g).end());
    EXPECT_LT(back.coords().cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST_F(SigmaFixture, GeneratorCurveRejectsMixedElements) {
  try {
    (void)generator_curve(GroupElement{1, 0.5, HillSolution::zero(space)});
    FAIL() << "expected NotAGenerator";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAGenerator);
  }
}

TEST_F(SigmaFixture, TimeGeneratorsHaveTrivialHolonomy) {
  for (long long k : {1LL, 2LL, -1LL}) {
    const TransportMatrix M = quotient_transport(GroupElement{k, 0.0, HillSolution::zero(space)});
    EXPECT_LT((M.matrix - Mat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8) << k;
  }
}

TEST_F(SigmaFixture, PureCentreGeneratorIsIdentity) {
  const TransportMatrix M = quotient_transport(GroupElement{0, 1.7, HillSolution::zero(space)});
  EXPECT_LT((M.matrix - Mat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(closed_form_transport(GroupElement{0, 1.7, HillSolution::zero(space)}).matrix, Mat::Identity(5, 5));
}

TEST_F(SigmaFixture, ClosedFormEntries) {
  const double alpha = 0.35;
  const GroupElement sig{0, 0.2, HillSolution(space, Vec::Zero(3), alpha * Vec::Unit(3, 0))};
  const auto [xi1, xi2] = xi_maps(sig.u);
  EXPECT_DOUBLE_EQ(xi1, 2.0 * alpha * alpha);
  EXPECT_DOUBLE_EQ(xi2(0), 2.0 * alpha);
  EXPECT_EQ(xi2(1), 0.0);
  const TransportMatrix M = closed_form_transport(sig);
  EXPECT_DOUBLE_EQ(M.matrix(0, 1), 2.0 * alpha);
  EXPECT_DOUBLE_EQ(M.matrix(1, 4), -2.0 * alpha);
  EXPECT_DOUBLE_EQ(M.matrix(0, 4), -2.0 * alpha * alpha);
  EXPECT_EQ(M.s_fixed_residual(), 0.0);
  EXPECT_LT(M.gram_residual(), 1e-12);
  EXPECT_THROW((void)closed_form_transport(GroupElement{1, 0.0, HillSolution::zero(space)}), Error);
}

TEST_F(SigmaFixture, ClosedFormMatchesNumericAlongAxis) {
  const GroupElement sig{0, -0.4, HillSolution(space, Vec::Unit(3, 1), 0.8 * Vec::Unit(3, 0))};
  const TransportMatrix numeric = quotient_transport(sig);
  EXPECT_LT((numeric.matrix - closed_form_transport(sig).matrix).cwiseAbs().maxCoeff(), 1e-6);
}

TEST_F(SigmaFixture, SignResolutionIsUnambiguous) {
  Rng rng(106);
  std::vector<GroupElement> sigmas;
  for (int k = 0; k < 4; ++k)
    sigmas.push_back(GroupElement{0, rng.uniform(-1.0, 1.0), HillSolution(space, rng.uniform_vec(3, 1.0), rng.uniform_vec(3, 2.0))});
  const SignResolution r = resolve_sign_convention(sigmas);
  EXPECT_EQ(r.convention, SignConvention{});
  EXPECT_LT(r.max_dev, 1e-6);
  EXPECT_GT(r.runner_up_dev, 1e-2);
}

TEST_F(SigmaFixture, NumericMatchesClosedFormOnLagrangianElements) {
  Rng rng(107);
  Mat B0 = testing::random_traceless(rng, 3, 0.8);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Vec u0 = rng.uniform_vec(3, 1.0);
    const GroupElement sig{0, rng.uniform(-1.0, 1.0), HillSolution(space, u0, B0 * u0)};
    const TransportMatrix numeric = quotient_transport(sig);
    worst = std::max(worst, (numeric.matrix - closed_form_transport(sig).matrix).cwiseAbs().maxCoeff());
    EXPECT_LT(numeric.gram_residual(), 1e-7);
    EXPECT_LT(numeric.s_fixed_residual(), 1e-9);
    EXPECT_LT(numeric.orthogonal_block_residual(), 1e-6);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST_F(SigmaFixture, CommutingGeneratorsHaveCommutingTransports) {
  Rng rng(108);
  Mat B0 = testing::random_traceless(rng, 3, 0.5);
  const Vec a0 = rng.uniform_vec(3, 1.0), b0 = rng.uniform_vec(3, 1.0);
  const Mat A = quotient_transport(GroupElement{0, 0.3, HillSolution(space, a0, B0 * a0)}).matrix;
  const Mat B = quotient_transport(GroupElement{0, -0.6, HillSolution(space, b0, B0 * b0)}).matrix;
  EXPECT_LT((A * B - B * A).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Loops, SNullPlaneLoopsAreTrivial) {
  const ModelSpec m = random_strict_model(6, 109);
  Rng rng(109);
  for (int k = 0; k < 10; ++k) {
    const Point base = rng.point(4, 1.0, 2.0, 2.0);
    const LoopResult r = loop_holonomy(m, base, kS, kX0 + rng.uniform_int(0, 3), 0.5);
    EXPECT_LT((r.matrix.matrix - Mat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

// Around a small counter-clockwise loop in the (a, b) plane, P = I - R^e_{cab} h^2 + O(h^3).
TEST(Loops, SecondOrderExpansionOracle) {
  const ModelSpec m = build_model(5, FourierSeries(2.0 * std::numbers::pi, 0.3, {{0.8, 0.3}}),
                                  testing::example_model().A(), ModelMode::strict);
  const Point base{0.5, 0.0, (Vec(3) << 0.6, -0.4, 0.9).finished()};
  const Tensor4 Rdown = testing::fd_riemann(m, base.coords());
  const Mat gi = metric_components(m, base).inverse();
  for (int i = 0; i < 3; ++i) {
    const int a = kT, b = kX0 + i;
    Mat R(5, 5);
    for (int e = 0; e < 5; ++e)
      for (int c = 0; c < 5; ++c) {
        double v = 0.0;
        for (int f = 0; f < 5; ++f) v += gi(e, f) * Rdown(f, c, a, b);
        R(e, c) = v;
      }
    auto defect = [&](double h) {
      const Mat P = parallel_transport(m, rectangle_loop(base, a, b, h));
      return ((P - Mat::Identity(5, 5)) / (h * h) + R).cwiseAbs().maxCoeff();
    };
    const double scale = R.cwiseAbs().maxCoeff();
    EXPECT_GT(scale, 0.1);
    const double d1 = defect(2e-2), d2 = defect(1e-2);
    EXPECT_LT(d2, 0.05 * scale);
    EXPECT_LT(d2, 0.75 * d1);
  }
}

TEST(Loops, TimeFiberLoopsGiveTranslationsOnly) {
  const ModelSpec m = random_strict_model(5, 110);
  const Point base{0.3, 0.0, Vec::Constant(3, 1.0)};
  const LoopResult r = loop_holonomy(m, base, kT, kX0, 0.3);
  EXPECT_LT(r.s_dev, 1e-9);
  EXPECT_LT(r.block_dev, 1e-6);
  EXPECT_LT(r.gram_dev, 1e-7);
  EXPECT_GT(r.matrix.translation_norm(), 1e-3);
  EXPECT_TRUE(r.pass);
}

TEST(Loops, SamplerStaysInTranslationBlock) {
  const ModelSpec m = random_strict_model(6, 111);
  const HolonomyReport r = holonomy_sampler(m, 20, 0.5, 111);
  EXPECT_EQ(r.count, 20);
  EXPECT_EQ(r.pass_rate, 1.0);
  EXPECT_LT(r.max_s_dev, 1e-9);
  EXPECT_LT(r.max_block_dev, 1e-6);
  EXPECT_LT(r.max_gram_dev, 1e-7);
  EXPECT_THROW((void)holonomy_sampler(m, 1, 1.5, 1), Error);
}

TEST(Loops, DeviationShrinksQuadratically) {
  const ModelSpec m = random_strict_model(5, 112);
  const Point base{0.2, 0.0, Vec::Constant(3, 0.7)};
  auto dev = [&](double h) {
    return (loop_holonomy(m, base, kT, kX0 + 1, h).matrix.matrix - Mat::Identity(5, 5)).cwiseAbs().maxCoeff();
  };
  const double big = dev(0.1), small = dev(0.05);
  EXPECT_GT(big / small, 3.0);
  EXPECT_LT(big / small, 5.0);
}

}  // namespace
}  // namespace ppwave
