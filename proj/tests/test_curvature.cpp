#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

namespace ppwave {
namespace {

using testing::random_strict_model;

/// Slowly varying strict model; keeps nested finite differences well conditioned.
ModelSpec smooth_model(int n, std::uint64_t seed, double a0 = 0.0) {
  Rng rng(seed, 0x5);
  return build_model(n, FourierSeries(2.0 * std::numbers::pi, a0, {{0.8, 0.3}}),
                     testing::random_traceless(rng, n - 2, 1.0), ModelMode::strict);
}

TEST(Curvature, FlatModelIsFlat) {
  const ModelSpec m = build_model(6, FourierSeries::constant(0.0), Mat::Zero(4, 4), ModelMode::relaxed);
  const CurvatureBundle b = curvature_at(m, Point{0.3, 1.0, Vec::Constant(4, 2.0)});
  EXPECT_LT(b.riemann.max_abs(), 1e-12);
  EXPECT_LT(b.weyl.max_abs(), 1e-12);
  EXPECT_LT(b.ricci.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(std::abs(b.scalar), 1e-12);
}

TEST(Curvature, StrictModelIsNotConformallyFlat) {
  for (int n : {5, 6, 8}) {
    const ModelSpec m = random_strict_model(n, 40 + static_cast<std::uint64_t>(n));
    const CurvatureBundle b = curvature_at(m, Point{0.2, 0.0, Vec::Constant(n - 2, 0.5)});
    EXPECT_GT(b.weyl.max_abs(), 1e-10);
  }
}

TEST(Curvature, MatchesFiniteDifferenceOracle) {
  Rng rng(41);
  for (int n : {5, 6}) {
    const ModelSpec m = smooth_model(n, 41 + static_cast<std::uint64_t>(n), 0.4);
    for (int k = 0; k < 3; ++k) {
      const Point p = rng.point(n - 2, 3.0, 1.0, 1.0);
      const Tensor4 fd = testing::fd_riemann(m, p.coords());
      EXPECT_LT(curvature_at(m, p).riemann.max_abs_diff(fd), 1e-6);
    }
  }
}

TEST(Curvature, AlgebraicSymmetries) {
  Rng rng(42);
  for (int n : {5, 7}) {
    const ModelSpec m = random_strict_model(n, 42 + static_cast<std::uint64_t>(n));
    for (int k = 0; k < 5; ++k) {
      const Point p = rng.point(n - 2, 2.0, 2.0, 3.0);
      const CurvatureBundle b = curvature_at(m, p);
      EXPECT_LT(riemann_symmetry_residual(b.riemann), 1e-9);
      EXPECT_LT(bianchi_residual(b.riemann), 1e-9);
      EXPECT_LT(weyl_trace_residual(m, b), 1e-8);
    }
  }
}

TEST(Curvature, RicciIsTraceOfRiemann) {
  const ModelSpec m = random_strict_model(6, 43);
  const Point p{0.1, 0.0, Vec::Constant(4, 0.3)};
  const CurvatureBundle b = curvature_at(m, p);
  const Mat gi = inverse_metric_components(m, p);
  for (int c = 0; c < 6; ++c)
    for (int d = 0; d < 6; ++d) {
      double r = 0.0;
      for (int a = 0; a < 6; ++a)
        for (int e = 0; e < 6; ++e) r += gi(a, e) * b.riemann(e, c, a, d);
      EXPECT_NEAR(b.ricci(c, d), r, 1e-12);
    }
  // Ricci of a pp-wave is null: only the tt component survives.
  for (int c = 0; c < 6; ++c)
    for (int d = 0; d < 6; ++d)
      if (c != kT || d != kT) {
        EXPECT_NEAR(b.ricci(c, d), 0.0, 1e-12);
      }
  EXPECT_NEAR(b.scalar, 0.0, 1e-12);
}

TEST(Parallelism, StrictWeylParallelRiemannNot) {
  const ModelSpec m = random_strict_model(5, 44);
  std::vector<Point> pts{{0.13, 0.0, Vec::Constant(3, 1.0)}, {0.61, 1.0, (Vec(3) << 0.5, -1.0, 2.0).finished()}};
  const ParallelismResiduals r = parallelism_residuals(m, pts);
  EXPECT_LT(r.weyl_residual, 1e-5);
  EXPECT_GT(r.riemann_residual, 1e-4);
}

TEST(Parallelism, ConstantFIsLocallySymmetric) {
  const ModelSpec m = testing::relaxed_constant(5, 0.7, testing::example_model().A());
  std::vector<Point> pts{{0.3, 0.0, Vec::Constant(3, 1.0)}, {-1.2, 2.0, Vec::Constant(3, -2.0)}};
  const ParallelismResiduals r = parallelism_residuals(m, pts);
  EXPECT_LT(r.weyl_residual, 1e-5);
  EXPECT_LT(r.riemann_residual, 1e-5);
}

TEST(Parallelism, FlatIsExactlyParallel) {
  const ModelSpec m = build_model(5, FourierSeries::constant(0.0), Mat::Zero(3, 3), ModelMode::relaxed);
  const ParallelismResiduals r = parallelism_residuals(m, {Point{0.0, 0.0, Vec::Ones(3)}});
  EXPECT_LT(r.weyl_residual, 1e-10);
  EXPECT_LT(r.riemann_residual, 1e-10);
}

TEST(Parallelism, RejectsBadStepAndFarSamples) {
  const ModelSpec m = random_strict_model(5, 45);
  EXPECT_THROW((void)parallelism_residuals(m, {Point{0.0, 0.0, Vec::Zero(3)}}, 0.0), Error);
  EXPECT_THROW((void)parallelism_residuals(m, {Point{0.0, 0.0, Vec::Zero(3)}}, 2e-3), Error);
  EXPECT_THROW((void)parallelism_residuals(m, {Point{0.0, 0.0, Vec::Constant(3, 11.0)}}), Error);
}

// nabla R has a single nonzero slot, e = t, equal to f'(t) dR/df; R is affine in f, so
// dR/df is the difference of curvatures of two models whose f differ by a constant.
TEST(Parallelism, RiemannDerivativeConvergesAtSecondOrder) {
  const ModelSpec m = smooth_model(5, 46, 0.0);
  const ModelSpec shifted = smooth_model(5, 46, 1.0);
  const Point p{0.9, 0.2, (Vec(3) << 0.4, -0.6, 0.8).finished()};
  Tensor4 dRdf = curvature_at(shifted, p).riemann;
  const Tensor4 R0 = curvature_at(m, p).riemann;
  const int n = 5;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) dRdf(a, b, c, d) -= R0(a, b, c, d);
  auto error = [&](double step) {
    const auto D = covariant_derivative(m, p, step, CurvatureKind::riemann);
    double worst = 0.0;
    for (int e = 0; e < n; ++e)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
              const double exact = e == kT ? m.f(p.t, 1) * dRdf(a, b, c, d) : 0.0;
              worst = std::max(worst, std::abs(D[static_cast<std::size_t>(e)](a, b, c, d) - exact));
            }
    return worst;
  };
  const double coarse = error(1e-2), fine = error(5e-3);
  EXPECT_GT(coarse, 0.0);
  EXPECT_GE(coarse / fine, 3.0);
  EXPECT_LT(error(1e-4), 1e-6);
}

TEST(Olszak, NullDirectionSpansDistribution) {
  const ModelSpec m = random_strict_model(6, 47);
  Rng rng(47);
  int good = 0;
  for (int k = 0; k < 100; ++k) {
    const Point p = rng.point(4, 2.0, 2.0, 5.0);
    const CurvatureBundle b = curvature_at(m, p);
    bool ok = b.weyl.max_abs() > 1e-10 && olszak_check(m, p, Tangent::basis(kS, p));
    for (int i = 0; i < 4; ++i) ok = ok && !olszak_check(m, p, Tangent::basis(kX0 + i, p));
    good += ok ? 1 : 0;
  }
  EXPECT_GE(good, 95);
}

TEST(Olszak, ZeroVectorPassesTimeDirectionFails) {
  const ModelSpec m = random_strict_model(5, 48);
  const Point p{0.25, 0.0, Vec::Constant(3, 0.5)};
  EXPECT_TRUE(olszak_check(m, p, Tangent::from_components(Vec::Zero(5), p)));
  EXPECT_FALSE(olszak_check(m, p, Tangent::basis(kT, p)));
  EXPECT_GT(olszak_defect(m, curvature_at(m, p), Tangent::basis(kT, p)), 1e-3);
}

TEST(Olszak, BasePointMismatch) {
  const ModelSpec m = random_strict_model(5, 49);
  const Point p{0.0, 0.0, Vec::Zero(3)};
  const Point q{1.0, 0.0, Vec::Zero(3)};
  try {
    (void)olszak_check(m, p, Tangent::basis(kS, q));
    FAIL() << "expected BasePointMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BasePointMismatch);
  }
}

}  // namespace
}  // namespace ppwave
