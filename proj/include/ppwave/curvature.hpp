#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ppwave/model.hpp"

namespace ppwave {

/// Dense rank-4 component array T_{abcd} over n coordinates.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int n() const { return n_; }
  double& operator()(int a, int b, int c, int d) { return data_[index(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return data_[index(a, b, c, d)]; }
  const std::vector<double>& data() const { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  double max_abs_diff(const Tensor4& o) const {
    double m = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k) m = std::max(m, std::abs(data_[k] - o.data_[k]));
    return m;
  }

 private:
  std::size_t index(int a, int b, int c, int d) const {
    return static_cast<std::size_t>(((a * n_ + b) * n_ + c) * n_ + d);
  }

  int n_ = 0;
  std::vector<double> data_;
};

struct CurvatureBundle {
  Point point;
  Tensor4 riemann;  // R_{abcd}, all indices down
  Mat ricci;        // R_{bd} = R^a_{bad}
  double scalar = 0.0;
  Tensor4 weyl;  // W_{abcd}
};

namespace detail {

/// d Gamma^a_{bc} / dx^d for each d. Gamma is linear in (d_t kappa, grad kappa), so the
/// derivative table has the same sparsity with the differentiated coefficients.
inline std::vector<ChristoffelTable> christoffel_derivatives(const ModelSpec& model, const Point& p) {
  const int n = model.n();
  const int m = model.fiber_dim();
  std::vector<ChristoffelTable> out;
  out.reserve(static_cast<std::size_t>(n));
  // d/dt
  {
    Vec g(m);
    for (int i = 0; i < m; ++i) g(i) = eval_kappa(model, p, Partial::tx(i));
    out.emplace_back(eval_kappa(model, p, Partial::tt()), std::move(g));
  }
  // d/ds: kappa has no s dependence
  out.emplace_back(0.0, Vec::Zero(m));
  for (int j = 0; j < m; ++j) {
    Vec g(m);
    for (int i = 0; i < m; ++i) g(i) = eval_kappa(model, p, Partial::xx(i, j));
    out.emplace_back(eval_kappa(model, p, Partial::tx(j)), std::move(g));
  }
  return out;
}

}  // namespace detail

/**
 * Riemann, Ricci, scalar and Weyl curvature at a point from the analytic Christoffel
 * symbols and their analytic first derivatives.
 *
 * Convention: R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb} + Gamma^a_{ce} Gamma^e_{db}
 * - Gamma^a_{de} Gamma^e_{cb}, lowered on the first index.
 */
inline CurvatureBundle curvature_at(const ModelSpec& model, const Point& p) {
  detail::check_point(model, p);
  const int n = model.n();
  const auto G = christoffel_at(model, p).dense();
  const auto dG = detail::christoffel_derivatives(model, p);
  auto gam = [&](int a, int b, int c) { return G[static_cast<std::size_t>((a * n + b) * n + c)]; };

  Tensor4 up(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double r = dG[static_cast<std::size_t>(c)](a, d, b) - dG[static_cast<std::size_t>(d)](a, c, b);
          for (int e = 0; e < n; ++e) r += gam(a, c, e) * gam(e, d, b) - gam(a, d, e) * gam(e, c, b);
          up(a, b, c, d) = r;
        }

  const Mat g = metric_components(model, p);
  const Mat gi = inverse_metric_components(model, p);

  CurvatureBundle out;
  out.point = p;
  out.riemann = Tensor4(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double r = 0.0;
          for (int e = 0; e < n; ++e) r += g(a, e) * up(e, b, c, d);
          out.riemann(a, b, c, d) = r;
        }

  out.ricci = Mat::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      double r = 0.0;
      for (int a = 0; a < n; ++a) r += up(a, b, a, d);
      out.ricci(b, d) = r;
    }
  out.scalar = (gi.cwiseProduct(out.ricci)).sum();

  const double nn = static_cast<double>(n);
  const Mat& Ric = out.ricci;
  out.weyl = Tensor4(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double ric_part = (Ric(a, c) * g(b, d) - Ric(a, d) * g(b, c) + Ric(b, d) * g(a, c) -
                                   Ric(b, c) * g(a, d)) /
                                  (nn - 2.0);
          const double scal_part =
              out.scalar * (g(a, c) * g(b, d) - g(a, d) * g(b, c)) / ((nn - 1.0) * (nn - 2.0));
          out.weyl(a, b, c, d) = out.riemann(a, b, c, d) - ric_part + scal_part;
        }
  return out;
}

/// Largest violation of R_{abcd} = -R_{bacd} = -R_{abdc} = R_{cdab}.
inline double riemann_symmetry_residual(const Tensor4& R) {
  const int n = R.n();
  double m = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double r = R(a, b, c, d);
          m = std::max({m, std::abs(r + R(b, a, c, d)), std::abs(r + R(a, b, d, c)),
                        std::abs(r - R(c, d, a, b))});
        }
  return m;
}

/// Largest |R_{abcd} + R_{acdb} + R_{adbc}|.
inline double bianchi_residual(const Tensor4& R) {
  const int n = R.n();
  double m = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) m = std::max(m, std::abs(R(a, b, c, d) + R(a, c, d, b) + R(a, d, b, c)));
  return m;
}

/// Largest single trace g^{ac} W_{abcd} (all other traces follow by symmetry).
inline double weyl_trace_residual(const ModelSpec& model, const CurvatureBundle& bundle) {
  const int n = model.n();
  const Mat gi = inverse_metric_components(model, bundle.point);
  double m = 0.0;
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      double tr = 0.0;
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) tr += gi(a, c) * bundle.weyl(a, b, c, d);
      m = std::max(m, std::abs(tr));
    }
  return m;
}

enum class CurvatureKind { riemann, weyl };

/**
 * Covariant derivative nabla_e T_{abcd} of the Riemann or Weyl tensor at p: central
 * finite differences of the components with step `step`, plus exact Christoffel
 * corrections. Result indexed [e].
 */
inline std::vector<Tensor4> covariant_derivative(const ModelSpec& model, const Point& p, double step,
                                                 CurvatureKind kind) {
  const int n = model.n();
  auto pick = [kind](const CurvatureBundle& b) -> const Tensor4& {
    return kind == CurvatureKind::weyl ? b.weyl : b.riemann;
  };
  const CurvatureBundle here = curvature_at(model, p);
  const Tensor4& T = pick(here);
  const ChristoffelTable gam = christoffel_at(model, p);
  const Vec x0 = p.coords();

  std::vector<Tensor4> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) {
    Vec xp = x0, xm = x0;
    xp(e) += step;
    xm(e) -= step;
    const CurvatureBundle bp = curvature_at(model, Point::from_coords(xp));
    const CurvatureBundle bm = curvature_at(model, Point::from_coords(xm));
    const Tensor4& Tp = pick(bp);
    const Tensor4& Tm = pick(bm);
    Tensor4 D(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            double v = (Tp(a, b, c, d) - Tm(a, b, c, d)) / (2.0 * step);
            for (int f = 0; f < n; ++f) {
              v -= gam(f, e, a) * T(f, b, c, d) + gam(f, e, b) * T(a, f, c, d) +
                   gam(f, e, c) * T(a, b, f, d) + gam(f, e, d) * T(a, b, c, f);
            }
            D(a, b, c, d) = v;
          }
    out.push_back(std::move(D));
  }
  return out;
}

struct ParallelismResiduals {
  double weyl_residual = 0.0;
  double riemann_residual = 0.0;
};

inline ParallelismResiduals parallelism_residuals(const ModelSpec& model, const std::vector<Point>& samples,
                                                  double step = 1e-4) {
  if (!(step > 0.0 && step <= 1e-3)) throw Error(ErrorCode::InvalidArgument, "step must lie in (0, 1e-3]");
  ParallelismResiduals r;
  for (const Point& p : samples) {
    if (p.v.cwiseAbs().maxCoeff() > 10.0) {
      throw Error(ErrorCode::InvalidArgument, "sample points need |v| <= 10");
    }
    for (const auto& D : covariant_derivative(model, p, step, CurvatureKind::weyl))
      r.weyl_residual = std::max(r.weyl_residual, D.max_abs());
    for (const auto& D : covariant_derivative(model, p, step, CurvatureKind::riemann))
      r.riemann_residual = std::max(r.riemann_residual, D.max_abs());
  }
  return r;
}

inline constexpr double kOlszakTolerance = 1e-8;

/**
 * Largest component of g(u, .) ^ W(v, v', ., .) over the coordinate pairs (v, v') and
 * all increasing index triples, enumerated by brute force.
 */
inline double olszak_defect(const ModelSpec& model, const CurvatureBundle& bundle, const Tangent& u) {
  if (!(u.base == bundle.point)) throw Error(ErrorCode::BasePointMismatch, "u is not based at the curvature point");
  const int n = model.n();
  const Vec alpha = metric_components(model, u.base) * u.components();
  const Tensor4& W = bundle.weyl;
  double worst = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          for (int c = b + 1; c < n; ++c) {
            const double w = alpha(a) * W(p, q, b, c) + alpha(b) * W(p, q, c, a) + alpha(c) * W(p, q, a, b);
            worst = std::max(worst, std::abs(w));
          }
  return worst;
}

inline bool olszak_check(const ModelSpec& model, const Point& point, const Tangent& u) {
  if (!(u.base == point)) throw Error(ErrorCode::BasePointMismatch, "u is not based at the point");
  return olszak_defect(model, curvature_at(model, point), u) < kOlszakTolerance;
}

}  // namespace ppwave
