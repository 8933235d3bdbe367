#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ppwave/group.hpp"
#include "ppwave/hill.hpp"
#include "ppwave/model.hpp"
#include "ppwave/ode.hpp"
#include "ppwave/random.hpp"

namespace ppwave {

/**
 * Piecewise-linear curve in coordinates, tau in [0, 1] split evenly over the segments.
 * Velocity is constant on each segment; joints are the only non-smooth points.
 */
struct CurveSpec {
  std::vector<Vec> vertices;

  int segments() const { return static_cast<int>(vertices.size()) - 1; }

  Vec position(double tau) const {
    const int N = segments();
    if (N <= 0) return vertices.front();
    const double x = std::clamp(tau, 0.0, 1.0) * N;
    const int k = std::min(static_cast<int>(std::floor(x)), N - 1);
    const double local = x - k;
    const auto K = static_cast<std::size_t>(k);
    return vertices[K] + local * (vertices[K + 1] - vertices[K]);
  }

  Vec velocity(double tau) const {
    const int N = segments();
    if (N <= 0) return Vec::Zero(vertices.front().size());
    const int k = std::min(static_cast<int>(std::floor(std::clamp(tau, 0.0, 1.0) * N)), N - 1);
    const auto K = static_cast<std::size_t>(k);
    return N * (vertices[K + 1] - vertices[K]);
  }

  Point start() const { return Point::from_coords(vertices.front()); }
  Point end() const { return Point::from_coords(vertices.back()); }

  CurveSpec reversed() const { return CurveSpec{std::vector<Vec>(vertices.rbegin(), vertices.rend())}; }
};

/**
 * Parallel transport of the full coordinate frame along `curve`, solving
 * y'^k + Gamma^k_{mu nu} x'^mu y^nu = 0. Returns P with P y(0) = y(1) on components.
 */
inline Mat parallel_transport(const ModelSpec& model, const CurveSpec& curve, double tol = 1e-12) {
  if (!(tol > 0.0 && tol <= 1e-8)) throw Error(ErrorCode::InvalidArgument, "transport tolerance must be <= 1e-8");
  const int n = model.n();
  if (curve.vertices.empty()) throw Error(ErrorCode::InvalidArgument, "curve has no vertices");
  Mat P = Mat::Identity(n, n);
  const int N = curve.segments();
  OdeOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = tol;
  opt.initial_step = 1e-3;
  for (int seg = 0; seg < N; ++seg) {
    const auto K = static_cast<std::size_t>(seg);
    const Vec a = curve.vertices[K];
    const Vec vel = curve.vertices[K + 1] - curve.vertices[K];  // per unit local parameter
    if (vel.cwiseAbs().maxCoeff() == 0.0) continue;
    State y(P.data(), P.data() + n * n);
    auto rhs = [&](const State& x, State& dx, double s) {
      const Point p = Point::from_coords(a + s * vel);
      const ChristoffelTable gam = christoffel_at(model, p);
      for (int c = 0; c < n; ++c) {
        const Eigen::Map<const Vec> col(x.data() + c * n, n);
        Eigen::Map<Vec>(dx.data() + c * n, n) = -gam.contract(vel, col);
      }
    };
    integrate_adaptive(rhs, y, 0.0, 1.0, opt);
    P = Eigen::Map<const Mat>(y.data(), n, n);
  }
  return P;
}

/// Columns (S, E_1, .., E_{n-2}, T) with S = d_s, E_i = d_i, T = 2 (d_t - kappa(p) d_s).
inline Mat adapted_frame(const ModelSpec& model, const Point& p) {
  const int n = model.n();
  Mat F = Mat::Zero(n, n);
  F(kS, 0) = 1.0;
  for (int i = 0; i < n - 2; ++i) F(kX0 + i, 1 + i) = 1.0;
  F(kT, n - 1) = 2.0;
  F(kS, n - 1) = -2.0 * eval_kappa(model, p);
  return F;
}

/// Gram matrix of the adapted frame: G(S, T) = 1, G(E_i, E_j) = delta_ij, S and T null.
inline Mat frame_gram(int n) {
  Mat G = Mat::Zero(n, n);
  G(0, n - 1) = G(n - 1, 0) = 1.0;
  G.block(1, 1, n - 2, n - 2).setIdentity();
  return G;
}

/// Transport or holonomy matrix in the adapted frame (S, E_1..E_{n-2}, T).
struct TransportMatrix {
  Mat matrix;

  double gram_residual() const {
    const Mat G = frame_gram(static_cast<int>(matrix.rows()));
    return (matrix.transpose() * G * matrix - G).cwiseAbs().maxCoeff();
  }

  /// |M e_S - e_S|.
  double s_fixed_residual() const {
    return (matrix.col(0) - Vec::Unit(matrix.rows(), 0)).cwiseAbs().maxCoeff();
  }

  /// |E-block - I|.
  double orthogonal_block_residual() const {
    const auto m = matrix.rows() - 2;
    return (matrix.block(1, 1, m, m) - Mat::Identity(m, m)).cwiseAbs().maxCoeff();
  }

  /// Size of the translation entries (E-components of T's image).
  double translation_norm() const { return matrix.block(1, matrix.cols() - 1, matrix.rows() - 2, 1).norm(); }
};

inline Point origin(const ModelSpec& model) { return Point{0.0, 0.0, Vec::Zero(model.fiber_dim())}; }

/// Lift of the loop representing sigma = (k, 0, 0) or sigma = (0, r, w).
inline CurveSpec generator_curve(const GroupElement& sigma) {
  const HillSpace& space = *sigma.u.space();
  const ModelSpec& model = space.model();
  const bool has_sigma_part = sigma.x != 0.0 || sigma.u.data().cwiseAbs().maxCoeff() != 0.0;
  if (sigma.k != 0 && has_sigma_part) {
    throw Error(ErrorCode::NotAGenerator, "expected (k, 0, 0) or (0, r, w)");
  }
  const Vec o = origin(model).coords();
  Vec end = o;
  if (sigma.k != 0) {
    end(kT) = static_cast<double>(sigma.k) * model.period();
  } else {
    const Vec& w0 = sigma.u.u0();
    const Vec& dw0 = sigma.u.w0();
    end(kS) = sigma.x - dw0.dot(w0);
    end.tail(w0.size()) = w0;
  }
  return CurveSpec{{o, end}};
}

/**
 * Holonomy of the closed loop defined by sigma in the quotient: numeric parallel transport
 * along the lifted curve, pulled back to the origin by dF_{sigma^-1}, in the adapted frame.
 */
inline TransportMatrix quotient_transport(const GroupElement& sigma, double tol = 1e-12) {
  const ModelSpec& model = sigma.u.space()->model();
  const CurveSpec curve = generator_curve(sigma);
  const Mat P = parallel_transport(model, curve, tol);
  const Mat back = g_act_jacobian(g_inverse(sigma), curve.end());
  const Mat F0 = adapted_frame(model, origin(model));
  return TransportMatrix{F0.inverse() * back * P * F0};
}

/// Signs placed on the Xi blocks of the closed-form transport.
struct SignConvention {
  int xi2_row = +1;  // first row, E columns
  int xi2_col = -1;  // last column, E rows
  int xi1 = -1;      // corner (S row, T column)

  std::string describe() const {
    auto sg = [](int s) { return s > 0 ? std::string("+") : std::string("-"); };
    return "columns are images of (S,E_i,T); row S: " + sg(xi2_row) + "Xi2 in E columns, " + sg(xi1) +
           "Xi1 in T column; column T: " + sg(xi2_col) + "Xi2 in E rows";
  }

  bool operator==(const SignConvention&) const = default;
};

/// Xi1(w) = 2 <w'(0), w'(0)> and Xi2^i(w) = 2 <w'(0), d_i>.
inline std::pair<double, Vec> xi_maps(const HillSolution& w) {
  return {2.0 * w.w0().squaredNorm(), 2.0 * w.w0()};
}

inline TransportMatrix closed_form_transport(const GroupElement& sigma, const SignConvention& conv = {}) {
  if (sigma.k != 0) throw Error(ErrorCode::NotInSigmaForm, "closed form applies to sigma = (0, r, w)");
  const int n = sigma.u.space()->model().n();
  const auto [xi1, xi2] = xi_maps(sigma.u);
  Mat M = Mat::Identity(n, n);
  for (int i = 0; i < n - 2; ++i) {
    M(0, 1 + i) = conv.xi2_row * xi2(i);
    M(1 + i, n - 1) = conv.xi2_col * xi2(i);
  }
  M(0, n - 1) = conv.xi1 * xi1;
  return TransportMatrix{M};
}

struct SignResolution {
  SignConvention convention;
  double max_dev = 0.0;         // chosen convention vs numeric
  double runner_up_dev = 0.0;   // best alternative
};

/// Pick the sign convention whose closed form best matches the numeric transports.
inline SignResolution resolve_sign_convention(const std::vector<GroupElement>& sigmas, double tol = 1e-12) {
  if (sigmas.empty()) throw Error(ErrorCode::InvalidArgument, "sign resolution needs sample generators");
  std::vector<Mat> numeric;
  for (const auto& s : sigmas) numeric.push_back(quotient_transport(s, tol).matrix);
  std::vector<std::pair<double, SignConvention>> scored;
  for (int a : {1, -1})
    for (int b : {1, -1})
      for (int c : {1, -1}) {
        const SignConvention conv{a, b, c};
        double dev = 0.0;
        for (std::size_t k = 0; k < sigmas.size(); ++k) {
          dev = std::max(dev, (closed_form_transport(sigmas[k], conv).matrix - numeric[k]).cwiseAbs().maxCoeff());
        }
        scored.emplace_back(dev, conv);
      }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return SignResolution{scored[0].second, scored[0].first, scored[1].first};
}

// ---------------------------------------------------------------------------
// contractible loops

struct LoopResult {
  Point base;
  int plane_a = 0;
  int plane_b = 0;
  double side = 0.0;
  TransportMatrix matrix;
  double s_dev = 0.0;
  double block_dev = 0.0;
  double gram_dev = 0.0;
  bool pass = false;
};

struct HolonomyReport {
  std::uint64_t seed = 0;
  int count = 0;
  double loop_scale = 0.0;
  double max_s_dev = 0.0;
  double max_block_dev = 0.0;
  double max_gram_dev = 0.0;
  double max_translation = 0.0;
  double pass_rate = 0.0;
  std::vector<LoopResult> loops;
};

inline constexpr double kHolonomySTol = 1e-9;
inline constexpr double kHolonomyBlockTol = 1e-6;

/// Rectangle base -> +h e_a -> +h e_a + h e_b -> +h e_b -> base in coordinates.
inline CurveSpec rectangle_loop(const Point& base, int a, int b, double h) {
  const Vec p = base.coords();
  Vec ea = Vec::Zero(p.size()), eb = Vec::Zero(p.size());
  ea(a) = h;
  eb(b) = h;
  return CurveSpec{{p, p + ea, p + ea + eb, p + eb, p}};
}

inline LoopResult loop_holonomy(const ModelSpec& model, const Point& base, int a, int b, double h,
                                double tol = 1e-12) {
  LoopResult r;
  r.base = base;
  r.plane_a = a;
  r.plane_b = b;
  r.side = h;
  const Mat P = parallel_transport(model, rectangle_loop(base, a, b, h), tol);
  const Mat F = adapted_frame(model, base);
  r.matrix = TransportMatrix{F.inverse() * P * F};
  r.s_dev = r.matrix.s_fixed_residual();
  r.block_dev = r.matrix.orthogonal_block_residual();
  r.gram_dev = r.matrix.gram_residual();
  r.pass = r.s_dev <= kHolonomySTol && r.block_dev <= kHolonomyBlockTol;
  return r;
}

/**
 * Transport around `count` random rectangular loops in coordinate 2-planes through random
 * base points (|t| <= p, |s|, |v_i| <= 2), sides loop_scale * U[0.5, 1].
 */
inline HolonomyReport holonomy_sampler(const ModelSpec& model, int count, double loop_scale, std::uint64_t seed,
                                       double tol = 1e-12) {
  if (!(loop_scale > 0.0 && loop_scale <= 1.0)) throw Error(ErrorCode::InvalidArgument, "loop_scale must lie in (0, 1]");
  HolonomyReport rep;
  rep.seed = seed;
  rep.count = count;
  rep.loop_scale = loop_scale;
  Rng rng(seed, 0x401);
  const int n = model.n();
  int passed = 0;
  for (int k = 0; k < count; ++k) {
    const Point base = rng.point(n - 2, model.period(), 2.0, 2.0);
    const int a = rng.uniform_int(0, n - 1);
    int b = rng.uniform_int(0, n - 2);
    if (b >= a) ++b;
    const double h = loop_scale * rng.uniform(0.5, 1.0);
    LoopResult r = loop_holonomy(model, base, a, b, h, tol);
    rep.max_s_dev = std::max(rep.max_s_dev, r.s_dev);
    rep.max_block_dev = std::max(rep.max_block_dev, r.block_dev);
    rep.max_gram_dev = std::max(rep.max_gram_dev, r.gram_dev);
    rep.max_translation = std::max(rep.max_translation, r.matrix.translation_norm());
    passed += r.pass ? 1 : 0;
    rep.loops.push_back(std::move(r));
  }
  rep.pass_rate = count > 0 ? static_cast<double>(passed) / count : 1.0;
  return rep;
}

}  // namespace ppwave
