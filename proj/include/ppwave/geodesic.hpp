#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ppwave/hill.hpp"
#include "ppwave/model.hpp"
#include "ppwave/ode.hpp"
#include "ppwave/random.hpp"

namespace ppwave {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

namespace detail {

/// kappa and its spatial gradient at (t, x) without allocating; grad may be null.
inline double kappa_raw(const ModelSpec& model, double t, const double* x, double* grad) {
  const int m = model.fiber_dim();
  const Mat& A = model.A();
  const double f = model.f(t);
  double k = 0.0;
  for (int i = 0; i < m; ++i) {
    double ax = 0.0;
    for (int j = 0; j < m; ++j) ax += A(i, j) * x[j];
    k += x[i] * (f * x[i] + ax);
    if (grad) grad[i] = 2.0 * (f * x[i] + ax);
  }
  return k;
}

/// Geodesic right-hand side on the stacked state (x^mu, xdot^mu).
inline void geodesic_rhs(const ModelSpec& model, const State& y, State& dy) {
  const int n = model.n();
  const int m = n - 2;
  const double* x = y.data() + kX0;
  const double* xd = y.data() + n + kX0;
  const double td = y[static_cast<std::size_t>(n + kT)];
  double* acc = dy.data() + n + kX0;
  (void)kappa_raw(model, y[kT], x, acc);
  double r2 = 0.0, cross = 0.0;
  for (int i = 0; i < m; ++i) {
    r2 += x[i] * x[i];
    cross += acc[i] * xd[i];
    acc[i] *= 0.5 * td * td;
  }
  for (int k = 0; k < n; ++k) dy[static_cast<std::size_t>(k)] = y[static_cast<std::size_t>(n + k)];
  dy[static_cast<std::size_t>(n + kT)] = 0.0;
  dy[static_cast<std::size_t>(n + kS)] = -(model.f(y[kT], 1) * r2 * td * td + 2.0 * td * cross);
}

inline double energy_of(const ModelSpec& model, const State& y) {
  const int n = model.n();
  const double* v = y.data() + n;
  double e = kappa_raw(model, y[kT], y.data() + kX0, nullptr) * (v[kT] * v[kT]) + v[kT] * v[kS];
  for (int i = kX0; i < n; ++i) e += v[i] * v[i];
  return e;
}

/// |kappa tdot^2| + |tdot sdot| + |xdot|^2: the size of the terms summed in the energy.
inline double energy_scale(const ModelSpec& model, const State& y) {
  const int n = model.n();
  const Eigen::Map<const Vec> v(y.data() + n, n);
  const double kappa = kappa_raw(model, y[kT], y.data() + kX0, nullptr);
  return std::abs(kappa * v(kT) * v(kT)) + std::abs(v(kT) * v(kS)) + v.tail(n - 2).squaredNorm();
}

}  // namespace detail

struct GeodesicNode {
  double tau = 0.0;
  Vec state;  // (x^mu, xdot^mu)
  Vec rate;
};

/**
 * Integrated geodesic with cubic Hermite dense output between accepted steps and a
 * record of the conserved quantities g(gamma', gamma') and g(gamma', d_s) = tdot / 2.
 */
class GeodesicPath {
 public:
  double energy() const { return energy0_; }
  /// max |E(tau) - E(0)| over accepted steps.
  double max_energy_drift() const { return max_energy_drift_; }
  double max_tdot_drift() const { return max_tdot_drift_; }
  Interval span() const { return span_; }
  const std::vector<GeodesicNode>& nodes() const { return nodes_; }
  std::size_t steps() const { return steps_; }

  /// (gamma(tau), gamma'(tau)).
  std::pair<Point, Tangent> at(double tau) const {
    if (!span_.contains(tau) || nodes_.size() < 2) {
      throw Error(ErrorCode::InvalidArgument, "tau outside the integrated span");
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tau,
                               [](double x, const GeodesicNode& nd) { return x < nd.tau; });
    std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
    if (hi >= nodes_.size()) hi = nodes_.size() - 1;
    if (hi == 0) hi = 1;
    const GeodesicNode& a = nodes_[hi - 1];
    const GeodesicNode& b = nodes_[hi];
    Vec y(a.state.size());
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      y(k) = hermite3(tau, a.tau, b.tau, a.state(k), b.state(k), a.rate(k), b.rate(k));
    }
    const int n = static_cast<int>(y.size() / 2);
    Point p = Point::from_coords(y.head(n));
    Tangent v = Tangent::from_components(y.tail(n), p);
    return {std::move(p), std::move(v)};
  }

  /// State at the span endpoints, exact from the integrator.
  const Vec& state_at_hi() const { return hi_state_; }
  const Vec& state_at_lo() const { return lo_state_; }

 private:
  friend GeodesicPath geodesic_integrate(const ModelSpec&, const Point&, const Tangent&, Interval, double,
                                         bool);
  Interval span_;
  double energy0_ = 0.0;
  double max_energy_drift_ = 0.0;
  double max_tdot_drift_ = 0.0;
  std::size_t steps_ = 0;
  std::vector<GeodesicNode> nodes_;
  Vec hi_state_;
  Vec lo_state_;
};

/**
 * Integrate x''^k + Gamma^k_{mu nu} x'^mu x'^nu = 0 with initial data at tau = 0 over
 * `span` (which must contain 0). The t-acceleration is identically zero in the
 * right-hand side.
 */
inline GeodesicPath geodesic_integrate(const ModelSpec& model, const Point& p0, const Tangent& v0, Interval span,
                                       double tol = 1e-12, bool record = true) {
  if (!(tol <= 1e-8 && tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "geodesic tolerance must be <= 1e-8");
  if (!span.contains(0.0)) throw Error(ErrorCode::InvalidArgument, "span must contain tau = 0");
  if (!(v0.base == p0)) throw Error(ErrorCode::BasePointMismatch, "initial velocity not based at p0");
  const int n = model.n();
  State y0(static_cast<std::size_t>(2 * n));
  {
    const Vec x = p0.coords();
    const Vec v = v0.components();
    for (int k = 0; k < n; ++k) {
      y0[static_cast<std::size_t>(k)] = x(k);
      y0[static_cast<std::size_t>(n + k)] = v(k);
    }
  }
  auto rhs = [&model](const State& y, State& dy, double) { detail::geodesic_rhs(model, y, dy); };

  GeodesicPath path;
  path.span_ = span;
  path.energy0_ = detail::energy_of(model, y0);
  const double tdot0 = y0[static_cast<std::size_t>(n + kT)];

  OdeOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = tol;
  opt.initial_step = 1e-3;

  std::vector<GeodesicNode> back;
  auto leg = [&](double tau_end, std::vector<GeodesicNode>& sink, Vec& end_state) {
    State y = y0;
    const auto run = integrate_adaptive(rhs, y, 0.0, tau_end, opt, [&](double tau, const State& s) {
      path.max_energy_drift_ = std::max(path.max_energy_drift_, std::abs(detail::energy_of(model, s) - path.energy0_));
      path.max_tdot_drift_ = std::max(path.max_tdot_drift_, std::abs(s[static_cast<std::size_t>(n + kT)] - tdot0));
      if (record) {
        State ds(s.size());
        rhs(s, ds, tau);
        sink.push_back(GeodesicNode{tau, Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size())),
                                    Eigen::Map<const Vec>(ds.data(), static_cast<Eigen::Index>(ds.size()))});
      }
      return true;
    });
    path.steps_ += run.accepted;
    end_state = Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(y.size()));
  };
  leg(span.lo, back, path.lo_state_);
  std::vector<GeodesicNode> fwd;
  leg(span.hi, fwd, path.hi_state_);

  if (record) {
    path.nodes_.reserve(back.size() + fwd.size());
    for (std::size_t k = back.size(); k-- > 1;) path.nodes_.push_back(std::move(back[k]));
    for (auto& nd : fwd) path.nodes_.push_back(std::move(nd));
  }
  return path;
}

/**
 * Solution of the reduced V-equation x''(tau) = a^2 (f(a tau) + A) x(tau), the fiber part
 * of a geodesic with tdot = a and t(0) = 0, built from fundamental pairs.
 */
class ReducedPath {
 public:
  ReducedPath(HillSolution u, double a, Interval span) : u_(std::move(u)), a_(a), span_(span) {}

  double a() const { return a_; }
  Interval span() const { return span_; }

  /// (x(tau), x'(tau)).
  std::pair<Vec, Vec> eval(double tau) const {
    if (!span_.contains(tau)) throw Error(ErrorCode::InvalidArgument, "tau outside the reduced-system span");
    auto [q, dq] = u_.eval(a_ * tau);
    return {std::move(q), a_ * dq};
  }

 private:
  HillSolution u_;
  double a_;
  Interval span_;
};

inline ReducedPath reduced_system(const HillSpacePtr& space, double a, const Vec& x0, const Vec& xdot0, Interval span) {
  if (a == 0.0) throw Error(ErrorCode::InvalidArgument, "reduced system needs a != 0");
  return ReducedPath(HillSolution(space, x0, xdot0 / a), a, span);
}

// ---------------------------------------------------------------------------
// completeness probe

struct CompletenessTrial {
  std::uint64_t index = 0;
  double tdot = 0.0;
  double reached_lo = 0.0;
  double reached_hi = 0.0;
  double max_norm = 0.0;         // max |(x, x')| of the fiber part
  double envelope_margin = 0.0;  // min over nodes of log-envelope minus log-norm
  double energy_drift = 0.0;     // max |E(tau) - E(0)|
  double energy_drift_scaled = 0.0;  // max |E(tau) - E(0)| / (1 + energy_scale)
  double tdot_drift = 0.0;
  bool envelope_ok = true;
  bool overflow = false;
  bool blow_up = false;
  std::string failure;
};

struct CompletenessReport {
  std::uint64_t seed = 0;
  int trials = 0;
  double horizon = 0.0;
  double max_norm = 0.0;
  bool envelope_ok = true;
  int blow_ups = 0;
  int overflows = 0;
  double max_energy_drift = 0.0;
  double max_energy_drift_scaled = 0.0;
  double max_tdot_drift = 0.0;
  std::vector<CompletenessTrial> details;
};

inline constexpr double kOverflowNorm = 1e150;

namespace detail {

inline CompletenessTrial run_completeness_trial(const ModelSpec& model, std::uint64_t seed, std::uint64_t index,
                                                double horizon, double tol) {
  Rng rng(seed, index);
  const int n = model.n();
  const int m = n - 2;
  const Point p0 = rng.point(m, 2.0, 2.0, 2.0);
  const Tangent v0 = Tangent::from_components(rng.uniform_vec(n, 2.0), p0);

  CompletenessTrial trial;
  trial.index = index;
  trial.tdot = v0.dt;
  const double K = model.fourier().sup_bound() + model.eigenvalues().cwiseAbs().maxCoeff();
  const double rate = 1.0 + v0.dt * v0.dt * K;

  Vec yv0(2 * m);
  yv0 << p0.v, v0.dv;
  const double norm0 = yv0.norm();
  const double log0 = norm0 > 0 ? std::log(norm0) : -std::numeric_limits<double>::infinity();
  trial.max_norm = norm0;
  trial.envelope_margin = std::numeric_limits<double>::infinity();

  State y0(static_cast<std::size_t>(2 * n));
  {
    const Vec x = p0.coords();
    const Vec v = v0.components();
    for (int k = 0; k < n; ++k) {
      y0[static_cast<std::size_t>(k)] = x(k);
      y0[static_cast<std::size_t>(n + k)] = v(k);
    }
  }
  const double E0 = energy_of(model, y0);
  auto rhs = [&model](const State& y, State& dy, double) { geodesic_rhs(model, y, dy); };
  OdeOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = tol;
  opt.initial_step = 1e-3;

  for (double end : {-horizon, horizon}) {
    State y = y0;
    double reached = 0.0;
    auto observer = [&](double tau, const State& s) {
      reached = tau;
      double nrm2 = 0.0;
      for (int k = 0; k < m; ++k) {
        nrm2 += s[static_cast<std::size_t>(kX0 + k)] * s[static_cast<std::size_t>(kX0 + k)];
        nrm2 += s[static_cast<std::size_t>(n + kX0 + k)] * s[static_cast<std::size_t>(n + kX0 + k)];
      }
      const double nrm = std::sqrt(nrm2);
      trial.max_norm = std::max(trial.max_norm, nrm);
      if (norm0 == 0.0) {
        if (nrm > 1e-12) trial.envelope_ok = false;
      } else if (nrm > 0.0) {
        const double margin = log0 + rate * std::abs(tau) - std::log(nrm);
        trial.envelope_margin = std::min(trial.envelope_margin, margin);
        if (margin < -1e-9) trial.envelope_ok = false;
      }
      const double dE = std::abs(energy_of(model, s) - E0);
      trial.energy_drift = std::max(trial.energy_drift, dE);
      trial.energy_drift_scaled = std::max(trial.energy_drift_scaled, dE / (1.0 + energy_scale(model, s)));
      trial.tdot_drift = std::max(trial.tdot_drift, std::abs(s[static_cast<std::size_t>(n + kT)] - v0.dt));
      if (nrm > kOverflowNorm) {
        trial.overflow = true;
        return false;
      }
      return true;
    };
    try {
      integrate_adaptive(rhs, y, 0.0, end, opt, observer);
    } catch (const Error& e) {
      trial.blow_up = true;
      trial.failure = e.what();
    }
    (end < 0 ? trial.reached_lo : trial.reached_hi) = reached;
  }
  if (!trial.envelope_ok) trial.blow_up = true;
  return trial;
}

}  // namespace detail

/**
 * Integrate `trials` random geodesics (components uniform in [-2, 2], seeded) to
 * tau = +-horizon and check the fiber part against the Gronwall envelope
 * |y(tau)| <= |y(0)| exp((1 + tdot^2 max_t,i |f(t) + lambda_i|) |tau|).
 * Trials run in parallel; each has its own RNG stream.
 */
inline CompletenessReport completeness_probe(const ModelSpec& model, int trials, double horizon, std::uint64_t seed,
                                             double tol = 1e-13, unsigned workers = 0) {
  if (!(horizon > 0.0 && horizon <= 1e4)) throw Error(ErrorCode::InvalidArgument, "horizon must lie in (0, 1e4]");
  if (trials < 0) throw Error(ErrorCode::InvalidArgument, "trials must be non-negative");
  CompletenessReport report;
  report.seed = seed;
  report.trials = trials;
  report.horizon = horizon;
  report.details.resize(static_cast<std::size_t>(trials));

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(trials, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int k = static_cast<int>(w); k < trials; k += static_cast<int>(workers)) {
        report.details[static_cast<std::size_t>(k)] =
            detail::run_completeness_trial(model, seed, static_cast<std::uint64_t>(k), horizon, tol);
      }
    });
  }
  for (auto& th : pool) th.join();

  for (const auto& t : report.details) {
    report.max_norm = std::max(report.max_norm, t.max_norm);
    report.envelope_ok = report.envelope_ok && t.envelope_ok;
    report.blow_ups += t.blow_up ? 1 : 0;
    report.overflows += t.overflow ? 1 : 0;
    report.max_energy_drift = std::max(report.max_energy_drift, t.energy_drift);
    report.max_energy_drift_scaled = std::max(report.max_energy_drift_scaled, t.energy_drift_scaled);
    report.max_tdot_drift = std::max(report.max_tdot_drift, t.tdot_drift);
  }
  return report;
}

}  // namespace ppwave
