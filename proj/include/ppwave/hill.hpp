#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ppwave/error.hpp"
#include "ppwave/fourier.hpp"
#include "ppwave/model.hpp"
#include "ppwave/ode.hpp"

namespace ppwave {

/// (c, c', s, s') at one instant.
struct PairValues {
  double c = 1.0, dc = 0.0, s = 0.0, ds = 1.0;

  double wronskian() const { return c * ds - dc * s; }
};

/**
 * Fundamental solutions of the scalar Hill equation y'' = (f(t) + lambda) y with
 * c(0) = 1, c'(0) = 0 and s(0) = 0, s'(0) = 1.
 *
 * One period [0, p] is tabulated with quintic Hermite dense output; any other t is
 * reached through Phi(t + kp) = Phi(t) M^k with M the period map.
 */
class FundamentalPair {
 public:
  FundamentalPair(FourierSeries f, double lambda, double tol = 1e-12)
      : f_(std::move(f)), lambda_(lambda) {
    const double p = f_.period();
    OdeOptions opt;
    opt.abs_tol = tol;
    opt.rel_tol = tol;
    opt.max_step = p / 128.0;
    opt.initial_step = p / 512.0;
    State y{1.0, 0.0, 0.0, 1.0};
    auto rhs = [this](const State& x, State& dx, double t) {
      const double k = f_(t) + lambda_;
      dx[0] = x[1];
      dx[1] = k * x[0];
      dx[2] = x[3];
      dx[3] = k * x[2];
    };
    integrate_adaptive(rhs, y, 0.0, p, opt, [this](double t, const State& x) {
      nodes_.push_back(t);
      values_.push_back(PairValues{x[0], x[1], x[2], x[3]});
      return true;
    });
    const PairValues& end = values_.back();
    monodromy_ << end.c, end.s, end.dc, end.ds;
    for (const auto& v : values_) max_wronskian_defect_ = std::max(max_wronskian_defect_, std::abs(v.wronskian() - 1.0));
  }

  double lambda() const { return lambda_; }
  double period() const { return f_.period(); }
  const FourierSeries& fourier() const { return f_; }

  /// Period map [[c(p), s(p)], [c'(p), s'(p)]].
  const Eigen::Matrix2d& period_map() const { return monodromy_; }

  /// Largest |W - 1| over the tabulated nodes.
  double max_wronskian_defect() const { return max_wronskian_defect_; }

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<PairValues>& node_values() const { return values_; }

  /// Fundamental matrix [[c, s], [c', s']] at t.
  Eigen::Matrix2d matrix(double t) const {
    const double p = period();
    const double kf = std::floor(t / p);
    double tau = t - kf * p;
    if (tau < 0.0) tau = 0.0;
    if (tau > p) tau = p;
    const PairValues v = in_period(tau);
    Eigen::Matrix2d phi;
    phi << v.c, v.s, v.dc, v.ds;
    const long long k = static_cast<long long>(kf);
    if (k == 0) return phi;
    return phi * matrix_power(k);
  }

  PairValues at(double t) const {
    const Eigen::Matrix2d phi = matrix(t);
    return PairValues{phi(0, 0), phi(1, 0), phi(0, 1), phi(1, 1)};
  }

 private:
  PairValues in_period(double tau) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tau);
    std::size_t hi = static_cast<std::size_t>(it - nodes_.begin());
    if (hi >= nodes_.size()) hi = nodes_.size() - 1;
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const double t0 = nodes_[lo], t1 = nodes_[hi];
    const PairValues& a = values_[lo];
    const PairValues& b = values_[hi];
    const double k0 = f_(t0) + lambda_, k1 = f_(t1) + lambda_;
    const double df0 = f_.derivative(t0, 1), df1 = f_.derivative(t1, 1);
    PairValues out;
    out.c = hermite5(tau, t0, t1, a.c, b.c, a.dc, b.dc, k0 * a.c, k1 * b.c);
    out.dc = hermite5(tau, t0, t1, a.dc, b.dc, k0 * a.c, k1 * b.c, df0 * a.c + k0 * a.dc,
                      df1 * b.c + k1 * b.dc);
    out.s = hermite5(tau, t0, t1, a.s, b.s, a.ds, b.ds, k0 * a.s, k1 * b.s);
    out.ds = hermite5(tau, t0, t1, a.ds, b.ds, k0 * a.s, k1 * b.s, df0 * a.s + k0 * a.ds,
                      df1 * b.s + k1 * b.ds);
    return out;
  }

  Eigen::Matrix2d matrix_power(long long k) const {
    Eigen::Matrix2d base = monodromy_;
    if (k < 0) {
      // det M = 1 up to integration error; use the exact inverse anyway.
      base = monodromy_.inverse();
      k = -k;
    }
    Eigen::Matrix2d result = Eigen::Matrix2d::Identity();
    while (k > 0) {
      if (k & 1) result = result * base;
      base = base * base;
      k >>= 1;
    }
    return result;
  }

  FourierSeries f_;
  double lambda_;
  std::vector<double> nodes_;
  std::vector<PairValues> values_;
  Eigen::Matrix2d monodromy_;
  double max_wronskian_defect_ = 0.0;
};

/// Convenience: one-off evaluation of (c, c', s, s') for eigenvalue lambda.
inline PairValues fundamental_pair(const ModelSpec& model, double lambda, double t) {
  return FundamentalPair(model.fourier(), lambda).at(t);
}

/**
 * The solution space E = { u : u'' = (f + A) u } of one model, with cached
 * fundamental pairs for each eigenvalue of A. Immutable after construction and
 * safe to share across threads.
 */
class HillSpace {
 public:
  explicit HillSpace(ModelSpec model) : model_(std::move(model)) {
    const Vec& lam = model_.eigenvalues();
    const double tie = 1e-14 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      std::shared_ptr<const FundamentalPair> found;
      for (Eigen::Index j = 0; j < i; ++j) {
        if (std::abs(lam(i) - lam(j)) <= tie) {
          found = pairs_[static_cast<std::size_t>(j)];
          break;
        }
      }
      pairs_.push_back(found ? found : std::make_shared<const FundamentalPair>(model_.fourier(), lam(i)));
    }
  }

  const ModelSpec& model() const { return model_; }
  int dim() const { return model_.fiber_dim(); }
  double period() const { return model_.period(); }
  const FundamentalPair& pair(int i) const { return *pairs_[static_cast<std::size_t>(i)]; }

  /// (u(t), u'(t)) for initial data (u0, w0).
  std::pair<Vec, Vec> evolve(const Vec& u0, const Vec& w0, double t) const {
    const Mat& E = model_.eigenvectors();
    const Vec alpha = E.transpose() * u0;
    const Vec beta = E.transpose() * w0;
    Vec q(dim()), dq(dim());
    for (int i = 0; i < dim(); ++i) {
      const Eigen::Matrix2d phi = pair(i).matrix(t);
      q(i) = phi(0, 0) * alpha(i) + phi(0, 1) * beta(i);
      dq(i) = phi(1, 0) * alpha(i) + phi(1, 1) * beta(i);
    }
    return {E * q, E * dq};
  }

  /// 2m x 2m map taking (u(0), u'(0)) to (u(t), u'(t)).
  Mat propagator(double t) const {
    const int m = dim();
    const Mat& E = model_.eigenvectors();
    Mat C = Mat::Zero(m, m), S = Mat::Zero(m, m), dC = Mat::Zero(m, m), dS = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      const Eigen::Matrix2d phi = pair(i).matrix(t);
      C(i, i) = phi(0, 0);
      S(i, i) = phi(0, 1);
      dC(i, i) = phi(1, 0);
      dS(i, i) = phi(1, 1);
    }
    Mat P(2 * m, 2 * m);
    P.topLeftCorner(m, m) = E * C * E.transpose();
    P.topRightCorner(m, m) = E * S * E.transpose();
    P.bottomLeftCorner(m, m) = E * dC * E.transpose();
    P.bottomRightCorner(m, m) = E * dS * E.transpose();
    return P;
  }

  double max_wronskian_defect() const {
    double d = 0.0;
    for (const auto& p : pairs_) d = std::max(d, p->max_wronskian_defect());
    return d;
  }

 private:
  ModelSpec model_;
  std::vector<std::shared_ptr<const FundamentalPair>> pairs_;
};

using HillSpacePtr = std::shared_ptr<const HillSpace>;

inline HillSpacePtr make_hill_space(ModelSpec model) {
  return std::make_shared<const HillSpace>(std::move(model));
}

/// An element of E, stored as its initial data u(0) = u0, u'(0) = w0.
class HillSolution {
 public:
  HillSolution() = default;
  HillSolution(HillSpacePtr space, Vec u0, Vec w0)
      : space_(std::move(space)), u0_(std::move(u0)), w0_(std::move(w0)) {
    if (!space_) throw Error(ErrorCode::InvalidArgument, "solution needs a model");
    if (u0_.size() != space_->dim() || w0_.size() != space_->dim()) {
      throw Error(ErrorCode::InvalidArgument, "initial data must have length n - 2");
    }
  }

  static HillSolution zero(HillSpacePtr space) {
    const int m = space->dim();
    return HillSolution(std::move(space), Vec::Zero(m), Vec::Zero(m));
  }

  /// Build from the stacked 2m vector (u0, w0).
  static HillSolution from_data(HillSpacePtr space, const Vec& data) {
    const int m = space->dim();
    return HillSolution(std::move(space), data.head(m), data.tail(m));
  }

  const HillSpacePtr& space() const { return space_; }
  const Vec& u0() const { return u0_; }
  const Vec& w0() const { return w0_; }

  Vec data() const {
    Vec d(2 * u0_.size());
    d << u0_, w0_;
    return d;
  }

  /// (u(t), u'(t)).
  std::pair<Vec, Vec> eval(double t) const {
    if (t == 0.0) return {u0_, w0_};
    return space_->evolve(u0_, w0_, t);
  }

  /// u''(t) = (f(t) + A) u(t), exact given u(t).
  Vec second_derivative(double t) const { return apply_K(space_->model(), t, eval(t).first); }

  bool same_space(const HillSolution& o) const {
    return space_ == o.space_ || (space_ && o.space_ && space_->model() == o.space_->model());
  }

  HillSolution operator+(const HillSolution& o) const {
    require_same(o);
    return HillSolution(space_, u0_ + o.u0_, w0_ + o.w0_);
  }
  HillSolution operator-(const HillSolution& o) const {
    require_same(o);
    return HillSolution(space_, u0_ - o.u0_, w0_ - o.w0_);
  }
  HillSolution operator-() const { return HillSolution(space_, -u0_, -w0_); }
  HillSolution operator*(double a) const { return HillSolution(space_, a * u0_, a * w0_); }

  void require_same(const HillSolution& o) const {
    if (!same_space(o)) throw Error(ErrorCode::ModelMismatch, "solutions belong to different models");
  }

 private:
  HillSpacePtr space_;
  Vec u0_;
  Vec w0_;
};

inline HillSolution operator*(double a, const HillSolution& u) { return u * a; }

/// Omega(u1, u2) = <u1', u2> - <u1, u2'> evaluated at time t.
inline double omega(const HillSolution& u1, const HillSolution& u2, double t = 0.0) {
  u1.require_same(u2);
  const auto [q1, p1] = u1.eval(t);
  const auto [q2, p2] = u2.eval(t);
  return p1.dot(q2) - q1.dot(p2);
}

/// (T^k u)(t) = u(t - k p).
inline HillSolution shift(const HillSolution& u, long long k) {
  if (k == 0) return u;
  const double t = -static_cast<double>(k) * u.space()->period();
  auto [q, dq] = u.eval(t);
  return HillSolution(u.space(), std::move(q), std::move(dq));
}

struct CanonicalBasis {
  std::vector<HillSolution> xi;
  std::vector<HillSolution> xi_star;
};

/// xi_i: u(0) = e_i, u'(0) = 0; xi*_i: u(0) = 0, u'(0) = e_i.
inline CanonicalBasis canonical_basis(const HillSpacePtr& space) {
  const int m = space->dim();
  CanonicalBasis basis;
  for (int i = 0; i < m; ++i) {
    const Vec e = Vec::Unit(m, i);
    basis.xi.emplace_back(space, e, Vec::Zero(m));
    basis.xi_star.emplace_back(space, Vec::Zero(m), e);
  }
  return basis;
}

/// Period map of the first-order system on (u, u').
inline Mat monodromy(const HillSpace& space) { return space.propagator(space.period()); }

/// Matrix J with Omega(a, b) = a^T J b for stacked initial data (u0, w0).
inline Mat omega_matrix(int m) {
  Mat J = Mat::Zero(2 * m, 2 * m);
  J.topRightCorner(m, m) = -Mat::Identity(m, m);
  J.bottomLeftCorner(m, m) = Mat::Identity(m, m);
  return J;
}

// ---------------------------------------------------------------------------
// Riccati field B' + B^2 = f I + A

enum class BlowUpSide { forward, backward };

struct BlowUp {
  double t_star = 0.0;
  BlowUpSide side = BlowUpSide::forward;
};

/// Symmetric solution path of the matrix Riccati equation, possibly truncated at a blow-up.
class RiccatiField {
 public:
  RiccatiField(HillSpacePtr space, std::vector<double> t, std::vector<Mat> B, std::vector<Mat> dB,
               std::optional<BlowUp> forward, std::optional<BlowUp> backward)
      : space_(std::move(space)), t_(std::move(t)), B_(std::move(B)), dB_(std::move(dB)),
        forward_(forward), backward_(backward) {}

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  const Mat& B0() const { return B_[zero_index()]; }
  std::optional<BlowUp> blowup() const { return forward_ ? forward_ : backward_; }
  const std::optional<BlowUp>& forward_blowup() const { return forward_; }
  const std::optional<BlowUp>& backward_blowup() const { return backward_; }
  const std::vector<double>& nodes() const { return t_; }
  const std::vector<Mat>& node_values() const { return B_; }

  Mat at(double t) const {
    if (t < t_min() || t > t_max()) {
      const auto& b = (t > t_max()) ? forward_ : backward_;
      if (b) {
        throw Error(ErrorCode::BlowUpDetected,
                    "Riccati solution blows up at t* = " + std::to_string(b->t_star));
      }
      throw Error(ErrorCode::InvalidArgument, "t outside the solved span");
    }
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    if (hi >= t_.size()) hi = t_.size() - 1;
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const ModelSpec& model = space_->model();
    auto second = [&](std::size_t k) -> Mat {
      const Mat& B = B_[k];
      const Mat& dB = dB_[k];
      return model.f(t_[k], 1) * Mat::Identity(B.rows(), B.cols()) - dB * B - B * dB;
    };
    const Mat dd0 = second(lo), dd1 = second(hi);
    const auto m = B_[lo].rows();
    Mat out(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c)
        out(r, c) = hermite5(t, t_[lo], t_[hi], B_[lo](r, c), B_[hi](r, c), dB_[lo](r, c),
                             dB_[hi](r, c), dd0(r, c), dd1(r, c));
    return out;
  }

  /// Largest |B - B^T| over the stored nodes.
  double max_asymmetry() const {
    double a = 0.0;
    for (const auto& B : B_) a = std::max(a, (B - B.transpose()).cwiseAbs().maxCoeff());
    return a;
  }

 private:
  std::size_t zero_index() const {
    auto it = std::lower_bound(t_.begin(), t_.end(), 0.0);
    return static_cast<std::size_t>(it - t_.begin());
  }

  HillSpacePtr space_;
  std::vector<double> t_;
  std::vector<Mat> B_;
  std::vector<Mat> dB_;
  std::optional<BlowUp> forward_;
  std::optional<BlowUp> backward_;
};

inline constexpr double kRiccatiBlowUpNorm = 1e8;

/**
 * Solve B' = f I + A - B^2 from B(0) = B0 over [t_min, t_max] (which must contain 0).
 * Integration in each direction stops once max |B_ij| exceeds 1e8; the crossing time
 * is reported as the blow-up location.
 */
inline RiccatiField riccati_solve(const HillSpacePtr& space, const Mat& B0, double t_min, double t_max,
                                  double tol = 1e-12) {
  const ModelSpec& model = space->model();
  const int m = model.fiber_dim();
  if (B0.rows() != m || B0.cols() != m) throw Error(ErrorCode::InvalidArgument, "B0 must be (n-2)x(n-2)");
  if ((B0 - B0.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::NonSymmetric, "B0 must be symmetric");
  }
  if (!(t_min <= 0.0 && 0.0 <= t_max)) throw Error(ErrorCode::InvalidArgument, "span must contain 0");

  auto rate = [&](double t, const Mat& B) -> Mat {
    Mat K = model.A();
    K.diagonal().array() += model.f(t);
    return K - B * B;
  };
  auto rhs = [&](const State& x, State& dx, double t) {
    Eigen::Map<const Mat> B(x.data(), m, m);
    Eigen::Map<Mat> dB(dx.data(), m, m);
    dB = rate(t, B);
  };

  struct Leg {
    std::vector<double> t;
    std::vector<Mat> B;
    std::optional<BlowUp> blow;
  };
  auto run_leg = [&](double t_end, BlowUpSide side) {
    Leg leg;
    if (t_end == 0.0) return leg;
    State x(B0.data(), B0.data() + m * m);
    OdeOptions opt;
    opt.abs_tol = tol;
    opt.rel_tol = tol;
    opt.max_step = model.period() / 64.0;
    opt.initial_step = model.period() / 256.0;
    double last_t = 0.0;
    double last_norm = B0.cwiseAbs().maxCoeff();
    auto observer = [&](double t, const State& xs) {
      Eigen::Map<const Mat> B(xs.data(), m, m);
      last_t = t;
      last_norm = B.cwiseAbs().maxCoeff();
      if (last_norm > kRiccatiBlowUpNorm) {
        leg.blow = BlowUp{t, side};
        return false;
      }
      if (t != 0.0) {
        leg.t.push_back(t);
        leg.B.push_back(0.5 * (B + B.transpose()));
      }
      return true;
    };
    try {
      integrate_adaptive(rhs, x, 0.0, t_end, opt, observer);
    } catch (const Error& e) {
      // The step controller gives up just short of a pole once |B| is huge.
      if (e.code() != ErrorCode::StepFailure || last_norm < 1e4) throw;
      leg.blow = BlowUp{last_t, side};
    }
    return leg;
  };

  Leg back = run_leg(t_min, BlowUpSide::backward);
  Leg fwd = run_leg(t_max, BlowUpSide::forward);

  std::vector<double> ts;
  std::vector<Mat> Bs;
  for (std::size_t k = back.t.size(); k-- > 0;) {
    ts.push_back(back.t[k]);
    Bs.push_back(back.B[k]);
  }
  ts.push_back(0.0);
  Bs.push_back(0.5 * (B0 + B0.transpose()));
  for (std::size_t k = 0; k < fwd.t.size(); ++k) {
    ts.push_back(fwd.t[k]);
    Bs.push_back(fwd.B[k]);
  }
  std::vector<Mat> dBs;
  dBs.reserve(Bs.size());
  for (std::size_t k = 0; k < Bs.size(); ++k) dBs.push_back(rate(ts[k], Bs[k]));
  return RiccatiField(space, std::move(ts), std::move(Bs), std::move(dBs), fwd.blow, back.blow);
}

/// Basis u_j of L: u_j(0) = e_j, u_j'(0) = B(0) e_j.
inline std::vector<HillSolution> lagrangian_subspace(const HillSpacePtr& space, const RiccatiField& B) {
  if (B.t_min() > 0.0 || B.t_max() < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "Riccati field must be defined around t = 0");
  }
  const int m = space->dim();
  const Mat B0 = B.B0();
  std::vector<HillSolution> basis;
  for (int j = 0; j < m; ++j) basis.emplace_back(space, Vec::Unit(m, j), B0.col(j));
  return basis;
}

/// Residual of u'(0) = B0 u(0), i.e. distance of u from the subspace L defined by B0.
inline double lagrangian_membership_residual(const HillSolution& u, const Mat& B0) {
  return (u.w0() - B0 * u.u0()).cwiseAbs().maxCoeff();
}

}  // namespace ppwave
