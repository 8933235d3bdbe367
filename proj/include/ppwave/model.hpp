#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ppwave/error.hpp"
#include "ppwave/fourier.hpp"

namespace ppwave {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Coordinate ordering used throughout: index 0 = t, 1 = s, 2 + i = x_i.
inline constexpr int kT = 0;
inline constexpr int kS = 1;
inline constexpr int kX0 = 2;

enum class ModelMode { strict, relaxed };

struct Point {
  double t = 0.0;
  double s = 0.0;
  Vec v;

  int dim() const { return static_cast<int>(v.size()) + 2; }

  Vec coords() const {
    Vec c(dim());
    c(kT) = t;
    c(kS) = s;
    c.tail(v.size()) = v;
    return c;
  }

  static Point from_coords(const Vec& c) {
    return Point{c(kT), c(kS), c.tail(c.size() - 2)};
  }

  bool operator==(const Point& o) const {
    return t == o.t && s == o.s && v.size() == o.v.size() && v == o.v;
  }
};

struct Tangent {
  double dt = 0.0;
  double ds = 0.0;
  Vec dv;
  Point base;

  Vec components() const {
    Vec c(dv.size() + 2);
    c(kT) = dt;
    c(kS) = ds;
    c.tail(dv.size()) = dv;
    return c;
  }

  static Tangent from_components(const Vec& c, Point base) {
    return Tangent{c(kT), c(kS), c.tail(c.size() - 2), std::move(base)};
  }

  /// Coordinate basis vector d/dx^index at `base`.
  static Tangent basis(int index, const Point& base) {
    Vec c = Vec::Zero(base.dim());
    c(index) = 1.0;
    return from_components(c, base);
  }
};

/**
 * One member of the model family
 *
 *   g = kappa dt^2 + dt ds + sum_i dx_i^2,   kappa(t, v) = f(t)|v|^2 + <A v, v>
 *
 * on R^2 x V, V = R^{n-2}. Immutable once built; construct through build_model().
 */
class ModelSpec {
 public:
  int n() const { return n_; }
  int fiber_dim() const { return n_ - 2; }
  ModelMode mode() const { return mode_; }
  const FourierSeries& fourier() const { return fourier_; }
  double period() const { return fourier_.period(); }
  const Mat& A() const { return A_; }
  /// Eigenvalues of A, descending.
  const Vec& eigenvalues() const { return eigenvalues_; }
  /// Orthonormal eigenvectors as columns, matched to eigenvalues().
  const Mat& eigenvectors() const { return eigenvectors_; }

  double f(double t, int derivative = 0) const { return fourier_.derivative(t, derivative); }

  bool operator==(const ModelSpec& o) const {
    return n_ == o.n_ && mode_ == o.mode_ && fourier_ == o.fourier_ && A_ == o.A_;
  }

 private:
  friend ModelSpec build_model(int, FourierSeries, const Mat&, ModelMode);

  int n_ = 0;
  ModelMode mode_ = ModelMode::strict;
  FourierSeries fourier_;
  Mat A_;
  Vec eigenvalues_;
  Mat eigenvectors_;
};

namespace detail {

inline void sign_normalize(Eigen::Ref<Vec> e) {
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    if (std::abs(e(k)) > 1e-14) {
      if (e(k) < 0) e = -e;
      return;
    }
  }
}

inline bool lex_greater(const Vec& a, const Vec& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k) > b(k) + 1e-14) return true;
    if (a(k) < b(k) - 1e-14) return false;
  }
  return false;
}

}  // namespace detail

inline ModelSpec build_model(int n, FourierSeries fourier, const Mat& A_entries, ModelMode mode) {
  const int min_n = (mode == ModelMode::strict) ? 5 : 4;
  if (n < min_n) {
    throw Error(ErrorCode::DimensionTooSmall,
                "n = " + std::to_string(n) + " but this mode requires n >= " + std::to_string(min_n));
  }
  const int m = n - 2;
  if (A_entries.rows() != m || A_entries.cols() != m) {
    throw Error(ErrorCode::InvalidArgument, "A must be square of size n - 2 = " + std::to_string(m));
  }
  if (!A_entries.allFinite()) throw Error(ErrorCode::InvalidArgument, "A has non-finite entries");

  const double scale = std::max(1.0, A_entries.cwiseAbs().maxCoeff());
  const double asym = (A_entries - A_entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw Error(ErrorCode::NonSymmetric, "max |A - A^T| = " + std::to_string(asym));
  }
  const double tr = A_entries.trace();
  if (std::abs(tr) > 1e-12 * scale) {
    throw Error(ErrorCode::NonTraceless, "trace(A) = " + std::to_string(tr));
  }
  if (mode == ModelMode::strict) {
    if (A_entries.norm() <= 1e-12) throw Error(ErrorCode::ZeroOperator, "A must be nonzero in strict mode");
    if (!fourier.nonconstant()) {
      throw Error(ErrorCode::ConstantF, "f is constant: the model is locally symmetric");
    }
  }

  ModelSpec spec;
  spec.n_ = n;
  spec.mode_ = mode;
  spec.fourier_ = std::move(fourier);
  spec.A_ = 0.5 * (A_entries + A_entries.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> solver(spec.A_);
  Vec lam = solver.eigenvalues();
  Mat vecs = solver.eigenvectors();
  for (int k = 0; k < m; ++k) detail::sign_normalize(vecs.col(k));

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  const double tie = 1e-8 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(lam(a) - lam(b)) > tie) return lam(a) > lam(b);
    return detail::lex_greater(vecs.col(a), vecs.col(b));
  });
  spec.eigenvalues_.resize(m);
  spec.eigenvectors_.resize(m, m);
  for (int k = 0; k < m; ++k) {
    spec.eigenvalues_(k) = lam(order[k]);
    spec.eigenvectors_.col(k) = vecs.col(order[k]);
  }

  const double lam_sum = spec.eigenvalues_.sum();
  const double orth = (spec.eigenvectors_.transpose() * spec.eigenvectors_ - Mat::Identity(m, m))
                          .cwiseAbs()
                          .maxCoeff();
  if (std::abs(lam_sum) > 1e-10 * scale || orth > 1e-10) {
    throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed validation");
  }
  return spec;
}

// ---------------------------------------------------------------------------
// kappa and its partial derivatives

/// Selects which partial derivative of kappa to evaluate.
struct Partial {
  enum class Kind { value, t, s, x, tx, xx, tt };
  Kind kind = Kind::value;
  int i = -1;
  int j = -1;

  static Partial value() { return {Kind::value}; }
  static Partial t() { return {Kind::t}; }
  static Partial s() { return {Kind::s}; }
  static Partial x(int i) { return {Kind::x, i}; }
  static Partial tx(int i) { return {Kind::tx, i}; }
  static Partial xx(int i, int j) { return {Kind::xx, i, j}; }
  static Partial tt() { return {Kind::tt}; }
};

namespace detail {

inline void check_point(const ModelSpec& model, const Point& p) {
  if (p.v.size() != model.fiber_dim()) {
    throw Error(ErrorCode::InvalidArgument, "point fiber coordinate has wrong length");
  }
}

}  // namespace detail

/// K(t) v = (f(t) + A) v.
inline Vec apply_K(const ModelSpec& model, double t, const Vec& v) {
  return model.f(t) * v + model.A() * v;
}

/// Gradient of kappa in the fiber directions: 2 (f(t) v + A v).
inline Vec kappa_gradient(const ModelSpec& model, const Point& p) { return 2.0 * apply_K(model, p.t, p.v); }

inline double eval_kappa(const ModelSpec& model, const Point& p, Partial d = Partial::value()) {
  detail::check_point(model, p);
  const int m = model.fiber_dim();
  auto check_index = [m](int i) {
    if (i < 0 || i >= m) throw Error(ErrorCode::InvalidArgument, "kappa derivative index out of range");
  };
  switch (d.kind) {
    case Partial::Kind::value:
      return model.f(p.t) * p.v.squaredNorm() + p.v.dot(model.A() * p.v);
    case Partial::Kind::t:
      return model.f(p.t, 1) * p.v.squaredNorm();
    case Partial::Kind::s:
      return 0.0;
    case Partial::Kind::x:
      check_index(d.i);
      return 2.0 * (model.f(p.t) * p.v(d.i) + model.A().row(d.i).dot(p.v));
    case Partial::Kind::tx:
      check_index(d.i);
      return 2.0 * model.f(p.t, 1) * p.v(d.i);
    case Partial::Kind::xx:
      check_index(d.i);
      check_index(d.j);
      return 2.0 * ((d.i == d.j ? model.f(p.t) : 0.0) + model.A()(d.i, d.j));
    case Partial::Kind::tt:
      return model.f(p.t, 2) * p.v.squaredNorm();
  }
  throw Error(ErrorCode::InvalidArgument, "invalid kappa derivative selector");
}

// ---------------------------------------------------------------------------
// metric

/// Coordinate components g_ab at p: g_tt = kappa, g_ts = g_st = 1/2, g_ij = delta_ij.
inline Mat metric_components(const ModelSpec& model, const Point& p) {
  const int n = model.n();
  Mat g = Mat::Zero(n, n);
  g(kT, kT) = eval_kappa(model, p);
  g(kT, kS) = g(kS, kT) = 0.5;
  g.bottomRightCorner(n - 2, n - 2).setIdentity();
  return g;
}

/// Inverse metric: g^ss = -4 kappa, g^st = 2, g^tt = 0, g^ij = delta_ij.
inline Mat inverse_metric_components(const ModelSpec& model, const Point& p) {
  const int n = model.n();
  Mat gi = Mat::Zero(n, n);
  gi(kS, kS) = -4.0 * eval_kappa(model, p);
  gi(kT, kS) = gi(kS, kT) = 2.0;
  gi.bottomRightCorner(n - 2, n - 2).setIdentity();
  return gi;
}

/// g(X, Y) from components, symmetric in its arguments by construction.
inline double metric_contract(double kappa, const Vec& x, const Vec& y) {
  const auto m = x.size() - 2;
  return kappa * (x(kT) * y(kT)) + 0.5 * (x(kT) * y(kS) + x(kS) * y(kT)) +
         x.tail(m).dot(y.tail(m));
}

inline double metric_at(const ModelSpec& model, const Tangent& X, const Tangent& Y) {
  if (!(X.base == Y.base)) throw Error(ErrorCode::BasePointMismatch, "tangents live at different points");
  detail::check_point(model, X.base);
  if (X.dv.size() != model.fiber_dim() || Y.dv.size() != model.fiber_dim()) {
    throw Error(ErrorCode::InvalidArgument, "tangent fiber component has wrong length");
  }
  return metric_contract(eval_kappa(model, X.base), X.components(), Y.components());
}

// ---------------------------------------------------------------------------
// Christoffel symbols

/**
 * Levi-Civita connection coefficients Gamma^a_{bc} at a point.
 *
 * Only Gamma^s_{it} = Gamma^s_{ti} = d_i kappa, Gamma^s_{tt} = d_t kappa and
 * Gamma^i_{tt} = -d_i kappa / 2 are nonzero; every other entry is exactly zero.
 */
class ChristoffelTable {
 public:
  ChristoffelTable(double dkappa_dt, Vec grad) : dkappa_dt_(dkappa_dt), grad_(std::move(grad)) {}

  int n() const { return static_cast<int>(grad_.size()) + 2; }
  double dkappa_dt() const { return dkappa_dt_; }
  const Vec& kappa_gradient() const { return grad_; }

  double operator()(int a, int b, int c) const {
    if (a == kS) {
      if (b == kT && c == kT) return dkappa_dt_;
      if (b == kT && c >= kX0) return grad_(c - kX0);
      if (c == kT && b >= kX0) return grad_(b - kX0);
      return 0.0;
    }
    if (a >= kX0 && b == kT && c == kT) return -0.5 * grad_(a - kX0);
    return 0.0;
  }

  /// Gamma^a_{bc} u^b w^c.
  Vec contract(const Vec& u, const Vec& w) const {
    const auto m = grad_.size();
    Vec out = Vec::Zero(m + 2);
    out(kS) = dkappa_dt_ * u(kT) * w(kT) + u(kT) * grad_.dot(w.tail(m)) + w(kT) * grad_.dot(u.tail(m));
    out.tail(m) = -0.5 * u(kT) * w(kT) * grad_;
    return out;
  }

  /// Dense copy indexed [a][b][c] -> a * n^2 + b * n + c.
  std::vector<double> dense() const {
    const int nn = n();
    std::vector<double> out(static_cast<std::size_t>(nn * nn * nn));
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b)
        for (int c = 0; c < nn; ++c) out[static_cast<std::size_t>((a * nn + b) * nn + c)] = (*this)(a, b, c);
    return out;
  }

 private:
  double dkappa_dt_;
  Vec grad_;
};

inline ChristoffelTable christoffel_at(const ModelSpec& model, const Point& p) {
  detail::check_point(model, p);
  return ChristoffelTable(eval_kappa(model, p, Partial::t()), kappa_gradient(model, p));
}

}  // namespace ppwave
