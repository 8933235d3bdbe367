#pragma once

// Test-only model factories and independent oracles (finite differences, fixed-step RK4,
// closed forms). Nothing here calls the library routine it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ppwave/ppwave.hpp"

namespace ppwave::testing {

inline Mat random_traceless(Rng& rng, int m, double scale) {
  Mat A(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) A(i, j) = A(j, i) = rng.uniform(-scale, scale);
  A.diagonal().array() -= A.trace() / m;
  return A;
}

/// Strict model with one or two random Fourier modes and random traceless A.
inline ModelSpec random_strict_model(int n, std::uint64_t seed, double a0 = 0.0) {
  Rng rng(seed, 0x7e57);
  std::vector<FourierSeries::Mode> modes{{rng.uniform(0.3, 1.0), rng.uniform(-0.5, 0.5)},
                                         {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)}};
  return build_model(n, FourierSeries(1.0, a0, modes), random_traceless(rng, n - 2, 1.0), ModelMode::strict);
}

/// Strict model whose Hill system is Floquet-stable (f close to -4, small A).
inline ModelSpec stable_model(int n, std::uint64_t seed) {
  Rng rng(seed, 0x57ab);
  return build_model(n, FourierSeries(1.0, -4.0, {{0.5, 0.0}, {0.0, 0.3}}), random_traceless(rng, n - 2, 0.3),
                     ModelMode::strict);
}

inline ModelSpec example_model(double lambda = 1.0) {
  Mat A = Mat::Zero(3, 3);
  A.diagonal() << lambda, lambda, -2.0 * lambda;
  return build_model(5, FourierSeries(1.0, 0.0, {{1.0, 0.0}}), A, ModelMode::strict);
}

inline ModelSpec relaxed_constant(int n, double f0, const Mat& A) {
  return build_model(n, FourierSeries::constant(f0), A, ModelMode::relaxed);
}

inline bool floquet_stable(const HillSpace& space) {
  for (int i = 0; i < space.dim(); ++i)
    if (std::abs(space.pair(i).period_map().trace()) >= 2.0) return false;
  return true;
}

/// Classical RK4 with fixed step h for u'' = K(t) u, from t = 0 to T.
inline std::pair<Vec, Vec> rk4_hill(const ModelSpec& model, Vec q, Vec w, double T, double h = 1e-5) {
  const auto steps = static_cast<long>(std::ceil(std::abs(T) / h));
  const double dt = T / static_cast<double>(steps);
  auto acc = [&](double t, const Vec& x) {
    Mat K = model.A();
    K.diagonal().array() += model.f(t);
    return Vec(K * x);
  };
  double t = 0.0;
  for (long i = 0; i < steps; ++i) {
    const Vec k1q = w, k1w = acc(t, q);
    const Vec k2q = w + 0.5 * dt * k1w, k2w = acc(t + 0.5 * dt, q + 0.5 * dt * k1q);
    const Vec k3q = w + 0.5 * dt * k2w, k3w = acc(t + 0.5 * dt, q + 0.5 * dt * k2q);
    const Vec k4q = w + dt * k3w, k4w = acc(t + dt, q + dt * k3q);
    q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    t += dt;
  }
  return {q, w};
}

/// Direct kappa = f(t)|v|^2 + <Av, v>.
inline double kappa_direct(const ModelSpec& model, const Point& p) {
  return model.f(p.t) * p.v.squaredNorm() + p.v.dot(model.A() * p.v);
}

/// Metric components assembled from the line element kappa dt^2 + dt ds + dx^2.
inline Mat metric_direct(const ModelSpec& model, const Vec& x) {
  const int n = model.n();
  Mat g = Mat::Zero(n, n);
  g(0, 0) = kappa_direct(model, Point::from_coords(x));
  g(0, 1) = g(1, 0) = 0.5;
  for (int i = 2; i < n; ++i) g(i, i) = 1.0;
  return g;
}

/// Gamma[k](i, j) from central differences of the metric.
inline std::vector<Mat> fd_christoffel(const ModelSpec& model, const Vec& x, double h = 1e-5) {
  const int n = model.n();
  std::vector<Mat> dg(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    Vec xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    dg[static_cast<std::size_t>(a)] = (metric_direct(model, xp) - metric_direct(model, xm)) / (2.0 * h);
  }
  const Mat ginv = metric_direct(model, x).inverse();
  std::vector<Mat> G(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          s += 0.5 * ginv(k, l) *
               (dg[static_cast<std::size_t>(i)](l, j) + dg[static_cast<std::size_t>(j)](l, i) -
                dg[static_cast<std::size_t>(l)](i, j));
        }
        G[static_cast<std::size_t>(k)](i, j) = s;
      }
  return G;
}

/// R_{abcd} = g_{ae} (d_c Gamma^e_{db} - d_d Gamma^e_{cb} + Gamma^e_{cf} Gamma^f_{db} - Gamma^e_{df} Gamma^f_{cb}),
/// with the Christoffel derivatives taken by central differences of fd_christoffel.
inline Tensor4 fd_riemann(const ModelSpec& model, const Vec& x, double h = 5e-4, double h_inner = 1e-4) {
  const int n = model.n();
  const auto G = fd_christoffel(model, x, h_inner);
  std::vector<std::vector<Mat>> dG(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    Vec xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    const auto Gp = fd_christoffel(model, xp, h_inner), Gm = fd_christoffel(model, xm, h_inner);
    for (int e = 0; e < n; ++e)
      dG[static_cast<std::size_t>(c)].push_back((Gp[static_cast<std::size_t>(e)] - Gm[static_cast<std::size_t>(e)]) /
                                                (2.0 * h));
  }
  auto gam = [&](int e, int i, int j) { return G[static_cast<std::size_t>(e)](i, j); };
  auto dgam = [&](int c, int e, int i, int j) { return dG[static_cast<std::size_t>(c)][static_cast<std::size_t>(e)](i, j); };
  const Mat g = metric_direct(model, x);
  Tensor4 R(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double v = 0.0;
          for (int e = 0; e < n; ++e) {
            double up = dgam(c, e, d, b) - dgam(d, e, c, b);
            for (int f = 0; f < n; ++f) up += gam(e, c, f) * gam(f, d, b) - gam(e, d, f) * gam(f, c, b);
            v += g(a, e) * up;
          }
          R(a, b, c, d) = v;
        }
  return R;
}

/// Central-difference Jacobian of a map R^n -> R^n.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& x, double h = 1e-6) {
  const auto n = x.size();
  Mat J(F(x).size(), n);
  for (Eigen::Index a = 0; a < n; ++a) {
    Vec xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    J.col(a) = (F(xp) - F(xm)) / (2.0 * h);
  }
  return J;
}

/// exp(theta K) for a 3x3 skew K with unit axis, by the Rodrigues formula.
inline Mat rodrigues(const Mat& X) {
  const double theta = std::sqrt(0.5 * (X.transpose() * X).trace());
  const Mat I = Mat::Identity(3, 3);
  if (theta == 0.0) return I;
  return I + std::sin(theta) / theta * X + (1.0 - std::cos(theta)) / (theta * theta) * X * X;
}

inline Mat random_skew(Rng& rng, int m) {
  Mat F(m, m);
  for (int i = 0; i < m; ++i) {
    F(i, i) = 0.0;
    for (int j = i + 1; j < m; ++j) {
      F(i, j) = rng.uniform(-1.0, 1.0);
      F(j, i) = -F(i, j);
    }
  }
  return F;
}

/// Model whose A has the given eigenvalue multiplicities (block values chosen distinct, traceless).
inline Mat operator_with_multiplicities(const std::vector<int>& mult, std::uint64_t seed) {
  int m = 0;
  for (int k : mult) m += k;
  Vec diag(m);
  int pos = 0;
  for (std::size_t a = 0; a < mult.size(); ++a) {
    for (int r = 0; r < mult[a]; ++r) diag(pos++) = static_cast<double>(a) + 1.0;
  }
  diag.array() -= diag.mean();
  // Conjugate by a random orthogonal matrix so the eigenbasis is not the coordinate basis.
  Rng rng(seed, 0x0a);
  Mat Q(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) Q(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::HouseholderQR<Mat> qr(Q);
  const Mat O = qr.householderQ();
  return O * diag.asDiagonal() * O.transpose();
}

}  // namespace ppwave::testing
