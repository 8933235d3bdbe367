#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ppwave/hill.hpp"
#include "ppwave/killing.hpp"
#include "ppwave/model.hpp"

namespace ppwave {

/// (k, x, u) in G = Z x R x E.
struct GroupElement {
  long long k = 0;
  double x = 0.0;
  HillSolution u;
};

inline GroupElement g_identity(const HillSpacePtr& space) { return GroupElement{0, 0.0, HillSolution::zero(space)}; }

/**
 * g1 g2 = (k1 + k2, x1 + x2 - Omega(u1, T^{k2} u2), T^{-k2} u1 + u2), the law making
 * (g1 g2) . m = g1 . (g2 . m) for the action below.
 */
inline GroupElement g_compose(const GroupElement& g1, const GroupElement& g2) {
  g1.u.require_same(g2.u);
  return GroupElement{g1.k + g2.k, g1.x + g2.x - omega(g1.u, shift(g2.u, g2.k)), shift(g1.u, -g2.k) + g2.u};
}

/**
 * Inverse obtained by solving g g' = e component by component:
 *   k + k' = 0,  T^{-k'} u + u' = 0,  x + x' - Omega(u, T^{k'} u') = 0.
 */
inline GroupElement g_inverse(const GroupElement& g) {
  const long long k_inv = -g.k;
  HillSolution u_inv = -shift(g.u, -k_inv);
  const double x_inv = -g.x + omega(g.u, shift(u_inv, k_inv));
  return GroupElement{k_inv, x_inv, std::move(u_inv)};
}

/// g . (t, s, v) = (t + kp, s + x - <u'(t), 2v + u(t)>, v + u(t)).
inline Point g_act(const GroupElement& g, const Point& m) {
  const HillSpace& space = *g.u.space();
  detail::check_point(space.model(), m);
  const auto [u, du] = g.u.eval(m.t);
  return Point{m.t + static_cast<double>(g.k) * space.period(), m.s + g.x - du.dot(2.0 * m.v + u), m.v + u};
}

/// Coordinate Jacobian of m -> g . m (acting on component vectors).
inline Mat g_act_jacobian(const GroupElement& g, const Point& m) {
  const HillSpace& space = *g.u.space();
  detail::check_point(space.model(), m);
  const int n = space.model().n();
  const int mm = n - 2;
  const auto [u, du] = g.u.eval(m.t);
  const Vec ddu = apply_K(space.model(), m.t, u);
  Mat J = Mat::Identity(n, n);
  J(kS, kT) = -(ddu.dot(2.0 * m.v + u) + du.dot(du));
  J.block(kS, kX0, 1, mm) = -2.0 * du.transpose();
  J.block(kX0, kT, mm, 1) = du;
  return J;
}

/// dF_g applied to X, based at g . X.base.
inline Tangent g_act_differential(const GroupElement& g, const Tangent& X) {
  return Tangent::from_components(g_act_jacobian(g, X.base) * X.components(), g_act(g, X.base));
}

struct IsometrySample {
  Point point;
  Vec X;  // coordinate components at point
  Vec Y;
};

/// max |g(dF X, dF Y) - g(X, Y)| over the samples.
inline double isometry_residual(const GroupElement& g, const std::vector<IsometrySample>& samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "isometry_residual needs samples");
  const ModelSpec& model = g.u.space()->model();
  double worst = 0.0;
  for (const auto& smp : samples) {
    const Mat J = g_act_jacobian(g, smp.point);
    const Point image = g_act(g, smp.point);
    const double before = metric_contract(eval_kappa(model, smp.point), smp.X, smp.Y);
    const double after = metric_contract(eval_kappa(model, image), J * smp.X, J * smp.Y);
    worst = std::max(worst, std::abs(after - before));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Heisenberg bridge

/// Upper unitriangular [[1, a^T, c], [0, I, b], [0, 0, 1]].
struct HeisElement {
  Vec a;
  Vec b;
  double c = 0.0;

  Mat matrix() const {
    const auto m = a.size();
    Mat M = Mat::Identity(m + 2, m + 2);
    M.block(0, 1, 1, m) = a.transpose();
    M(0, m + 1) = c;
    M.block(1, m + 1, m, 1) = b;
    return M;
  }
};

inline HeisElement heis_identity(int m) { return HeisElement{Vec::Zero(m), Vec::Zero(m), 0.0}; }

/// Matrix product: (a1 + a2, b1 + b2, c1 + c2 + <a1, b2>).
inline HeisElement heis_mul(const HeisElement& h1, const HeisElement& h2) {
  return HeisElement{h1.a + h2.a, h1.b + h2.b, h1.c + h2.c + h1.a.dot(h2.b)};
}

inline HeisElement heis_inverse(const HeisElement& h) { return HeisElement{-h.a, -h.b, -h.c + h.a.dot(h.b)}; }

/**
 * (0, x, u) -> phi = (-x, u) in He(E, Omega) -> matrix group, using the Darboux
 * coordinates u ~ (u(0), u'(0)):  a = u'(0), b = u(0), c = (-x + <a, b>) / 2.
 * With Omega(u1, u2) = <a1, b2> - <b1, a2> this intertwines
 * (t1 + t2 + Omega(u1, u2), u1 + u2) with the matrix product.
 */
inline HeisElement heis_bridge(const GroupElement& g) {
  if (g.k != 0) throw Error(ErrorCode::InvalidArgument, "heis_bridge is defined on the k = 0 subgroup");
  const Vec& a = g.u.w0();
  const Vec& b = g.u.u0();
  return HeisElement{a, b, 0.5 * (-g.x + a.dot(b))};
}

/// Inverse of heis_bridge.
inline GroupElement heis_unbridge(const HillSpacePtr& space, const HeisElement& h) {
  return GroupElement{0, -(2.0 * h.c - h.a.dot(h.b)), HillSolution(space, h.b, h.a)};
}

/// pi(exp F)(a, b, c) = (e^F a, e^F b, c); F must commute with A.
inline HeisElement pi_automorphism(const ModelSpec& model, const Mat& F, const HeisElement& h) {
  if (F.rows() != model.fiber_dim() || !is_skew(F)) {
    throw Error(ErrorCode::InvalidArgument, "F must be skew-symmetric (n-2)x(n-2)");
  }
  const double comm = (model.A() * F - F * model.A()).cwiseAbs().maxCoeff();
  if (comm > 1e-10 * std::max(1.0, model.A().cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::NonCommutingF, "[A, F] = " + std::to_string(comm));
  }
  const Mat R = rotation_flow(F, 1.0);
  return HeisElement{R * h.a, R * h.b, h.c};
}

// ---------------------------------------------------------------------------
// lattice Sigma

struct SigmaGenerator {
  double r = 0.0;
  HillSolution w;
};

struct SigmaLattice {
  std::vector<SigmaGenerator> generators;

  int rank() const {
    if (generators.empty()) return 0;
    const auto dim = 1 + generators.front().w.data().size();
    Mat M(dim, static_cast<Eigen::Index>(generators.size()));
    for (std::size_t j = 0; j < generators.size(); ++j) {
      Vec col(dim);
      col << generators[j].r, generators[j].w.data();
      M.col(static_cast<Eigen::Index>(j)) = col;
    }
    Eigen::FullPivLU<Mat> lu(M);
    lu.setThreshold(1e-10);
    return static_cast<int>(lu.rank());
  }
};

struct SigmaReport {
  bool abelian_ok = false;
  bool in_L_ok = false;
  bool rank_ok = false;
  int rank = 0;
  int expected_rank = 0;
  double max_omega = 0.0;        // max |Omega(w_i, w_j)|
  double max_commutator = 0.0;   // max deviation of g_i g_j g_i^-1 g_j^-1 from e
  double max_membership = 0.0;   // max |w'(0) - B0 w(0)|
};

/**
 * Algebraic checks on user-supplied generators (r_j, w_j) of Sigma in R x L, with L
 * the subspace u' = B u defined by B(0) = B0.
 */
inline SigmaReport sigma_validate(const HillSpacePtr& space, const SigmaLattice& lattice, const Mat& B0) {
  if (lattice.generators.empty()) throw Error(ErrorCode::RankDeficient, "lattice has no generators");
  SigmaReport rep;
  rep.rank = lattice.rank();
  rep.expected_rank = space->model().n() - 1;
  if (rep.rank < static_cast<int>(lattice.generators.size())) {
    throw Error(ErrorCode::RankDeficient, "generators are linearly dependent (rank " + std::to_string(rep.rank) + ")");
  }
  rep.rank_ok = rep.rank == rep.expected_rank;

  const auto& gens = lattice.generators;
  for (const auto& gj : gens) rep.max_membership = std::max(rep.max_membership, lagrangian_membership_residual(gj.w, B0));
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      rep.max_omega = std::max(rep.max_omega, std::abs(omega(gens[i].w, gens[j].w)));
      const GroupElement a{0, gens[i].r, gens[i].w};
      const GroupElement b{0, gens[j].r, gens[j].w};
      const GroupElement comm = g_compose(g_compose(a, b), g_compose(g_inverse(a), g_inverse(b)));
      const double dev = std::max({std::abs(static_cast<double>(comm.k)), std::abs(comm.x),
                                   comm.u.data().cwiseAbs().maxCoeff()});
      rep.max_commutator = std::max(rep.max_commutator, dev);
    }
  rep.in_L_ok = rep.max_membership <= 1e-8;
  rep.abelian_ok = rep.max_omega <= 1e-8 && rep.max_commutator <= 1e-9;
  return rep;
}

}  // namespace ppwave
