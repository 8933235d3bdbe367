#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ppwave/hill.hpp"
#include "ppwave/model.hpp"

namespace ppwave {

/// Element of the Killing catalog: E_i, E*_i, Z = d_s, or the rotation field X_F.
struct KillingField {
  enum class Kind { E, E_star, Z, X_F };

  Kind kind = Kind::Z;
  int index = -1;
  Mat F;

  static KillingField E(int i) { return {Kind::E, i, {}}; }
  static KillingField E_star(int i) { return {Kind::E_star, i, {}}; }
  static KillingField Z() { return {Kind::Z, -1, {}}; }
  static KillingField X(Mat F) { return {Kind::X_F, -1, std::move(F)}; }

  std::string name() const {
    switch (kind) {
      case Kind::E: return "E_" + std::to_string(index + 1);
      case Kind::E_star: return "E*_" + std::to_string(index + 1);
      case Kind::Z: return "Z";
      case Kind::X_F: return "X_F";
    }
    return "?";
  }
};

inline bool is_skew(const Mat& F, double tol = 1e-12) {
  return F.rows() == F.cols() && (F + F.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, F.cwiseAbs().maxCoeff());
}

/// Field value and coordinate Jacobian J(b, a) = d_a X^b at one point.
struct FieldJet {
  Vec value;
  Mat jacobian;
};

namespace detail {

inline int require_index(const HillSpace& space, const KillingField& field) {
  if (field.index < 0 || field.index >= space.dim()) {
    throw Error(ErrorCode::InvalidArgument, "Killing field index out of range");
  }
  return field.index;
}

/// E_u = u(t) . d_x - 2 <u'(t), x> d_s, the generator of the (0, 0, u) translations.
inline FieldJet solution_field_jet(const HillSpace& space, const Vec& u0, const Vec& w0, const Point& p) {
  const int n = space.model().n();
  const int m = n - 2;
  const auto [u, du] = space.evolve(u0, w0, p.t);
  const Vec ddu = apply_K(space.model(), p.t, u);
  FieldJet jet{Vec::Zero(n), Mat::Zero(n, n)};
  jet.value(kS) = -2.0 * du.dot(p.v);
  jet.value.tail(m) = u;
  jet.jacobian(kS, kT) = -2.0 * ddu.dot(p.v);
  jet.jacobian.block(kS, kX0, 1, m) = -2.0 * du.transpose();
  jet.jacobian.block(kX0, kT, m, 1) = du;
  return jet;
}

}  // namespace detail

inline FieldJet killing_jet(const HillSpace& space, const KillingField& field, const Point& p) {
  detail::check_point(space.model(), p);
  const int n = space.model().n();
  const int m = n - 2;
  switch (field.kind) {
    case KillingField::Kind::Z: {
      FieldJet jet{Vec::Zero(n), Mat::Zero(n, n)};
      jet.value(kS) = 1.0;
      return jet;
    }
    case KillingField::Kind::E: {
      const int i = detail::require_index(space, field);
      return detail::solution_field_jet(space, Vec::Unit(m, i), Vec::Zero(m), p);
    }
    case KillingField::Kind::E_star: {
      const int i = detail::require_index(space, field);
      return detail::solution_field_jet(space, Vec::Zero(m), Vec::Unit(m, i), p);
    }
    case KillingField::Kind::X_F: {
      if (field.F.rows() != m || !is_skew(field.F)) {
        throw Error(ErrorCode::InvalidArgument, "X_F needs a skew-symmetric (n-2)x(n-2) matrix");
      }
      FieldJet jet{Vec::Zero(n), Mat::Zero(n, n)};
      jet.value.tail(m) = field.F * p.v;
      jet.jacobian.block(kX0, kX0, m, m) = field.F;
      return jet;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown Killing field kind");
}

/// Field E_u for an arbitrary element u of E.
inline FieldJet solution_field_jet(const HillSolution& u, const Point& p) {
  return detail::solution_field_jet(*u.space(), u.u0(), u.w0(), p);
}

inline Tangent killing_eval(const HillSpace& space, const KillingField& field, const Point& p) {
  return Tangent::from_components(killing_jet(space, field, p).value, p);
}

/// Symmetrized covariant derivative g(nabla_a X, e_b) + g(e_a, nabla_b X) in the coordinate frame.
inline Mat killing_form(const ModelSpec& model, const FieldJet& jet, const Point& p) {
  const int n = model.n();
  const ChristoffelTable gam = christoffel_at(model, p);
  Mat nabla = jet.jacobian;  // nabla(b, a) = (nabla_a X)^b
  for (int a = 0; a < n; ++a) {
    const Vec corr = gam.contract(Vec::Unit(n, a), jet.value);
    nabla.col(a) += corr;
  }
  const Mat L = metric_components(model, p) * nabla;
  return L + L.transpose();
}

inline double killing_residual(const HillSpace& space, const KillingField& field, const std::vector<Point>& samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "killing_residual needs samples");
  double worst = 0.0;
  for (const Point& p : samples) {
    worst = std::max(worst, killing_form(space.model(), killing_jet(space, field, p), p).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// All 2n - 3 fields E_1..E_{n-2}, E*_1..E*_{n-2}, Z.
inline std::vector<KillingField> heisenberg_catalog(int n) {
  std::vector<KillingField> out;
  for (int i = 0; i < n - 2; ++i) out.push_back(KillingField::E(i));
  for (int i = 0; i < n - 2; ++i) out.push_back(KillingField::E_star(i));
  out.push_back(KillingField::Z());
  return out;
}

/// Lie bracket [X, Y]^b = X^a d_a Y^b - Y^a d_a X^b from analytic jets.
inline Vec lie_bracket(const FieldJet& X, const FieldJet& Y) {
  return Y.jacobian * X.value - X.jacobian * Y.value;
}

struct CommutatorReport {
  double max_dev_E = 0.0;       // [X_F, E_i] - sum_l F_il E_l
  double max_dev_E_star = 0.0;  // [X_F, E*_i] - sum_l F_il E*_l
  double max_dev_Z = 0.0;       // [X_F, Z]
  double tolerance = 0.0;
  bool passed = false;
};

/**
 * Compare the analytic brackets of X_F with the catalog against
 * [X_F, E_i] = sum_l F_il E_l, [X_F, E*_i] = sum_l F_il E*_l, [X_F, Z] = 0
 * at every sample point.
 */
inline CommutatorReport commutator_check(const HillSpace& space, const Mat& F, const std::vector<Point>& samples,
                                         double tol) {
  const int m = space.dim();
  if (F.rows() != m || !is_skew(F)) throw Error(ErrorCode::InvalidArgument, "F must be skew-symmetric (n-2)x(n-2)");
  CommutatorReport rep;
  rep.tolerance = tol;
  const KillingField XF = KillingField::X(F);
  for (const Point& p : samples) {
    const FieldJet x = killing_jet(space, XF, p);
    rep.max_dev_Z = std::max(rep.max_dev_Z, lie_bracket(x, killing_jet(space, KillingField::Z(), p)).cwiseAbs().maxCoeff());
    std::vector<Vec> e, es;
    for (int l = 0; l < m; ++l) {
      e.push_back(killing_jet(space, KillingField::E(l), p).value);
      es.push_back(killing_jet(space, KillingField::E_star(l), p).value);
    }
    for (int i = 0; i < m; ++i) {
      Vec want = Vec::Zero(m + 2), want_star = Vec::Zero(m + 2);
      for (int l = 0; l < m; ++l) {
        want += F(i, l) * e[static_cast<std::size_t>(l)];
        want_star += F(i, l) * es[static_cast<std::size_t>(l)];
      }
      const Vec got = lie_bracket(x, killing_jet(space, KillingField::E(i), p));
      const Vec got_star = lie_bracket(x, killing_jet(space, KillingField::E_star(i), p));
      rep.max_dev_E = std::max(rep.max_dev_E, (got - want).cwiseAbs().maxCoeff());
      rep.max_dev_E_star = std::max(rep.max_dev_E_star, (got_star - want_star).cwiseAbs().maxCoeff());
    }
  }
  rep.passed = rep.max_dev_E <= tol && rep.max_dev_E_star <= tol && rep.max_dev_Z <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// centralizer algebra and dimension counts

struct SkewBasis {
  std::vector<Mat> elements;
  int dim() const { return static_cast<int>(elements.size()); }
};

/// Sizes of the eigenvalue clusters of a descending spectrum, relative tolerance `rel_tol`.
inline std::vector<int> eigen_multiplicities(const Vec& eigenvalues, double rel_tol = 1e-8) {
  std::vector<double> lam(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::sort(lam.begin(), lam.end(), std::greater<>());
  const double scale = std::max(1.0, eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0);
  std::vector<int> out;
  for (std::size_t k = 0; k < lam.size(); ++k) {
    if (k > 0 && std::abs(lam[k] - lam[k - 1]) <= rel_tol * scale) {
      ++out.back();
    } else {
      out.push_back(1);
    }
  }
  return out;
}

/**
 * Basis of { F in so(m) : AF = FA }, the nullspace of F -> [A, F] on skew matrices.
 * Elements are Frobenius-orthogonal with Frobenius norm sqrt(2) (a single-plane rotation
 * has unit angular speed) and signed so the first nonzero upper entry is positive.
 */
inline SkewBasis centralizer_basis(const Mat& A, double rel_tol = 1e-8) {
  if (A.rows() != A.cols()) throw Error(ErrorCode::InvalidArgument, "A must be square");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, A.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::NonSymmetric, "A must be symmetric");
  }
  const int m = static_cast<int>(A.rows());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  SkewBasis basis;
  if (pairs.empty()) return basis;

  auto skew_unit = [m](int i, int j) {
    Mat S = Mat::Zero(m, m);
    S(i, j) = 1.0;
    S(j, i) = -1.0;
    return S;
  };
  Mat L(m * m, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Mat S = skew_unit(pairs[k].first, pairs[k].second);
    const Mat C = A * S - S * A;
    L.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vec>(C.data(), m * m);
  }
  Eigen::JacobiSVD<Mat> svd(L, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double thresh = rel_tol * std::max(1.0, A.cwiseAbs().maxCoeff());
  const Mat& V = svd.matrixV();
  for (Eigen::Index c = 0; c < V.cols(); ++c) {
    const double sigma = c < sv.size() ? sv(c) : 0.0;
    if (sigma > thresh) continue;
    Mat F = Mat::Zero(m, m);
    for (std::size_t k = 0; k < pairs.size(); ++k) F += V(static_cast<Eigen::Index>(k), c) * skew_unit(pairs[k].first, pairs[k].second);
    F *= std::sqrt(2.0) / F.norm();
    for (const auto& [i, j] : pairs) {
      if (std::abs(F(i, j)) > 1e-12) {
        if (F(i, j) < 0) F = -F;
        break;
      }
    }
    for (Eigen::Index r = 0; r < F.rows(); ++r)
      for (Eigen::Index q = 0; q < F.cols(); ++q)
        if (std::abs(F(r, q)) < 1e-15) F(r, q) = 0.0;
    basis.elements.push_back(std::move(F));
  }
  return basis;
}

struct DimensionReport {
  int n = 0;
  std::vector<int> multiplicities;
  int dim_s = 0;          // nullspace computation
  int dim_s_formula = 0;  // sum m_a (m_a - 1) / 2
  int dim_isom0 = 0;      // (2n - 3) + dim_s
  bool trace_K_nonconstant = false;
};

inline DimensionReport isom0_dimension(const ModelSpec& model) {
  DimensionReport r;
  r.n = model.n();
  r.multiplicities = eigen_multiplicities(model.eigenvalues());
  r.dim_s = centralizer_basis(model.A()).dim();
  for (int k : r.multiplicities) r.dim_s_formula += k * (k - 1) / 2;
  r.dim_isom0 = (2 * r.n - 3) + r.dim_s;
  // trace K(t) = (n - 2) f(t) + trace A; varies exactly when f does.
  r.trace_K_nonconstant = model.fourier().nonconstant();
  return r;
}

/// trace K(t) - (n - 2) f(t), i.e. the trace of A.
inline double trace_K_defect(const ModelSpec& model, double t) {
  Mat K = model.A();
  K.diagonal().array() += model.f(t);
  return K.trace() - static_cast<double>(model.fiber_dim()) * model.f(t);
}

/// exp(tau F) for skew F.
inline Mat rotation_flow(const Mat& F, double tau) {
  if (!is_skew(F)) throw Error(ErrorCode::InvalidArgument, "rotation_flow needs a skew-symmetric matrix");
  const Mat X = tau * F;
  return X.exp();
}

/// Phi_tau : (t, s, v) -> (t, s, exp(tau F) v).
inline Point rotation_action(const Mat& F, double tau, const Point& p) {
  return Point{p.t, p.s, rotation_flow(F, tau) * p.v};
}

}  // namespace ppwave
