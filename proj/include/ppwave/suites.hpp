#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ppwave/config.hpp"
#include "ppwave/curvature.hpp"
#include "ppwave/geodesic.hpp"
#include "ppwave/group.hpp"
#include "ppwave/hill.hpp"
#include "ppwave/holonomy.hpp"
#include "ppwave/killing.hpp"
#include "ppwave/random.hpp"
#include "ppwave/report.hpp"

namespace ppwave {

/// Run parameters shared by the verification suites; unset fields take per-suite defaults.
struct SuiteOptions {
  std::uint64_t seed = 1;
  std::optional<int> trials;
  std::optional<double> horizon;
  std::optional<double> tol;
};

struct SuiteOutput {
  RunReport report;
  CsvTable table;
};

inline std::string config_fingerprint(const RunConfig& cfg) { return hex64(fnv1a(cfg.canonical().dump())); }

namespace detail {

inline Json vec_json(const Vec& v) { return vector_json(v); }
inline Json mat_json(const Mat& M) { return matrix_json(M); }

/// B0 from the config, zero by default.
inline Mat config_B0(const RunConfig& cfg, int m) { return cfg.riccati_B0.value_or(Mat::Zero(m, m)); }

/// Skew F built on two eigenvectors with distinct eigenvalues, scaled so |[A, F]|_F = 1.
inline std::optional<Mat> noncommuting_skew(const ModelSpec& model) {
  const Vec& lam = model.eigenvalues();
  const Mat& V = model.eigenvectors();
  for (Eigen::Index a = 0; a < lam.size(); ++a)
    for (Eigen::Index b = a + 1; b < lam.size(); ++b) {
      if (std::abs(lam(a) - lam(b)) > 1e-6) {
        Mat F = V.col(a) * V.col(b).transpose() - V.col(b) * V.col(a).transpose();
        const Mat C = model.A() * F - F * model.A();
        return Mat(F / C.norm());
      }
    }
  return std::nullopt;
}

inline Json sigma_json(const GroupElement& g) {
  return {{"k", g.k}, {"x", g.x}, {"u0", vec_json(g.u.u0())}, {"w0", vec_json(g.u.w0())}};
}

inline GroupElement random_element(Rng& rng, const HillSpacePtr& space, int k_bound) {
  const int m = space->dim();
  GroupElement g;
  g.k = rng.uniform_int(-k_bound, k_bound);
  g.x = rng.uniform(-2.0, 2.0);
  Vec u0 = rng.uniform_vec(m, 1.0);
  Vec w0 = rng.uniform_vec(m, 1.0);
  g.u = HillSolution(space, std::move(u0), std::move(w0));
  return g;
}

inline double element_distance(const GroupElement& a, const GroupElement& b) {
  if (a.k != b.k) return std::numeric_limits<double>::infinity();
  return std::max(std::abs(a.x - b.x), (a.u.data() - b.u.data()).cwiseAbs().maxCoeff());
}

inline double heis_distance(const HeisElement& a, const HeisElement& b) {
  return std::max({(a.a - b.a).cwiseAbs().maxCoeff(), (a.b - b.b).cwiseAbs().maxCoeff(), std::abs(a.c - b.c)});
}

inline double point_distance(const Point& a, const Point& b) { return (a.coords() - b.coords()).cwiseAbs().maxCoeff(); }

}  // namespace detail

// ---------------------------------------------------------------------------

inline SuiteOutput run_model_validate(const RunConfig& cfg, const SuiteOptions& opt) {
  const ModelSpec model = cfg.model();
  const HillSpacePtr space = make_hill_space(model);
  const int m = model.fiber_dim();
  const double p = model.period();
  RunReport rep("model validate", config_fingerprint(cfg), opt.seed);

  const double scale = std::max(1.0, cfg.A.cwiseAbs().maxCoeff());
  rep.add_check("A_symmetric", (cfg.A - cfg.A.transpose()).cwiseAbs().maxCoeff(), 1e-12 * scale);
  rep.add_check("A_traceless", std::abs(cfg.A.trace()), 1e-12 * scale);
  rep.add_check("eigenvalue_sum", std::abs(model.eigenvalues().sum()), 1e-10);
  rep.add_check("eigenvectors_orthogonal",
                (model.eigenvectors().transpose() * model.eigenvectors() - Mat::Identity(m, m)).cwiseAbs().maxCoeff(),
                1e-10);
  rep.add_check("wronskian_defect", space->max_wronskian_defect(), 1e-9);

  const Mat M = monodromy(*space);
  const Mat J = omega_matrix(m);
  rep.add_check("monodromy_symplectic", (M.transpose() * J * M - J).cwiseAbs().maxCoeff(), 1e-8);

  Rng rng(opt.seed, 0x11);
  double omega_drift = 0.0;
  const int pairs = opt.trials.value_or(20);
  for (int k = 0; k < pairs; ++k) {
    const HillSolution u1(space, rng.uniform_vec(m, 1.0), rng.uniform_vec(m, 1.0));
    const HillSolution u2(space, rng.uniform_vec(m, 1.0), rng.uniform_vec(m, 1.0));
    const double t = rng.uniform(-5.0 * p, 5.0 * p);
    omega_drift = std::max(omega_drift, std::abs(omega(u1, u2, t) - omega(u1, u2, 0.0)));
  }
  rep.add_check("omega_t_constancy", omega_drift, 1e-8);

  const Mat B0 = detail::config_B0(cfg, m);
  const RiccatiField B = riccati_solve(space, B0, -5.0 * p, 5.0 * p);
  rep.add_check("riccati_symmetry", B.max_asymmetry(), 1e-8);
  double lagrangian = 0.0;
  const auto L = lagrangian_subspace(space, B);
  for (std::size_t i = 0; i < L.size(); ++i)
    for (std::size_t j = i + 1; j < L.size(); ++j) lagrangian = std::max(lagrangian, std::abs(omega(L[i], L[j])));
  rep.add_check("lagrangian_omega", lagrangian, 1e-8);

  Json& out = rep.payload();
  out["n"] = model.n();
  out["mode"] = model.mode() == ModelMode::strict ? "strict" : "relaxed";
  out["period"] = p;
  out["f_nonconstant"] = model.fourier().nonconstant();
  out["eigenvalues"] = detail::vec_json(model.eigenvalues());
  out["multiplicities"] = eigen_multiplicities(model.eigenvalues());
  Json traces = Json::array();
  for (int i = 0; i < m; ++i) traces.push_back(space->pair(i).period_map().trace());
  out["monodromy_traces"] = traces;
  auto blow_json = [](const std::optional<BlowUp>& b) { return b ? Json(b->t_star) : Json(nullptr); };
  out["riccati"] = {{"t_min", B.t_min()},
                    {"t_max", B.t_max()},
                    {"forward_blowup", blow_json(B.forward_blowup())},
                    {"backward_blowup", blow_json(B.backward_blowup())}};

  CsvTable table{{"eigen_index", "lambda", "monodromy_trace", "wronskian_defect"}, {}};
  for (int i = 0; i < m; ++i) {
    table.rows.push_back({std::to_string(i), format_number(model.eigenvalues()(i)),
                          format_number(space->pair(i).period_map().trace()),
                          format_number(space->pair(i).max_wronskian_defect())});
  }
  return {std::move(rep), std::move(table)};
}

inline SuiteOutput run_curvature_verify(const RunConfig& cfg, const SuiteOptions& opt) {
  const ModelSpec model = cfg.model();
  const int m = model.fiber_dim();
  RunReport rep("curvature verify", config_fingerprint(cfg), opt.seed);
  Rng rng(opt.seed, 0x21);
  const int count = opt.trials.value_or(12);
  std::vector<Point> samples;
  for (int k = 0; k < count; ++k) samples.push_back(rng.point(m, 2.0 * model.period(), 2.0, 2.0));

  double sym = 0.0, bianchi = 0.0, trace = 0.0, weyl_max = 0.0;
  int olszak_pass = 0, olszak_reject = 0;
  CsvTable table{{"sample", "t", "max_riemann", "max_weyl", "olszak_defect_ds", "olszak_defect_dt"}, {}};
  for (int k = 0; k < count; ++k) {
    const Point& p = samples[static_cast<std::size_t>(k)];
    const CurvatureBundle cb = curvature_at(model, p);
    sym = std::max(sym, riemann_symmetry_residual(cb.riemann));
    bianchi = std::max(bianchi, bianchi_residual(cb.riemann));
    trace = std::max(trace, weyl_trace_residual(model, cb));
    weyl_max = std::max(weyl_max, cb.weyl.max_abs());
    Tangent ds{0.0, 1.0, Vec::Zero(m), p};
    Tangent dt{1.0, 0.0, Vec::Zero(m), p};
    const double d_s = olszak_defect(model, cb, ds);
    const double d_t = olszak_defect(model, cb, dt);
    olszak_pass += d_s < kOlszakTolerance ? 1 : 0;
    olszak_reject += d_t >= kOlszakTolerance ? 1 : 0;
    table.rows.push_back({std::to_string(k), format_number(p.t), format_number(cb.riemann.max_abs()),
                          format_number(cb.weyl.max_abs()), format_number(d_s), format_number(d_t)});
  }
  const ParallelismResiduals par = parallelism_residuals(model, samples);
  const bool weyl_expected = model.A().cwiseAbs().maxCoeff() > 0.0;
  const bool locally_symmetric_expected = !model.fourier().nonconstant();
  const double olszak_rate = count > 0 ? static_cast<double>(olszak_pass) / count : 1.0;

  rep.add_check("riemann_symmetries", sym, 1e-10);
  rep.add_check("bianchi", bianchi, 1e-10);
  rep.add_check("weyl_traceless", trace, 1e-10);
  rep.add_check("weyl_parallel", par.weyl_residual, 1e-5);
  if (weyl_expected) {
    rep.add_check("weyl_nonzero", weyl_max, 1e-8, Bound::lower);
    rep.add_check("olszak_ds_pass_rate", olszak_rate, 1.0, Bound::lower);
    rep.add_check("olszak_dt_rejected", olszak_reject == count ? 0.0 : 1.0, 0.0);
  } else {
    rep.add_check("weyl_vanishes", weyl_max, 1e-10);
  }
  if (locally_symmetric_expected) {
    rep.add_check("riemann_parallel", par.riemann_residual, 1e-5);
  } else {
    rep.add_check("riemann_not_parallel", par.riemann_residual, 1e-4, Bound::lower);
  }

  Json& out = rep.payload();
  out["weyl_nonzero"] = weyl_max > 1e-8;
  out["weyl_parallel_residual"] = par.weyl_residual;
  out["riemann_parallel_residual"] = par.riemann_residual;
  out["olszak_pass_rate"] = olszak_rate;
  out["max_weyl"] = weyl_max;
  out["samples"] = count;
  return {std::move(rep), std::move(table)};
}

inline SuiteOutput run_geodesic_probe(const RunConfig& cfg, const SuiteOptions& opt) {
  const ModelSpec model = cfg.model();
  const HillSpacePtr space = make_hill_space(model);
  const int n = model.n();
  const int m = n - 2;
  const int trials = opt.trials.value_or(50);
  const double horizon = opt.horizon.value_or(1e3);
  const double tol = opt.tol.value_or(1e-13);
  RunReport rep("geodesic probe", config_fingerprint(cfg), opt.seed);

  const CompletenessReport probe = completeness_probe(model, trials, horizon, opt.seed, tol);

  // Reduced-system correspondence at |tau| = 50 on geodesics starting at t = 0, relative
  // to 1 + |x|.
  Rng rng(opt.seed, 0x31);
  const double tau_check = std::min(50.0, horizon);
  const int reduced_trials = std::min(trials, 20);
  double reduced_dev = 0.0;
  for (int k = 0; k < reduced_trials; ++k) {
    Point p0 = rng.point(m, 0.0, 2.0, 2.0);
    p0.t = 0.0;
    Tangent v0 = Tangent::from_components(rng.uniform_vec(n, 2.0), p0);
    v0.dt = (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
    const GeodesicPath path = geodesic_integrate(model, p0, v0, {-tau_check, tau_check}, tol, false);
    const ReducedPath red = reduced_system(space, v0.dt, p0.v, v0.dv, {-tau_check, tau_check});
    for (const auto& [tau, state] : {std::pair{tau_check, path.state_at_hi()}, std::pair{-tau_check, path.state_at_lo()}}) {
      const auto [x, dx] = red.eval(tau);
      const double size = 1.0 + std::max(x.cwiseAbs().maxCoeff(), dx.cwiseAbs().maxCoeff());
      reduced_dev = std::max(reduced_dev, (state.segment(kX0, m) - x).cwiseAbs().maxCoeff() / size);
      reduced_dev = std::max(reduced_dev, (state.segment(n + kX0, m) - dx).cwiseAbs().maxCoeff() / size);
    }
  }

  rep.add_check("blow_ups", probe.blow_ups, 0.0);
  rep.add_check("overflows", probe.overflows, 0.0);
  rep.add_flag("envelope", probe.envelope_ok);
  rep.add_check("energy_drift_scaled", probe.max_energy_drift_scaled, 1e-7);
  rep.add_check("tdot_drift", probe.max_tdot_drift, 1e-9);
  rep.add_check("reduced_system_agreement_scaled", reduced_dev, 1e-6);

  Json& out = rep.payload();
  out["trials"] = trials;
  out["horizon"] = horizon;
  out["max_norm"] = probe.max_norm;
  out["envelope_ok"] = probe.envelope_ok;
  out["seed"] = opt.seed;
  out["blow_ups"] = probe.blow_ups;
  out["overflows"] = probe.overflows;
  out["max_energy_drift"] = probe.max_energy_drift;
  out["max_energy_drift_scaled"] = probe.max_energy_drift_scaled;
  out["reduced_system_max_dev"] = reduced_dev;

  CsvTable table{{"trial", "tdot", "reached_lo", "reached_hi", "max_norm", "envelope_margin", "energy_drift", "status"},
                 {}};
  for (const auto& t : probe.details) {
    table.rows.push_back({std::to_string(t.index), format_number(t.tdot), format_number(t.reached_lo),
                          format_number(t.reached_hi), format_number(t.max_norm), format_number(t.envelope_margin),
                          format_number(t.energy_drift),
                          t.blow_up ? "blow_up: " + t.failure : (t.overflow ? "overflow" : "complete")});
  }
  return {std::move(rep), std::move(table)};
}

inline SuiteOutput run_killing_verify(const RunConfig& cfg, const SuiteOptions& opt) {
  const ModelSpec model = cfg.model();
  const HillSpacePtr space = make_hill_space(model);
  const int m = model.fiber_dim();
  const double p = model.period();
  RunReport rep("killing verify", config_fingerprint(cfg), opt.seed);
  Rng rng(opt.seed, 0x41);
  const int count = opt.trials.value_or(100);
  std::vector<Point> samples;
  for (int k = 0; k < count; ++k) samples.push_back(rng.point(m, 3.0 * p, 2.0, 5.0));

  CsvTable table{{"field", "residual"}, {}};
  double catalog = 0.0;
  for (const auto& field : heisenberg_catalog(model.n())) {
    const double r = killing_residual(*space, field, samples);
    catalog = std::max(catalog, r);
    table.rows.push_back({field.name(), format_number(r)});
  }
  const SkewBasis s = centralizer_basis(model.A());
  double centralizer = 0.0, commutator = 0.0;
  std::vector<Point> bracket_points(samples.begin(), samples.begin() + std::min<std::ptrdiff_t>(10, count));
  for (std::size_t j = 0; j < s.elements.size(); ++j) {
    const double r = killing_residual(*space, KillingField::X(s.elements[j]), samples);
    centralizer = std::max(centralizer, r);
    table.rows.push_back({"X_F" + std::to_string(j + 1), format_number(r)});
    const CommutatorReport cr = commutator_check(*space, s.elements[j], bracket_points, 1e-7);
    commutator = std::max({commutator, cr.max_dev_E, cr.max_dev_E_star, cr.max_dev_Z});
  }
  rep.add_check("catalog_killing", catalog, 1e-7);
  rep.add_check("centralizer_killing", centralizer, 1e-7);
  rep.add_check("commutators", commutator, 1e-7);

  Json& out = rep.payload();
  if (const auto F = detail::noncommuting_skew(model)) {
    const double r = killing_residual(*space, KillingField::X(*F), samples);
    rep.add_check("noncommuting_rejected", r, 1e-3, Bound::lower);
    table.rows.push_back({"X_F(noncommuting)", format_number(r)});
    out["noncommuting_residual"] = r;
  }
  out["catalog_size"] = 2 * model.n() - 3;
  out["catalog_residual"] = catalog;
  out["dim_s"] = s.dim();
  out["centralizer_residual"] = centralizer;
  out["commutator_max_dev"] = commutator;
  return {std::move(rep), std::move(table)};
}

inline SuiteOutput run_dims(const RunConfig& cfg, const SuiteOptions& opt) {
  const ModelSpec model = cfg.model();
  RunReport rep("dims", config_fingerprint(cfg), opt.seed);
  const DimensionReport d = isom0_dimension(model);
  rep.add_check("nullspace_matches_multiplicities", std::abs(d.dim_s - d.dim_s_formula), 0.0);
  double trace_defect = 0.0;
  for (int k = 0; k <= 16; ++k) trace_defect = std::max(trace_defect, std::abs(trace_K_defect(model, k * model.period() / 16.0)));
  rep.add_check("trace_K_identity", trace_defect, 1e-12);
  Json& out = rep.payload();
  out["n"] = d.n;
  out["multiplicities"] = d.multiplicities;
  out["dim_s"] = d.dim_s;
  out["dim_isom0"] = d.dim_isom0;
  out["trace_K_nonconstant"] = d.trace_K_nonconstant;
  CsvTable table{{"n", "multiplicities", "dim_s", "dim_isom0"}, {}};
  std::string mult;
  for (std::size_t i = 0; i < d.multiplicities.size(); ++i) mult += (i ? " " : "") + std::to_string(d.multiplicities[i]);
  table.rows.push_back({std::to_string(d.n), mult, std::to_string(d.dim_s), std::to_string(d.dim_isom0)});
  return {std::move(rep), std::move(table)};
}

inline SuiteOutput run_group_verify(const RunConfig& cfg, const SuiteOptions& opt) {
  const ModelSpec model = cfg.model();
  const HillSpacePtr space = make_hill_space(model);
  const int n = model.n();
  const int m = n - 2;
  const double p = model.period();
  const int cases = opt.trials.value_or(500);
  RunReport rep("group verify", config_fingerprint(cfg), opt.seed);
  Rng rng(opt.seed, 0x51);

  double assoc = 0.0, inverse = 0.0, action = 0.0, isometry = 0.0, phi = 0.0, pi = 0.0, abelian = 0.0;
  for (int c = 0; c < cases; ++c) {
    const GroupElement g1 = detail::random_element(rng, space, 2);
    const GroupElement g2 = detail::random_element(rng, space, 2);
    const GroupElement g3 = detail::random_element(rng, space, 2);
    assoc = std::max(assoc, detail::element_distance(g_compose(g_compose(g1, g2), g3), g_compose(g1, g_compose(g2, g3))));
    const GroupElement e = g_identity(space);
    inverse = std::max({inverse, detail::element_distance(g_compose(g1, g_inverse(g1)), e),
                        detail::element_distance(g_compose(g_inverse(g1), g1), e)});

    const Point pt = rng.point(m, p, 2.0, 2.0);
    action = std::max(action, detail::point_distance(g_act(g1, g_act(g2, pt)), g_act(g_compose(g1, g2), pt)));
    const IsometrySample smp{pt, rng.uniform_vec(n, 1.0), rng.uniform_vec(n, 1.0)};
    isometry = std::max(isometry, isometry_residual(g1, {smp}));

    GroupElement h1 = g1, h2 = g2;
    h1.k = 0;
    h2.k = 0;
    phi = std::max(phi, detail::heis_distance(heis_bridge(g_compose(h1, h2)), heis_mul(heis_bridge(h1), heis_bridge(h2))));
  }

  const SkewBasis s = centralizer_basis(model.A());
  if (s.dim() > 0) {
    for (int c = 0; c < cases; ++c) {
      Mat F = Mat::Zero(m, m);
      for (const auto& Fj : s.elements) F += rng.uniform(-3.0, 3.0) * Fj;
      const HeisElement a{rng.uniform_vec(m, 1.0), rng.uniform_vec(m, 1.0), rng.uniform(-1.0, 1.0)};
      const HeisElement b{rng.uniform_vec(m, 1.0), rng.uniform_vec(m, 1.0), rng.uniform(-1.0, 1.0)};
      pi = std::max(pi, detail::heis_distance(heis_mul(pi_automorphism(model, F, a), pi_automorphism(model, F, b)),
                                              pi_automorphism(model, F, heis_mul(a, b))));
    }
  }

  const Mat B0 = detail::config_B0(cfg, m);
  for (int c = 0; c < cases; ++c) {
    const Vec a0 = rng.uniform_vec(m, 1.0), b0 = rng.uniform_vec(m, 1.0);
    const GroupElement a{0, rng.uniform(-2.0, 2.0), HillSolution(space, a0, B0 * a0)};
    const GroupElement b{0, rng.uniform(-2.0, 2.0), HillSolution(space, b0, B0 * b0)};
    abelian = std::max(abelian, detail::element_distance(g_compose(a, b), g_compose(b, a)));
  }

  rep.add_check("associativity", assoc, 1e-8);
  rep.add_check("inverse", inverse, 1e-8);
  rep.add_check("action_compatibility", action, 1e-8);
  rep.add_check("isometry", isometry, 1e-7);
  rep.add_check("phi_homomorphism", phi, 1e-9);
  if (s.dim() > 0) rep.add_check("pi_homomorphism", pi, 1e-9);
  rep.add_check("abelian_R_x_L", abelian, 1e-9);

  Json& out = rep.payload();
  out["cases"] = cases;
  out["dim_s"] = s.dim();
  out["sweeps"] = {{"associativity", assoc}, {"inverse", inverse},   {"action_compatibility", action},
                   {"isometry", isometry},   {"phi", phi},           {"pi", s.dim() > 0 ? Json(pi) : Json(nullptr)},
                   {"abelian", abelian}};

  if (cfg.lattice) {
    SigmaLattice lattice;
    for (const auto& g : *cfg.lattice) lattice.generators.push_back({g.r, HillSolution(space, g.u0, g.w0)});
    try {
      const SigmaReport sr = sigma_validate(space, lattice, B0);
      rep.add_flag("lattice_abelian", sr.abelian_ok);
      rep.add_flag("lattice_in_L", sr.in_L_ok);
      rep.add_flag("lattice_rank", sr.rank_ok);
      out["lattice"] = {{"abelian_ok", sr.abelian_ok}, {"in_L_ok", sr.in_L_ok},         {"rank", sr.rank},
                        {"expected_rank", sr.expected_rank}, {"max_omega", sr.max_omega}, {"max_commutator", sr.max_commutator},
                        {"max_membership", sr.max_membership}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      rep.add_flag("lattice_rank", false);
      out["lattice"] = {{"error", e.message()}};
    }
  }

  CsvTable table{{"sweep", "max_residual"}, {}};
  for (const auto& c : rep.checks()) table.rows.push_back({c.name, format_number(c.value)});
  return {std::move(rep), std::move(table)};
}

inline SuiteOutput run_holonomy_compute(const RunConfig& cfg, const SuiteOptions& opt) {
  const ModelSpec model = cfg.model();
  const HillSpacePtr space = make_hill_space(model);
  const int m = model.fiber_dim();
  const double tol = std::min(opt.tol.value_or(1e-12), 1e-10);
  RunReport rep("holonomy compute", config_fingerprint(cfg), opt.seed);
  Rng rng(opt.seed, 0x61);

  std::vector<GroupElement> sigmas;
  const Mat B0 = detail::config_B0(cfg, m);
  if (cfg.lattice) {
    for (const auto& g : *cfg.lattice) sigmas.push_back(GroupElement{0, g.r, HillSolution(space, g.u0, g.w0)});
  } else {
    for (int k = 0; k < 20; ++k) {
      const Vec u0 = rng.uniform_vec(m, 1.0);
      sigmas.push_back(GroupElement{0, rng.uniform(-1.0, 1.0), HillSolution(space, u0, B0 * u0)});
    }
  }

  // Sign resolution uses the sigma generators plus fixed probes with w'(0) != 0.
  std::vector<GroupElement> probes = sigmas;
  for (int i = 0; i < std::min(m, 2); ++i) {
    probes.push_back(GroupElement{0, 0.0, HillSolution(space, Vec::Unit(m, i), Vec::Unit(m, (i + 1) % m))});
  }
  const SignResolution sign = resolve_sign_convention(probes, tol);

  Json gens = Json::array();
  CsvTable table{{"generator", "k", "max_dev", "gram_residual", "s_fixed_residual"}, {}};
  double sigma_dev = 0.0, k_dev = 0.0, gram = 0.0, sfix = 0.0;
  std::vector<Mat> sigma_mats;
  auto record = [&](const GroupElement& g, const TransportMatrix& num, const Mat& closed) {
    const double dev = (num.matrix - closed).cwiseAbs().maxCoeff();
    gram = std::max(gram, num.gram_residual());
    sfix = std::max(sfix, num.s_fixed_residual());
    gens.push_back({{"sigma", detail::sigma_json(g)},
                    {"matrix", detail::mat_json(num.matrix)},
                    {"closed_form", detail::mat_json(closed)},
                    {"max_dev", dev}});
    table.rows.push_back({std::to_string(table.rows.size()), std::to_string(g.k), format_number(dev),
                          format_number(num.gram_residual()), format_number(num.s_fixed_residual())});
    return dev;
  };
  for (const auto& g : sigmas) {
    const TransportMatrix num = quotient_transport(g, tol);
    sigma_mats.push_back(num.matrix);
    sigma_dev = std::max(sigma_dev, record(g, num, closed_form_transport(g, sign.convention).matrix));
  }
  for (long long k : {1LL, 2LL, -1LL}) {
    const GroupElement g{k, 0.0, HillSolution::zero(space)};
    k_dev = std::max(k_dev, record(g, quotient_transport(g, tol), Mat::Identity(m + 2, m + 2)));
  }
  double commute = 0.0;
  for (std::size_t i = 0; i < sigma_mats.size(); ++i)
    for (std::size_t j = i + 1; j < sigma_mats.size(); ++j)
      commute = std::max(commute, (sigma_mats[i] * sigma_mats[j] - sigma_mats[j] * sigma_mats[i]).cwiseAbs().maxCoeff());

  const int loops = opt.trials.value_or(50);
  const HolonomyReport hol = holonomy_sampler(model, loops, 0.5, opt.seed, tol);
  gram = std::max(gram, hol.max_gram_dev);

  rep.add_check("sigma_closed_form", sigma_dev, 1e-6);
  rep.add_check("k_generators_identity", k_dev, 1e-8);
  rep.add_check("gram_preserved", gram, 1e-7);
  rep.add_check("s_fixed", std::max(sfix, hol.max_s_dev), 1e-9);
  rep.add_check("sigma_transports_commute", commute, 1e-7);
  rep.add_check("reduced_block_pass_rate", hol.pass_rate, 1.0, Bound::lower);

  Json& out = rep.payload();
  out["generators"] = gens;
  out["reduced_block_pass_rate"] = hol.pass_rate;
  out["resolved_sign_convention"] = {{"xi2_row", sign.convention.xi2_row},
                                     {"xi2_col", sign.convention.xi2_col},
                                     {"xi1", sign.convention.xi1},
                                     {"description", sign.convention.describe()},
                                     {"max_dev", sign.max_dev},
                                     {"runner_up_dev", sign.runner_up_dev}};
  out["loops"] = {{"count", hol.count},
                  {"loop_scale", hol.loop_scale},
                  {"max_s_dev", hol.max_s_dev},
                  {"max_block_dev", hol.max_block_dev},
                  {"max_translation", hol.max_translation}};
  return {std::move(rep), std::move(table)};
}

/// Every suite, checks prefixed by suite name, payloads keyed by suite.
inline SuiteOutput run_all(const RunConfig& cfg, const SuiteOptions& opt) {
  RunReport rep("all", config_fingerprint(cfg), opt.seed);
  CsvTable table{{"suite", "check", "status", "max_residual", "tolerance", "bound"}, {}};
  auto absorb = [&](const std::string& key, SuiteOutput sub) {
    for (const auto& c : sub.report.checks()) {
      rep.add_check(key + "." + c.name, c.value, c.tolerance, c.bound);
      table.rows.push_back({key, c.name, c.passed() ? "pass" : "fail", format_number(c.value), format_number(c.tolerance),
                            c.bound == Bound::upper ? "upper" : "lower"});
    }
    rep.payload()[key] = sub.report.payload();
  };
  absorb("model", run_model_validate(cfg, opt));
  absorb("dims", run_dims(cfg, opt));
  absorb("curvature", run_curvature_verify(cfg, opt));
  absorb("killing", run_killing_verify(cfg, opt));
  absorb("group", run_group_verify(cfg, opt));
  absorb("holonomy", run_holonomy_compute(cfg, opt));
  absorb("geodesic", run_geodesic_probe(cfg, opt));
  return {std::move(rep), std::move(table)};
}

}  // namespace ppwave
