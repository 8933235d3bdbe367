#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppwave/error.hpp"
#include "ppwave/fourier.hpp"
#include "ppwave/model.hpp"

namespace ppwave {

using Json = nlohmann::json;

struct GeneratorConfig {
  double r = 0.0;
  Vec u0;
  Vec w0;
};

/**
 * Model document plus optional run blocks:
 *
 *   {"n": 5, "period": 1.0, "fourier": {"a0": 0.0, "modes": [[1.0, 0.0]]},
 *    "A": [[1,0,0],[0,1,0],[0,0,-2]], "mode": "strict",
 *    "lattice": {"generators": [{"r": 0.0, "u0": [...], "w0": [...]}]},
 *    "riccati_B0": [[...]]}
 */
struct RunConfig {
  int n = 0;
  double period = 1.0;
  double a0 = 0.0;
  std::vector<FourierSeries::Mode> modes;
  Mat A;
  ModelMode mode = ModelMode::strict;
  std::optional<std::vector<GeneratorConfig>> lattice;
  std::optional<Mat> riccati_B0;

  FourierSeries fourier() const { return FourierSeries(period, a0, modes); }

  /// Validated model; model-core errors are rethrown with the offending JSON pointer.
  ModelSpec model() const;

  /// Canonical serialization (fixed key order, shortest round-trip doubles).
  Json canonical() const;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, what, path.empty() ? "/" : path);
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) config_fail(path + "/" + key, "missing required key");
  return obj.at(key);
}

inline double read_number(const Json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_fail(path, "expected a finite number");
  return v;
}

inline Vec read_vector(const Json& j, const std::string& path, std::optional<int> size = std::nullopt) {
  if (!j.is_array()) config_fail(path, "expected an array of numbers");
  if (size && static_cast<int>(j.size()) != *size) {
    config_fail(path, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_number(j[i], path + "/" + std::to_string(i));
  return v;
}

inline Mat read_matrix(const Json& j, const std::string& path, int size) {
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    config_fail(path, "expected a " + std::to_string(size) + "x" + std::to_string(size) + " matrix");
  }
  Mat M(size, size);
  for (int r = 0; r < size; ++r) {
    M.row(r) = read_vector(j[static_cast<std::size_t>(r)], path + "/" + std::to_string(r), size).transpose();
  }
  return M;
}

inline Json matrix_json(const Mat& M) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline Json vector_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const Json& doc) {
  using namespace detail;
  if (!doc.is_object()) config_fail("", "config must be a JSON object");
  RunConfig cfg;

  const Json& jn = require(doc, "n", "");
  if (!jn.is_number_integer()) config_fail("/n", "expected an integer");
  cfg.n = jn.get<int>();
  if (cfg.n < 3) config_fail("/n", "dimension must be at least 3");

  cfg.period = read_number(require(doc, "period", ""), "/period");
  if (!(cfg.period > 0.0)) config_fail("/period", "period must be positive");

  const Json& jf = require(doc, "fourier", "");
  if (!jf.is_object()) config_fail("/fourier", "expected an object");
  cfg.a0 = read_number(require(jf, "a0", "/fourier"), "/fourier/a0");
  if (jf.contains("modes")) {
    const Json& jm = jf.at("modes");
    if (!jm.is_array()) config_fail("/fourier/modes", "expected an array of [a_m, b_m] pairs");
    for (std::size_t k = 0; k < jm.size(); ++k) {
      const Vec ab = read_vector(jm[k], "/fourier/modes/" + std::to_string(k), 2);
      cfg.modes.emplace_back(ab(0), ab(1));
    }
  }

  cfg.A = read_matrix(require(doc, "A", ""), "/A", cfg.n - 2);

  if (doc.contains("mode")) {
    const Json& jmode = doc.at("mode");
    if (jmode == "strict") cfg.mode = ModelMode::strict;
    else if (jmode == "relaxed") cfg.mode = ModelMode::relaxed;
    else config_fail("/mode", "expected \"strict\" or \"relaxed\"");
  }

  if (doc.contains("lattice")) {
    const Json& jl = doc.at("lattice");
    if (!jl.is_object()) config_fail("/lattice", "expected an object");
    const Json& jg = require(jl, "generators", "/lattice");
    if (!jg.is_array()) config_fail("/lattice/generators", "expected an array");
    std::vector<GeneratorConfig> gens;
    for (std::size_t k = 0; k < jg.size(); ++k) {
      const std::string base = "/lattice/generators/" + std::to_string(k);
      if (!jg[k].is_object()) config_fail(base, "expected an object");
      GeneratorConfig g;
      g.r = jg[k].contains("r") ? read_number(jg[k].at("r"), base + "/r") : 0.0;
      g.u0 = read_vector(require(jg[k], "u0", base), base + "/u0", cfg.n - 2);
      g.w0 = read_vector(require(jg[k], "w0", base), base + "/w0", cfg.n - 2);
      gens.push_back(std::move(g));
    }
    cfg.lattice = std::move(gens);
  }

  if (doc.contains("riccati_B0")) {
    Mat B0 = read_matrix(doc.at("riccati_B0"), "/riccati_B0", cfg.n - 2);
    if ((B0 - B0.transpose()).cwiseAbs().maxCoeff() > 1e-10) config_fail("/riccati_B0", "B0 must be symmetric");
    cfg.riccati_B0 = std::move(B0);
  }
  return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed JSON: ") + e.what(), "/");
  }
  return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'", "/");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline ModelSpec RunConfig::model() const {
  try {
    return build_model(n, fourier(), A, mode);
  } catch (const Error& e) {
    std::string path;
    switch (e.code()) {
      case ErrorCode::DimensionTooSmall: path = "/n"; break;
      case ErrorCode::NonSymmetric:
      case ErrorCode::NonTraceless:
      case ErrorCode::ZeroOperator: path = "/A"; break;
      case ErrorCode::ConstantF: path = "/fourier/modes"; break;
      default: path = "/"; break;
    }
    throw Error(e.code(), e.message(), path);
  }
}

inline Json RunConfig::canonical() const {
  using detail::matrix_json;
  using detail::vector_json;
  Json modes_json = Json::array();
  for (const auto& [a, b] : modes) modes_json.push_back(Json::array({a, b}));
  Json doc = {{"n", n},
              {"period", period},
              {"fourier", {{"a0", a0}, {"modes", modes_json}}},
              {"A", matrix_json(A)},
              {"mode", mode == ModelMode::strict ? "strict" : "relaxed"}};
  if (lattice) {
    Json gens = Json::array();
    for (const auto& g : *lattice) gens.push_back({{"r", g.r}, {"u0", vector_json(g.u0)}, {"w0", vector_json(g.w0)}});
    doc["lattice"] = {{"generators", gens}};
  }
  if (riccati_B0) doc["riccati_B0"] = matrix_json(*riccati_B0);
  return doc;
}

}  // namespace ppwave
