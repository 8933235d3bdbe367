#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ppwave {

/// Upper checks pass when value <= tolerance; lower checks (nonvanishing) when value >= tolerance.
enum class Bound { upper, lower };

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  Bound bound = Bound::upper;

  bool passed() const { return bound == Bound::upper ? value <= tolerance : value >= tolerance; }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

/// Rows of strings with a header; written per RFC 4180.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv(std::ostream& os, const CsvTable& table) {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << csv_field(cells[i]);
    }
    os << "\r\n";
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

/// Shortest decimal that round-trips, matching the JSON output.
inline std::string format_number(double v) { return nlohmann::json(v).dump(); }

class RunReport {
 public:
  RunReport(std::string command, std::string fingerprint, std::uint64_t seed)
      : command_(std::move(command)), fingerprint_(std::move(fingerprint)), seed_(seed) {}

  void add_check(std::string name, double value, double tolerance, Bound bound = Bound::upper) {
    checks_.push_back(CheckResult{std::move(name), value, tolerance, bound});
  }

  /// Boolean check recorded as a 0/1 defect against tolerance 0.
  void add_flag(std::string name, bool ok) { add_check(std::move(name), ok ? 0.0 : 1.0, 0.0); }

  nlohmann::json& payload() { return payload_; }
  const std::vector<CheckResult>& checks() const { return checks_; }
  void set_wall_time(double seconds) { wall_time_ = seconds; }

  bool passed() const {
    for (const auto& c : checks_)
      if (!c.passed()) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : checks_) {
      checks.push_back({{"name", c.name},
                        {"status", c.passed() ? "pass" : "fail"},
                        {"max_residual", c.value},
                        {"tolerance", c.tolerance},
                        {"bound", c.bound == Bound::upper ? "upper" : "lower"}});
    }
    nlohmann::json out = {{"command", command_},
                          {"fingerprint", fingerprint_},
                          {"seed", seed_},
                          {"status", passed() ? "pass" : "fail"},
                          {"checks", checks},
                          {"result", payload_}};
    if (wall_time_) out["wall_time_s"] = *wall_time_;
    return out;
  }

  CsvTable checks_table() const {
    CsvTable t{{"command", "check", "status", "max_residual", "tolerance", "bound"}, {}};
    for (const auto& c : checks_) {
      t.rows.push_back({command_, c.name, c.passed() ? "pass" : "fail", format_number(c.value),
                        format_number(c.tolerance), c.bound == Bound::upper ? "upper" : "lower"});
    }
    return t;
  }

 private:
  std::string command_;
  std::string fingerprint_;
  std::uint64_t seed_;
  std::vector<CheckResult> checks_;
  nlohmann::json payload_ = nlohmann::json::object();
  std::optional<double> wall_time_;
};

}  // namespace ppwave
