// ppwave: verification front end for compact pp-wave models.
//
//   ppwave model validate   CONFIG [options]
//   ppwave curvature verify CONFIG [options]
//   ppwave geodesic probe   CONFIG [options]
//   ppwave killing verify   CONFIG [options]
//   ppwave group verify     CONFIG [options]
//   ppwave holonomy compute CONFIG [options]
//   ppwave dims             CONFIG [options]
//   ppwave all              CONFIG [options]
//
// Exit codes: 0 all checks pass, 2 invalid config, 3 check failure, 4 internal error.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppwave/ppwave.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;
constexpr int kExitInternal = 4;

struct Args {
  std::string config;
  std::uint64_t seed = 1;
  int trials = 0;
  double horizon = 0.0;
  double tol = 0.0;
  std::string out;
  std::string csv;
  bool timing = false;
};

using Suite = std::function<ppwave::SuiteOutput(const ppwave::RunConfig&, const ppwave::SuiteOptions&)>;

bool is_config_error(ppwave::ErrorCode code) {
  using ppwave::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::NonSymmetric:
    case ErrorCode::NonTraceless:
    case ErrorCode::ZeroOperator:
    case ErrorCode::ConstantF:
    case ErrorCode::DimensionTooSmall:
      return true;
    default:
      return false;
  }
}

void print_error(const std::string& code, const std::string& message, const std::string& path) {
  nlohmann::json err = {{"error", code}, {"message", message}};
  if (!path.empty()) err["path"] = path;
  std::cerr << err.dump(2) << "\n";
}

int run(const Args& args, const Suite& suite) {
  const auto start = std::chrono::steady_clock::now();
  ppwave::RunConfig cfg;
  try {
    cfg = ppwave::load_config(args.config);
    (void)cfg.model();
  } catch (const ppwave::Error& e) {
    print_error(std::string(ppwave::to_string(e.code())), e.message(), e.path());
    return kExitConfig;
  }

  ppwave::SuiteOptions opt;
  opt.seed = args.seed;
  if (args.trials > 0) opt.trials = args.trials;
  if (args.horizon > 0.0) opt.horizon = args.horizon;
  if (args.tol > 0.0) opt.tol = args.tol;

  try {
    ppwave::SuiteOutput result = suite(cfg, opt);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (args.timing) result.report.set_wall_time(wall);
    const std::string text = result.report.to_json().dump(2) + "\n";
    if (args.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(args.out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + args.out);
      f << text;
    }
    if (!args.csv.empty()) {
      std::ofstream f(args.csv, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + args.csv);
      ppwave::write_csv(f, result.table);
    }
    if (args.timing) std::cerr << "wall time: " << wall << " s\n";
    return result.report.passed() ? kExitPass : kExitCheck;
  } catch (const ppwave::Error& e) {
    print_error(std::string(ppwave::to_string(e.code())), e.message(), e.path());
    return is_config_error(e.code()) ? kExitConfig : kExitInternal;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what(), "");
    return kExitInternal;
  }
}

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("config", args.config, "Model config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Seed for randomized sweeps")->capture_default_str();
  cmd->add_option("--trials", args.trials, "Sample count for the command's main sweep")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", args.horizon, "Geodesic horizon |tau|")->check(CLI::Range(1e-9, 1e4));
  cmd->add_option("--tol", args.tol, "Integrator tolerance")->check(CLI::Range(1e-16, 1e-8));
  cmd->add_option("--out", args.out, "Write the JSON report here instead of stdout");
  cmd->add_option("--csv", args.csv, "Write the numeric table as CSV");
  cmd->add_flag("--timing", args.timing, "Include wall time in the report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification suites for compact pp-wave models with parallel Weyl tensor"};
  app.require_subcommand(1);
  Args args;
  Suite chosen;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, Suite suite) {
    CLI::App* cmd = parent->add_subcommand(name, help);
    add_common(cmd, args);
    cmd->callback([&chosen, suite] { chosen = suite; });
  };
  auto group = [&](const std::string& name, const std::string& help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->require_subcommand(1);
    return cmd;
  };

  leaf(group("model", "Model checks"), "validate", "Validate the model and its Hill solution space",
       ppwave::run_model_validate);
  leaf(group("curvature", "Curvature checks"), "verify", "Weyl/Riemann parallelism and the Olszak distribution",
       ppwave::run_curvature_verify);
  leaf(group("geodesic", "Geodesic checks"), "probe", "Long-horizon completeness probe",
       ppwave::run_geodesic_probe);
  leaf(group("killing", "Killing field checks"), "verify", "Killing equation and commutators",
       ppwave::run_killing_verify);
  leaf(group("group", "Isometry group checks"), "verify", "Group laws, action, Heisenberg bridge, lattice",
       ppwave::run_group_verify);
  leaf(group("holonomy", "Holonomy checks"), "compute", "Holonomy of the quotient and reduced holonomy",
       ppwave::run_holonomy_compute);
  leaf(&app, "dims", "Isometry algebra dimensions", ppwave::run_dims);
  leaf(&app, "all", "Run every suite", ppwave::run_all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }
  if (!chosen) return kExitConfig;
  return run(args, chosen);
}
