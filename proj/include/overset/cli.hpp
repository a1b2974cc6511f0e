#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "overset/diagnostics.hpp"

namespace overset::cli {

/// Schema violation; what() starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& msg)
      : std::runtime_error(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline const std::vector<std::string>& modes() {
  static const std::vector<std::string> m{"scalar1d-char",     "system1d-char",      "system1d-penalty",
                                          "system2d-boundary", "system2d-overlap",   "single-domain-ref",
                                          "certify-coupling",  "convergence-study"};
  return m;
}

struct Thresholds {
  double energy = 1e-11;        // dE/dt <= energy * E(0)
  double energy_final = 1e-9;   // norms at T <= E(0) (1 + energy_final)
  double conservation = 1e-11;  // residual <= conservation * max(flux scale, E(0))
  std::optional<double> order;  // default p - 1/2
};

/// Validated configuration.  Unused sections stay as parsed JSON.
struct ExperimentConfig {
  std::string mode;
  nlohmann::json raw;
  double eta = 0.5;
  double T = 1.0;
  double cfl = 0.5;
  std::uint64_t seed = 0;
  Thresholds thresholds;
  std::string csv_name = "diagnostics.csv";
  std::string summary_name = "summary.json";
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct ConvergenceRow {
  double h = 0.0;
  double err_u = 0.0;
  double err_v = 0.0;
  std::optional<double> order;  // empty on the first row
  bool floor = false;           // both errors at the machine floor
};

inline constexpr double kErrorFloor = 1e-12;

/// Orders from successive ratios log(e_{k-1}/e_k) / log(h_{k-1}/h_k), e = errU + errV.
/// Throws ConfigError for fewer than three levels.
std::vector<ConvergenceRow> convergence_table(const std::vector<double>& h, const std::vector<double>& err_u,
                                              const std::vector<double>& err_v);

struct Outcome {
  int exit_code = 0;  // 0 pass, 2 verdict failure
  nlohmann::json summary;
};

/// Runs one experiment and writes its CSV / summary into out_dir.
Outcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Fixed-schema CSV of a diagnostics series.
void write_csv(std::ostream& os, const DiagnosticsSeries& series, int ncomp);

/// Entry point used by the executable: 0 pass, 2 verdict failure, 1 error.
int run(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
        std::ostream& log, std::ostream& err);

}  // namespace overset::cli
