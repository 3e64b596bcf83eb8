#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "meanfield/dynamics.hpp"
#include "meanfield/systems.hpp"

namespace meanfield::cli {

/// Raised for any configuration problem; mapped to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed experiment description. Parsing is strict: unknown keys are
/// rejected with the offending field named in the error.
struct ExperimentConfig {
  // system
  std::string system_name;
  std::optional<PendulumSystem> pendulum;
  std::optional<GradientFlowSystem> gradient_flow;

  // simulation
  bool has_simulation = false;
  Eigen::Index n_particles = 0;
  double dt = 0.0;
  double T = 0.0;
  Integrator integrator = Integrator::rk4;
  std::uint64_t seed = 0;
  int snapshot_stride = 1;
  std::string initial_kind;  // "equilibrium", "gaussian", "shifted_equilibrium"
  Vector initial_shift;

  // probe
  bool has_probe = false;
  double epsilon = 0.0;
  double delta = 0.0;
  int probe_samples = 0;
  int w2_stride = 100;

  // lyapunov
  bool has_lyapunov = false;
  std::string lyapunov_kind;  // "half_w2_sq" or "integral_v"
  std::optional<double> tolerance_c1;
  std::optional<double> tolerance_c2;

  // criterion
  bool has_criterion = false;
  int basis_degree = 2;
  std::optional<double> criterion_tol;

  // output
  std::string out_directory = ".";
  bool write_csv = true;
  bool write_json = true;
  bool write_particles = false;

  static ExperimentConfig from_json(const nlohmann::json& j);

  Eigen::Index dimension() const;
  VectorFieldSpec field() const;
  /// Equilibrium cloud of the configured system: the Gibbs sample for the
  /// pendulum family, the n-fold Dirac at the origin for the gradient flow.
  EmpiricalMeasure equilibrium_cloud() const;
  EmpiricalMeasure initial_cloud() const;

  nlohmann::json echo;  // the raw config, for the run manifest
};

ExperimentConfig load_config_file(const std::string& path);

// Exit-code contract: 0 success/pass, 1 criterion violated, 2 invalid
// configuration, 3 numerical blow-up.
int cmd_simulate(const ExperimentConfig& cfg);
int cmd_probe(const ExperimentConfig& cfg);
int cmd_criterion(const ExperimentConfig& cfg);

/// Loads the config, applies --out / --seed overrides, dispatches, and maps
/// exceptions to the exit-code contract. Messages go to stderr.
int run_command(const std::string& command, const std::string& config_path,
                const std::optional<std::string>& out_override,
                const std::optional<std::uint64_t>& seed_override);

}  // namespace meanfield::cli
