#include "meanfield/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "meanfield/linear_stability.hpp"
#include "meanfield/lyapunov.hpp"
#include "meanfield/measure_io.hpp"

namespace meanfield::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown config field: " + context + key);
    }
  }
}

const json& require(const json& obj, const std::string& key,
                    const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError("missing config field: " + context + key);
  }
  return *it;
}

double as_number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError(name + " must be a number");
  return v.get<double>();
}

long as_integer(const json& v, const std::string& name) {
  if (!v.is_number_integer()) throw ConfigError(name + " must be an integer");
  return v.get<long>();
}

std::string as_string(const json& v, const std::string& name) {
  if (!v.is_string()) throw ConfigError(name + " must be a string");
  return v.get<std::string>();
}

void parse_system(const json& j, ExperimentConfig& cfg) {
  check_keys(j, {"name", "parameters"}, "system.");
  cfg.system_name = as_string(require(j, "name", "system."), "system.name");
  const json& params = require(j, "parameters", "system.");
  if (cfg.system_name == "pendulum") {
    check_keys(params, {"n_pend", "kappa", "beta"}, "system.parameters.");
    const long n_pend =
        as_integer(require(params, "n_pend", "system.parameters."),
                   "system.parameters.n_pend");
    const double kappa = as_number(
        require(params, "kappa", "system.parameters."), "system.parameters.kappa");
    const double beta = as_number(
        require(params, "beta", "system.parameters."), "system.parameters.beta");
    if (n_pend < 1) throw ConfigError("system.parameters.n_pend must be >= 1");
    if (!(beta > 0.0)) throw ConfigError("system.parameters.beta must be > 0");
    cfg.pendulum.emplace(static_cast<int>(n_pend), kappa, beta);
  } else if (cfg.system_name == "gradient_flow") {
    check_keys(params, {"lambda", "d"}, "system.parameters.");
    const double lambda =
        as_number(require(params, "lambda", "system.parameters."),
                  "system.parameters.lambda");
    const long d = as_integer(require(params, "d", "system.parameters."),
                              "system.parameters.d");
    if (lambda < 0.0) throw ConfigError("system.parameters.lambda must be >= 0");
    if (d < 1) throw ConfigError("system.parameters.d must be >= 1");
    cfg.gradient_flow.emplace(lambda, static_cast<Eigen::Index>(d));
  } else {
    throw ConfigError("unknown system name: " + cfg.system_name);
  }
}

void parse_simulation(const json& j, ExperimentConfig& cfg) {
  check_keys(j,
             {"n_particles", "dt", "T", "integrator", "seed", "snapshot_stride",
              "initial"},
             "simulation.");
  cfg.has_simulation = true;
  const long n = as_integer(require(j, "n_particles", "simulation."),
                            "simulation.n_particles");
  if (n < 1) throw ConfigError("simulation.n_particles must be >= 1");
  cfg.n_particles = static_cast<Eigen::Index>(n);
  cfg.dt = as_number(require(j, "dt", "simulation."), "simulation.dt");
  cfg.T = as_number(require(j, "T", "simulation."), "simulation.T");
  if (!(cfg.dt > 0.0)) throw ConfigError("simulation.dt must be > 0");
  if (!(cfg.T >= cfg.dt)) throw ConfigError("simulation.T must be >= dt");
  const std::string method =
      as_string(require(j, "integrator", "simulation."), "simulation.integrator");
  if (method == "euler") {
    cfg.integrator = Integrator::euler;
  } else if (method == "rk4") {
    cfg.integrator = Integrator::rk4;
  } else {
    throw ConfigError("simulation.integrator must be 'euler' or 'rk4'");
  }
  const long seed =
      as_integer(require(j, "seed", "simulation."), "simulation.seed");
  if (seed < 0) throw ConfigError("simulation.seed must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  if (j.contains("snapshot_stride")) {
    const long stride =
        as_integer(j.at("snapshot_stride"), "simulation.snapshot_stride");
    if (stride < 1) throw ConfigError("simulation.snapshot_stride must be >= 1");
    cfg.snapshot_stride = static_cast<int>(stride);
  }
  if (j.contains("initial")) {
    const json& init = j.at("initial");
    check_keys(init, {"kind", "shift"}, "simulation.initial.");
    cfg.initial_kind = as_string(require(init, "kind", "simulation.initial."),
                                 "simulation.initial.kind");
    if (cfg.initial_kind != "equilibrium" && cfg.initial_kind != "gaussian" &&
        cfg.initial_kind != "shifted_equilibrium") {
      throw ConfigError("simulation.initial.kind must be one of "
                        "'equilibrium', 'gaussian', 'shifted_equilibrium'");
    }
    if (cfg.initial_kind == "shifted_equilibrium") {
      const json& shift = require(init, "shift", "simulation.initial.");
      if (!shift.is_array() || shift.empty()) {
        throw ConfigError("simulation.initial.shift must be a non-empty array");
      }
      cfg.initial_shift.resize(static_cast<Eigen::Index>(shift.size()));
      Eigen::Index k = 0;
      for (const auto& c : shift) {
        cfg.initial_shift[k++] = as_number(c, "simulation.initial.shift[]");
      }
    } else if (init.contains("shift")) {
      throw ConfigError("simulation.initial.shift only applies to "
                        "'shifted_equilibrium'");
    }
  }
}

void parse_probe(const json& j, ExperimentConfig& cfg) {
  check_keys(j, {"epsilon", "delta", "samples", "w2_stride"}, "probe.");
  cfg.has_probe = true;
  cfg.epsilon = as_number(require(j, "epsilon", "probe."), "probe.epsilon");
  cfg.delta = as_number(require(j, "delta", "probe."), "probe.delta");
  const long samples =
      as_integer(require(j, "samples", "probe."), "probe.samples");
  if (!(cfg.delta > 0.0) || !(cfg.epsilon >= cfg.delta)) {
    throw ConfigError("probe requires epsilon >= delta > 0");
  }
  if (samples < 1) throw ConfigError("probe.samples must be >= 1");
  cfg.probe_samples = static_cast<int>(samples);
  if (j.contains("w2_stride")) {
    const long stride = as_integer(j.at("w2_stride"), "probe.w2_stride");
    if (stride < 1) throw ConfigError("probe.w2_stride must be >= 1");
    cfg.w2_stride = static_cast<int>(stride);
  }
}

void parse_lyapunov(const json& j, ExperimentConfig& cfg) {
  check_keys(j, {"kind", "tolerance_c1", "tolerance_c2"}, "lyapunov.");
  cfg.has_lyapunov = true;
  cfg.lyapunov_kind = as_string(require(j, "kind", "lyapunov."), "lyapunov.kind");
  if (cfg.lyapunov_kind != "half_w2_sq" && cfg.lyapunov_kind != "integral_v") {
    throw ConfigError("lyapunov.kind must be 'half_w2_sq' or 'integral_v'");
  }
  if (j.contains("tolerance_c1")) {
    cfg.tolerance_c1 = as_number(j.at("tolerance_c1"), "lyapunov.tolerance_c1");
  }
  if (j.contains("tolerance_c2")) {
    cfg.tolerance_c2 = as_number(j.at("tolerance_c2"), "lyapunov.tolerance_c2");
  }
}

void parse_criterion(const json& j, ExperimentConfig& cfg) {
  check_keys(j, {"basis_degree", "tol"}, "criterion.");
  cfg.has_criterion = true;
  const long degree =
      as_integer(require(j, "basis_degree", "criterion."), "criterion.basis_degree");
  if (degree < 1 || degree > 2) {
    throw ConfigError("criterion.basis_degree must be 1 or 2");
  }
  cfg.basis_degree = static_cast<int>(degree);
  if (j.contains("tol")) {
    cfg.criterion_tol = as_number(j.at("tol"), "criterion.tol");
  }
}

void parse_output(const json& j, ExperimentConfig& cfg) {
  check_keys(j, {"directory", "formats", "particles"}, "output.");
  cfg.out_directory =
      as_string(require(j, "directory", "output."), "output.directory");
  const json& formats = require(j, "formats", "output.");
  if (!formats.is_array()) throw ConfigError("output.formats must be an array");
  cfg.write_csv = false;
  cfg.write_json = false;
  for (const auto& f : formats) {
    const std::string fmt = as_string(f, "output.formats[]");
    if (fmt == "csv") {
      cfg.write_csv = true;
    } else if (fmt == "json") {
      cfg.write_json = true;
    } else {
      throw ConfigError("output.formats entries must be 'csv' or 'json'");
    }
  }
  if (!cfg.write_csv && !cfg.write_json) {
    throw ConfigError("output.formats must select at least one format");
  }
  if (j.contains("particles")) {
    if (!j.at("particles").is_boolean()) {
      throw ConfigError("output.particles must be a boolean");
    }
    cfg.write_particles = j.at("particles").get<bool>();
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(j, {"system", "simulation", "probe", "lyapunov", "criterion",
                 "output"},
             "");
  ExperimentConfig cfg;
  cfg.echo = j;
  parse_system(require(j, "system", ""), cfg);
  if (j.contains("simulation")) parse_simulation(j.at("simulation"), cfg);
  if (j.contains("probe")) parse_probe(j.at("probe"), cfg);
  if (j.contains("lyapunov")) parse_lyapunov(j.at("lyapunov"), cfg);
  if (j.contains("criterion")) parse_criterion(j.at("criterion"), cfg);
  if (j.contains("output")) parse_output(j.at("output"), cfg);
  if (cfg.initial_kind.empty()) {
    cfg.initial_kind = cfg.pendulum ? "equilibrium" : "gaussian";
  }
  return cfg;
}

Eigen::Index ExperimentConfig::dimension() const {
  return pendulum ? pendulum->dimension() : gradient_flow->d;
}

VectorFieldSpec ExperimentConfig::field() const {
  return pendulum ? pendulum_field(*pendulum)
                  : gradient_flow_field(*gradient_flow);
}

EmpiricalMeasure ExperimentConfig::equilibrium_cloud() const {
  if (!has_simulation) {
    throw ConfigError("this command needs a simulation block");
  }
  if (pendulum) return gibbs_cloud(*pendulum, n_particles, seed);
  return EmpiricalMeasure::from_matrix(Matrix::Zero(n_particles, dimension()));
}

EmpiricalMeasure ExperimentConfig::initial_cloud() const {
  const EmpiricalMeasure equilibrium = equilibrium_cloud();
  if (initial_kind == "equilibrium") return equilibrium;
  if (initial_kind == "gaussian") {
    Rng rng(seed + 1);
    Matrix pts(n_particles, dimension());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      for (Eigen::Index k = 0; k < pts.cols(); ++k) pts(i, k) = rng.normal();
    }
    return EmpiricalMeasure::from_matrix(std::move(pts));
  }
  if (initial_shift.size() != dimension()) {
    throw ConfigError("simulation.initial.shift length must equal the state "
                      "dimension");
  }
  return EmpiricalMeasure::from_matrix(
      equilibrium.points().rowwise() + initial_shift.transpose());
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

namespace {

void write_manifest(const ExperimentConfig& cfg, const std::string& command) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = cfg.echo;
  manifest["seed"] = cfg.seed;
  manifest["versions"] = {{"meanfield", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)}};
  const auto now = std::chrono::system_clock::now();
  manifest["generated_at_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          now.time_since_epoch())
          .count();
  std::ofstream out(std::filesystem::path(cfg.out_directory) / "manifest.json");
  out << manifest.dump(2) << '\n';
}

void ensure_out_dir(const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_directory, ec);
  if (ec) {
    throw ConfigError("cannot create output directory: " + cfg.out_directory);
  }
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg) {
  if (!cfg.has_simulation) {
    throw ConfigError("simulate needs a simulation block");
  }
  if (cfg.has_lyapunov && cfg.lyapunov_kind == "integral_v" && !cfg.gradient_flow) {
    throw ConfigError("lyapunov.kind 'integral_v' needs the gradient_flow system");
  }
  ensure_out_dir(cfg);

  const VectorFieldSpec field = cfg.field();
  const EmpiricalMeasure m0 = cfg.initial_cloud();
  const TrajectoryEnsemble traj = integrate_ensemble(
      field, m0, cfg.T, cfg.dt, cfg.integrator, cfg.snapshot_stride);

  std::vector<std::string> extra_names;
  std::vector<std::vector<double>> extra_cols;
  std::optional<DescentReport> descent;
  if (cfg.has_lyapunov) {
    const LyapunovSpec spec =
        cfg.lyapunov_kind == "half_w2_sq"
            ? LyapunovSpec::half_w2_sq(cfg.equilibrium_cloud())
            : LyapunovSpec::integral_v(cfg.gradient_flow->lambda_interaction);
    const double phi0 = lyap_value(spec, m0);
    const double tol =
        cfg.tolerance_c1 || cfg.tolerance_c2
            ? cfg.tolerance_c1.value_or(0.0) * cfg.dt +
                  cfg.tolerance_c2.value_or(0.0) /
                      std::sqrt(static_cast<double>(cfg.n_particles))
            : default_monotone_tolerance(field, phi0, cfg.dt, cfg.n_particles);
    descent = check_monotone(traj, spec, tol, &field);
    extra_names.push_back("lyapunov");
    extra_cols.push_back(descent->values);
  }

  const auto out = [&](const char* name) {
    return (std::filesystem::path(cfg.out_directory) / name).string();
  };
  if (cfg.write_csv) {
    std::ofstream summary(out("summary.csv"));
    write_summary_csv(summary, traj, extra_names, extra_cols);
    if (cfg.write_particles) {
      std::ofstream particles(out("trajectory.csv"));
      write_trajectory_csv(particles, traj);
    }
  }
  if (cfg.write_json) {
    json run;
    run["times"] = traj.times;
    std::vector<double> sigma2;
    std::vector<std::vector<double>> means;
    for (const auto& state : traj.states) {
      sigma2.push_back(moment_root(state, 2.0));
      const Vector m = state.mean();
      means.emplace_back(m.data(), m.data() + m.size());
    }
    run["sigma2"] = sigma2;
    run["mean"] = means;
    if (descent) run["descent_report"] = descent->to_json();
    std::ofstream outjson(out("run.json"));
    outjson << run.dump(2) << '\n';
  }
  if (descent && cfg.write_json) {
    std::ofstream report(out("descent_report.json"));
    report << descent->to_json().dump(2) << '\n';
  }
  write_manifest(cfg, "simulate");
  return 0;
}

int cmd_probe(const ExperimentConfig& cfg) {
  if (!cfg.has_probe) throw ConfigError("probe needs a probe block");
  if (!cfg.has_simulation) throw ConfigError("probe needs a simulation block");
  ensure_out_dir(cfg);

  const VectorFieldSpec field = cfg.field();
  const EmpiricalMeasure m_hat = cfg.equilibrium_cloud();
  ProbeOptions options;
  options.w2_stride = cfg.w2_stride;
  options.method = cfg.integrator;
  const ProbeReport report =
      stability_probe(field, m_hat, cfg.epsilon, cfg.delta, cfg.probe_samples,
                      cfg.T, cfg.dt, cfg.seed, options);

  std::ofstream out(std::filesystem::path(cfg.out_directory) / "probe.json");
  out << report.to_json().dump(2) << '\n';
  write_manifest(cfg, "probe");
  std::cout << (report.escaped ? "escaped" : "contained")
            << " sup_distance=" << format_double(report.sup_distance) << '\n';
  return 0;
}

int cmd_criterion(const ExperimentConfig& cfg) {
  if (!cfg.has_criterion) throw ConfigError("criterion needs a criterion block");
  if (!cfg.pendulum) {
    throw ConfigError("criterion needs a linear-kind system (pendulum); "
                      "the gradient_flow system is not linear-kind in config "
                      "terms");
  }
  if (!cfg.has_simulation) throw ConfigError("criterion needs a simulation block");
  ensure_out_dir(cfg);

  const Matrix a = cfg.pendulum->free_motion_matrix();
  const Matrix b = cfg.pendulum->coupling_matrix();
  const EmpiricalMeasure m_hat = cfg.equilibrium_cloud();
  const auto basis = tangent_basis(m_hat.dimension(), cfg.basis_degree);
  const double tol =
      cfg.criterion_tol.value_or(default_criterion_tolerance(a, b));
  const QuadraticFormReport report = quadratic_form(a, b, m_hat, basis, tol);

  json out_json = report.to_json();
  out_json["mean_dynamics"] = mean_dynamics_matrix(a, b).to_json();
  std::ofstream out(std::filesystem::path(cfg.out_directory) / "criterion.json");
  out << out_json.dump(2) << '\n';
  write_manifest(cfg, "criterion");
  std::cout << (report.pass ? "pass" : "fail")
            << " max_eigenvalue=" << format_double(report.max_eigenvalue)
            << '\n';
  return report.pass ? 0 : 1;
}

int run_command(const std::string& command, const std::string& config_path,
                const std::optional<std::string>& out_override,
                const std::optional<std::uint64_t>& seed_override) {
  try {
    ExperimentConfig cfg = load_config_file(config_path);
    if (out_override) {
      cfg.out_directory = *out_override;
    }
    if (seed_override) {
      cfg.seed = *seed_override;
      if (cfg.echo.contains("simulation")) {
        cfg.echo["simulation"]["seed"] = *seed_override;
      }
    }
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "probe") return cmd_probe(cfg);
    if (command == "criterion") return cmd_criterion(cfg);
    std::cerr << "unknown command: " << command << '\n';
    return 2;
  } catch (const BlowUpError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace meanfield::cli
