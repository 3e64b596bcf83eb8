#include "meanfield/lyapunov.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace meanfield {

LyapunovSpec LyapunovSpec::half_w2_sq(EmpiricalMeasure reference) {
  LyapunovSpec spec;
  spec.kind = Kind::half_w2_sq;
  spec.reference = std::move(reference);
  return spec;
}

LyapunovSpec LyapunovSpec::integral_v(double lambda) {
  if (lambda < 0.0) {
    throw std::invalid_argument("integral_v needs lambda >= 0");
  }
  LyapunovSpec spec;
  spec.kind = Kind::integral_v;
  spec.lambda = lambda;
  return spec;
}

LyapunovSpec LyapunovSpec::custom(
    std::function<double(const EmpiricalMeasure&)> value,
    std::function<SupergradientField(const EmpiricalMeasure&)> gradient) {
  if (!value) {
    throw std::invalid_argument("custom Lyapunov spec needs a value callback");
  }
  LyapunovSpec spec;
  spec.kind = Kind::custom;
  spec.value_fn = std::move(value);
  spec.gradient_fn = std::move(gradient);
  return spec;
}

namespace {

double integral_v_value(double lambda, const EmpiricalMeasure& m) {
  const GradientFlowSystem sys(lambda, m.dimension());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    acc += sys.v(m.point(i), m);
  }
  return acc / static_cast<double>(m.size());
}

SupergradientField integral_v_gradient(double lambda,
                                       const EmpiricalMeasure& m) {
  const Vector mean = m.mean();
  Matrix values = (1.0 + 2.0 * lambda) * m.points();
  values.rowwise() -= (2.0 * lambda * mean).transpose();
  return SupergradientField{std::move(values)};
}

}  // namespace

double lyap_value(const LyapunovSpec& spec, const EmpiricalMeasure& m) {
  switch (spec.kind) {
    case LyapunovSpec::Kind::half_w2_sq: {
      const double w = wasserstein(*spec.reference, m, 2.0).cost;
      return 0.5 * w * w;
    }
    case LyapunovSpec::Kind::integral_v:
      return integral_v_value(spec.lambda, m);
    case LyapunovSpec::Kind::custom:
      return spec.value_fn(m);
  }
  return 0.0;
}

SupergradientField supergradient(const LyapunovSpec& spec,
                                 const EmpiricalMeasure& m) {
  switch (spec.kind) {
    case LyapunovSpec::Kind::half_w2_sq:
      return barycentric_projection(wasserstein(*spec.reference, m, 2.0));
    case LyapunovSpec::Kind::integral_v:
      return integral_v_gradient(spec.lambda, m);
    case LyapunovSpec::Kind::custom:
      if (!spec.gradient_fn) {
        throw std::invalid_argument(
            "custom Lyapunov spec has no supergradient callback");
      }
      return spec.gradient_fn(m);
  }
  return SupergradientField{};
}

double descent_integral(const SupergradientField& gamma,
                        const VectorFieldSpec& spec_f,
                        const EmpiricalMeasure& m) {
  if (gamma.values.rows() != m.size() || gamma.values.cols() != m.dimension()) {
    throw std::invalid_argument("supergradient does not match the measure");
  }
  const Matrix f = evaluate_field_cloud(spec_f, m);
  return gamma.values.cwiseProduct(f).sum() / static_cast<double>(m.size());
}

double default_monotone_tolerance(const VectorFieldSpec& field, double phi0,
                                  double dt, Eigen::Index n) {
  const auto [a, b] = field.affine_matrices();
  const double c1 = (1.0 + spectral_norm(a) + spectral_norm(b)) * phi0;
  const double c2 = phi0;
  return c1 * dt + c2 / std::sqrt(static_cast<double>(n));
}

nlohmann::json DescentReport::to_json() const {
  nlohmann::json j;
  j["times"] = times;
  j["values"] = values;
  j["descent_integrals"] = descent_integrals;
  j["max_increase"] = max_increase;
  j["tolerance"] = tolerance;
  j["verdict"] = pass ? "pass" : "fail";
  j["near_tie_count"] = near_tie_count;
  return j;
}

DescentReport check_monotone(const TrajectoryEnsemble& traj,
                             const LyapunovSpec& spec, double tol,
                             const VectorFieldSpec* field) {
  if (!(tol >= 0.0)) {
    throw std::invalid_argument("check_monotone needs tol >= 0");
  }
  DescentReport report;
  report.times = traj.times;
  report.tolerance = tol;

  const bool with_descent =
      field != nullptr &&
      (spec.kind != LyapunovSpec::Kind::custom || spec.gradient_fn);

  for (const auto& state : traj.states) {
    if (spec.kind == LyapunovSpec::Kind::half_w2_sq) {
      // One assignment solve per snapshot serves the value, the
      // supergradient, and the near-tie diagnostic.
      const TransportPlan plan = wasserstein(*spec.reference, state, 2.0);
      report.values.push_back(0.5 * plan.cost * plan.cost);
      if (assignment_near_tie(plan)) ++report.near_tie_count;
      if (with_descent) {
        report.descent_integrals.push_back(
            descent_integral(barycentric_projection(plan), *field, state));
      }
    } else {
      report.values.push_back(lyap_value(spec, state));
      if (with_descent) {
        report.descent_integrals.push_back(
            descent_integral(supergradient(spec, state), *field, state));
      }
    }
  }

  bool pass = true;
  double max_increase = 0.0;
  for (std::size_t k = 0; k + 1 < report.values.size(); ++k) {
    const double increase = report.values[k + 1] - report.values[k];
    max_increase = std::max(max_increase, increase);
    const double dt_k = report.times[k + 1] - report.times[k];
    if (increase > tol * dt_k) pass = false;
  }
  const double horizon = report.times.back() - report.times.front();
  if (report.values.back() - report.values.front() > tol * horizon) {
    pass = false;
  }
  report.max_increase = max_increase;
  report.pass = pass;
  return report;
}

namespace {

int resolve_thread_count(int requested, int samples) {
  int limit = requested > 0
                  ? requested
                  : static_cast<int>(std::thread::hardware_concurrency());
  if (limit < 1) limit = 1;
  if (const char* env = std::getenv("MFSTAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) limit = std::min(limit, cap);
  }
  return std::min(limit, samples);
}

/// Initial cloud at W_2-distance within (delta/2, delta) of m_hat: uniform
/// directions, folded-Gaussian magnitudes clipped at 3, rescaled until the
/// exact empirical distance lands inside the window.
EmpiricalMeasure sample_initial_cloud(const EmpiricalMeasure& m_hat,
                                      double delta, Rng& rng,
                                      double* attained) {
  const Eigen::Index n = m_hat.size();
  const Eigen::Index d = m_hat.dimension();
  Matrix u(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mag = std::min(std::abs(rng.normal()), 3.0);
    u.row(i) = (mag * rng.unit_vector(d)).transpose();
  }
  const double rms = std::sqrt(u.squaredNorm() / static_cast<double>(n));
  if (rms == 0.0) {
    throw std::runtime_error("degenerate displacement sample");
  }
  double scale = 0.75 * delta / rms;
  for (int iter = 0; iter < 32; ++iter) {
    const EmpiricalMeasure m0 =
        EmpiricalMeasure::from_matrix(m_hat.points() + scale * u);
    const double w = wasserstein(m_hat, m0, 2.0).cost;
    if (w > 0.5 * delta && w < 0.975 * delta) {
      if (attained) *attained = w;
      return m0;
    }
    // The distance is at most scale * rms and continuous in the scale, so a
    // proportional correction converges in a couple of rounds.
    scale *= 0.75 * delta / w;
  }
  throw std::runtime_error("could not place the initial cloud in (delta/2, delta)");
}

}  // namespace

nlohmann::json ProbeReport::to_json() const {
  nlohmann::json j;
  j["epsilon"] = epsilon;
  j["delta"] = delta;
  j["sup_distance"] = sup_distance;
  j["escaped"] = escaped;
  j["samples"] = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json js;
    js["initial_distance"] = s.initial_distance;
    js["sup_distance"] = s.sup_distance;
    js["escaped"] = s.escaped;
    js["blew_up"] = s.blew_up;
    js["times"] = s.times;
    js["distances"] = s.distances;
    j["samples"].push_back(std::move(js));
  }
  return j;
}

ProbeReport stability_probe(const VectorFieldSpec& spec_f,
                            const EmpiricalMeasure& m_hat, double epsilon,
                            double delta, int samples, double T, double dt,
                            std::uint64_t seed, const ProbeOptions& options) {
  if (!(delta > 0.0) || !(epsilon >= delta)) {
    throw std::invalid_argument("probe needs 0 < delta <= epsilon");
  }
  if (samples < 1) {
    throw std::invalid_argument("probe needs samples >= 1");
  }

  ProbeReport report;
  report.epsilon = epsilon;
  report.delta = delta;
  report.samples.resize(static_cast<std::size_t>(samples));

  const auto run_sample = [&](int index) {
    ProbeSample& out = report.samples[static_cast<std::size_t>(index)];
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1));
    const EmpiricalMeasure m0 =
        sample_initial_cloud(m_hat, delta, rng, &out.initial_distance);
    try {
      const TrajectoryEnsemble traj = integrate_ensemble(
          spec_f, m0, T, dt, options.method, options.w2_stride);
      for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double w = wasserstein(m_hat, traj.states[k], 2.0).cost;
        out.times.push_back(traj.times[k]);
        out.distances.push_back(w);
        out.sup_distance = std::max(out.sup_distance, w);
      }
    } catch (const BlowUpError& e) {
      // A blow-up certainly leaves every epsilon-ball.
      out.blew_up = true;
      out.times.push_back(e.time());
      out.distances.push_back(std::numeric_limits<double>::infinity());
      out.sup_distance = std::numeric_limits<double>::infinity();
    }
    out.escaped = out.sup_distance >= epsilon;
  };

  const int threads = resolve_thread_count(options.max_threads, samples);
  if (threads <= 1) {
    for (int i = 0; i < samples; ++i) run_sample(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < samples; i = next.fetch_add(1)) {
          run_sample(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& s : report.samples) {
    report.sup_distance = std::max(report.sup_distance, s.sup_distance);
    report.escaped = report.escaped || s.escaped;
  }
  return report;
}

}  // namespace meanfield
