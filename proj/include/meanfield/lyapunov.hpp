#pragma once

#include <optional>

#include "json.hpp"
#include "meanfield/dynamics.hpp"
#include "meanfield/systems.hpp"
#include "meanfield/transport.hpp"

namespace meanfield {

/// Candidate Lyapunov functional.
///
/// half_w2_sq: phi(m) = W_2^2(m, reference) / 2. Superdifferentiable
/// everywhere, with the barycentric projection of the optimal plan from the
/// reference as a supergradient; requires clouds of the same size as the
/// reference.
///
/// integral_v: phi(m) = (1/n) sum_i v(x_i, m) for the built-in interaction
/// energy family with strength lambda; differentiable with the intrinsic
/// gradient as its (super)gradient.
///
/// custom: caller-supplied value and optional supergradient callbacks.
/// Superdifferentiability is the caller's responsibility and is not checked.
struct LyapunovSpec {
  enum class Kind { half_w2_sq, integral_v, custom };

  Kind kind = Kind::half_w2_sq;
  std::optional<EmpiricalMeasure> reference;  // half_w2_sq
  double lambda = 0.0;                        // integral_v
  std::function<double(const EmpiricalMeasure&)> value_fn;
  std::function<SupergradientField(const EmpiricalMeasure&)> gradient_fn;

  static LyapunovSpec half_w2_sq(EmpiricalMeasure reference);
  static LyapunovSpec integral_v(double lambda);
  static LyapunovSpec custom(
      std::function<double(const EmpiricalMeasure&)> value,
      std::function<SupergradientField(const EmpiricalMeasure&)> gradient = {});
};

/// phi(m) for the given spec.
double lyap_value(const LyapunovSpec& spec, const EmpiricalMeasure& m);

/// A supergradient of phi at m (see LyapunovSpec for the formulas).
SupergradientField supergradient(const LyapunovSpec& spec,
                                 const EmpiricalMeasure& m);

/// (1/n) sum_i gamma(x_i) . f(x_i, m).
double descent_integral(const SupergradientField& gamma,
                        const VectorFieldSpec& spec_f,
                        const EmpiricalMeasure& m);

/// Default slack for discrete monotonicity checks,
/// tol = c1 * dt + c2 * n^{-1/2} with c1 = (1 + |A| + |B|) * phi0 and
/// c2 = phi0: an O(dt) discretization allowance plus an O(n^{-1/2})
/// Monte Carlo allowance. Calibrated, not proven.
double default_monotone_tolerance(const VectorFieldSpec& field, double phi0,
                                  double dt, Eigen::Index n);

/// Lyapunov values along a trajectory and the non-increase verdict.
struct DescentReport {
  std::vector<double> times;
  std::vector<double> values;             // phi(m_t) per snapshot
  std::vector<double> descent_integrals;  // empty when no field was supplied
  double max_increase = 0.0;  // max over consecutive pairs of phi increments
  double tolerance = 0.0;
  bool pass = false;
  /// Snapshots whose optimal pairing admitted a near-zero-cost swap; the
  /// supergradient is then not uniquely determined by the plan.
  int near_tie_count = 0;

  nlohmann::json to_json() const;
};

/// Verifies phi(m_{t_{k+1}}) - phi(m_{t_k}) <= tol * (t_{k+1} - t_k) for all k
/// and phi(m_T) - phi(m_0) <= tol * T. When `field` is given, the report also
/// carries the descent integral at every snapshot.
DescentReport check_monotone(const TrajectoryEnsemble& traj,
                             const LyapunovSpec& spec, double tol,
                             const VectorFieldSpec* field = nullptr);

struct ProbeSample {
  double initial_distance = 0.0;
  double sup_distance = 0.0;
  bool escaped = false;
  bool blew_up = false;
  std::vector<double> times;
  std::vector<double> distances;  // W_2(m_hat, m_t) series for plotting
};

struct ProbeReport {
  double epsilon = 0.0;
  double delta = 0.0;
  double sup_distance = 0.0;
  bool escaped = false;
  std::vector<ProbeSample> samples;

  nlohmann::json to_json() const;
};

struct ProbeOptions {
  int w2_stride = 100;     // evaluate W_2 every this many steps
  int max_threads = 0;     // 0: hardware_concurrency, capped by MFSTAB_THREADS
  Integrator method = Integrator::rk4;
};

/// Monte Carlo Lyapunov-stability probe: draws `samples` initial clouds at
/// W_2-distance in (delta/2, delta) from m_hat (per-particle displacements
/// with uniform directions and folded-Gaussian magnitudes, globally rescaled),
/// integrates each, and reports the sup over samples and time of
/// W_2(m_hat, m_t). escaped = (sup >= epsilon). A sampled check, not a
/// certificate. Samples run concurrently; results are deterministic per seed
/// regardless of thread count.
ProbeReport stability_probe(const VectorFieldSpec& spec_f,
                            const EmpiricalMeasure& m_hat, double epsilon,
                            double delta, int samples, double T, double dt,
                            std::uint64_t seed, const ProbeOptions& options = {});

}  // namespace meanfield
