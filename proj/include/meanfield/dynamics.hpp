#pragma once

#include <functional>
#include <string>
#include <vector>

#include "meanfield/measures.hpp"

namespace meanfield {

/// Velocity field f(x, m) of the interacting particle system.
/// Linear fields are f(x, m) = A x + B mean(m); gradient-flow fields are the
/// steepest-descent dynamics of the built-in interaction energy family with
/// strength lambda, f(x, m) = -(1 + 2 lambda) x + 2 lambda mean(m).
struct VectorFieldSpec {
  enum class Kind { linear, gradient_flow, custom };

  Kind kind = Kind::linear;
  Eigen::Index dim = 0;
  Matrix A;  // linear
  Matrix B;  // linear
  double lambda = 0.0;  // gradient_flow interaction strength
  std::function<Vector(const Vector&, const EmpiricalMeasure&)> custom_fn;

  static VectorFieldSpec linear(Matrix a, Matrix b);
  static VectorFieldSpec gradient_flow(double lambda, Eigen::Index dim);
  static VectorFieldSpec custom(
      Eigen::Index dim,
      std::function<Vector(const Vector&, const EmpiricalMeasure&)> fn);

  /// Constant C1 of the sublinear growth bound |f| <= C1 (1 + |x| + sigma_p).
  /// Known for linear (max of the operator norms) and gradient-flow kinds;
  /// throws for custom fields.
  double growth_constant() const;

  /// Affine representation (A_eff, B_eff) when one exists (linear and
  /// gradient-flow kinds).
  std::pair<Matrix, Matrix> affine_matrices() const;
};

/// Evaluates f(x, m). Throws on dimension mismatch or a non-finite custom
/// callback result.
Vector evaluate_field(const VectorFieldSpec& spec, const Vector& x,
                      const EmpiricalMeasure& m);

/// Evaluates f(x_i, m) for every particle of m at once; the interaction
/// statistics are computed once. Row i is f(x_i, m).
Matrix evaluate_field_cloud(const VectorFieldSpec& spec,
                            const EmpiricalMeasure& m);

/// Time grid and snapshots of one coupled-particle integration. Snapshots
/// share the particle indexing, so row i traces one trajectory.
struct TrajectoryEnsemble {
  std::vector<double> times;
  std::vector<EmpiricalMeasure> states;

  const EmpiricalMeasure& initial() const { return states.front(); }
  const EmpiricalMeasure& final_state() const { return states.back(); }
};

enum class Integrator { euler, rk4 };

/// Thrown when a coordinate leaves [-1e12, 1e12] or turns non-finite during
/// integration; carries the time at which it happened.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Integrates the coupled system dx_i/dt = f(x_i, m_t) with a fixed step.
/// Every RK4 substage evaluates the field on the substage-advanced cloud, so
/// the ensemble mean of a linear system is integrated at full RK4 order.
/// Snapshots are stored every `snapshot_stride` steps plus the final state.
TrajectoryEnsemble integrate_ensemble(const VectorFieldSpec& spec,
                                      const EmpiricalMeasure& m0, double T,
                                      double dt, Integrator method,
                                      int snapshot_stride = 1);

/// Named gradient field of a scalar test function, used for weak residuals
/// and tangent bases.
struct TestGradient {
  std::string label;
  std::function<Vector(const Vector&)> eval;
};

/// Gradients of the monomials x_j, x_j x_l (j <= l) and |x|^2.
std::vector<TestGradient> default_residual_basis(Eigen::Index d);

/// max_j | (1/n) sum_i grad phi_j(x_i) . f(x_i, m_hat) |. A zero certifies
/// weak stationarity against the supplied basis only, not against all test
/// functions.
double equilibrium_residual(const VectorFieldSpec& spec,
                            const EmpiricalMeasure& m_hat,
                            const std::vector<TestGradient>& basis);

/// A-priori growth-bound verification for a trajectory produced by a linear
/// or gradient-flow field: the moment bound sigma_2(m_t) <= (C1 T + a) e^{2 C1 T}
/// and the time-Lipschitz bound W_2(m_s, m_r) <= G4 (r - s) with
/// G4 = C1 e^{C1 T} (1 + 2 G1), checked on sampled snapshot pairs.
struct GrowthBoundReport {
  double c1 = 0.0;
  double alpha = 0.0;          // sigma_2(m_0)
  double moment_bound = 0.0;   // G1
  double lipschitz_bound = 0.0;  // G4
  double max_moment = 0.0;
  double max_rate = 0.0;  // max over sampled pairs of W2 / (r - s)
  double moment_margin = 0.0;
  double rate_margin = 0.0;
  bool within_bounds = false;
};

GrowthBoundReport check_growth_bounds(const TrajectoryEnsemble& traj,
                                      const VectorFieldSpec& spec);

/// CSV export, long format: t, particle_id, x_1..x_d.
void write_trajectory_csv(std::ostream& out, const TrajectoryEnsemble& traj);

/// CSV export, summary: t, sigma2, mean_1..mean_d and optional extra columns.
void write_summary_csv(std::ostream& out, const TrajectoryEnsemble& traj,
                       const std::vector<std::string>& extra_names = {},
                       const std::vector<std::vector<double>>& extra_cols = {});

}  // namespace meanfield
