#pragma once

#include <vector>

#include "json.hpp"
#include "meanfield/measures.hpp"

namespace meanfield {

/// Optimal pairing between two equal-size uniform clouds together with the
/// attained p-Wasserstein distance. assignment[i] is the target particle
/// paired with source particle i; the pairing is a bijection.
struct TransportPlan {
  EmpiricalMeasure source;
  EmpiricalMeasure target;
  std::vector<Eigen::Index> assignment;
  double cost = 0.0;  // W_p value
  double p = 2.0;

  /// Recomputes (sum_i |target[a(i)] - source[i]|^p / n)^{1/p} from the pairing.
  double cost_from_assignment() const;

  /// Debug dump: {"assignment": [...], "cost": x, "p": y}.
  nlohmann::json to_json() const;
};

/// Covector field gamma attached to a measure, one entry per particle.
/// Values are stored as plain d-vectors; the covector (row) reading only
/// matters for bookkeeping, the pairing <gamma, b> is the Euclidean dot.
struct SupergradientField {
  Matrix values;  // n x d

  Eigen::Index size() const { return values.rows(); }

  /// L_2(m) norm, (sum_i |gamma_i|^2 / n)^{1/2}.
  double l2_norm() const;

  /// L_2(m) pairing (1/n) sum_i gamma_i . b_i.
  double pair(const PerturbationField& b) const;
};

/// |x - y|^p for the plan's exponent.
double ground_cost(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y,
                   double p);

/// Exact p-Wasserstein distance and optimal assignment between equal-size
/// clouds, solved as a dense assignment problem by shortest augmenting paths
/// (O(n^3)). Requires mu.n == nu.n, mu.d == nu.d, p > 1 is not enforced here
/// (any p > 0 yields a valid assignment problem).
TransportPlan wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                          double p);

/// Exhaustive minimum over all n! pairings; ties broken by the
/// lexicographically smallest permutation. Requires n <= 8.
TransportPlan optimal_plan_bruteforce(const EmpiricalMeasure& mu,
                                      const EmpiricalMeasure& nu, double p);

/// Barycentric projection of an optimal plan with p = 2, attached to the
/// plan's target measure m with reference (source) m_hat:
/// gamma(x_{a(i)}) = x_{a(i)} - xhat_i. Its L_2(m) norm equals plan.cost.
/// Throws std::invalid_argument when the plan was not built with p = 2.
SupergradientField barycentric_projection(const TransportPlan& plan);

/// Closed-form 2-Wasserstein (Bures) distance between Gaussian measures.
/// Covariances must be symmetric positive semi-definite; eigenvalues in
/// [-1e-12 * scale, 0) are clipped to zero, anything lower is rejected.
double gaussian_w2(const Vector& mean1, const Matrix& cov1, const Vector& mean2,
                   const Matrix& cov2);

/// Smallest cost increase over all two-particle swaps of the assignment.
/// A value within `slack` of zero indicates the optimal assignment is not
/// unique (or nearly so), i.e. the cloud is not in generic position.
double min_swap_increase(const TransportPlan& plan);

/// True when min_swap_increase is within slack of zero, scaled by the cost.
bool assignment_near_tie(const TransportPlan& plan, double slack = 1e-10);

}  // namespace meanfield
