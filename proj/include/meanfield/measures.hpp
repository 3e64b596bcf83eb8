#pragma once

#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "meanfield/types.hpp"

namespace meanfield {

/// Uniform-weight particle cloud representing a probability measure on R^d.
/// Particle i is row i of an n x d matrix; every particle carries mass 1/n.
/// Immutable after construction and safe to share across threads.
class EmpiricalMeasure {
 public:
  /// Builds a measure from an n x d matrix of particle positions.
  /// Throws std::invalid_argument on an empty cloud or non-finite entries.
  static EmpiricalMeasure from_matrix(Matrix points);

  /// Convenience constructor from a list of d-vectors.
  /// Throws std::invalid_argument on inconsistent dimensions.
  static EmpiricalMeasure from_points(const std::vector<Vector>& points);

  /// Dirac mass at a single point.
  static EmpiricalMeasure dirac(const Vector& point);

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dimension() const { return points_.cols(); }

  const Matrix& points() const { return points_; }
  Vector point(Eigen::Index i) const { return points_.row(i).transpose(); }

  /// First moment (particle average).
  Vector mean() const { return points_.colwise().mean().transpose(); }

  bool operator==(const EmpiricalMeasure& other) const {
    return points_.rows() == other.points_.rows() &&
           points_.cols() == other.points_.cols() && points_ == other.points_;
  }

 private:
  explicit EmpiricalMeasure(Matrix points) : points_(std::move(points)) {}
  Matrix points_;
};

/// Per-particle displacement field b attached to a measure, one d-vector per
/// particle (row i displaces particle i).
struct PerturbationField {
  Matrix values;  // n x d

  static PerturbationField from_matrix(Matrix values);

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index dimension() const { return values.cols(); }

  /// L_p(m) norm, (sum_i |b_i|^p / n)^{1/p}.
  double lp_norm(double p) const;
};

/// Constructs a uniform cloud from raw points. Errors on empty input,
/// inconsistent dimensions, or non-finite coordinates.
EmpiricalMeasure empirical_from_points(const std::vector<Vector>& points);

/// p-th root of the p-th absolute moment, (sum_i |x_i|^p / n)^{1/p}.
/// Equals the p-Wasserstein distance to the Dirac at the origin.
/// Requires p > 1.
double moment_root(const EmpiricalMeasure& m, double p);

/// Push-forward h#m: applies h to every particle, weights unchanged.
/// Throws std::domain_error if h produces a non-finite value.
EmpiricalMeasure push_forward(const EmpiricalMeasure& m,
                              const std::function<Vector(const Vector&)>& h);

/// (Id + tau * b)#m: particle i moves to x_i + tau * b_i.
EmpiricalMeasure perturb(const EmpiricalMeasure& m, const PerturbationField& b,
                         double tau);

}  // namespace meanfield
