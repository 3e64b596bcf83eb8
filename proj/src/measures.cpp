#include "meanfield/measures.hpp"

#include <cmath>

namespace meanfield {

EmpiricalMeasure EmpiricalMeasure::from_matrix(Matrix points) {
  if (points.rows() < 1 || points.cols() < 1) {
    throw std::invalid_argument("empirical measure needs at least one particle");
  }
  if (!points.allFinite()) {
    throw std::invalid_argument("empirical measure has non-finite coordinate");
  }
  return EmpiricalMeasure(std::move(points));
}

EmpiricalMeasure EmpiricalMeasure::from_points(const std::vector<Vector>& pts) {
  if (pts.empty()) {
    throw std::invalid_argument("empirical measure needs at least one particle");
  }
  const Eigen::Index d = pts.front().size();
  Matrix m(static_cast<Eigen::Index>(pts.size()), d);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (pts[static_cast<std::size_t>(i)].size() != d) {
      throw std::invalid_argument("inconsistent particle dimensions");
    }
    m.row(i) = pts[static_cast<std::size_t>(i)].transpose();
  }
  return from_matrix(std::move(m));
}

EmpiricalMeasure EmpiricalMeasure::dirac(const Vector& point) {
  Matrix m(1, point.size());
  m.row(0) = point.transpose();
  return from_matrix(std::move(m));
}

PerturbationField PerturbationField::from_matrix(Matrix values) {
  if (!values.allFinite()) {
    throw std::invalid_argument("perturbation field has non-finite entry");
  }
  return PerturbationField{std::move(values)};
}

double PerturbationField::lp_norm(double p) const {
  const Eigen::Index n = values.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += std::pow(values.row(i).norm(), p);
  }
  return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

EmpiricalMeasure empirical_from_points(const std::vector<Vector>& points) {
  return EmpiricalMeasure::from_points(points);
}

double moment_root(const EmpiricalMeasure& m, double p) {
  if (!(p > 1.0)) {
    throw std::invalid_argument("moment_root requires p > 1");
  }
  const Eigen::Index n = m.size();
  if (p == 2.0) {
    return std::sqrt(m.points().squaredNorm() / static_cast<double>(n));
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += std::pow(m.points().row(i).norm(), p);
  }
  return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

EmpiricalMeasure push_forward(const EmpiricalMeasure& m,
                              const std::function<Vector(const Vector&)>& h) {
  Matrix out(m.size(), m.dimension());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Vector y = h(m.point(i));
    if (y.size() != m.dimension()) {
      throw std::domain_error("push-forward map changed the dimension");
    }
    if (!y.allFinite()) {
      throw std::domain_error("push-forward map produced a non-finite value");
    }
    out.row(i) = y.transpose();
  }
  return EmpiricalMeasure::from_matrix(std::move(out));
}

EmpiricalMeasure perturb(const EmpiricalMeasure& m, const PerturbationField& b,
                         double tau) {
  if (b.values.rows() != m.size() || b.values.cols() != m.dimension()) {
    throw std::invalid_argument("perturbation field does not match the measure");
  }
  if (!(tau >= 0.0)) {
    throw std::invalid_argument("perturb requires tau >= 0");
  }
  return EmpiricalMeasure::from_matrix(m.points() + tau * b.values);
}

}  // namespace meanfield
