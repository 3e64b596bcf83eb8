#include "meanfield/systems.hpp"

namespace meanfield {

double GradientFlowSystem::v(const Vector& x, const EmpiricalMeasure& m) const {
  double interaction = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    interaction += (x - m.point(i)).squaredNorm();
  }
  interaction /= static_cast<double>(m.size());
  return 0.5 * x.squaredNorm() + 0.5 * lambda_interaction * interaction;
}

Vector GradientFlowSystem::intrinsic_gradient(const Vector& x,
                                              const EmpiricalMeasure& m) const {
  // grad_x v = x + lambda (x - mean), averaged grad_m v = lambda (x - mean).
  return (1.0 + 2.0 * lambda_interaction) * x -
         2.0 * lambda_interaction * m.mean();
}

VectorFieldSpec gradient_flow_field(const GradientFlowSystem& sys) {
  return VectorFieldSpec::gradient_flow(sys.lambda_interaction, sys.d);
}

Matrix PendulumSystem::free_motion_matrix() const {
  const Eigen::Index n = n_pend;
  Matrix a = Matrix::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n) = Matrix::Identity(n, n);
  a.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return a;
}

Matrix PendulumSystem::coupling_matrix() const {
  return -kappa * Matrix::Identity(dimension(), dimension());
}

VectorFieldSpec pendulum_field(const PendulumSystem& sys) {
  return VectorFieldSpec::linear(sys.free_motion_matrix(),
                                 sys.coupling_matrix());
}

EmpiricalMeasure gibbs_cloud(const PendulumSystem& sys, Eigen::Index n,
                             std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("gibbs_cloud needs n >= 1");
  }
  const Eigen::Index d = sys.dimension();
  const double sigma = 1.0 / std::sqrt(sys.beta);
  Rng rng(seed);
  Matrix pts(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = sigma * rng.normal();
  }
  pts.rowwise() -= pts.colwise().mean();
  return EmpiricalMeasure::from_matrix(std::move(pts));
}

}  // namespace meanfield
