#pragma once

#include "meanfield/dynamics.hpp"
#include "meanfield/measures.hpp"

namespace meanfield {

/// Steepest-descent dynamics of the interaction energy
///   v(x, m) = |x|^2 / 2 + (lambda / 2) * int |x - y|^2 m(dy),
/// whose intrinsic gradient is (1 + 2 lambda) x - 2 lambda mean(m).
/// The Dirac at the origin is the equilibrium.
struct GradientFlowSystem {
  double lambda_interaction = 0.0;
  Eigen::Index d = 1;

  GradientFlowSystem(double lambda, Eigen::Index dim)
      : lambda_interaction(lambda), d(dim) {
    if (lambda < 0.0 || dim < 1) {
      throw std::invalid_argument("gradient flow needs lambda >= 0, d >= 1");
    }
  }

  /// Pointwise energy v(x, m).
  double v(const Vector& x, const EmpiricalMeasure& m) const;

  /// Intrinsic gradient (grad_x v + averaged grad_m v) at x, as a vector.
  Vector intrinsic_gradient(const Vector& x, const EmpiricalMeasure& m) const;
};

/// Velocity field x' = -(intrinsic gradient)^T of the system above.
VectorFieldSpec gradient_flow_field(const GradientFlowSystem& sys);

/// Mean-field system of coupled mathematical pendulums: phase space
/// d = 2 n_pend, free motion given by the symplectic block matrix
/// A = [[0, I], [-I, 0]], coupling through the ensemble mean with B = -kappa I.
/// The Gibbs measure of H(x) = |x|^2 / 2 at inverse temperature beta is the
/// Gaussian N(0, I / beta) and is an equilibrium.
struct PendulumSystem {
  int n_pend = 1;
  double kappa = 0.0;
  double beta = 1.0;

  PendulumSystem(int pendulums, double coupling, double inverse_temperature)
      : n_pend(pendulums), kappa(coupling), beta(inverse_temperature) {
    if (n_pend < 1 || !(beta > 0.0)) {
      throw std::invalid_argument("pendulum system needs n_pend >= 1, beta > 0");
    }
  }

  Eigen::Index dimension() const { return 2 * n_pend; }
  Matrix free_motion_matrix() const;   // A
  Matrix coupling_matrix() const;      // B = -kappa I
  double hamiltonian(const Vector& x) const { return 0.5 * x.squaredNorm(); }
};

/// Linear field A x + B mean(m) for the pendulum system.
VectorFieldSpec pendulum_field(const PendulumSystem& sys);

/// n i.i.d. draws from the Gibbs (Gaussian) equilibrium, then mean-centered
/// so the cloud's first moment is exactly zero. Deterministic per seed.
EmpiricalMeasure gibbs_cloud(const PendulumSystem& sys, Eigen::Index n,
                             std::uint64_t seed);

}  // namespace meanfield
