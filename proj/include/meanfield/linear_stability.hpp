#pragma once

#include "json.hpp"
#include "meanfield/dynamics.hpp"
#include "meanfield/measures.hpp"

namespace meanfield {

/// Gradients of the polynomial test functions x_j (degree 1) and additionally
/// x_j x_l, j <= l (degree 2): the finite stand-in for the tangent space at
/// m_hat. Count is d for degree 1 and d + d(d+1)/2 for degree 2.
std::vector<TestGradient> tangent_basis(Eigen::Index d, int degree);

/// Result of evaluating the stability form
///   q(xi) = int xi(x)^T A xi(x) m_hat(dx) + (int xi dm_hat)^T B (int xi dm_hat)
/// on a finite basis. Gram is the symmetrized bilinear extension; a
/// non-positive spectrum is necessary evidence over the basis span only,
/// never a certificate over the whole tangent space.
struct QuadraticFormReport {
  std::vector<std::string> basis_labels;
  Matrix gram;           // symmetrized, k x k
  Vector raw_diagonal;   // q(xi_j, xi_j) as evaluated, before symmetrization
  double max_eigenvalue = 0.0;
  double tol = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Default verdict slack, 1e-9 * (1 + |A| + |B|).
double default_criterion_tolerance(const Matrix& a, const Matrix& b);

/// Evaluates the stability form over the basis by particle averages on m_hat.
/// Verdict: max eigenvalue of the symmetrized Gram matrix <= tol.
QuadraticFormReport quadratic_form(const Matrix& a, const Matrix& b,
                                   const EmpiricalMeasure& m_hat,
                                   const std::vector<TestGradient>& basis,
                                   double tol);
QuadraticFormReport quadratic_form(const Matrix& a, const Matrix& b,
                                   const EmpiricalMeasure& m_hat,
                                   const std::vector<TestGradient>& basis);

/// The empirical mean of a linear system obeys mu' = (A + B) mu; this report
/// carries A + B, its spectrum, and whether it is Hurwitz.
struct SpectralReport {
  Matrix matrix;  // A + B
  Eigen::VectorXcd eigenvalues;
  bool hurwitz = false;

  nlohmann::json to_json() const;
};

SpectralReport mean_dynamics_matrix(const Matrix& a, const Matrix& b);

}  // namespace meanfield
