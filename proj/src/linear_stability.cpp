#include "meanfield/linear_stability.hpp"

namespace meanfield {

std::vector<TestGradient> tangent_basis(Eigen::Index d, int degree) {
  if (d < 1) {
    throw std::invalid_argument("tangent basis needs d >= 1");
  }
  if (degree < 1 || degree > 2) {
    throw std::invalid_argument("tangent basis supports degree 1 or 2 only");
  }
  std::vector<TestGradient> basis;
  for (Eigen::Index j = 0; j < d; ++j) {
    basis.push_back({"grad(x_" + std::to_string(j + 1) + ")",
                     [d, j](const Vector&) {
                       Vector g = Vector::Zero(d);
                       g[j] = 1.0;
                       return g;
                     }});
  }
  if (degree == 2) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index l = j; l < d; ++l) {
        basis.push_back({"grad(x_" + std::to_string(j + 1) + "*x_" +
                             std::to_string(l + 1) + ")",
                         [d, j, l](const Vector& x) {
                           Vector g = Vector::Zero(d);
                           g[j] += x[l];
                           g[l] += x[j];
                           return g;
                         }});
      }
    }
  }
  return basis;
}

double default_criterion_tolerance(const Matrix& a, const Matrix& b) {
  return 1e-9 * (1.0 + spectral_norm(a) + spectral_norm(b));
}

nlohmann::json QuadraticFormReport::to_json() const {
  nlohmann::json j;
  j["basis"] = basis_labels;
  j["gram"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < gram.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < gram.cols(); ++c) row.push_back(gram(r, c));
    j["gram"].push_back(std::move(row));
  }
  j["raw_diagonal"] = std::vector<double>(
      raw_diagonal.data(), raw_diagonal.data() + raw_diagonal.size());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  j["eigenvalues"] = std::vector<double>(
      es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  j["max_eigenvalue"] = max_eigenvalue;
  j["tol"] = tol;
  j["verdict"] = pass ? "pass" : "fail";
  j["scope"] = "necessary evidence over the listed basis only";
  return j;
}

QuadraticFormReport quadratic_form(const Matrix& a, const Matrix& b,
                                   const EmpiricalMeasure& m_hat,
                                   const std::vector<TestGradient>& basis,
                                   double tol) {
  const Eigen::Index d = m_hat.dimension();
  if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d) {
    throw std::invalid_argument("quadratic form dimension mismatch");
  }
  if (basis.empty()) {
    throw std::invalid_argument("quadratic form needs a non-empty basis");
  }
  const Eigen::Index k = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index n = m_hat.size();

  // Evaluate each basis field on the cloud once.
  std::vector<Matrix> fields(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    Matrix vals(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector g = basis[static_cast<std::size_t>(j)].eval(m_hat.point(i));
      if (g.size() != d) {
        throw std::invalid_argument("basis field dimension mismatch");
      }
      vals.row(i) = g.transpose();
    }
    fields[static_cast<std::size_t>(j)] = std::move(vals);
  }

  const auto bilinear = [&](Eigen::Index j, Eigen::Index l) {
    const Matrix& xi = fields[static_cast<std::size_t>(j)];
    const Matrix& zeta = fields[static_cast<std::size_t>(l)];
    const double a_part =
        xi.cwiseProduct(zeta * a.transpose()).sum() / static_cast<double>(n);
    const Vector mean_xi = xi.colwise().mean().transpose();
    const Vector mean_zeta = zeta.colwise().mean().transpose();
    return a_part + mean_xi.dot(b * mean_zeta);
  };

  QuadraticFormReport report;
  for (const auto& g : basis) report.basis_labels.push_back(g.label);
  report.gram.resize(k, k);
  report.raw_diagonal.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    report.raw_diagonal[j] = bilinear(j, j);
    report.gram(j, j) = report.raw_diagonal[j];
    for (Eigen::Index l = j + 1; l < k; ++l) {
      const double sym = 0.5 * (bilinear(j, l) + bilinear(l, j));
      report.gram(j, l) = sym;
      report.gram(l, j) = sym;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(report.gram);
  report.max_eigenvalue = es.eigenvalues().maxCoeff();
  report.tol = tol;
  report.pass = report.max_eigenvalue <= tol;
  return report;
}

QuadraticFormReport quadratic_form(const Matrix& a, const Matrix& b,
                                   const EmpiricalMeasure& m_hat,
                                   const std::vector<TestGradient>& basis) {
  return quadratic_form(a, b, m_hat, basis, default_criterion_tolerance(a, b));
}

nlohmann::json SpectralReport::to_json() const {
  nlohmann::json j;
  j["matrix"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) row.push_back(matrix(r, c));
    j["matrix"].push_back(std::move(row));
  }
  j["eigenvalues"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    j["eigenvalues"].push_back(
        {{"re", eigenvalues[i].real()}, {"im", eigenvalues[i].imag()}});
  }
  j["hurwitz"] = hurwitz;
  return j;
}

SpectralReport mean_dynamics_matrix(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("mean dynamics needs square A, B of equal size");
  }
  SpectralReport report;
  report.matrix = a + b;
  Eigen::EigenSolver<Matrix> es(report.matrix);
  report.eigenvalues = es.eigenvalues();
  report.hurwitz = (report.eigenvalues.real().array() < 0.0).all();
  return report;
}

}  // namespace meanfield
