#include "meanfield/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace meanfield {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense square assignment problem, shortest-augmenting-path formulation
/// (Jonker-Volgenant family): one Dijkstra-style search per row over reduced
/// costs, dual updates, then augmentation. O(n^3) worst case.
/// `cost` is row-major n x n. Returns col4row: row i is assigned column
/// col4row[i].
std::vector<Eigen::Index> solve_assignment(const std::vector<double>& cost,
                                           Eigen::Index n) {
  std::vector<double> u(n, 0.0);
  std::vector<double> v(n, 0.0);
  std::vector<double> shortest(n);
  std::vector<Eigen::Index> path(n);
  std::vector<Eigen::Index> col4row(n, -1);
  std::vector<Eigen::Index> row4col(n, -1);
  std::vector<Eigen::Index> remaining(n);
  std::vector<char> scanned_rows(n);
  std::vector<char> scanned_cols(n);

  for (Eigen::Index cur_row = 0; cur_row < n; ++cur_row) {
    std::fill(scanned_rows.begin(), scanned_rows.end(), 0);
    std::fill(scanned_cols.begin(), scanned_cols.end(), 0);
    std::fill(shortest.begin(), shortest.end(), kInf);
    // Reverse fill keeps the identity assignment for constant cost matrices.
    for (Eigen::Index k = 0; k < n; ++k) remaining[k] = n - k - 1;
    Eigen::Index num_remaining = n;

    double min_val = 0.0;
    Eigen::Index i = cur_row;
    Eigen::Index sink = -1;
    while (sink == -1) {
      scanned_rows[i] = 1;
      const double* row = cost.data() + i * n;
      double lowest = kInf;
      Eigen::Index index_lowest = -1;
      for (Eigen::Index idx = 0; idx < num_remaining; ++idx) {
        const Eigen::Index j = remaining[idx];
        const double reduced = min_val + row[j] - u[i] - v[j];
        if (reduced < shortest[j]) {
          path[j] = i;
          shortest[j] = reduced;
        }
        // Prefer a free column among equal path costs so ties terminate.
        if (shortest[j] < lowest ||
            (shortest[j] == lowest && row4col[j] == -1)) {
          lowest = shortest[j];
          index_lowest = idx;
        }
      }
      min_val = lowest;
      const Eigen::Index j = remaining[index_lowest];
      if (row4col[j] == -1) {
        sink = j;
      } else {
        i = row4col[j];
      }
      scanned_cols[j] = 1;
      remaining[index_lowest] = remaining[--num_remaining];
    }

    u[cur_row] += min_val;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (scanned_rows[r] && r != cur_row) {
        u[r] += min_val - shortest[col4row[r]];
      }
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      if (scanned_cols[c]) {
        v[c] -= min_val - shortest[c];
      }
    }

    Eigen::Index j = sink;
    while (true) {
      const Eigen::Index r = path[j];
      row4col[j] = r;
      std::swap(col4row[r], j);
      if (r == cur_row) break;
    }
  }
  return col4row;
}

void check_compatible(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.size() != nu.size()) {
    throw std::invalid_argument("transport requires equal particle counts");
  }
  if (mu.dimension() != nu.dimension()) {
    throw std::invalid_argument("transport requires equal dimensions");
  }
}

double finish_cost(double total, Eigen::Index n, double p) {
  const double mean = total / static_cast<double>(n);
  return p == 2.0 ? std::sqrt(mean) : std::pow(mean, 1.0 / p);
}

}  // namespace

double ground_cost(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y,
                   double p) {
  const double sq = (x - y).squaredNorm();
  return p == 2.0 ? sq : std::pow(sq, 0.5 * p);
}

double TransportPlan::cost_from_assignment() const {
  const Eigen::Index n = source.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += ground_cost(source.points().row(i),
                         target.points().row(assignment[i]), p);
  }
  return finish_cost(total, n, p);
}

nlohmann::json TransportPlan::to_json() const {
  nlohmann::json j;
  j["assignment"] = assignment;
  j["cost"] = cost;
  j["p"] = p;
  return j;
}

double SupergradientField::l2_norm() const {
  return std::sqrt(values.squaredNorm() / static_cast<double>(values.rows()));
}

double SupergradientField::pair(const PerturbationField& b) const {
  if (b.values.rows() != values.rows() || b.values.cols() != values.cols()) {
    throw std::invalid_argument("field size mismatch in pairing");
  }
  return values.cwiseProduct(b.values).sum() / static_cast<double>(values.rows());
}

TransportPlan wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                          double p) {
  check_compatible(mu, nu);
  if (!(p > 1.0)) {
    throw std::invalid_argument("wasserstein requires p > 1");
  }
  const Eigen::Index n = mu.size();
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double* row = cost.data() + i * n;
    const auto xi = mu.points().row(i);
    if (p == 2.0) {
      for (Eigen::Index j = 0; j < n; ++j) {
        row[j] = (xi - nu.points().row(j)).squaredNorm();
      }
    } else {
      for (Eigen::Index j = 0; j < n; ++j) {
        row[j] = std::pow((xi - nu.points().row(j)).squaredNorm(), 0.5 * p);
      }
    }
  }
  TransportPlan plan{mu, nu, solve_assignment(cost, n), 0.0, p};
  plan.cost = plan.cost_from_assignment();
  return plan;
}

TransportPlan optimal_plan_bruteforce(const EmpiricalMeasure& mu,
                                      const EmpiricalMeasure& nu, double p) {
  check_compatible(mu, nu);
  const Eigen::Index n = mu.size();
  if (n > 8) {
    throw std::invalid_argument("brute-force oracle is limited to n <= 8");
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Eigen::Index> best = perm;
  double best_total = kInf;
  do {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      total += ground_cost(mu.points().row(i),
                           nu.points().row(perm[static_cast<std::size_t>(i)]), p);
    }
    // Strict comparison keeps the lexicographically smallest minimizer.
    if (total < best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  TransportPlan plan{mu, nu, std::move(best), 0.0, p};
  plan.cost = plan.cost_from_assignment();
  return plan;
}

SupergradientField barycentric_projection(const TransportPlan& plan) {
  if (plan.p != 2.0) {
    throw std::invalid_argument("barycentric projection requires a p = 2 plan");
  }
  const Eigen::Index n = plan.source.size();
  Matrix values(n, plan.source.dimension());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = plan.assignment[i];
    values.row(j) = plan.target.points().row(j) - plan.source.points().row(i);
  }
  return SupergradientField{std::move(values)};
}

namespace {

/// Symmetric PSD square root with eigenvalue clipping at zero.
Matrix psd_sqrt(const Matrix& c, double tol_scale) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  Vector lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -1e-12 * tol_scale) {
      throw std::invalid_argument("covariance is not positive semi-definite");
    }
    lam[i] = lam[i] > 0.0 ? std::sqrt(lam[i]) : 0.0;
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

void check_symmetric(const Matrix& c) {
  if (c.rows() != c.cols()) {
    throw std::invalid_argument("covariance must be square");
  }
  const double scale = 1.0 + c.cwiseAbs().maxCoeff();
  if (((c - c.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * scale) {
    throw std::invalid_argument("covariance must be symmetric");
  }
}

}  // namespace

double gaussian_w2(const Vector& mean1, const Matrix& cov1, const Vector& mean2,
                   const Matrix& cov2) {
  if (mean1.size() != mean2.size() || cov1.rows() != mean1.size() ||
      cov2.rows() != mean2.size()) {
    throw std::invalid_argument("gaussian_w2 dimension mismatch");
  }
  check_symmetric(cov1);
  check_symmetric(cov2);
  const double scale =
      1.0 + std::max(cov1.cwiseAbs().maxCoeff(), cov2.cwiseAbs().maxCoeff());
  const Matrix root2 = psd_sqrt(cov2, scale);
  Matrix inner = root2 * cov1 * root2;
  inner = 0.5 * (inner + inner.transpose());
  const Matrix cross = psd_sqrt(inner, scale * scale);
  double bures = cov1.trace() + cov2.trace() - 2.0 * cross.trace();
  if (bures < 0.0) bures = 0.0;  // round-off
  return std::sqrt((mean1 - mean2).squaredNorm() + bures);
}

double min_swap_increase(const TransportPlan& plan) {
  const Eigen::Index n = plan.source.size();
  double best = kInf;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = plan.source.points().row(i);
    const auto yi = plan.target.points().row(plan.assignment[i]);
    const double cii = ground_cost(xi, yi, plan.p);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto xj = plan.source.points().row(j);
      const auto yj = plan.target.points().row(plan.assignment[j]);
      const double delta = ground_cost(xi, yj, plan.p) +
                           ground_cost(xj, yi, plan.p) - cii -
                           ground_cost(xj, yj, plan.p);
      if (delta < best) best = delta;
    }
  }
  return best;
}

bool assignment_near_tie(const TransportPlan& plan, double slack) {
  if (plan.source.size() < 2) return false;
  const double mean_ground =
      plan.p == 2.0 ? plan.cost * plan.cost : std::pow(plan.cost, plan.p);
  return min_swap_increase(plan) <= slack * (1.0 + mean_ground);
}

}  // namespace meanfield
