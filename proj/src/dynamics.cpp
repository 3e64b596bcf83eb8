#include "meanfield/dynamics.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "meanfield/measure_io.hpp"
#include "meanfield/transport.hpp"

namespace meanfield {

namespace {

constexpr double kBlowUpGuard = 1e12;

void check_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument(std::string(name) + " must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(name) + " has non-finite entries");
  }
}

}  // namespace

VectorFieldSpec VectorFieldSpec::linear(Matrix a, Matrix b) {
  check_square(a, "A");
  check_square(b, "B");
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("A and B must have the same dimension");
  }
  VectorFieldSpec spec;
  spec.kind = Kind::linear;
  spec.dim = a.rows();
  spec.A = std::move(a);
  spec.B = std::move(b);
  return spec;
}

VectorFieldSpec VectorFieldSpec::gradient_flow(double lambda, Eigen::Index dim) {
  if (lambda < 0.0 || dim < 1) {
    throw std::invalid_argument("gradient flow needs lambda >= 0 and dim >= 1");
  }
  VectorFieldSpec spec;
  spec.kind = Kind::gradient_flow;
  spec.dim = dim;
  spec.lambda = lambda;
  return spec;
}

VectorFieldSpec VectorFieldSpec::custom(
    Eigen::Index dim,
    std::function<Vector(const Vector&, const EmpiricalMeasure&)> fn) {
  if (dim < 1 || !fn) {
    throw std::invalid_argument("custom field needs dim >= 1 and a callback");
  }
  VectorFieldSpec spec;
  spec.kind = Kind::custom;
  spec.dim = dim;
  spec.custom_fn = std::move(fn);
  return spec;
}

double VectorFieldSpec::growth_constant() const {
  switch (kind) {
    case Kind::linear:
      return std::max(spectral_norm(A), spectral_norm(B));
    case Kind::gradient_flow:
      return 1.0 + 2.0 * lambda;
    case Kind::custom:
      throw std::invalid_argument("growth constant unknown for custom fields");
  }
  return 0.0;
}

std::pair<Matrix, Matrix> VectorFieldSpec::affine_matrices() const {
  switch (kind) {
    case Kind::linear:
      return {A, B};
    case Kind::gradient_flow: {
      Matrix a = -(1.0 + 2.0 * lambda) * Matrix::Identity(dim, dim);
      Matrix b = 2.0 * lambda * Matrix::Identity(dim, dim);
      return {std::move(a), std::move(b)};
    }
    case Kind::custom:
      throw std::invalid_argument("custom fields have no affine representation");
  }
  return {};
}

Vector evaluate_field(const VectorFieldSpec& spec, const Vector& x,
                      const EmpiricalMeasure& m) {
  if (x.size() != spec.dim || m.dimension() != spec.dim) {
    throw std::invalid_argument("field evaluation dimension mismatch");
  }
  switch (spec.kind) {
    case VectorFieldSpec::Kind::linear:
      return spec.A * x + spec.B * m.mean();
    case VectorFieldSpec::Kind::gradient_flow:
      return -(1.0 + 2.0 * spec.lambda) * x + 2.0 * spec.lambda * m.mean();
    case VectorFieldSpec::Kind::custom: {
      Vector v = spec.custom_fn(x, m);
      if (v.size() != spec.dim || !v.allFinite()) {
        throw std::domain_error("custom field returned an invalid value");
      }
      return v;
    }
  }
  return Vector();
}

namespace {

/// Field evaluated on a whole cloud at once; the interaction statistics
/// (the mean) are computed once per call.
Matrix field_on_cloud(const VectorFieldSpec& spec, const Matrix& pts) {
  const Eigen::Index n = pts.rows();
  Matrix out(n, pts.cols());
  switch (spec.kind) {
    case VectorFieldSpec::Kind::linear: {
      const Vector coupling = spec.B * pts.colwise().mean().transpose();
      out = pts * spec.A.transpose();
      out.rowwise() += coupling.transpose();
      return out;
    }
    case VectorFieldSpec::Kind::gradient_flow: {
      const Vector mean = pts.colwise().mean().transpose();
      out = -(1.0 + 2.0 * spec.lambda) * pts;
      out.rowwise() += (2.0 * spec.lambda * mean).transpose();
      return out;
    }
    case VectorFieldSpec::Kind::custom: {
      const EmpiricalMeasure m = EmpiricalMeasure::from_matrix(pts);
      for (Eigen::Index i = 0; i < n; ++i) {
        out.row(i) =
            evaluate_field(spec, pts.row(i).transpose(), m).transpose();
      }
      return out;
    }
  }
  return out;
}

void guard_state(const Matrix& pts, double t) {
  if (!pts.allFinite() || pts.cwiseAbs().maxCoeff() > kBlowUpGuard) {
    std::ostringstream msg;
    msg << "state blow-up at t = " << t;
    throw BlowUpError(t, msg.str());
  }
}

}  // namespace

Matrix evaluate_field_cloud(const VectorFieldSpec& spec,
                            const EmpiricalMeasure& m) {
  if (m.dimension() != spec.dim) {
    throw std::invalid_argument("field evaluation dimension mismatch");
  }
  return field_on_cloud(spec, m.points());
}

TrajectoryEnsemble integrate_ensemble(const VectorFieldSpec& spec,
                                      const EmpiricalMeasure& m0, double T,
                                      double dt, Integrator method,
                                      int snapshot_stride) {
  if (!(T > 0.0) || !(dt > 0.0) || dt > T * (1.0 + 1e-12)) {
    throw std::invalid_argument("integration needs 0 < dt <= T");
  }
  if (m0.dimension() != spec.dim) {
    throw std::invalid_argument("initial cloud dimension does not match field");
  }
  if (snapshot_stride < 1) {
    throw std::invalid_argument("snapshot stride must be >= 1");
  }

  const auto steps_d = std::ceil(T / dt - 1e-9);
  const long steps = std::max(1L, static_cast<long>(steps_d));

  TrajectoryEnsemble traj;
  traj.times.push_back(0.0);
  traj.states.push_back(m0);

  Matrix x = m0.points();
  double t = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double h = (k == steps - 1) ? T - t : dt;
    if (method == Integrator::euler) {
      x += h * field_on_cloud(spec, x);
    } else {
      const Matrix k1 = field_on_cloud(spec, x);
      const Matrix k2 = field_on_cloud(spec, x + (0.5 * h) * k1);
      const Matrix k3 = field_on_cloud(spec, x + (0.5 * h) * k2);
      const Matrix k4 = field_on_cloud(spec, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    t = (k == steps - 1) ? T : t + h;
    guard_state(x, t);
    if ((k + 1) % snapshot_stride == 0 || k == steps - 1) {
      traj.times.push_back(t);
      traj.states.push_back(EmpiricalMeasure::from_matrix(x));
    }
  }
  return traj;
}

std::vector<TestGradient> default_residual_basis(Eigen::Index d) {
  std::vector<TestGradient> basis;
  for (Eigen::Index j = 0; j < d; ++j) {
    basis.push_back({"grad(x_" + std::to_string(j + 1) + ")",
                     [d, j](const Vector&) {
                       Vector g = Vector::Zero(d);
                       g[j] = 1.0;
                       return g;
                     }});
  }
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
  basis.push_back({"grad(|x|^2)", [](const Vector& x) { return Vector(2.0 * x); }});
  return basis;
}

double equilibrium_residual(const VectorFieldSpec& spec,
                            const EmpiricalMeasure& m_hat,
                            const std::vector<TestGradient>& basis) {
  if (basis.empty()) {
    throw std::invalid_argument("equilibrium residual needs a non-empty basis");
  }
  if (m_hat.dimension() != spec.dim) {
    throw std::invalid_argument("equilibrium residual dimension mismatch");
  }
  const Matrix f = field_on_cloud(spec, m_hat.points());
  double worst = 0.0;
  for (const auto& g : basis) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m_hat.size(); ++i) {
      acc += g.eval(m_hat.point(i)).dot(f.row(i).transpose());
    }
    worst = std::max(worst, std::abs(acc / static_cast<double>(m_hat.size())));
  }
  return worst;
}

GrowthBoundReport check_growth_bounds(const TrajectoryEnsemble& traj,
                                      const VectorFieldSpec& spec) {
  GrowthBoundReport report;
  report.c1 = spec.growth_constant();
  report.alpha = moment_root(traj.initial(), 2.0);
  const double T = traj.times.back();
  report.moment_bound =
      (report.c1 * T + report.alpha) * std::exp(2.0 * report.c1 * T);
  report.lipschitz_bound = report.c1 * std::exp(report.c1 * T) *
                           (1.0 + 2.0 * report.moment_bound);

  for (const auto& state : traj.states) {
    report.max_moment = std::max(report.max_moment, moment_root(state, 2.0));
  }

  // Sampled pairs: all consecutive, plus strided long-range pairs from the
  // start, capped so the assignment solves stay cheap.
  const std::size_t K = traj.states.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k + 1 < K; ++k) pairs.emplace_back(k, k + 1);
  const std::size_t stride = std::max<std::size_t>(1, K / 8);
  for (std::size_t k = stride; k < K; k += stride) pairs.emplace_back(0, k);
  if (K >= 2) pairs.emplace_back(0, K - 1);

  for (const auto& [s, r] : pairs) {
    const double gap = traj.times[r] - traj.times[s];
    if (gap <= 0.0) continue;
    const double w = wasserstein(traj.states[s], traj.states[r], 2.0).cost;
    report.max_rate = std::max(report.max_rate, w / gap);
  }

  report.moment_margin = report.moment_bound - report.max_moment;
  report.rate_margin = report.lipschitz_bound - report.max_rate;
  report.within_bounds =
      report.moment_margin >= 0.0 && report.rate_margin >= 0.0;
  return report;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryEnsemble& traj) {
  const Eigen::Index d = traj.initial().dimension();
  out << "t,particle_id";
  for (Eigen::Index j = 0; j < d; ++j) out << ",x_" << (j + 1);
  out << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& pts = traj.states[k].points();
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      out << format_double(traj.times[k]) << ',' << i;
      for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(pts(i, j));
      out << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const TrajectoryEnsemble& traj,
                       const std::vector<std::string>& extra_names,
                       const std::vector<std::vector<double>>& extra_cols) {
  const Eigen::Index d = traj.initial().dimension();
  out << "t,sigma2";
  for (Eigen::Index j = 0; j < d; ++j) out << ",mean_" << (j + 1);
  for (const auto& name : extra_names) out << ',' << name;
  out << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out << format_double(traj.times[k]) << ','
        << format_double(moment_root(traj.states[k], 2.0));
    const Vector mean = traj.states[k].mean();
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(mean[j]);
    for (const auto& col : extra_cols) out << ',' << format_double(col.at(k));
    out << '\n';
  }
}

}  // namespace meanfield
