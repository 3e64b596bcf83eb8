#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "meanfield/measure_io.hpp"
#include "meanfield/measures.hpp"
#include "test_helpers.hpp"

using namespace meanfield;
using meanfield::testing::cloud1d;
using meanfield::testing::random_cloud;

namespace {
Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}
}  // namespace

TEST_CASE("construction from points") {
  const auto dirac = empirical_from_points({vec1(0.0)});
  CHECK(dirac.size() == 1);
  CHECK(dirac.dimension() == 1);

  const auto cloud = empirical_from_points(
      {Vector::Zero(2), (Vector(2) << 1.0, 1.0).finished()});
  CHECK(cloud.size() == 2);
  CHECK(cloud.dimension() == 2);

  CHECK_THROWS_AS(empirical_from_points({}), std::invalid_argument);
  CHECK_THROWS_AS(
      empirical_from_points({vec1(1.0),
                             vec1(std::numeric_limits<double>::quiet_NaN())}),
      std::invalid_argument);
  CHECK_THROWS_AS(empirical_from_points({vec1(1.0), Vector::Zero(2)}),
                  std::invalid_argument);
}

TEST_CASE("moment root") {
  CHECK(moment_root(cloud1d({0.0}), 2.0) == 0.0);
  CHECK(moment_root(cloud1d({-1.0, 1.0}), 2.0) == doctest::Approx(1.0));
  CHECK(moment_root(cloud1d({0.0, 2.0}), 2.0) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(moment_root(cloud1d({1.0}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(moment_root(cloud1d({1.0}), 0.5), std::invalid_argument);
}

TEST_CASE("push forward") {
  const auto dirac = cloud1d({0.0});
  const auto shifted = push_forward(dirac, [](const Vector& x) {
    return Vector(x.array() + 1.0);
  });
  CHECK(shifted.points()(0, 0) == 1.0);

  const auto m = cloud1d({0.0, 2.0});
  const auto same = push_forward(m, [](const Vector& x) { return x; });
  CHECK(same == m);  // bitwise

  const auto doubled = push_forward(m, [](const Vector& x) { return Vector(2.0 * x); });
  CHECK(doubled.points()(0, 0) == 0.0);
  CHECK(doubled.points()(1, 0) == 4.0);

  CHECK_THROWS_AS(push_forward(m,
                               [](const Vector& x) {
                                 return Vector(x.array() / 0.0);
                               }),
                  std::domain_error);
}

TEST_CASE("perturb") {
  const auto m = cloud1d({0.0, 2.0});
  PerturbationField b{(Matrix(2, 1) << 1.0, -1.0).finished()};

  const auto unchanged = perturb(m, b, 0.0);
  CHECK(unchanged == m);

  const auto dirac = cloud1d({0.0});
  PerturbationField unit{(Matrix(1, 1) << 1.0).finished()};
  CHECK(perturb(dirac, unit, 2.0).points()(0, 0) == 2.0);

  const auto moved = perturb(m, b, 0.5);
  CHECK(moved.points()(0, 0) == 0.5);
  CHECK(moved.points()(1, 0) == 1.5);

  PerturbationField wrong{Matrix::Zero(3, 1)};
  CHECK_THROWS_AS(perturb(m, wrong, 1.0), std::invalid_argument);
}

TEST_CASE("moment scaling under dilation") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = random_cloud(rng, 1 + static_cast<Eigen::Index>(rng.next_raw() % 16), 2);
    const double c = 3.0 * rng.normal();
    const double p = 1.5 + 2.0 * rng.uniform();
    const auto scaled = push_forward(m, [c](const Vector& x) { return Vector(c * x); });
    CHECK(moment_root(scaled, p) ==
          doctest::Approx(std::abs(c) * moment_root(m, p)).epsilon(1e-12));
  }
}

TEST_CASE("perturbation moment bound") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_raw() % 20);
    const auto m = random_cloud(rng, n, 3);
    Matrix bvals(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) bvals(i, j) = rng.normal();
    }
    const PerturbationField b{bvals};
    const double tau = 2.0 * rng.uniform();
    const double p = 1.5 + 2.0 * rng.uniform();
    CHECK(moment_root(perturb(m, b, tau), p) <=
          moment_root(m, p) + tau * b.lp_norm(p) + 1e-12);
  }
}

TEST_CASE("cloud CSV round trip and validation") {
  Rng rng(23);
  const auto m = random_cloud(rng, 17, 3);
  std::stringstream ss;
  write_cloud_csv(ss, m);
  const auto back = read_cloud_csv(ss);
  CHECK(back == m);  // 17 significant digits round-trip exactly

  std::stringstream bad_dims("1.0,2.0\n3.0\n");
  CHECK_THROWS_AS(read_cloud_csv(bad_dims), std::invalid_argument);
  std::stringstream bad_value("1.0,nan\n");
  CHECK_THROWS_AS(read_cloud_csv(bad_value), std::invalid_argument);
  std::stringstream empty("");
  CHECK_THROWS_AS(read_cloud_csv(empty), std::invalid_argument);
}

TEST_CASE("cloud JSON round trip and validation") {
  Rng rng(29);
  const auto m = random_cloud(rng, 9, 2);
  std::stringstream ss;
  write_cloud_json(ss, m);
  const auto back = read_cloud_json(ss);
  CHECK(back == m);

  std::stringstream not_array("{\"a\": 1}");
  CHECK_THROWS_AS(read_cloud_json(not_array), std::invalid_argument);
  std::stringstream ragged("[[1.0, 2.0], [3.0]]");
  CHECK_THROWS_AS(read_cloud_json(ragged), std::invalid_argument);
  std::stringstream non_numeric("[[1.0, \"x\"]]");
  CHECK_THROWS_AS(read_cloud_json(non_numeric), std::invalid_argument);
}
