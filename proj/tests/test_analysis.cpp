#include <doctest.h>

#include <cmath>
#include <random>

#include "mvu/analysis.hpp"
#include "mvu/errors.hpp"
#include "mvu/graph.hpp"
#include "mvu/manifolds.hpp"
#include "mvu/solver.hpp"

using namespace mvu;

namespace {

Eigen::Matrix2d rotation(double t) {
  Eigen::Matrix2d r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

}  // namespace

TEST_CASE("Procrustes recovers rotations, reflections and translations") {
  const Points a = sample(make_model("rectangle"), 50, 1).points;
  Points b = a * rotation(0.9);
  b.rowwise() += Eigen::RowVector2d(1.0, -3.0);
  const Alignment fit = procrustes_align(a, b);
  CHECK(fit.max_residual < 1e-12);
  CHECK_FALSE(fit.reflection);
  CHECK_FALSE(fit.degenerate);

  Eigen::Matrix2d flip;
  flip << 1, 0, 0, -1;
  const Alignment mirrored = procrustes_align(a, Points(a * flip));
  CHECK(mirrored.max_residual < 1e-12);
  CHECK(mirrored.reflection);

  // narrower set padded with zeros
  const Points col = a.leftCols(1);
  Points lifted = Points::Zero(a.rows(), 2);
  lifted.col(1) = a.col(0);
  CHECK(procrustes_align(col, lifted).max_residual < 1e-12);

  const Points same = Points::Constant(5, 2, 1.0);
  CHECK(procrustes_align(same, same).degenerate);
  CHECK_THROWS_AS(procrustes_align(a, a.topRows(3)), ValidationError);
}

TEST_CASE("Procrustes residual under small noise") {
  const Points a = sample(make_model("disk"), 400, 2).points;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.01);
  Points b = a * rotation(-0.4);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] += g(rng);
  const Alignment fit = procrustes_align(a, b);
  // per-point noise has rms 0.01 * sqrt(2)
  CHECK(fit.rms_residual > 0.005);
  CHECK(fit.rms_residual < 0.02);
}

TEST_CASE("solution distance uses the reference isometry") {
  const auto arc = make_model("arc");
  const Points x = sample(arc, 60, 4).points;
  Points flat = arc.isometry(x);
  Points y = Points::Zero(x.rows(), 3);
  y.col(2) = flat.col(0);
  CHECK(solution_distance(y, arc, x) < 1e-10);
  CHECK(identity_recovery_error(x, x) < 1e-12);
  CHECK_THROWS_AS(solution_distance(x, make_model("circle"), sample(make_model("circle"), 10, 1).points), NoIsometry);
}

TEST_CASE("Lipschitz constant and interpolation margin") {
  Points y(3, 1);
  y << 0, 2, 3;
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 3, 1, 0, 2, 3, 2, 0;
  CHECK(empirical_lipschitz(y, d) == doctest::Approx(2.0));
  CHECK(interpolation_margin(y, d, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(interpolation_margin(y, d, 0.5, 3.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(empirical_lipschitz(y, Eigen::MatrixXd::Zero(2, 2)), ValidationError);
  CHECK_THROWS_AS(interpolation_margin(y, d, 0.1, 0.0), ValidationError);
}

TEST_CASE("recovery report on a solved interval") {
  const auto model = make_model("interval");
  const std::size_t n = 100;
  const PointCloud cloud = sample(model, n, 2);
  const NeighborGraph g = build_graph(cloud.points, radius_schedule(n, 1, 2.0));
  const Solution s = solve(cloud.points, g, SolverConfig{});
  const double eta = covering_radius(cloud, sample(model, 50 * n, 9));
  const RecoveryReport rep = recovery_report(model, cloud.points, g, s.embedding.y, eta, 1.0 / 6.0);
  REQUIRE(rep.procrustes_error);
  CHECK(*rep.procrustes_error < 1e-4);
  REQUIRE(rep.energy_gap);
  CHECK(*rep.energy_gap < 0.05);
  CHECK(*rep.lipschitz_oracle <= 1.0 + 1e-5);
  CHECK(*rep.lipschitz_graph <= 1.0 + 1e-5);
  CHECK(rep.interpolation_margin <= 1e-6);
  CHECK(rep.r == g.r);
}

TEST_CASE("U-statistic tail") {
  const auto interval = make_model("interval");
  const PointMap id = [](const Points& p) { return p; };
  const auto tail = ustat_tail_experiment(interval, id, 50, {0.0, 0.02, 0.05, 0.1, 0.5}, 1000, 3, 100000);
  CHECK(std::abs(tail.reference_energy - 1.0 / 6.0) < 4 * tail.reference_se);
  REQUIRE(tail.rows.size() == 5);
  for (std::size_t k = 0; k < tail.rows.size(); ++k) {
    CHECK(tail.rows[k].within);
    if (k > 0) CHECK(tail.rows[k].frequency <= tail.rows[k - 1].frequency);
  }
  CHECK(tail.rows[0].bound == doctest::Approx(2.0));
  CHECK(tail.rows[4].frequency == 0.0);
  CHECK_THROWS_AS(ustat_tail_experiment(interval, id, 50, {0.1}, 999, 3, 100000), ValidationError);
  CHECK_THROWS_AS(ustat_tail_experiment(interval, id, 50, {-0.1}, 1000, 3, 100000), ValidationError);
}

TEST_CASE("flatness") {
  Points y(4, 3);
  y << 0, 0, 0, 1, 0, 0, 2, 0, 0, 3, 0, 0;
  CHECK(flatness_report(y, 1) == doctest::Approx(1.0));
  const Points disk = sample(make_model("disk"), 500, 1).points;
  const double f1 = flatness_report(disk, 1);
  CHECK(f1 > 0.45);
  CHECK(f1 < 0.6);
  CHECK(flatness_report(disk, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(flatness_report(disk, 0), ValidationError);
}
