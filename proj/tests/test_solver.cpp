#include <doctest.h>

#include <cmath>
#include <random>

#include "mvu/energy.hpp"
#include "mvu/errors.hpp"
#include "mvu/graph.hpp"
#include "mvu/manifolds.hpp"
#include "mvu/solver.hpp"

using namespace mvu;

namespace {

Points rows2(std::initializer_list<std::pair<double, double>> pts) {
  Points p(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::Index k = 0;
  for (auto [x, y] : pts) {
    p(k, 0) = x;
    p(k, 1) = y;
    ++k;
  }
  return p;
}

// `centered`: the gram form reports the gradient projected onto zero column
// sums, so the difference quotients get the same projection.
double finite_difference_error(AugmentedLagrangian& al, const Points& y, bool centered) {
  Points grad;
  al.value_and_gradient(y, grad);
  Points fd(y.rows(), y.cols());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      Points up = y, down = y;
      up(i, c) += h;
      down(i, c) -= h;
      fd(i, c) = (al.value(up) - al.value(down)) / (2 * h);
    }
  }
  if (centered) fd.rowwise() -= fd.colwise().mean();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < fd.size(); ++k)
    worst = std::max(worst, std::abs(fd.data()[k] - grad.data()[k]) / std::max(1.0, std::abs(fd.data()[k])));
  return worst;
}

}  // namespace

TEST_CASE("backend names") {
  CHECK(parse_backend("coordinate") == Backend::CoordinateAscent);
  CHECK(parse_backend("gram") == Backend::GramLowRank);
  CHECK(to_string(Backend::GramLowRank) == "gram");
  CHECK_THROWS_AS(parse_backend("sdp"), ValidationError);
}

TEST_CASE("two points: energy is the squared edge") {
  const Points x = rows2({{0, 0}, {0.3, 0}});
  const NeighborGraph g = build_graph(x, 0.5);
  const Solution s = solve_mvu(x, g);
  CHECK(s.embedding.converged);
  CHECK(s.embedding.energy == doctest::Approx(0.09).epsilon(1e-6));
  CHECK(s.embedding.centered);
}

TEST_CASE("three collinear points straighten to the full chain") {
  // points bent at the middle; unfolding straightens the path of two r-edges
  const double r = 0.1;
  const Points x = rows2({{0, 0}, {r, 0}, {r + r * std::cos(1.2), r * std::sin(1.2)}});
  const NeighborGraph g = build_graph(x, r * (1 + 1e-12));
  REQUIRE(g.edges.size() == 2);
  for (const Backend b : {Backend::CoordinateAscent, Backend::GramLowRank}) {
    SolverConfig cfg;
    cfg.backend = b;
    const Solution s = solve(x, g, cfg);
    // distances r, r, 2r: mean over the three pairs of squared lengths, (1+1+4)/3 r^2
    CHECK(s.embedding.energy == doctest::Approx(2.0 * r * r).epsilon(1e-5));
    CHECK(s.embedding.max_violation <= 1e-6 * r);
  }
}

TEST_CASE("augmented Lagrangian gradient matches finite differences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Points x(5, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    const NeighborGraph graph = build_graph(x, 10.0);
    AugmentedLagrangian al(5, graph.edges, 1.0);
    al.set_penalty(3.0);
    Points y = x;
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += 0.3 * g(rng);
    al.update_multipliers(y);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += 0.1 * g(rng);
    CHECK(finite_difference_error(al, y, false) < 1e-5);
    al.set_gram_form(true);
    CHECK(finite_difference_error(al, y, true) < 1e-5);
  }
}

TEST_CASE("multipliers stay non-negative and the KKT violation vanishes at a feasible stationary point") {
  const Points x = rows2({{0, 0}, {1, 0}});
  const NeighborGraph g = build_graph(x, 2.0);
  AugmentedLagrangian al(2, g.edges, 1.0);
  Points y = rows2({{0, 0}, {0.5, 0}});
  al.update_multipliers(y);
  for (double l : al.multipliers()) CHECK(l >= 0.0);
  CHECK(al.kkt_violation(x) >= 0.0);
}

TEST_CASE("convex sets: identity is optimal and the solver finds it") {
  for (const auto& name : {"interval", "disk"}) {
    const auto model = make_model(name);
    const std::size_t n = 120;
    const Points x = sample(model, n, 3).points;
    const NeighborGraph g = build_graph(x, radius_schedule(n, model.intrinsic_dim(), 2.0));
    REQUIRE(g.connected);
    SolverConfig cfg;
    cfg.restarts = 1;
    const Solution s = solve_mvu(x, g, cfg);
    CHECK(s.embedding.converged);
    CHECK(s.embedding.max_violation <= 1e-6 * g.r);
    CHECK(std::abs(s.embedding.energy - energy(x)) <= 1e-4 * energy(x));
    const auto feas = feasibility_report(x, g, s.embedding.y);
    CHECK(feas.edge_count == g.edges.size());
    CHECK(feas.max_violation <= 1e-6 * g.r);
  }
}

TEST_CASE("feasibility of y = x and infeasibility of y = 2x") {
  const Points x = sample(make_model("disk"), 80, 2).points;
  const NeighborGraph g = build_graph(x, 0.4);
  const auto same = feasibility_report(x, g, x);
  CHECK(same.max_violation == 0.0);
  CHECK(same.tight_edges == g.edges.size());
  const auto twice = feasibility_report(x, g, Points(2.0 * x));
  double longest = 0.0;
  for (const auto& e : g.edges) longest = std::max(longest, e.length);
  CHECK(twice.max_violation == doctest::Approx(longest));
  CHECK(twice.tight_edges == 0);
}

TEST_CASE("an arc unfolds beyond its chord") {
  const auto arc = make_model("arc", {{"radius", "1"}, {"length", "3"}});
  const std::size_t n = 150;
  const Points x = sample(arc, n, 4).points;
  const NeighborGraph g = build_graph(x, radius_schedule(n, 1, 3.0));
  REQUIRE(g.connected);
  const Solution s = solve_mvu(x, g);
  CHECK(s.embedding.energy > 1.2 * energy(x));
  // unfolding pulls some edges taut (on r-graphs with many neighbours per point
  // it is a minority, roughly 10-20% here)
  std::vector<Edge> tight;
  for (const auto& e : g.edges)
    if (std::abs((s.embedding.y.row(e.i) - s.embedding.y.row(e.j)).norm() - e.length) < 1e-6 * g.r) tight.push_back(e);
  CHECK(tight.size() == feasibility_report(x, g, s.embedding.y).tight_edges);
  CHECK(tight.size() >= n / 2);
  // and the energy never exceeds the largest squared graph distance
  const Eigen::MatrixXd geo = graph_geodesics(g);
  CHECK(s.embedding.energy <= geo.maxCoeff() * geo.maxCoeff() + 1e-9);
  // close to the unrolled arc, which itself stretches the short chords slightly
  const Points flat = arc.isometry(x);
  CHECK(std::abs(s.embedding.energy - energy(flat)) <= 0.01 * energy(flat));
  CHECK(s.embedding.max_violation <= 1e-6 * g.r);
}

TEST_CASE("backends agree and rank caps are nested") {
  const auto model = make_model("disk");
  const std::size_t n = 100;
  const Points x = sample(model, n, 6).points;
  const NeighborGraph g = build_graph(x, radius_schedule(n, 2, 2.0));
  REQUIRE(g.connected);
  SolverConfig cfg;
  const Solution coord = solve(x, g, cfg);
  cfg.backend = Backend::GramLowRank;
  const Solution gram = solve(x, g, cfg);
  CHECK(std::abs(coord.embedding.energy - gram.embedding.energy) <= 1e-4 * coord.embedding.energy);
  cfg.rank_cap = 1;
  const Solution one = solve(x, g, cfg);
  CHECK(one.embedding.y.cols() == 1);
  CHECK(one.embedding.max_violation <= 1e-6 * g.r);
  CHECK(one.embedding.energy < gram.embedding.energy);
}

TEST_CASE("invariances") {
  const auto model = make_model("arc");
  const std::size_t n = 80;
  const Points x = sample(model, n, 8).points;
  const NeighborGraph g = build_graph(x, radius_schedule(n, 1, 3.0));
  REQUIRE(g.connected);
  const Solution base = solve_mvu(x, g);

  // scaling x by c scales the optimal energy by c^2
  const Points x3 = 3.0 * x;
  const Solution scaled = solve_mvu(x3, build_graph(x3, 3.0 * g.r));
  CHECK(scaled.embedding.energy == doctest::Approx(9.0 * base.embedding.energy).epsilon(1e-5));

  // a rigid motion of x leaves the canonical embedding unchanged
  Eigen::Matrix2d rot;
  rot << std::cos(1.1), -std::sin(1.1), std::sin(1.1), std::cos(1.1);
  Points moved = x * rot;
  moved.rowwise() += Eigen::RowVector2d(5.0, -2.0);
  const Solution m = solve_mvu(moved, build_graph(moved, g.r));
  CHECK(m.embedding.energy == doctest::Approx(base.embedding.energy).epsilon(1e-5));
  CHECK((m.embedding.y - base.embedding.y).cwiseAbs().maxCoeff() < 1e-3 * std::sqrt(base.embedding.energy));
}

TEST_CASE("trace invariants and determinism") {
  const Points x = sample(make_model("interval"), 60, 1).points;
  const NeighborGraph g = build_graph(x, radius_schedule(60, 1, 2.0));
  SolverConfig cfg;
  cfg.restarts = 2;
  cfg.seed = 77;
  const Solution a = solve(x, g, cfg);
  const Solution b = solve(x, g, cfg);
  CHECK(a.embedding.y == b.embedding.y);
  CHECK(a.trace.csv() == b.trace.csv());
  CHECK(a.trace.start_energies.size() == 3);
  REQUIRE_FALSE(a.trace.records.empty());
  for (std::size_t k = 1; k < a.trace.records.size(); ++k) {
    CHECK(a.trace.records[k].iter > a.trace.records[k - 1].iter);
    CHECK(a.trace.records[k].penalty >= a.trace.records[k - 1].penalty);
  }
  CHECK(a.trace.csv().rfind("iter,energy,max_violation,penalty,steps\n", 0) == 0);
  CHECK(a.trace.records.back().max_violation <= 1e-6 * g.r);
}

TEST_CASE("disconnected graphs and bad configs are rejected") {
  const Points x = rows2({{0, 0}, {0.1, 0}, {1, 0}});
  const NeighborGraph g = build_graph(x, 0.2);
  CHECK_THROWS_AS(solve_mvu(x, g), DisconnectedGraph);
  const NeighborGraph ok = build_graph(x, 1.0);
  SolverConfig cfg;
  cfg.max_inner = 0;
  CHECK_THROWS_AS(solve_mvu(x, ok, cfg), ValidationError);
  cfg = {};
  cfg.feas_tol = -1;
  CHECK_THROWS_AS(solve_mvu(x, ok, cfg), ValidationError);
}

TEST_CASE("spectral coordinates") {
  // points on a line through the plane: one nonzero eigenvalue
  Points y(4, 2);
  y << 0, 0, 1, 1, 2, 2, 3, 3;
  const Coordinates c = extract_coordinates(y, 1);
  CHECK(c.coords.cols() == 1);
  CHECK(c.trace_fraction == doctest::Approx(1.0));
  CHECK(c.eigenvalues(0) == doctest::Approx(10.0));  // centered norms 4.5, 0.5, 0.5, 4.5
  CHECK(std::abs(c.coords(3, 0) - c.coords(0, 0)) == doctest::Approx(3.0 * std::sqrt(2.0)));
  CHECK_THROWS_AS(extract_coordinates(y, 2), ValidationError);
  CHECK_THROWS_AS(extract_coordinates(y, 3), ValidationError);
  CHECK_THROWS_AS(extract_coordinates(y, 0), ValidationError);

  const Points disk = sample(make_model("disk"), 50, 1).points;
  const Coordinates two = extract_coordinates(disk, 2);
  CHECK(two.trace_fraction == doctest::Approx(1.0));
  CHECK((two.coords * two.coords.transpose() - canonicalize(disk) * canonicalize(disk).transpose()).norm() < 1e-9);
}
