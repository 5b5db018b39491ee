#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "mvu/errors.hpp"
#include "mvu/graph.hpp"
#include "mvu/manifolds.hpp"

using namespace mvu;

namespace {

Points line(std::initializer_list<double> xs) {
  Points p(static_cast<Eigen::Index>(xs.size()), 2);
  Eigen::Index k = 0;
  for (double x : xs) {
    p(k, 0) = x;
    p(k, 1) = 0.0;
    ++k;
  }
  return p;
}

}  // namespace

TEST_CASE("edges on a line") {
  const NeighborGraph g = build_graph(line({0.0, 0.1, 0.25, 0.7}), 0.2);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0].i == 0);
  CHECK(g.edges[0].j == 1);
  CHECK(g.edges[1].i == 1);
  CHECK(g.edges[1].j == 2);
  CHECK(g.edges[0].length == doctest::Approx(0.1));
  CHECK_FALSE(g.connected);
  CHECK(g.components == 2);

  // edge at exactly distance r is kept
  const NeighborGraph touch = build_graph(line({0.0, 0.5}), 0.5);
  CHECK(touch.edges.size() == 1);
  CHECK(touch.connected);

  CHECK_THROWS_AS(build_graph(line({0.0, 1.0}), 0.0), ValidationError);
  CHECK_THROWS_AS(build_graph(line({0.0, 1.0}), -1.0), ValidationError);
}

TEST_CASE("components by union-find") {
  CHECK(count_components(3, {}) == 3);
  CHECK(count_components(4, {{0, 1, 1.0}, {2, 3, 1.0}}) == 2);
  CHECK(count_components(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}) == 1);
}

TEST_CASE("bucketed build agrees with the pair scan") {
  const auto disk = make_model("disk");
  const Points x = sample(disk, 6000, 3).points;
  const double r = 0.05;
  const NeighborGraph g = build_graph(x, r);
  // reference from a half-sample under the pair-scan threshold
  const Points half = x.topRows(3000);
  const NeighborGraph gh = build_graph(half, r);
  std::size_t in_half = 0;
  for (const auto& e : g.edges) {
    CHECK(e.i < e.j);
    CHECK(e.length <= r);
    if (e.j < 3000) ++in_half;
  }
  CHECK(in_half == gh.edges.size());
  // brute count over the full sample
  std::size_t brute = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j)
      if ((x.row(i) - x.row(j)).norm() <= r) ++brute;
  CHECK(brute == g.edges.size());
}

TEST_CASE("covering radius") {
  const Points data = line({0.0, 1.0});
  const Points probe = line({0.0, 0.5, 0.9});
  CHECK(covering_radius(data, probe) == doctest::Approx(0.5));

  const auto interval = make_model("interval");
  const PointCloud d = sample(interval, 20, 1);
  CHECK_THROWS_AS(covering_radius(d, sample(interval, 999, 2)), ValidationError);
  CHECK_THROWS_AS(covering_radius(d, sample(make_model("disk"), 1000, 2)), ValidationError);
  const double eta = covering_radius(d, sample(interval, 1000, 2));
  CHECK(eta > 0.0);
  CHECK(eta < 0.5);
}

TEST_CASE("covering radius shrinks and sandwiches the packing") {
  const auto disk = make_model("disk");
  double previous = 1e9;
  for (std::size_t n : {100, 400, 1600}) {
    const PointCloud data = sample(disk, n, 7);
    const double eta = covering_radius(data, sample(disk, 50 * n, 8));
    CHECK(eta < previous);
    previous = eta;
    // a maximal packing at scale 2 eta cannot exceed n, and at scale eta/2 it
    // must exceed the number of eta-balls needed to cover
    const std::size_t big = packing_number(data.points, 2.0 * eta, 1);
    CHECK(big <= n);
    CHECK(big >= 1);
  }
  // maximal packing is also a covering at the same scale
  const Points x = sample(disk, 2000, 11).points;
  const std::size_t p = packing_number(x, 0.2, 4);
  const double area_bound = std::pow(1.0 + 0.1, 2) / (0.1 * 0.1);  // disjoint 0.1-balls inside the 1.1-disk
  CHECK(static_cast<double>(p) <= area_bound);
  CHECK(p > 20);
}

TEST_CASE("radius schedule and critical radius") {
  CHECK(critical_radius(100, 1) == doctest::Approx(std::log(100.0) / 100.0));
  CHECK(critical_radius(100, 2, 2.0) == doctest::Approx(std::sqrt(std::log(100.0) / 200.0)));
  const double r = radius_schedule(800, 1, 2.0);
  CHECK(r == doctest::Approx(2.0 * std::log(800.0) / 800.0 * std::log(std::log(800.0))));
  CHECK(radius_schedule(2, 1, 1.0) == doctest::Approx(std::log(2.0) / 2.0 * std::log(std::log(3.0))));
  // r_n / r_dagger grows without bound
  double previous = 0.0;
  for (std::size_t n : {100, 1000, 10000, 100000}) {
    const double ratio = radius_schedule(n, 2, 1.0) / critical_radius(n, 2);
    CHECK(ratio > previous);
    previous = ratio;
  }
  CHECK_THROWS_AS(radius_schedule(1, 1, 1.0), ValidationError);
  CHECK_THROWS_AS(radius_schedule(10, 1, 0.0), ValidationError);
}

TEST_CASE("schedule graphs on the interval are connected") {
  const auto interval = make_model("interval");
  int connected = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Points x = sample(interval, 400, s).points;
    if (build_graph(x, radius_schedule(400, 1, 2.0)).connected) ++connected;
  }
  CHECK(connected == 20);
}

TEST_CASE("shortest paths") {
  const NeighborGraph g = build_graph(line({0.0, 0.1, 0.25, 0.7}), 0.2);
  const auto d = shortest_paths(g, 0);
  CHECK(d[2] == doctest::Approx(0.25));
  CHECK(std::isinf(d[3]));
  const Eigen::MatrixXd all = graph_geodesics(g);
  CHECK(all(2, 0) == doctest::Approx(0.25));
  CHECK(all(1, 1) == 0.0);

  // graph geodesics over-estimate the chord, by at most a factor 1 + 4 eta / r
  // once the covering radius eta is below r / 4
  const auto disk = make_model("disk");
  const PointCloud cloud = sample(disk, 1500, 4);
  const Points& x = cloud.points;
  const NeighborGraph dense = build_graph(x, 0.45);
  const double eta = covering_radius(cloud, sample(disk, 75000, 5));
  REQUIRE(dense.connected);
  REQUIRE(eta <= dense.r / 4);
  const Eigen::MatrixXd geo = graph_geodesics(dense);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      const double chord = (x.row(i) - x.row(j)).norm();
      CHECK(geo(i, j) >= chord - 1e-12);
      worst = std::max(worst, geo(i, j) / chord);
    }
  CHECK(worst <= 1.0 + 4.0 * eta / dense.r);
}

TEST_CASE("serialization") {
  const NeighborGraph g = build_graph(line({0.0, 0.1, 0.25}), 0.2);
  const std::string csv = edges_csv(g);
  CHECK(csv.rfind("i,j,length\n", 0) == 0);
  CHECK(csv.find("0,1,") != std::string::npos);
  const auto j = nlohmann::json::parse(graph_diagnostics_json(g));
  CHECK(j.at("n").get<int>() == 3);
  CHECK(j.at("edges").get<int>() == 2);
  CHECK(j.at("connected").get<bool>());
}
