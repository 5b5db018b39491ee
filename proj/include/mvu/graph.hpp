#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvu/manifolds.hpp"

namespace mvu {

struct Edge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double length = 0.0;
};

/// r-neighborhood graph: an edge joins x_i and x_j iff ||x_i - x_j|| <= r.
struct NeighborGraph {
  std::size_t n = 0;
  double r = 0.0;
  std::vector<Edge> edges;
  bool connected = false;
  std::size_t components = 0;
  std::optional<double> covering_radius;  // filled in by callers that probe the model
};

/// Exact edge set. Pair scan up to 5000 points, uniform-grid buckets above.
NeighborGraph build_graph(const Points& points, double r);

/// Number of connected components over the given edges (union-find).
std::size_t count_components(std::size_t n, const std::vector<Edge>& edges);

/// max over probe points of the distance to the nearest data point.
double covering_radius(const Points& data, const Points& probe);

/// Same, checking that probe and data were drawn from the same model and that
/// the probe has at least 50 n points.
double covering_radius(const PointCloud& data, const PointCloud& probe);

/// Dijkstra from one source over Euclidean edge lengths. Unreachable nodes get
/// +infinity.
std::vector<double> shortest_paths(const NeighborGraph& g, std::size_t source);

/// All-pairs graph geodesics (one Dijkstra per source).
Eigen::MatrixXd graph_geodesics(const NeighborGraph& g);

/// Size of a greedy maximal eta-packing (pairwise distances > eta), first-fit
/// over an order shuffled with `seed`.
std::size_t packing_number(const Points& points, double eta, std::uint64_t seed = 0);

/// Critical radius (log n / (alpha n))^{1/d}.
double critical_radius(std::size_t n, int d, double alpha = 1.0);

/// r_n = C (log n / n)^{1/d} * log log max(n, 3).
double radius_schedule(std::size_t n, int d, double C);

/// Edge list CSV "i,j,length".
std::string edges_csv(const NeighborGraph& g);

/// Flat JSON record with connectivity and covering diagnostics.
std::string graph_diagnostics_json(const NeighborGraph& g);

}  // namespace mvu
