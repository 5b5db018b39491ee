#include "mvu/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

#include "mvu/csv.hpp"
#include "mvu/errors.hpp"

namespace mvu {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

double pair_distance(const Points& p, Eigen::Index i, Eigen::Index j) {
  return (p.row(i) - p.row(j)).norm();
}

void scan_pairs(const Points& p, double r, std::vector<Edge>& edges) {
  const Eigen::Index n = p.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = pair_distance(p, i, j);
      if (d <= r) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), d});
    }
  }
}

// Buckets of side r over the first two coordinates; candidate pairs come from
// neighboring buckets and are then tested with the exact rule.
void scan_buckets(const Points& p, double r, std::vector<Edge>& edges) {
  const Eigen::Index n = p.rows();
  const Eigen::Index dims = std::min<Eigen::Index>(2, p.cols());
  const Eigen::RowVectorXd lo = p.colwise().minCoeff();
  auto cell_of = [&](Eigen::Index i, Eigen::Index k) {
    return static_cast<long long>(std::floor((p(i, k) - lo(k)) / r));
  };
  auto key = [](long long cx, long long cy) { return (cx << 32) ^ (cy & 0xffffffffLL); };
  std::unordered_map<long long, std::vector<Eigen::Index>> cells;
  for (Eigen::Index i = 0; i < n; ++i) {
    const long long cx = cell_of(i, 0);
    const long long cy = dims > 1 ? cell_of(i, 1) : 0;
    cells[key(cx, cy)].push_back(i);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const long long cx = cell_of(i, 0);
    const long long cy = dims > 1 ? cell_of(i, 1) : 0;
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = (dims > 1 ? -1 : 0); dy <= (dims > 1 ? 1 : 0); ++dy) {
        auto it = cells.find(key(cx + dx, cy + dy));
        if (it == cells.end()) continue;
        for (Eigen::Index j : it->second) {
          if (j <= i) continue;
          const double d = pair_distance(p, i, j);
          if (d <= r) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), d});
        }
      }
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
}

}  // namespace

std::size_t count_components(std::size_t n, const std::vector<Edge>& edges) {
  DisjointSets sets(n);
  std::size_t components = n;
  for (const auto& e : edges)
    if (sets.unite(e.i, e.j)) --components;
  return components;
}

NeighborGraph build_graph(const Points& points, double r) {
  if (!(r > 0.0)) throw ValidationError("build_graph: r must be positive");
  NeighborGraph g;
  g.n = static_cast<std::size_t>(points.rows());
  g.r = r;
  if (g.n > 5000) {
    scan_buckets(points, r, g.edges);
  } else {
    scan_pairs(points, r, g.edges);
  }
  g.components = count_components(g.n, g.edges);
  g.connected = g.components == 1;
  return g;
}

double covering_radius(const Points& data, const Points& probe) {
  if (data.rows() == 0) throw ValidationError("covering_radius: empty data");
  double worst = 0.0;
  for (Eigen::Index k = 0; k < probe.rows(); ++k) {
    double best = kInfinity;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      best = std::min(best, (data.row(i) - probe.row(k)).squaredNorm());
      if (best <= worst) break;  // cannot raise the running maximum
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

double covering_radius(const PointCloud& data, const PointCloud& probe) {
  if (!data.model.same_model(probe.model)) {
    throw ValidationError("covering_radius: probe drawn from " + probe.model.id() +
                          " but data from " + data.model.id());
  }
  if (probe.n() < 50 * data.n()) {
    throw ValidationError("covering_radius: probe needs at least 50 n points");
  }
  return covering_radius(data.points, probe.points);
}

std::vector<double> shortest_paths(const NeighborGraph& g, std::size_t source) {
  if (source >= g.n) throw ValidationError("shortest_paths: source out of range");
  // adjacency in CSR form
  std::vector<std::size_t> offset(g.n + 1, 0);
  for (const auto& e : g.edges) {
    ++offset[e.i + 1];
    ++offset[e.j + 1];
  }
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  std::vector<std::pair<std::size_t, double>> adj(offset.back());
  std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
  for (const auto& e : g.edges) {
    adj[fill[e.i]++] = {e.j, e.length};
    adj[fill[e.j]++] = {e.i, e.length};
  }

  std::vector<double> dist(g.n, kInfinity);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (std::size_t k = offset[u]; k < offset[u + 1]; ++k) {
      const auto [v, w] = adj[k];
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.push({nd, v});
      }
    }
  }
  return dist;
}

Eigen::MatrixXd graph_geodesics(const NeighborGraph& g) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(g.n), static_cast<Eigen::Index>(g.n));
  for (std::size_t s = 0; s < g.n; ++s) {
    const auto d = shortest_paths(g, s);
    for (std::size_t t = 0; t < g.n; ++t) out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = d[t];
  }
  // Dijkstra sums edges in different orders from each end; symmetrize exactly.
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = i + 1; j < out.cols(); ++j) out(i, j) = out(j, i) = std::min(out(i, j), out(j, i));
  return out;
}

std::size_t packing_number(const Points& points, double eta, std::uint64_t seed) {
  if (!(eta > 0.0)) throw ValidationError("packing_number: eta must be positive");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Eigen::Index> centers;
  for (Eigen::Index i : order) {
    bool far = true;
    for (Eigen::Index c : centers) {
      if (pair_distance(points, i, c) <= eta) {
        far = false;
        break;
      }
    }
    if (far) centers.push_back(i);
  }
  return centers.size();
}

double critical_radius(std::size_t n, int d, double alpha) {
  if (n < 2 || d < 1 || !(alpha > 0.0)) throw ValidationError("critical_radius: bad arguments");
  const double nd = static_cast<double>(n);
  return std::pow(std::log(nd) / (alpha * nd), 1.0 / d);
}

double radius_schedule(std::size_t n, int d, double C) {
  if (n < 2) throw ValidationError("radius_schedule: n must be at least 2");
  if (!(C > 0.0)) throw ValidationError("radius_schedule: C must be positive");
  const double slack = std::log(std::log(std::max(static_cast<double>(n), 3.0)));
  return C * critical_radius(n, d) * slack;
}

std::string edges_csv(const NeighborGraph& g) {
  std::ostringstream os;
  os << "i,j,length\n";
  for (const auto& e : g.edges) os << e.i << ',' << e.j << ',' << format_double(e.length) << '\n';
  return os.str();
}

std::string graph_diagnostics_json(const NeighborGraph& g) {
  std::ostringstream os;
  os << "{\"n\": " << g.n << ", \"r\": " << format_double(g.r) << ", \"edges\": " << g.edges.size()
     << ", \"connected\": " << (g.connected ? "true" : "false") << ", \"components\": " << g.components;
  if (g.covering_radius) {
    os << ", \"covering_radius\": " << format_double(*g.covering_radius)
       << ", \"lambda_hat\": " << format_double(*g.covering_radius / g.r);
  }
  os << "}";
  return os.str();
}

}  // namespace mvu
