#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mvu {

/// Point sets are stored one point per row, row-major so that a row is a
/// contiguous view.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PointRef = Eigen::Ref<const Eigen::RowVectorXd>;

inline constexpr double kMembershipTol = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Thin: a compact submanifold (noiseless). Thick: closure of an open set with
/// smooth boundary, e.g. a tubular neighborhood (noisy).
enum class SetKind { Thin, Thick };

/// Model parameters as written in configs and on the command line.
using ModelParams = std::map<std::string, std::string>;

namespace detail {
class Shape;
}

/// A benchmark geometric domain: sampler, membership predicate, exact
/// intrinsic distance and (when one exists) an isometry onto a flat domain.
/// Immutable and cheap to copy; copies share the underlying geometry.
class ManifoldModel {
 public:
  explicit ManifoldModel(std::shared_ptr<const detail::Shape> shape);

  const std::string& name() const;
  /// Canonical identifier including parameters, e.g. "tube(base=circle,radius=1,sigma=0.2)".
  std::string id() const;
  const ModelParams& params() const;
  int intrinsic_dim() const;
  int ambient_dim() const;
  SetKind kind() const;
  /// Reach r_M used by the regularity constant; +inf for convex sets.
  double reach() const;
  /// Intrinsic diameter sup delta_M(x, x').
  double diameter() const;
  /// d-dimensional Hausdorff measure (length or area).
  double volume() const;
  bool has_isometry() const;

  bool contains(PointRef x, double tol = kMembershipTol) const;
  /// Exact geodesic distance inside the set. Throws ValidationError if either
  /// point fails the membership predicate.
  double intrinsic_distance(PointRef x, PointRef y) const;
  /// All-pairs intrinsic distances; same values as intrinsic_distance but with
  /// per-point work hoisted out of the pair loop.
  Eigen::MatrixXd pairwise_intrinsic(const Points& pts) const;
  /// psi(x) in R^d. Throws NoIsometry when has_isometry() is false.
  Eigen::RowVectorXd isometry(PointRef x) const;
  Points isometry(const Points& pts) const;
  /// Points spread over the boundary (or over the curve itself for thin
  /// sets), used for diameters and probes.
  Points boundary_samples(std::size_t count) const;

  const detail::Shape& shape() const { return *shape_; }
  bool same_model(const ManifoldModel& other) const { return id() == other.id(); }

 private:
  std::shared_ptr<const detail::Shape> shape_;
};

/// Builds a model from the catalog: interval, rectangle, disk, circle, arc,
/// ellipse, tube. Throws ValidationError on unknown names or bad parameters.
ManifoldModel make_model(const std::string& name, const ModelParams& params = {});

struct PointCloud {
  Points points;
  ManifoldModel model;
  std::uint64_t seed = 0;

  std::size_t n() const { return static_cast<std::size_t>(points.rows()); }
};

/// n i.i.d. points, uniform for the d-dimensional Hausdorff measure on the
/// model. Bit-identical for identical (model, n, seed).
PointCloud sample(const ManifoldModel& model, std::size_t n, std::uint64_t seed);

/// Semi-axes of the perimeter-2*pi ellipse K_a.
struct EllipseSpec {
  double a = 1.0;
  double b = 1.0;
  double perimeter = 0.0;
};
EllipseSpec make_ellipse_spec(double a);

/// c(r) = 4r / r_M for r < r_M / 2, else 1.
double regularity_constant(double r, double reach);

struct RegularityCheck {
  double max_ratio = 0.0;        // max of delta/||x-x'|| - 1
  double max_bound_excess = 0.0; // max of (ratio - 4||x-x'||/r_M); <= 0 when the bound holds
  std::size_t pairs_checked = 0;
  bool all_within_bound = true;
};

/// Checks delta_M <= (1 + 4||x-x'||/r_M) ||x-x'|| on pairs closer than r_M/2.
/// Pairs at or beyond r_M/2 are skipped.
RegularityCheck regularity_constant_check(
    const ManifoldModel& model, const std::vector<std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd>>& pairs);

}  // namespace mvu
