#pragma once

// Concrete geometries behind ManifoldModel. Private to the library.

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mvu/manifolds.hpp"

namespace mvu::detail {

using Rng = std::mt19937_64;

double uniform01(Rng& rng);

class Shape {
 public:
  virtual ~Shape() = default;

  std::string name;
  ModelParams params;
  int intrinsic_dim = 1;
  int ambient_dim = 2;
  SetKind kind = SetKind::Thin;
  double reach = kInfinity;
  double diameter = 0.0;
  double volume = 0.0;
  bool has_isometry = false;

  virtual bool contains(PointRef x, double tol) const = 0;
  virtual Eigen::RowVectorXd draw(Rng& rng) const = 0;
  /// Geodesic distance; membership is checked by the caller.
  virtual double geodesic(PointRef x, PointRef y) const = 0;
  virtual Eigen::MatrixXd pairwise(const Points& pts) const;
  virtual Eigen::RowVectorXd isometry(PointRef x) const;
  virtual Points boundary(std::size_t count) const = 0;
};

/// A smooth base curve for tubular neighborhoods.
class Curve {
 public:
  virtual ~Curve() = default;
  virtual double length() const = 0;
  virtual bool closed() const = 0;
  virtual double reach() const = 0;
  /// Euclidean distance from x to the curve.
  virtual double distance(PointRef x) const = 0;
  /// Point and unit normal at parameter u in [0, 1].
  virtual Eigen::Vector2d point(double u) const = 0;
  virtual Eigen::Vector2d normal(double u) const = 0;
  /// Axis-aligned bounding box {xmin, xmax, ymin, ymax} of the curve.
  virtual std::array<double, 4> bbox() const = 0;
};

std::shared_ptr<const Shape> make_interval(double length);
std::shared_ptr<const Shape> make_rectangle(double length, double width);
std::shared_ptr<const Shape> make_disk(double radius);
std::shared_ptr<const Shape> make_circle(double radius);
std::shared_ptr<const Shape> make_arc(double radius, double length);
std::shared_ptr<const Shape> make_ellipse(double a);
/// base_name in {interval, circle, arc, ellipse}.
std::shared_ptr<const Shape> make_tube(const std::string& base_name,
                                       const ModelParams& base_params,
                                       double sigma);

/// Euclidean distance from (y0, y1) to the axis-aligned ellipse with semi-axes
/// e0 >= e1 centered at the origin.
double distance_point_ellipse(double e0, double e1, double y0, double y1);

/// Arc length of (a cos t, b sin t) from 0 to t, tabulated once.
class EllipseArcLength {
 public:
  EllipseArcLength(double a, double b, int panels = 2048);
  double at(double t) const;  // t in [0, 2*pi]
  double inverse(double s) const;
  double perimeter() const { return cum_.back(); }
  double speed(double t) const;

 private:
  double a_, b_;
  double h_;
  std::vector<double> cum_;
};

}  // namespace mvu::detail
