#include "shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mvu/energy.hpp"
#include "mvu/errors.hpp"
#include "mvu/numerics.hpp"

namespace mvu::detail {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::RowVectorXd planar(double x, double y) {
  Eigen::RowVectorXd p(2);
  p << x, y;
  return p;
}

double euclid(PointRef x, PointRef y) { return (x - y).norm(); }

// Angle of x in (-pi/2, 3pi/2], a branch that keeps arcs spanning [0, pi]
// and their tubes continuous.
double unwrapped_angle(double x, double y) {
  double theta = std::atan2(y, x);
  if (theta < -0.5 * kPi) theta += kTwoPi;
  return theta;
}

// Angle between two planar vectors, in [0, pi].
double angle_between(PointRef x, PointRef y) {
  const double cross = x(0) * y(1) - x(1) * y(0);
  const double dot = x(0) * y(0) + x(1) * y(1);
  return std::atan2(std::abs(cross), dot);
}

// Distance from the origin to the segment [x, y].
double segment_origin_distance(PointRef x, PointRef y) {
  const Eigen::RowVectorXd d = y - x;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return x.norm();
  const double tau = std::clamp(-x.dot(d) / len2, 0.0, 1.0);
  return (x + tau * d).norm();
}

// Taut-string length from x to y around the disk of radius rho centered at
// the origin, turning through `turn` radians between the two points.
double wrap_circle(PointRef x, PointRef y, double rho, double turn) {
  const double sx = std::max(x.norm(), rho);
  const double sy = std::max(y.norm(), rho);
  const double ax = std::acos(std::min(1.0, rho / sx));
  const double ay = std::acos(std::min(1.0, rho / sy));
  const double tx = std::sqrt(std::max(0.0, sx * sx - rho * rho));
  const double ty = std::sqrt(std::max(0.0, sy * sy - rho * rho));
  return tx + ty + rho * std::max(0.0, turn - ax - ay);
}

}  // namespace

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Eigen::MatrixXd Shape::pairwise(const Points& pts) const {
  const Eigen::Index n = pts.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      out(i, j) = out(j, i) = geodesic(pts.row(i), pts.row(j));
  return out;
}

Eigen::RowVectorXd Shape::isometry(PointRef) const {
  throw NoIsometry("model '" + name + "' has no isometry onto a Euclidean domain");
}

// ---------------------------------------------------------------------------
// Ellipse helpers

double distance_point_ellipse(double e0, double e1, double y0, double y1) {
  y0 = std::abs(y0);
  y1 = std::abs(y1);
  if (e1 <= 0.0) {
    // Degenerate ellipse: the segment [-e0, e0] x {0}.
    const double dx = std::max(0.0, y0 - e0);
    return std::hypot(dx, y1);
  }
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0;
      const double z1 = y1 / e1;
      double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double n0 = r0 * z0;
      double s0 = z1 - 1.0;
      double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
      double s = 0.0;
      for (int i = 0; i < 1100; ++i) {
        s = 0.5 * (s0 + s1);
        if (s == s0 || s == s1) break;
        const double ratio0 = n0 / (s + r0);
        const double ratio1 = z1 / (s + 1.0);
        g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if (g > 0.0) {
          s0 = s;
        } else if (g < 0.0) {
          s1 = s;
        } else {
          break;
        }
      }
      const double x0 = r0 * y0 / (s + r0);
      const double x1 = y1 / (s + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

EllipseArcLength::EllipseArcLength(double a, double b, int panels)
    : a_(a), b_(b), h_(kTwoPi / panels), cum_(static_cast<std::size_t>(panels) + 1, 0.0) {
  auto speed_fn = [this](double t) { return speed(t); };
  for (int k = 0; k < panels; ++k) {
    const auto q = numerics::adaptive_simpson(speed_fn, k * h_, (k + 1) * h_, 1e-15);
    cum_[static_cast<std::size_t>(k) + 1] = cum_[static_cast<std::size_t>(k)] + q.value;
  }
}

double EllipseArcLength::speed(double t) const {
  const double s = std::sin(t);
  const double c = std::cos(t);
  return std::sqrt(a_ * a_ * s * s + b_ * b_ * c * c);
}

double EllipseArcLength::at(double t) const {
  t = std::clamp(t, 0.0, kTwoPi);
  const auto panels = static_cast<std::ptrdiff_t>(cum_.size()) - 1;
  const auto k = std::clamp(static_cast<std::ptrdiff_t>(t / h_), std::ptrdiff_t{0}, panels - 1);
  const double t0 = static_cast<double>(k) * h_;
  auto speed_fn = [this](double u) { return speed(u); };
  return cum_[static_cast<std::size_t>(k)] +
         numerics::adaptive_simpson(speed_fn, t0, t, 1e-15).value;
}

double EllipseArcLength::inverse(double s) const {
  s = std::clamp(s, 0.0, perimeter());
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  auto k = std::distance(cum_.begin(), it) - 1;
  k = std::clamp(k, std::ptrdiff_t{0}, static_cast<std::ptrdiff_t>(cum_.size()) - 2);
  const double lo = static_cast<double>(k) * h_;
  const double hi = lo + h_;
  const double c0 = cum_[static_cast<std::size_t>(k)];
  const double c1 = cum_[static_cast<std::size_t>(k) + 1];
  double t = lo + h_ * (s - c0) / std::max(c1 - c0, 1e-300);
  for (int it_newton = 0; it_newton < 8; ++it_newton) {
    const double step = (at(t) - s) / speed(t);
    t = std::clamp(t - step, lo, hi);
    if (std::abs(step) < 1e-15) break;
  }
  return t;
}

namespace {

// ---------------------------------------------------------------------------
// Thin and convex sets

class Interval final : public Shape {
 public:
  explicit Interval(double length) : length_(length) {
    name = "interval";
    intrinsic_dim = 1;
    kind = SetKind::Thin;
    reach = kInfinity;
    diameter = length;
    volume = length;
    has_isometry = true;
  }
  bool contains(PointRef x, double tol) const override {
    return std::abs(x(1)) <= tol && x(0) >= -tol && x(0) <= length_ + tol;
  }
  Eigen::RowVectorXd draw(Rng& rng) const override {
    return planar(length_ * uniform01(rng), 0.0);
  }
  double geodesic(PointRef x, PointRef y) const override { return euclid(x, y); }
  Eigen::RowVectorXd isometry(PointRef x) const override {
    Eigen::RowVectorXd z(1);
    z << x(0);
    return z;
  }
  Points boundary(std::size_t count) const override {
    Points out(static_cast<Eigen::Index>(count), 2);
    for (std::size_t k = 0; k < count; ++k)
      out.row(static_cast<Eigen::Index>(k)) =
          planar(length_ * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(count - 1, 1)), 0.0);
    return out;
  }

 private:
  double length_;
};

class Rectangle final : public Shape {
 public:
  Rectangle(double length, double width) : length_(length), width_(width) {
    name = "rectangle";
    intrinsic_dim = 2;
    kind = SetKind::Thick;
    reach = kInfinity;
    diameter = std::hypot(length, width);
    volume = length * width;
    has_isometry = true;
  }
  bool contains(PointRef x, double tol) const override {
    return x(0) >= -tol && x(0) <= length_ + tol && x(1) >= -tol && x(1) <= width_ + tol;
  }
  Eigen::RowVectorXd draw(Rng& rng) const override {
    const double u = uniform01(rng);
    const double v = uniform01(rng);
    return planar(length_ * u, width_ * v);
  }
  double geodesic(PointRef x, PointRef y) const override { return euclid(x, y); }
  Eigen::RowVectorXd isometry(PointRef x) const override { return x; }
  Points boundary(std::size_t count) const override {
    Points out(static_cast<Eigen::Index>(count), 2);
    const double per = 2.0 * (length_ + width_);
    for (std::size_t k = 0; k < count; ++k) {
      double s = per * static_cast<double>(k) / static_cast<double>(count);
      Eigen::RowVectorXd p;
      if (s < length_) {
        p = planar(s, 0.0);
      } else if ((s -= length_) < width_) {
        p = planar(length_, s);
      } else if ((s -= width_) < length_) {
        p = planar(length_ - s, width_);
      } else {
        s -= length_;
        p = planar(0.0, width_ - s);
      }
      out.row(static_cast<Eigen::Index>(k)) = p;
    }
    return out;
  }

 private:
  double length_, width_;
};

class Disk final : public Shape {
 public:
  explicit Disk(double radius) : radius_(radius) {
    name = "disk";
    intrinsic_dim = 2;
    kind = SetKind::Thick;
    reach = kInfinity;
    diameter = 2.0 * radius;
    volume = kPi * radius * radius;
    has_isometry = true;
  }
  bool contains(PointRef x, double tol) const override { return x.norm() <= radius_ + tol; }
  Eigen::RowVectorXd draw(Rng& rng) const override {
    const double rad = radius_ * std::sqrt(uniform01(rng));
    const double theta = kTwoPi * uniform01(rng);
    return planar(rad * std::cos(theta), rad * std::sin(theta));
  }
  double geodesic(PointRef x, PointRef y) const override { return euclid(x, y); }
  Eigen::RowVectorXd isometry(PointRef x) const override { return x; }
  Points boundary(std::size_t count) const override {
    Points out(static_cast<Eigen::Index>(count), 2);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = kTwoPi * static_cast<double>(k) / static_cast<double>(count);
      out.row(static_cast<Eigen::Index>(k)) = planar(radius_ * std::cos(t), radius_ * std::sin(t));
    }
    return out;
  }

 private:
  double radius_;
};

class Circle final : public Shape {
 public:
  explicit Circle(double radius) : radius_(radius) {
    name = "circle";
    intrinsic_dim = 1;
    kind = SetKind::Thin;
    reach = radius;
    diameter = kPi * radius;
    volume = kTwoPi * radius;
    has_isometry = false;
  }
  bool contains(PointRef x, double tol) const override {
    return std::abs(x.norm() - radius_) <= tol * std::max(1.0, radius_);
  }
  Eigen::RowVectorXd draw(Rng& rng) const override {
    const double theta = kTwoPi * uniform01(rng);
    return planar(radius_ * std::cos(theta), radius_ * std::sin(theta));
  }
  double geodesic(PointRef x, PointRef y) const override {
    const double chord = euclid(x, y);
    return 2.0 * radius_ * std::asin(std::min(1.0, chord / (2.0 * radius_)));
  }
  Points boundary(std::size_t count) const override {
    Points out(static_cast<Eigen::Index>(count), 2);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = kTwoPi * static_cast<double>(k) / static_cast<double>(count);
      out.row(static_cast<Eigen::Index>(k)) = planar(radius_ * std::cos(t), radius_ * std::sin(t));
    }
    return out;
  }

 private:
  double radius_;
};

class Arc final : public Shape {
 public:
  Arc(double radius, double length) : radius_(radius), span_(length / radius) {
    name = "arc";
    intrinsic_dim = 1;
    kind = SetKind::Thin;
    reach = radius;  // reach of the ambient extension, the full circle
    diameter = length;
    volume = length;
    has_isometry = true;
  }
  double angle(PointRef x) const { return unwrapped_angle(x(0), x(1)); }
  bool contains(PointRef x, double tol) const override {
    if (std::abs(x.norm() - radius_) > tol * std::max(1.0, radius_)) return false;
    const double theta = angle(x);
    const double atol = tol / radius_;
    return theta >= -atol && theta <= span_ + atol;
  }
  Eigen::RowVectorXd draw(Rng& rng) const override {
    const double theta = span_ * uniform01(rng);
    return planar(radius_ * std::cos(theta), radius_ * std::sin(theta));
  }
  double geodesic(PointRef x, PointRef y) const override {
    return radius_ * std::abs(angle(x) - angle(y));
  }
  Eigen::RowVectorXd isometry(PointRef x) const override {
    Eigen::RowVectorXd z(1);
    z << radius_ * std::clamp(angle(x), 0.0, span_);
    return z;
  }
  Points boundary(std::size_t count) const override {
    Points out(static_cast<Eigen::Index>(count), 2);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = span_ * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(count - 1, 1));
      out.row(static_cast<Eigen::Index>(k)) = planar(radius_ * std::cos(t), radius_ * std::sin(t));
    }
    return out;
  }

 private:
  double radius_, span_;
};

class Ellipse final : public Shape {
 public:
  explicit Ellipse(double a) : a_(a), b_(solve_b(a)), arc_(a_, b_) {
    name = "ellipse";
    intrinsic_dim = 1;
    kind = SetKind::Thin;
    reach = b_ * b_ / a_;
    diameter = 0.5 * arc_.perimeter();
    volume = arc_.perimeter();
    has_isometry = false;
  }
  double b() const { return b_; }
  double arc_coordinate(PointRef x) const {
    double t = std::atan2(x(1) / b_, x(0) / a_);
    if (t < 0.0) t += kTwoPi;
    return arc_.at(t);
  }
  bool contains(PointRef x, double tol) const override {
    return distance_point_ellipse(a_, b_, x(0), x(1)) <= tol;
  }
  Eigen::RowVectorXd draw(Rng& rng) const override {
    const double t = arc_.inverse(arc_.perimeter() * uniform01(rng));
    return planar(a_ * std::cos(t), b_ * std::sin(t));
  }
  double geodesic(PointRef x, PointRef y) const override {
    return from_coordinates(arc_coordinate(x), arc_coordinate(y));
  }
  Eigen::MatrixXd pairwise(const Points& pts) const override {
    const Eigen::Index n = pts.rows();
    std::vector<double> s(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = arc_coordinate(pts.row(i));
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        out(i, j) = out(j, i) = from_coordinates(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
    return out;
  }
  Points boundary(std::size_t count) const override {
    Points out(static_cast<Eigen::Index>(count), 2);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = arc_.inverse(arc_.perimeter() * static_cast<double>(k) / static_cast<double>(count));
      out.row(static_cast<Eigen::Index>(k)) = planar(a_ * std::cos(t), b_ * std::sin(t));
    }
    return out;
  }

 private:
  double from_coordinates(double s, double t) const {
    const double d = std::abs(s - t);
    return std::min(d, arc_.perimeter() - d);
  }
  double a_, b_;
  EllipseArcLength arc_;
};

// ---------------------------------------------------------------------------
// Base curves for tubes

class SegmentCurve final : public Curve {
 public:
  explicit SegmentCurve(double length) : length_(length) {}
  double length() const override { return length_; }
  bool closed() const override { return false; }
  double reach() const override { return kInfinity; }
  double distance(PointRef x) const override {
    return std::hypot(x(0) - std::clamp(x(0), 0.0, length_), x(1));
  }
  Eigen::Vector2d point(double u) const override { return {u * length_, 0.0}; }
  Eigen::Vector2d normal(double) const override { return {0.0, 1.0}; }
  std::array<double, 4> bbox() const override { return {0.0, length_, 0.0, 0.0}; }

 private:
  double length_;
};

class CircleCurve final : public Curve {
 public:
  explicit CircleCurve(double radius) : radius_(radius) {}
  double length() const override { return kTwoPi * radius_; }
  bool closed() const override { return true; }
  double reach() const override { return radius_; }
  double distance(PointRef x) const override { return std::abs(x.norm() - radius_); }
  Eigen::Vector2d point(double u) const override {
    return radius_ * Eigen::Vector2d(std::cos(kTwoPi * u), std::sin(kTwoPi * u));
  }
  Eigen::Vector2d normal(double u) const override {
    return {std::cos(kTwoPi * u), std::sin(kTwoPi * u)};
  }
  std::array<double, 4> bbox() const override { return {-radius_, radius_, -radius_, radius_}; }
  double radius() const { return radius_; }

 private:
  double radius_;
};

class ArcCurve final : public Curve {
 public:
  ArcCurve(double radius, double length) : radius_(radius), span_(length / radius) {}
  double length() const override { return radius_ * span_; }
  bool closed() const override { return false; }
  double reach() const override { return radius_; }
  double distance(PointRef x) const override {
    const double theta = unwrapped_angle(x(0), x(1));
    if (theta >= 0.0 && theta <= span_) return std::abs(x.norm() - radius_);
    const Eigen::Vector2d p(x(0), x(1));
    return std::min((p - point(0.0)).norm(), (p - point(1.0)).norm());
  }
  Eigen::Vector2d point(double u) const override {
    return radius_ * Eigen::Vector2d(std::cos(u * span_), std::sin(u * span_));
  }
  Eigen::Vector2d normal(double u) const override {
    return {std::cos(u * span_), std::sin(u * span_)};
  }
  std::array<double, 4> bbox() const override {
    // The arc spans angles [0, span] with span <= pi.
    const double xmin = span_ >= kPi ? -radius_ : radius_ * std::cos(span_);
    const double ymax = span_ >= 0.5 * kPi ? radius_ : radius_ * std::sin(span_);
    return {std::min(xmin, radius_ * std::cos(span_)), radius_, 0.0, ymax};
  }
  double radius() const { return radius_; }
  double span() const { return span_; }

 private:
  double radius_, span_;
};

class EllipseCurve final : public Curve {
 public:
  explicit EllipseCurve(double a) : a_(a), b_(solve_b(a)) {}
  double length() const override { return ellipse_perimeter(a_, b_); }
  bool closed() const override { return true; }
  double reach() const override { return b_ * b_ / a_; }
  double distance(PointRef x) const override { return distance_point_ellipse(a_, b_, x(0), x(1)); }
  Eigen::Vector2d point(double u) const override {
    return {a_ * std::cos(kTwoPi * u), b_ * std::sin(kTwoPi * u)};
  }
  Eigen::Vector2d normal(double u) const override {
    return Eigen::Vector2d(b_ * std::cos(kTwoPi * u), a_ * std::sin(kTwoPi * u)).normalized();
  }
  std::array<double, 4> bbox() const override { return {-a_, a_, -b_, b_}; }
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double a_, b_;
};

// ---------------------------------------------------------------------------
// Convex polygon obstacle, used for the hole of an ellipse tube.

class ConvexObstacle {
 public:
  // vertices in counter-clockwise order
  explicit ConvexObstacle(std::vector<Eigen::Vector2d> v) : v_(std::move(v)), cum_(v_.size() + 1, 0.0) {
    for (std::size_t k = 0; k < v_.size(); ++k)
      cum_[k + 1] = cum_[k] + (v_[(k + 1) % v_.size()] - v_[k]).norm();
  }

  struct Tangents {
    std::size_t right;  // every vertex lies left of the ray x -> v[right]
    std::size_t left;   // every vertex lies right of the ray x -> v[left]
  };

  Tangents tangents(const Eigen::Vector2d& x) const {
    Tangents t{0, 0};
    for (std::size_t k = 1; k < v_.size(); ++k) {
      if (cross(v_[t.right] - x, v_[k] - x) < 0.0) t.right = k;
      if (cross(v_[t.left] - x, v_[k] - x) > 0.0) t.left = k;
    }
    return t;
  }

  double distance(const Eigen::Vector2d& x, const Tangents& tx, const Eigen::Vector2d& y,
                  const Tangents& ty) const {
    if (!blocked(x, tx, y)) return (x - y).norm();
    const double per = cum_.back();
    auto ccw = [&](std::size_t i, std::size_t j) {
      double d = cum_[j] - cum_[i];
      if (d < 0.0) d += per;
      return d;
    };
    const double via_ccw = (x - v_[tx.right]).norm() + ccw(tx.right, ty.left) + (v_[ty.left] - y).norm();
    const double via_cw = (x - v_[tx.left]).norm() + ccw(ty.right, tx.left) + (v_[ty.right] - y).norm();
    return std::min(via_ccw, via_cw);
  }

 private:
  static double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
  }

  bool blocked(const Eigen::Vector2d& x, const Tangents& tx, const Eigen::Vector2d& y) const {
    const Eigen::Vector2d d = y - x;
    const Eigen::Vector2d r = v_[tx.right] - x;
    const Eigen::Vector2d l = v_[tx.left] - x;
    if (!(cross(r, d) > 0.0 && cross(d, l) > 0.0)) return false;
    // Inside the shadow cone: blocked iff y is beyond the chord of tangency.
    const Eigen::Vector2d chord = v_[tx.left] - v_[tx.right];
    const double side_x = cross(chord, x - v_[tx.right]);
    const double side_y = cross(chord, y - v_[tx.right]);
    return (side_x > 0.0) != (side_y > 0.0);
  }

  std::vector<Eigen::Vector2d> v_;
  std::vector<double> cum_;
};

// ---------------------------------------------------------------------------
// Tubular neighborhoods

enum class BaseKind { Segment, Circle, Arc, Ellipse };

class Tube final : public Shape {
 public:
  Tube(BaseKind base_kind, std::unique_ptr<Curve> base, double sigma)
      : base_kind_(base_kind), base_(std::move(base)), sigma_(sigma) {
    name = "tube";
    intrinsic_dim = 2;
    kind = SetKind::Thick;
    reach = base_->reach() - sigma;
    volume = 2.0 * sigma * base_->length() + (base_->closed() ? 0.0 : kPi * sigma * sigma);
    has_isometry = base_kind == BaseKind::Segment || base_kind == BaseKind::Arc;
    const auto box = base_->bbox();
    box_ = {box[0] - sigma, box[1] + sigma, box[2] - sigma, box[3] + sigma};
    if (base_kind_ == BaseKind::Ellipse) {
      const auto& e = static_cast<const EllipseCurve&>(*base_);
      constexpr int kVertices = 4096;
      std::vector<Eigen::Vector2d> v;
      v.reserve(kVertices);
      for (int k = 0; k < kVertices; ++k) {
        const double u = static_cast<double>(k) / kVertices;
        v.push_back(e.point(u) - sigma * e.normal(u));
      }
      hole_ = std::make_unique<ConvexObstacle>(std::move(v));
    }
    const Points rim = boundary(480);
    diameter = pairwise(rim).maxCoeff();
  }

  bool contains(PointRef x, double tol) const override {
    return base_->distance(x) <= sigma_ + tol;
  }

  Eigen::RowVectorXd draw(Rng& rng) const override {
    for (;;) {
      const double u = uniform01(rng);
      const double v = uniform01(rng);
      Eigen::RowVectorXd p = planar(box_[0] + u * (box_[1] - box_[0]), box_[2] + v * (box_[3] - box_[2]));
      if (base_->distance(p) <= sigma_) return p;
    }
  }

  double geodesic(PointRef x, PointRef y) const override {
    switch (base_kind_) {
      case BaseKind::Segment:
        return euclid(x, y);
      case BaseKind::Circle: {
        const double rho = static_cast<const CircleCurve&>(*base_).radius() - sigma_;
        if (segment_origin_distance(x, y) >= rho) return euclid(x, y);
        return wrap_circle(x, y, rho, angle_between(x, y));
      }
      case BaseKind::Arc: {
        const double rho = static_cast<const ArcCurve&>(*base_).radius() - sigma_;
        if (segment_origin_distance(x, y) >= rho) return euclid(x, y);
        const double turn = std::abs(unwrapped_angle(x(0), x(1)) - unwrapped_angle(y(0), y(1)));
        return wrap_circle(x, y, rho, turn);
      }
      case BaseKind::Ellipse: {
        const Eigen::Vector2d px(x(0), x(1));
        const Eigen::Vector2d py(y(0), y(1));
        return hole_->distance(px, hole_->tangents(px), py, hole_->tangents(py));
      }
    }
    return euclid(x, y);
  }

  Eigen::MatrixXd pairwise(const Points& pts) const override {
    if (base_kind_ != BaseKind::Ellipse) return Shape::pairwise(pts);
    const Eigen::Index n = pts.rows();
    std::vector<Eigen::Vector2d> p(static_cast<std::size_t>(n));
    std::vector<ConvexObstacle::Tangents> t(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      p[static_cast<std::size_t>(i)] = Eigen::Vector2d(pts(i, 0), pts(i, 1));
      t[static_cast<std::size_t>(i)] = hole_->tangents(p[static_cast<std::size_t>(i)]);
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                hole_->distance(p[i], t[i], p[j], t[j]);
    return out;
  }

  Eigen::RowVectorXd isometry(PointRef x) const override {
    if (!has_isometry) return Shape::isometry(x);
    return x;
  }

  Points boundary(std::size_t count) const override {
    std::vector<Eigen::Vector2d> pts;
    const bool open = !base_->closed();
    const std::size_t caps = open ? count / 4 : 0;
    const std::size_t per_side = (count - caps) / 2;
    for (std::size_t k = 0; k < per_side; ++k) {
      const double u = open ? static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(per_side - 1, 1))
                            : static_cast<double>(k) / static_cast<double>(per_side);
      const Eigen::Vector2d c = base_->point(u);
      const Eigen::Vector2d nrm = base_->normal(u);
      pts.push_back(c + sigma_ * nrm);
      pts.push_back(c - sigma_ * nrm);
    }
    if (open) {
      const std::size_t per_cap = caps / 2;
      for (int end = 0; end < 2; ++end) {
        const double u = end == 0 ? 0.0 : 1.0;
        const Eigen::Vector2d c = base_->point(u);
        const Eigen::Vector2d nrm = base_->normal(u);
        // outward tangent at the endpoint, perpendicular to the normal
        Eigen::Vector2d out(-nrm.y(), nrm.x());
        if (end == 0) out = -out;
        if (base_kind_ == BaseKind::Segment) out = end == 0 ? Eigen::Vector2d(-1, 0) : Eigen::Vector2d(1, 0);
        for (std::size_t k = 1; k + 1 < per_cap + 1; ++k) {
          const double w = -0.5 * kPi + kPi * static_cast<double>(k) / static_cast<double>(per_cap);
          pts.push_back(c + sigma_ * (std::cos(w) * out + std::sin(w) * nrm));
        }
      }
    }
    Points out(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t k = 0; k < pts.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
    return out;
  }

 private:
  BaseKind base_kind_;
  std::unique_ptr<Curve> base_;
  double sigma_;
  std::array<double, 4> box_{};
  std::unique_ptr<ConvexObstacle> hole_;
};

}  // namespace

std::shared_ptr<const Shape> make_interval(double length) {
  return std::make_shared<Interval>(length);
}
std::shared_ptr<const Shape> make_rectangle(double length, double width) {
  return std::make_shared<Rectangle>(length, width);
}
std::shared_ptr<const Shape> make_disk(double radius) { return std::make_shared<Disk>(radius); }
std::shared_ptr<const Shape> make_circle(double radius) { return std::make_shared<Circle>(radius); }
std::shared_ptr<const Shape> make_arc(double radius, double length) {
  return std::make_shared<Arc>(radius, length);
}
std::shared_ptr<const Shape> make_ellipse(double a) { return std::make_shared<Ellipse>(a); }

std::shared_ptr<const Shape> make_tube(const std::string& base_name, const ModelParams& base_params,
                                       double sigma) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = base_params.find(key);
    return it == base_params.end() ? fallback : std::stod(it->second);
  };
  std::unique_ptr<Curve> curve;
  BaseKind kind{};
  if (base_name == "interval") {
    kind = BaseKind::Segment;
    curve = std::make_unique<SegmentCurve>(get("length", 1.0));
  } else if (base_name == "circle") {
    kind = BaseKind::Circle;
    curve = std::make_unique<CircleCurve>(get("radius", 1.0));
  } else if (base_name == "arc") {
    kind = BaseKind::Arc;
    curve = std::make_unique<ArcCurve>(get("radius", 1.0), get("length", 2.0));
  } else if (base_name == "ellipse") {
    kind = BaseKind::Ellipse;
    curve = std::make_unique<EllipseCurve>(get("a", 1.4));
  } else {
    throw ValidationError("tube: unsupported base '" + base_name +
                          "' (expected interval, circle, arc or ellipse)");
  }
  if (!(sigma > 0.0) || !(sigma < curve->reach())) {
    throw ValidationError("tube: sigma must satisfy 0 < sigma < reach(base) = " +
                          std::to_string(curve->reach()));
  }
  return std::make_shared<Tube>(kind, std::move(curve), sigma);
}

}  // namespace mvu::detail
