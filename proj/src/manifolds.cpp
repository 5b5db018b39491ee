#include "mvu/manifolds.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "mvu/energy.hpp"
#include "mvu/errors.hpp"
#include "shapes.hpp"

namespace mvu {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& model, const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ValidationError(model + ": parameter '" + key + "' is not a number: '" + text + "'");
  }
  return v;
}

struct ParamReader {
  std::string model;
  const ModelParams& given;
  ModelParams canonical;
  std::set<std::string> allowed;

  double number(const std::string& key, double fallback) {
    allowed.insert(key);
    auto it = given.find(key);
    const double v = it == given.end() ? fallback : parse_number(model, key, it->second);
    canonical[key] = format_number(v);
    return v;
  }
  std::string text(const std::string& key) {
    allowed.insert(key);
    auto it = given.find(key);
    if (it == given.end()) throw ValidationError(model + ": missing parameter '" + key + "'");
    canonical[key] = it->second;
    return it->second;
  }
  void finish() const {
    for (const auto& [k, v] : given) {
      if (!allowed.count(k)) throw ValidationError(model + ": unknown parameter '" + k + "'");
    }
  }
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

std::shared_ptr<detail::Shape> mutable_copy(std::shared_ptr<const detail::Shape> s) {
  return std::const_pointer_cast<detail::Shape>(std::move(s));
}

}  // namespace

ManifoldModel::ManifoldModel(std::shared_ptr<const detail::Shape> shape) : shape_(std::move(shape)) {}

const std::string& ManifoldModel::name() const { return shape_->name; }
const ModelParams& ManifoldModel::params() const { return shape_->params; }
int ManifoldModel::intrinsic_dim() const { return shape_->intrinsic_dim; }
int ManifoldModel::ambient_dim() const { return shape_->ambient_dim; }
SetKind ManifoldModel::kind() const { return shape_->kind; }
double ManifoldModel::reach() const { return shape_->reach; }
double ManifoldModel::diameter() const { return shape_->diameter; }
double ManifoldModel::volume() const { return shape_->volume; }
bool ManifoldModel::has_isometry() const { return shape_->has_isometry; }

std::string ManifoldModel::id() const {
  std::ostringstream os;
  os << shape_->name << '(';
  bool first = true;
  for (const auto& [k, v] : shape_->params) {
    if (!first) os << ',';
    os << k << '=' << v;
    first = false;
  }
  os << ')';
  return os.str();
}

bool ManifoldModel::contains(PointRef x, double tol) const {
  if (x.size() != shape_->ambient_dim) return false;
  return shape_->contains(x, tol);
}

double ManifoldModel::intrinsic_distance(PointRef x, PointRef y) const {
  if (!contains(x) || !contains(y)) {
    throw ValidationError("intrinsic_distance: point not on model " + id());
  }
  return shape_->geodesic(x, y);
}

Eigen::MatrixXd ManifoldModel::pairwise_intrinsic(const Points& pts) const {
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (!contains(pts.row(i))) {
      throw ValidationError("pairwise_intrinsic: row " + std::to_string(i) + " not on model " + id());
    }
  }
  return shape_->pairwise(pts);
}

Eigen::RowVectorXd ManifoldModel::isometry(PointRef x) const {
  if (!shape_->has_isometry) {
    throw NoIsometry("model " + id() + " has no isometry onto a Euclidean domain");
  }
  return shape_->isometry(x);
}

Points ManifoldModel::isometry(const Points& pts) const {
  Points out(pts.rows(), shape_->intrinsic_dim);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) out.row(i) = isometry(PointRef(pts.row(i)));
  return out;
}

Points ManifoldModel::boundary_samples(std::size_t count) const { return shape_->boundary(count); }

ManifoldModel make_model(const std::string& name, const ModelParams& params) {
  ParamReader p{name, params, {}, {}};
  std::shared_ptr<detail::Shape> shape;
  if (name == "interval") {
    const double length = p.number("length", 1.0);
    require(length > 0.0, "interval: length must be positive");
    shape = mutable_copy(detail::make_interval(length));
  } else if (name == "rectangle") {
    const double length = p.number("length", 2.0);
    const double width = p.number("width", 1.0);
    require(length > 0.0 && width > 0.0, "rectangle: sides must be positive");
    shape = mutable_copy(detail::make_rectangle(length, width));
  } else if (name == "disk") {
    const double radius = p.number("radius", 1.0);
    require(radius > 0.0, "disk: radius must be positive");
    shape = mutable_copy(detail::make_disk(radius));
  } else if (name == "circle") {
    const double radius = p.number("radius", 1.0);
    require(radius > 0.0, "circle: radius must be positive");
    shape = mutable_copy(detail::make_circle(radius));
  } else if (name == "arc") {
    const double radius = p.number("radius", 1.0);
    const double length = p.number("length", 2.0);
    require(radius > 0.0 && length > 0.0, "arc: radius and length must be positive");
    require(length / radius <= std::numbers::pi,
            "arc: angular span length/radius must not exceed pi");
    shape = mutable_copy(detail::make_arc(radius, length));
  } else if (name == "ellipse") {
    const double a = p.number("a", 1.4);
    require(a >= 1.0 && a < std::numbers::pi / 2.0, "ellipse: a must lie in [1, pi/2)");
    shape = mutable_copy(detail::make_ellipse(a));
  } else if (name == "tube") {
    const std::string base = p.text("base");
    const double sigma = p.number("sigma", 0.0);
    ModelParams base_params;
    if (base == "interval") {
      base_params["length"] = format_number(p.number("length", 1.0));
    } else if (base == "circle") {
      base_params["radius"] = format_number(p.number("radius", 1.0));
    } else if (base == "arc") {
      base_params["radius"] = format_number(p.number("radius", 1.0));
      base_params["length"] = format_number(p.number("length", 2.0));
      require(std::stod(base_params["length"]) / std::stod(base_params["radius"]) <= std::numbers::pi,
              "tube: arc span must not exceed pi");
    } else if (base == "ellipse") {
      const double a = p.number("a", 1.4);
      require(a >= 1.0 && a < std::numbers::pi / 2.0, "tube: ellipse a must lie in [1, pi/2)");
      base_params["a"] = format_number(a);
    }
    p.finish();
    shape = mutable_copy(detail::make_tube(base, base_params, sigma));
  } else {
    throw ValidationError("unknown model '" + name +
                          "' (expected interval, rectangle, disk, circle, arc, ellipse or tube)");
  }
  p.finish();
  shape->params = p.canonical;
  return ManifoldModel(std::move(shape));
}

PointCloud sample(const ManifoldModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("sample: n must be at least 2");
  detail::Rng rng(seed);
  Points pts(static_cast<Eigen::Index>(n), model.ambient_dim());
  for (std::size_t i = 0; i < n; ++i) pts.row(static_cast<Eigen::Index>(i)) = model.shape().draw(rng);
  return PointCloud{std::move(pts), model, seed};
}

EllipseSpec make_ellipse_spec(double a) {
  EllipseSpec s;
  s.a = a;
  s.b = solve_b(a);
  s.perimeter = ellipse_perimeter(s.a, s.b);
  return s;
}

double regularity_constant(double r, double reach) {
  if (!std::isfinite(reach)) return 0.0;
  return r < 0.5 * reach ? 4.0 * r / reach : 1.0;
}

RegularityCheck regularity_constant_check(
    const ManifoldModel& model,
    const std::vector<std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd>>& pairs) {
  RegularityCheck out;
  const double reach = model.reach();
  for (const auto& [x, y] : pairs) {
    const double chord = (x - y).norm();
    if (chord <= 0.0) continue;
    if (std::isfinite(reach) && chord >= 0.5 * reach) continue;
    const double ratio = model.intrinsic_distance(x, y) / chord - 1.0;
    const double bound = std::isfinite(reach) ? 4.0 * chord / reach : 0.0;
    out.max_ratio = std::max(out.max_ratio, ratio);
    const double excess = ratio - bound;
    if (out.pairs_checked == 0 || excess > out.max_bound_excess) out.max_bound_excess = excess;
    ++out.pairs_checked;
    // floating-point slack on the ratio
    if (excess > 1e-12) out.all_within_bound = false;
  }
  return out;
}

}  // namespace mvu
