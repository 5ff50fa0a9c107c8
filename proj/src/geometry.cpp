#include "setdist/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "setdist/error.hpp"

namespace setdist {

class GeometryAccess {
 public:
  static ConvexBody make(std::vector<Point> vertices) {
    return ConvexBody(ConvexBody::Unchecked{}, std::move(vertices));
  }
};

namespace {

// Points on the clip line within this signed distance count as inside.
constexpr double kSideTolerance = 1e-10;

template <class Labels>
void merge_close(std::vector<Point>& pts, Labels* labels) {
  if (pts.size() < 2) return;
  std::vector<Point> out;
  std::vector<int> out_labels;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!out.empty() && distance(out.back(), pts[i]) < ConvexBody::kMergeTolerance) {
      // Zero-length edge out.back() -> pts[i]; keep pts[i]'s outgoing edge.
      if (labels) out_labels.back() = (*labels)[i];
      continue;
    }
    out.push_back(pts[i]);
    if (labels) out_labels.push_back((*labels)[i]);
  }
  while (out.size() > 1 &&
         distance(out.back(), out.front()) < ConvexBody::kMergeTolerance) {
    out.pop_back();
    if (labels) out_labels.pop_back();
  }
  pts = std::move(out);
  if (labels) *labels = std::move(out_labels);
}

double signed_area(std::span<const Point> v) {
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    twice += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * twice;
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

AngleGrid::AngleGrid(std::size_t n) {
  if (n == 0) throw InputError("angle grid needs at least one direction");
  angles_.resize(n);
  directions_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) /
                     static_cast<double>(n);
    angles_[i] = a;
    if ((4 * i) % n == 0) {
      static constexpr Point kAxes[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      directions_[i] = kAxes[(4 * i) / n];
    } else {
      directions_[i] = {std::cos(a), std::sin(a)};
    }
  }
}

ConvexBody::ConvexBody(std::vector<Point> vertices) {
  if (vertices.empty()) throw InputError("empty body");
  for (const Point& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InputError("body vertex is not finite");
    }
  }
  merge_close<std::vector<int>>(vertices, nullptr);
  const std::size_t n = vertices.size();
  if (n >= 3) {
    const double a = signed_area(vertices);
    double scale = 0.0;
    for (const Point& p : vertices) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    const bool degenerate = std::abs(a) <= 1e-12 * std::max(1.0, scale * scale);
    if (!degenerate) {
      if (a < 0.0) throw InputError("body vertices are not counter-clockwise");
      for (std::size_t i = 0; i < n; ++i) {
        const Point e1 = vertices[(i + 1) % n] - vertices[i];
        const Point e2 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        const double len = std::hypot(e1.x, e1.y) * std::hypot(e2.x, e2.y);
        if (cross(e1, e2) < -1e-9 * len) throw InputError("body is not convex");
      }
    }
  }
  vertices_ = std::move(vertices);
}

SupportVector support_polygon(std::span<const Point> vertices,
                              const AngleGrid& grid) {
  if (vertices.empty()) throw InputError("empty body");
  SupportVector out;
  out.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point u = grid.direction(i);
    double best = dot(vertices[0], u);
    for (std::size_t k = 1; k < vertices.size(); ++k) {
      best = std::max(best, dot(vertices[k], u));
    }
    out.values[i] = best;
  }
  return out;
}

SupportVector support_polygon(const ConvexBody& body, const AngleGrid& grid) {
  return support_polygon(body.vertices(), grid);
}

SupportVector support_disc(const Disc& disc, const AngleGrid& grid) {
  if (!(disc.radius > 0.0)) throw InputError("disc radius must be positive");
  SupportVector out;
  out.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.values[i] = dot(disc.center, grid.direction(i)) + disc.radius;
  }
  return out;
}

double hausdorff_grid(const SupportVector& a, const SupportVector& b) {
  if (a.size() != b.size()) {
    throw InputError("support vectors live on different angle grids");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

LabeledPolygon LabeledPolygon::rectangle(double x0, double y0, double x1,
                                         double y1, int label) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, {label, label, label, label}};
}

ConvexBody LabeledPolygon::body() const {
  if (vertices.empty()) throw InputError("empty body");
  return GeometryAccess::make(vertices);
}

LabeledPolygon clip_labeled(const LabeledPolygon& poly, Point point_on_line,
                            Point inward_normal, int label) {
  LabeledPolygon out;
  const std::size_t n = poly.vertices.size();
  if (n == 0) return out;
  const double norm = std::hypot(inward_normal.x, inward_normal.y);
  if (!(norm > 0.0)) throw InputError("clip normal must be nonzero");
  const Point u = (1.0 / norm) * inward_normal;
  auto side = [&](Point p) { return dot(p - point_on_line, u); };

  if (n == 1) {
    if (side(poly.vertices[0]) >= -kSideTolerance) out = poly;
    return out;
  }
  out.vertices.reserve(n + 1);
  out.edge_labels.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const Point cur = poly.vertices[k];
    const Point next = poly.vertices[(k + 1) % n];
    const double dc = side(cur);
    const double dn = side(next);
    const bool cur_in = dc >= -kSideTolerance;
    const bool next_in = dn >= -kSideTolerance;
    if (cur_in) {
      out.vertices.push_back(cur);
      if (next_in) {
        out.edge_labels.push_back(poly.edge_labels[k]);
      } else {
        out.edge_labels.push_back(poly.edge_labels[k]);
        const double t = dc / (dc - dn);
        out.vertices.push_back(cur + t * (next - cur));
        out.edge_labels.push_back(label);
      }
    } else if (next_in) {
      const double t = dc / (dc - dn);
      out.vertices.push_back(cur + t * (next - cur));
      out.edge_labels.push_back(poly.edge_labels[k]);
    }
  }
  merge_close(out.vertices, &out.edge_labels);
  return out;
}

std::optional<ConvexBody> clip_halfplane(const ConvexBody& body,
                                         Point point_on_line,
                                         Point inward_normal) {
  LabeledPolygon poly;
  poly.vertices.assign(body.vertices().begin(), body.vertices().end());
  poly.edge_labels.assign(poly.vertices.size(), 0);
  auto clipped = clip_labeled(poly, point_on_line, inward_normal, 1);
  if (clipped.empty()) return std::nullopt;
  return clipped.body();
}

ConvexBody disc_to_polygon(const Disc& disc, int k) {
  if (k < 3) throw InputError("disc polygon needs at least 3 vertices");
  if (!(disc.radius > 0.0)) throw InputError("disc radius must be positive");
  std::vector<Point> v(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double a = 2.0 * std::numbers::pi * j / k;
    v[static_cast<std::size_t>(j)] =
        disc.center + Point{disc.radius * std::cos(a), disc.radius * std::sin(a)};
  }
  return GeometryAccess::make(std::move(v));
}

double area(const ConvexBody& body) {
  return std::max(0.0, signed_area(body.vertices()));
}

Point centroid(const ConvexBody& body) {
  const auto v = body.vertices();
  const double a = signed_area(v);
  if (v.size() >= 3 && a > 1e-14) {
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point p = v[i];
      const Point q = v[(i + 1) % v.size()];
      const double c = cross(p, q);
      cx += (p.x + q.x) * c;
      cy += (p.y + q.y) * c;
    }
    return {cx / (6.0 * a), cy / (6.0 * a)};
  }
  Point mean;
  for (const Point& p : v) mean = mean + p;
  return (1.0 / static_cast<double>(v.size())) * mean;
}

ConvexBody translated(const ConvexBody& body, Point offset) {
  std::vector<Point> v(body.vertices().begin(), body.vertices().end());
  for (Point& p : v) p = p + offset;
  return GeometryAccess::make(std::move(v));
}

bool contains(const ConvexBody& body, Point p, double tolerance) {
  const auto v = body.vertices();
  if (v.size() == 1) return distance(v[0], p) <= tolerance;
  if (v.size() == 2 || signed_area(v) <= 1e-14) {
    // Degenerate: distance to the farthest-apart vertex pair's segment.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point a = v[i];
      const Point b = v[(i + 1) % v.size()];
      const Point ab = b - a;
      const double len2 = dot(ab, ab);
      const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, distance(a + t * ab, p));
    }
    return best <= tolerance;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i];
    const Point e = v[(i + 1) % v.size()] - a;
    const double len = std::hypot(e.x, e.y);
    if (len == 0.0) continue;
    if (cross(e, p - a) / len < -tolerance) return false;
  }
  return true;
}

}  // namespace setdist
