#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace setdist {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double distance(Point a, Point b);

/// Directions u_i = 2*pi*i/n, i = 0..n-1.
///
/// Angles that are exact multiples of pi/2 get exact unit vectors.
class AngleGrid {
 public:
  explicit AngleGrid(std::size_t n);

  std::size_t size() const { return angles_.size(); }
  double angle(std::size_t i) const { return angles_[i]; }
  Point direction(std::size_t i) const { return directions_[i]; }
  std::span<const double> angles() const { return angles_; }

  friend bool operator==(const AngleGrid& a, const AngleGrid& b) {
    return a.size() == b.size();
  }

 private:
  std::vector<double> angles_;
  std::vector<Point> directions_;
};

/// Support function sampled on an AngleGrid. The grid is determined by its
/// size, so two vectors share a grid iff they have the same length.
struct SupportVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const SupportVector&, const SupportVector&) = default;
};

/// Convex polygon, counter-clockwise, without repeated vertices.
///
/// Points and segments are legal (degenerate) bodies. Construction merges
/// consecutive vertices closer than kMergeTolerance and throws InputError
/// for an empty vertex list or a non-convex / clockwise polygon.
class ConvexBody {
 public:
  static constexpr double kMergeTolerance = 1e-9;

  explicit ConvexBody(std::vector<Point> vertices);

  std::span<const Point> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }

  friend bool operator==(const ConvexBody&, const ConvexBody&) = default;

 private:
  struct Unchecked {};
  ConvexBody(Unchecked, std::vector<Point> vertices)
      : vertices_(std::move(vertices)) {}
  friend class GeometryAccess;

  std::vector<Point> vertices_;
};

struct Disc {
  Point center;
  double radius = 1.0;
};

SupportVector support_polygon(const ConvexBody& body, const AngleGrid& grid);
/// Throws InputError("empty body") for an empty span.
SupportVector support_polygon(std::span<const Point> vertices,
                              const AngleGrid& grid);
SupportVector support_disc(const Disc& disc, const AngleGrid& grid);

/// Grid approximation of the Hausdorff distance sup_u |h(A,u) - h(B,u)|.
double hausdorff_grid(const SupportVector& a, const SupportVector& b);

/// Intersection with {x : <x - point_on_line, inward_normal> >= 0}.
/// Returns nullopt when the intersection is empty.
std::optional<ConvexBody> clip_halfplane(const ConvexBody& body,
                                         Point point_on_line,
                                         Point inward_normal);

/// Regular k-gon inscribed in the disc, vertex 0 at angle 0.
ConvexBody disc_to_polygon(const Disc& disc, int k);

double area(const ConvexBody& body);
/// Area centroid; falls back to the vertex mean for degenerate bodies.
Point centroid(const ConvexBody& body);
ConvexBody translated(const ConvexBody& body, Point offset);
/// Closed containment test with absolute tolerance.
bool contains(const ConvexBody& body, Point p, double tolerance = 1e-9);

/// Polygon whose edges remember which constraint produced them.
/// edge_labels[k] tags the edge from vertices[k] to vertices[k + 1].
struct LabeledPolygon {
  std::vector<Point> vertices;
  std::vector<int> edge_labels;

  static LabeledPolygon rectangle(double x0, double y0, double x1, double y1,
                                  int label);
  bool empty() const { return vertices.empty(); }
  ConvexBody body() const;
};

/// Sutherland-Hodgman step that labels the new edge along the clip line.
LabeledPolygon clip_labeled(const LabeledPolygon& poly, Point point_on_line,
                            Point inward_normal, int label);

}  // namespace setdist
