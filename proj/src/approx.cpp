#include "setdist/approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "setdist/error.hpp"
#include "setdist/rng.hpp"

namespace setdist {
namespace {

constexpr int kWindowLabel = -1;
constexpr int kDiscLabel = -2;
constexpr int kBridsonCandidates = 30;

// Uniform grid with cell size R / sqrt(2): at most one cover point per cell.
class CoverGrid {
 public:
  CoverGrid(int width, int height, double radius)
      : radius_(radius), cell_(radius / std::numbers::sqrt2) {
    nx_ = std::max(1, static_cast<int>(std::ceil(width / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(height / cell_)));
    slots_.assign(static_cast<std::size_t>(nx_) * ny_, -1);
  }

  // Distance to the nearest stored point is >= R (inhibition holds).
  bool admissible(Point p) const { return nearest_beyond(p, radius_, false); }
  // Some stored point lies within distance R (pixel covered).
  bool covered(Point p) const { return !nearest_beyond(p, radius_, true); }

  void insert(Point p) {
    slots_[slot(p)] = static_cast<int>(points_.size());
    points_.push_back(p);
  }
  const std::vector<Point>& points() const { return points_; }

 private:
  std::size_t slot(Point p) const {
    const int gx = std::clamp(static_cast<int>(p.x / cell_), 0, nx_ - 1);
    const int gy = std::clamp(static_cast<int>(p.y / cell_), 0, ny_ - 1);
    return static_cast<std::size_t>(gy) * nx_ + gx;
  }

  // True iff every stored point is farther than r (strict) or at least r
  // (non-strict) from p.
  bool nearest_beyond(Point p, double r, bool strict) const {
    const int gx = std::clamp(static_cast<int>(p.x / cell_), 0, nx_ - 1);
    const int gy = std::clamp(static_cast<int>(p.y / cell_), 0, ny_ - 1);
    const int reach = 2;
    for (int y = std::max(0, gy - reach); y <= std::min(ny_ - 1, gy + reach); ++y) {
      for (int x = std::max(0, gx - reach); x <= std::min(nx_ - 1, gx + reach); ++x) {
        const int idx = slots_[static_cast<std::size_t>(y) * nx_ + x];
        if (idx < 0) continue;
        const double d = distance(points_[static_cast<std::size_t>(idx)], p);
        if (strict ? d <= r : d < r) return false;
      }
    }
    return true;
  }

  double radius_;
  double cell_;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> slots_;
  std::vector<Point> points_;
};

bool in_foreground(const RasterMask& mask, Point p) {
  if (p.x < 0.0 || p.y < 0.0) return false;
  const int x = static_cast<int>(p.x);
  const int y = static_cast<int>(p.y);
  return x < mask.width && y < mask.height && mask.at(x, y);
}

void grow_from_active(const RasterMask& mask, CoverGrid& grid, Rng& rng,
                      std::vector<Point>& active, double radius) {
  while (!active.empty()) {
    const auto pick = static_cast<std::size_t>(rng.below(active.size()));
    const Point base = active[pick];
    bool placed = false;
    for (int attempt = 0; attempt < kBridsonCandidates; ++attempt) {
      // Uniform by area in the annulus [R, 2R].
      const double rr = radius * std::sqrt(1.0 + 3.0 * rng.uniform());
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      const Point cand = base + Point{rr * std::cos(theta), rr * std::sin(theta)};
      if (!in_foreground(mask, cand) || !grid.admissible(cand)) continue;
      grid.insert(cand);
      active.push_back(cand);
      placed = true;
      break;
    }
    if (!placed) {
      active[pick] = active.back();
      active.pop_back();
    }
  }
}

double polygon_radius(const std::vector<Point>& vertices, Point center) {
  double r = 0.0;
  for (const Point& v : vertices) r = std::max(r, distance(v, center));
  return r;
}

}  // namespace

std::string to_string(OriginPolicy policy) {
  return policy == OriginPolicy::Generator ? "generator" : "centroid";
}

OriginPolicy parse_origin_policy(const std::string& name) {
  if (name == "generator") return OriginPolicy::Generator;
  if (name == "centroid") return OriginPolicy::Centroid;
  throw InputError("unknown origin policy '" + name + "'");
}

void CoverConfig::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError("covering radius must be positive");
  if (disc_poly_k < 16) throw InputError("disc polygon needs at least 16 vertices");
}

bool Tessellation::adjacent(std::size_t i, std::size_t j) const {
  const auto& nb = adjacency[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Point> poisson_disc_cover(const RasterMask& mask, double radius, std::uint64_t seed) {
  if (!(radius >= 1.0)) throw InputError("covering radius must be at least one pixel");
  std::vector<std::size_t> foreground;
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (mask.bits[i]) foreground.push_back(i);
  }
  if (foreground.empty()) throw PipelineError("nothing to cover: mask has no foreground pixels");

  const auto W = static_cast<std::size_t>(mask.width);
  auto pixel_origin = [&](std::size_t idx) {
    return Point{static_cast<double>(idx % W), static_cast<double>(idx / W)};
  };

  CoverGrid grid(mask.width, mask.height, radius);
  Rng rng(seed, 0);
  std::vector<Point> active;

  // Random-order darts, one per foreground pixel; every accepted dart seeds
  // active-list growth through its connected region.
  std::vector<std::size_t> order = foreground;
  rng.shuffle(order);
  for (std::size_t idx : order) {
    const Point cand = pixel_origin(idx) + Point{rng.uniform(), rng.uniform()};
    if (!grid.admissible(cand)) continue;
    grid.insert(cand);
    active.push_back(cand);
    grow_from_active(mask, grid, rng, active, radius);
  }

  // Maximality sweep at pixel centres.
  bool inserted = true;
  while (inserted) {
    inserted = false;
    for (std::size_t idx : foreground) {
      const Point c = pixel_origin(idx) + Point{0.5, 0.5};
      if (!grid.covered(c)) {
        grid.insert(c);
        inserted = true;
      }
    }
  }
  return grid.points();
}

Tessellation voronoi(std::span<const Point> centers, double width, double height) {
  if (centers.empty()) throw InputError("voronoi needs at least one centre");
  if (!(width > 0.0) || !(height > 0.0)) throw InputError("voronoi window must be non-empty");
  const std::size_t n = centers.size();
  {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return centers[a].x != centers[b].x ? centers[a].x < centers[b].x
                                          : centers[a].y < centers[b].y;
    });
    for (std::size_t k = 1; k < n; ++k) {
      if (centers[idx[k]] == centers[idx[k - 1]]) throw InputError("duplicate voronoi centres");
    }
  }

  Tessellation t;
  t.width = width;
  t.height = height;
  t.centers.assign(centers.begin(), centers.end());
  t.cells.reserve(n);
  t.adjacency.assign(n, {});

  std::vector<std::size_t> order(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point ci = centers[i];
    for (std::size_t j = 0; j < n; ++j) dist[j] = distance(ci, centers[j]);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
    });
    auto cell = LabeledPolygon::rectangle(0.0, 0.0, width, height, kWindowLabel);
    double reach = polygon_radius(cell.vertices, ci);
    for (std::size_t j : order) {
      if (j == i) continue;
      if (dist[j] > 2.0 * reach) break;
      const Point mid = 0.5 * (ci + centers[j]);
      cell = clip_labeled(cell, mid, ci - centers[j], static_cast<int>(j));
      reach = polygon_radius(cell.vertices, ci);
    }
    const std::size_t k = cell.vertices.size();
    for (std::size_t e = 0; e < k; ++e) {
      const int label = cell.edge_labels[e];
      if (label < 0) continue;
      if (distance(cell.vertices[e], cell.vertices[(e + 1) % k]) > ConvexBody::kMergeTolerance) {
        t.adjacency[i].push_back(static_cast<std::size_t>(label));
        t.adjacency[static_cast<std::size_t>(label)].push_back(i);
      }
    }
    t.cells.push_back(cell.body());
  }
  for (auto& nb : t.adjacency) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return t;
}

std::vector<std::optional<ConvexBody>> clip_cells_to_discs(const Tessellation& t,
                                                           const CoverConfig& cfg,
                                                           std::vector<std::string>* warnings) {
  cfg.validate();
  std::vector<std::optional<ConvexBody>> pieces;
  pieces.reserve(t.cells.size());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    const ConvexBody gon = disc_to_polygon({t.centers[i], cfg.radius}, cfg.disc_poly_k);
    const auto cell_vertices = t.cells[i].vertices();
    const bool inside = std::all_of(cell_vertices.begin(), cell_vertices.end(),
                                    [&](Point p) { return contains(gon, p, 0.0); });
    if (inside) {
      pieces.emplace_back(t.cells[i]);
      continue;
    }
    LabeledPolygon poly{{cell_vertices.begin(), cell_vertices.end()},
                        std::vector<int>(cell_vertices.size(), kWindowLabel)};
    const auto gv = gon.vertices();
    for (std::size_t e = 0; e < gv.size() && !poly.empty(); ++e) {
      const Point edge = gv[(e + 1) % gv.size()] - gv[e];
      poly = clip_labeled(poly, gv[e], Point{-edge.y, edge.x}, kDiscLabel);
    }
    if (poly.empty()) {
      pieces.emplace_back(std::nullopt);
      ++dropped;
    } else {
      pieces.emplace_back(poly.body());
    }
  }
  if (dropped > 0 && warnings) {
    warnings->push_back(std::to_string(dropped) + " empty cell/disc pieces dropped");
  }
  return pieces;
}

std::vector<std::size_t> sample_noneighbour_cells(const Tessellation& t, std::size_t m,
                                                  std::uint64_t seed) {
  if (m < 1) throw InputError("cell sample size m must be at least 1");
  const std::size_t n = t.centers.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, 0);
  rng.shuffle(order);
  std::vector<char> blocked(n, 0);
  std::vector<std::size_t> chosen;
  chosen.reserve(m);
  for (std::size_t idx : order) {
    if (blocked[idx]) continue;
    chosen.push_back(idx);
    if (chosen.size() == m) return chosen;
    blocked[idx] = 1;
    for (std::size_t nb : t.adjacency[idx]) blocked[nb] = 1;
  }
  throw PipelineError("insufficient non-neighbouring cells; reduce m or enlarge realisation (found " +
                      std::to_string(chosen.size()) + " of " + std::to_string(m) + ")");
}

std::vector<SupportVector> extract_support_sample(const Tessellation& t,
                                                  std::span<const std::optional<ConvexBody>> pieces,
                                                  std::span<const std::size_t> indices,
                                                  const AngleGrid& grid, OriginPolicy origin) {
  std::vector<SupportVector> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= pieces.size()) throw InputError("cell index out of range");
    if (!pieces[idx]) throw PipelineError("chosen cell " + std::to_string(idx) + " has an empty piece");
    const ConvexBody& piece = *pieces[idx];
    const Point anchor = origin == OriginPolicy::Generator ? t.centers[idx] : centroid(piece);
    out.push_back(support_polygon(translated(piece, Point{0.0, 0.0} - anchor), grid));
  }
  return out;
}

Approximation divide(const RasterMask& mask, const CoverConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Approximation a;
  a.centers = poisson_disc_cover(mask, cfg.radius, derive_seed(seed, 1));
  a.tessellation = voronoi(a.centers, mask.width, mask.height);
  a.pieces = clip_cells_to_discs(a.tessellation, cfg, &a.warnings);
  return a;
}

void draw_sample(Approximation& a, std::size_t m, const AngleGrid& grid, OriginPolicy origin,
                 std::uint64_t seed) {
  a.chosen = sample_noneighbour_cells(a.tessellation, m, derive_seed(seed, 2));
  a.samples = extract_support_sample(a.tessellation, a.pieces, a.chosen, grid, origin);
}

Approximation approximate(const RasterMask& mask, const CoverConfig& cfg, std::size_t m,
                          const AngleGrid& grid, std::uint64_t seed) {
  Approximation a = divide(mask, cfg, seed);
  draw_sample(a, m, grid, cfg.origin, seed);
  return a;
}

TestResult test_samples(const std::vector<SupportVector>& a, const std::vector<SupportVector>& b,
                        const KernelSpec& kernel, TestMethod method, std::size_t permutations,
                        std::uint64_t seed) {
  const SampleSet samples{a, b};
  switch (method) {
    case TestMethod::Permutation: return permutation_test(samples, kernel, permutations, seed);
    case TestMethod::SplitKS: return split_test(samples, kernel, Univariate::KS, seed);
    case TestMethod::SplitAD: return split_test(samples, kernel, Univariate::AD, seed);
  }
  throw InputError("unknown test method");
}

TestResult two_realisation_test(const RasterMask& mask1, const RasterMask& mask2,
                                const TwoRealisationConfig& cfg, std::uint64_t seed) {
  validate(cfg.kernel, cfg.n);
  const AngleGrid grid(cfg.n);
  const auto first = approximate(mask1, cfg.cover, cfg.m, grid, derive_seed(seed, 11));
  const auto second = approximate(mask2, cfg.cover, cfg.m, grid, derive_seed(seed, 12));
  TestResult r = test_samples(first.samples, second.samples, cfg.kernel, cfg.method,
                              cfg.permutations, derive_seed(seed, 13));
  r.seed = seed;
  r.metadata["R"] = cfg.cover.radius;
  r.metadata["m"] = cfg.m;
  r.metadata["n"] = cfg.n;
  r.metadata["disc_poly_k"] = cfg.cover.disc_poly_k;
  r.metadata["origin_policy"] = to_string(cfg.cover.origin);
  r.metadata["seed"] = seed;
  r.metadata["cells"] = {first.centers.size(), second.centers.size()};
  for (const auto* w : {&first.warnings, &second.warnings}) {
    r.warnings.insert(r.warnings.end(), w->begin(), w->end());
  }
  return r;
}

}  // namespace setdist
