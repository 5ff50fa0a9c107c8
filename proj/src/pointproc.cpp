#include "setdist/pointproc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "setdist/error.hpp"
#include "setdist/rng.hpp"

namespace setdist {
namespace {

void check_window(const Window& w) {
  if (!(w.width > 0.0) || !(w.height > 0.0) || !(w.pixels_per_unit > 0.0)) {
    throw InputError("window dimensions and resolution must be positive");
  }
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(what) + " must be positive");
  }
}

Point uniform_in(Rng& rng, double x0, double y0, double x1, double y1) {
  const double x = rng.uniform(x0, x1);
  const double y = rng.uniform(y0, y1);
  return {x, y};
}

}  // namespace

int Window::pixel_width() const {
  return static_cast<int>(std::lround(width * pixels_per_unit));
}
int Window::pixel_height() const {
  return static_cast<int>(std::lround(height * pixels_per_unit));
}

void RadiusLaw::validate() const {
  if (!(lo > 0.0) || !std::isfinite(hi) || hi < lo) {
    throw InputError("radius law needs 0 < lo <= hi");
  }
  if (kind == Kind::Fixed && lo != hi) throw InputError("fixed radius law needs lo == hi");
}

double RadiusLaw::sample(Rng& rng) const {
  return kind == Kind::Fixed ? lo : rng.uniform(lo, hi);
}

double RadiusLaw::mean_square() const {
  if (kind == Kind::Fixed) return lo * lo;
  return (hi * hi * hi - lo * lo * lo) / (3.0 * (hi - lo));
}

std::size_t RasterMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

DiscUnion sim_boolean(const Window& w, double intensity, const RadiusLaw& radius,
                      std::uint64_t seed) {
  check_window(w);
  check_positive(intensity, "Boolean intensity");
  radius.validate();
  Rng rng(seed, 0);
  DiscUnion out{{}, w, {}};
  const auto count = rng.poisson(intensity * w.area());
  out.discs.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const Point c = uniform_in(rng, 0.0, 0.0, w.width, w.height);
    out.discs.push_back({c, radius.sample(rng)});
  }
  return out;
}

DiscUnion sim_cluster(const Window& w, double parent_intensity, double mean_children,
                      double cluster_radius, const RadiusLaw& radius, std::uint64_t seed) {
  check_window(w);
  check_positive(parent_intensity, "parent intensity");
  check_positive(cluster_radius, "cluster radius");
  if (!(mean_children >= 0.0)) throw InputError("mean number of children must be >= 0");
  radius.validate();
  Rng rng(seed, 0);
  DiscUnion out{{}, w, {}};
  const double x0 = -cluster_radius, y0 = -cluster_radius;
  const double x1 = w.width + cluster_radius, y1 = w.height + cluster_radius;
  const auto parents = rng.poisson(parent_intensity * (x1 - x0) * (y1 - y0));
  for (std::uint64_t p = 0; p < parents; ++p) {
    const Point parent = uniform_in(rng, x0, y0, x1, y1);
    out.parents.push_back(parent);
    const auto children = rng.poisson(mean_children);
    for (std::uint64_t c = 0; c < children; ++c) {
      const double r = cluster_radius * std::sqrt(rng.uniform());
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      const Point child = parent + Point{r * std::cos(theta), r * std::sin(theta)};
      const double grain = radius.sample(rng);
      if (child.x >= 0.0 && child.x < w.width && child.y >= 0.0 && child.y < w.height) {
        out.discs.push_back({child, grain});
      }
    }
  }
  return out;
}

DiscUnion sim_repulsive(const Window& w, double proposal_intensity, double hardcore_distance,
                        const RadiusLaw& radius, std::uint64_t seed) {
  check_window(w);
  check_positive(proposal_intensity, "proposal intensity");
  check_positive(hardcore_distance, "hard-core distance");
  radius.validate();
  Rng rng(seed, 0);
  const auto count = rng.poisson(proposal_intensity * w.area());
  std::vector<Point> proposals(count);
  std::vector<double> marks(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    proposals[i] = uniform_in(rng, 0.0, 0.0, w.width, w.height);
    marks[i] = rng.uniform();
  }

  const double cell = hardcore_distance;
  const int gx = std::max(1, static_cast<int>(std::ceil(w.width / cell)));
  const int gy = std::max(1, static_cast<int>(std::ceil(w.height / cell)));
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(gx) * gy);
  auto bucket_of = [&](Point p) {
    const int bx = std::clamp(static_cast<int>(p.x / cell), 0, gx - 1);
    const int by = std::clamp(static_cast<int>(p.y / cell), 0, gy - 1);
    return std::pair{bx, by};
  };
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto [bx, by] = bucket_of(proposals[i]);
    buckets[static_cast<std::size_t>(by) * gx + bx].push_back(i);
  }

  DiscUnion out{{}, w, {}};
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto [bx, by] = bucket_of(proposals[i]);
    bool retained = true;
    for (int dy = -1; dy <= 1 && retained; ++dy) {
      for (int dx = -1; dx <= 1 && retained; ++dx) {
        const int nx = bx + dx, ny = by + dy;
        if (nx < 0 || ny < 0 || nx >= gx || ny >= gy) continue;
        for (std::size_t j : buckets[static_cast<std::size_t>(ny) * gx + nx]) {
          if (j != i && marks[j] < marks[i] &&
              distance(proposals[i], proposals[j]) < hardcore_distance) {
            retained = false;
            break;
          }
        }
      }
    }
    if (retained) out.discs.push_back({proposals[i], 0.0});
  }
  for (Disc& d : out.discs) d.radius = radius.sample(rng);
  return out;
}

RasterMask rasterize(const DiscUnion& u) {
  check_window(u.window);
  const int W = u.window.pixel_width();
  const int H = u.window.pixel_height();
  const double ppu = u.window.pixels_per_unit;
  RasterMask mask(W, H);
  for (const Disc& d : u.discs) {
    const double cx = d.center.x * ppu, cy = d.center.y * ppu, r = d.radius * ppu;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - r - 0.5)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(cx + r - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - r - 0.5)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(cy + r - 0.5)));
    const double r2 = r * r;
    for (int y = y0; y <= y1; ++y) {
      const double dy = y + 0.5 - cy;
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx;
        if (dx * dx + dy * dy <= r2) mask.set(x, y, true);
      }
    }
  }
  return mask;
}

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::Boolean: return "boolean";
    case ProcessKind::Cluster: return "cluster";
    case ProcessKind::Repulsive: return "repulsive";
  }
  return "unknown";
}

ProcessKind parse_process_kind(const std::string& name) {
  if (name == "boolean") return ProcessKind::Boolean;
  if (name == "cluster") return ProcessKind::Cluster;
  if (name == "repulsive") return ProcessKind::Repulsive;
  throw InputError("unknown process kind '" + name + "'");
}

void ProcessSpec::validate() const {
  radius.validate();
  check_positive(intensity, "process intensity");
  check_positive(optimal_radius, "optimal covering radius");
  if (kind == ProcessKind::Cluster) {
    check_positive(cluster_radius, "cluster radius");
    if (!(mean_children >= 0.0)) throw InputError("mean number of children must be >= 0");
  }
  if (kind == ProcessKind::Repulsive) check_positive(hardcore_distance, "hard-core distance");
}

ProcessSpec default_process(ProcessKind kind) {
  ProcessSpec p;
  p.name = to_string(kind);
  p.kind = kind;
  p.radius = RadiusLaw::uniform(8.0, 16.0);
  switch (kind) {
    case ProcessKind::Boolean:
      // Coverage 1 - exp(-lambda pi E[R^2]) = 0.3.
      p.intensity = -std::log(0.7) / (std::numbers::pi * p.radius.mean_square());
      p.optimal_radius = 7.0;
      break;
    case ProcessKind::Cluster:
      p.mean_children = 6.0;
      p.cluster_radius = 40.0;
      p.intensity = 4e-4;
      p.optimal_radius = 13.0;
      break;
    case ProcessKind::Repulsive:
      p.hardcore_distance = 30.0;
      p.intensity = 1e-3;
      p.optimal_radius = 5.0;
      break;
  }
  return p;
}

DiscUnion simulate(const ProcessSpec& spec, const Window& w, std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case ProcessKind::Boolean: return sim_boolean(w, spec.intensity, spec.radius, seed);
    case ProcessKind::Cluster:
      return sim_cluster(w, spec.intensity, spec.mean_children, spec.cluster_radius, spec.radius,
                         seed);
    case ProcessKind::Repulsive:
      return sim_repulsive(w, spec.intensity, spec.hardcore_distance, spec.radius, seed);
  }
  throw InputError("unknown process kind");
}

}  // namespace setdist
