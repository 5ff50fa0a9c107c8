#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "setdist/geometry.hpp"

namespace setdist {

/// Observation window [0, width] x [0, height] in world units, rasterized
/// at `pixels_per_unit`.
struct Window {
  double width = 400.0;
  double height = 400.0;
  double pixels_per_unit = 1.0;

  double area() const { return width * height; }
  int pixel_width() const;
  int pixel_height() const;
};

class Rng;

struct RadiusLaw {
  enum class Kind { Fixed, Uniform };
  Kind kind = Kind::Uniform;
  double lo = 8.0;
  double hi = 16.0;

  static RadiusLaw fixed(double r) { return {Kind::Fixed, r, r}; }
  static RadiusLaw uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  void validate() const;
  double sample(Rng& rng) const;
  double mean_square() const;
};

struct DiscUnion {
  std::vector<Disc> discs;
  Window window;
  /// Cluster parents (including those outside the window); empty otherwise.
  std::vector<Point> parents;
};

/// Binary image, row-major, row 0 first.
struct RasterMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  RasterMask() = default;
  RasterMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool on) { bits[static_cast<std::size_t>(y) * width + x] = on ? 1 : 0; }
  std::size_t count() const;
  friend bool operator==(const RasterMask&, const RasterMask&) = default;
};

/// Boolean model: Poisson(intensity * area) centres uniform in the window,
/// i.i.d. radii independent of the centres.
DiscUnion sim_boolean(const Window& w, double intensity, const RadiusLaw& radius,
                      std::uint64_t seed);

/// Matern cluster process. Parents form a Poisson process of the given
/// intensity on the window dilated by `cluster_radius`; each parent gets
/// Poisson(mean_children) children uniform in the disc of `cluster_radius`
/// around it. Children outside the window are dropped, parents are not
/// returned as grains.
DiscUnion sim_cluster(const Window& w, double parent_intensity, double mean_children,
                      double cluster_radius, const RadiusLaw& radius, std::uint64_t seed);

/// Matern type-II hard-core process: Poisson proposals with uniform marks;
/// a proposal survives iff no other proposal within `hardcore_distance` has
/// a smaller mark.
DiscUnion sim_repulsive(const Window& w, double proposal_intensity, double hardcore_distance,
                        const RadiusLaw& radius, std::uint64_t seed);

/// Pixel (x, y) is on iff its centre lies in at least one disc.
RasterMask rasterize(const DiscUnion& u);

enum class ProcessKind { Boolean, Cluster, Repulsive };
std::string to_string(ProcessKind kind);
ProcessKind parse_process_kind(const std::string& name);

/// A named process with its parameters. `intensity` is the germ intensity
/// (Boolean), parent intensity (cluster) or proposal intensity (repulsive).
struct ProcessSpec {
  std::string name;
  ProcessKind kind = ProcessKind::Boolean;
  double intensity = 0.0;
  double mean_children = 0.0;
  double cluster_radius = 0.0;
  double hardcore_distance = 0.0;
  RadiusLaw radius;
  /// Covering-disc radius (pixels) that approximates this process well.
  double optimal_radius = 7.0;

  void validate() const;
};

ProcessSpec default_process(ProcessKind kind);
DiscUnion simulate(const ProcessSpec& spec, const Window& w, std::uint64_t seed);

}  // namespace setdist
