#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "setdist/geometry.hpp"
#include "setdist/hyptest.hpp"
#include "setdist/kernels.hpp"
#include "setdist/pointproc.hpp"

namespace setdist {

/// Where a piece is anchored before its support function is taken.
enum class OriginPolicy {
  Generator,  // the Poisson-disc centre that generated the cell
  Centroid,   // the area centroid of the piece
};
std::string to_string(OriginPolicy policy);
OriginPolicy parse_origin_policy(const std::string& name);

struct CoverConfig {
  double radius = 7.0;  // covering-disc radius R, pixels
  int disc_poly_k = 64;
  OriginPolicy origin = OriginPolicy::Generator;

  void validate() const;
};

/// Voronoi tessellation of a rectangle [0, width] x [0, height].
struct Tessellation {
  double width = 0.0;
  double height = 0.0;
  std::vector<Point> centers;
  std::vector<ConvexBody> cells;
  /// Sorted neighbour lists; i ~ j iff their cells share an edge of
  /// positive length.
  std::vector<std::vector<std::size_t>> adjacency;

  bool adjacent(std::size_t i, std::size_t j) const;
};

/// Maximal hard-core cover of the foreground of `mask` (pixel units, pixel
/// (x, y) has centre (x + 0.5, y + 0.5)).
///
/// Guarantees: every returned point lies in a foreground pixel, pairwise
/// distances are >= radius, and every foreground pixel centre lies within
/// `radius` of some point. Built by dart throwing with an active list
/// (candidates in the annulus [R, 2R]), a random-order dart pass over all
/// foreground pixels, and a final sweep that inserts a centre at any
/// still-uncovered pixel centre until nothing changes.
std::vector<Point> poisson_disc_cover(const RasterMask& mask, double radius, std::uint64_t seed);

/// Cells by half-plane clipping of the rectangle against the bisectors of
/// the other centres, nearest first; clipping stops once the next centre is
/// farther than twice the current cell radius.
Tessellation voronoi(std::span<const Point> centers, double width, double height);

/// piece i = cell i intersected with the k-gon inscribed in the covering
/// disc of centre i. Empty pieces come back as nullopt and are reported in
/// `warnings` when given.
std::vector<std::optional<ConvexBody>> clip_cells_to_discs(
    const Tessellation& t, const CoverConfig& cfg, std::vector<std::string>* warnings = nullptr);

/// Greedy random independent set: visit cells in a seeded random order and
/// accept a cell iff none of its neighbours was accepted; stop at m.
/// Throws PipelineError when fewer than m cells can be accepted.
std::vector<std::size_t> sample_noneighbour_cells(const Tessellation& t, std::size_t m,
                                                  std::uint64_t seed);

std::vector<SupportVector> extract_support_sample(
    const Tessellation& t, std::span<const std::optional<ConvexBody>> pieces,
    std::span<const std::size_t> indices, const AngleGrid& grid, OriginPolicy origin);

/// Everything the pipeline produced for one realisation.
struct Approximation {
  std::vector<Point> centers;
  Tessellation tessellation;
  std::vector<std::optional<ConvexBody>> pieces;
  std::vector<std::size_t> chosen;
  std::vector<SupportVector> samples;
  std::vector<std::string> warnings;
};

/// cover -> voronoi -> clip; the cover uses derive_seed(seed, 1).
Approximation divide(const RasterMask& mask, const CoverConfig& cfg, std::uint64_t seed);

/// sample(m) -> extract on a divided realisation; the draw uses
/// derive_seed(seed, 2). Replaces any earlier sample.
void draw_sample(Approximation& a, std::size_t m, const AngleGrid& grid, OriginPolicy origin,
                 std::uint64_t seed);

/// divide followed by draw_sample with the same seed.
Approximation approximate(const RasterMask& mask, const CoverConfig& cfg, std::size_t m,
                          const AngleGrid& grid, std::uint64_t seed);

struct TwoRealisationConfig {
  CoverConfig cover;
  std::size_t m = 100;
  std::size_t n = 10;
  KernelSpec kernel = ExpWeighted{{}, 3};
  TestMethod method = TestMethod::Permutation;
  std::size_t permutations = kDefaultPermutations;
};

/// Runs the test on the samples of two already-approximated realisations.
TestResult test_samples(const std::vector<SupportVector>& a, const std::vector<SupportVector>& b,
                        const KernelSpec& kernel, TestMethod method, std::size_t permutations,
                        std::uint64_t seed);

/// Full pipeline on both masks with a shared covering radius. The result
/// metadata records R, m, n, the origin policy and the seed.
TestResult two_realisation_test(const RasterMask& mask1, const RasterMask& mask2,
                                const TwoRealisationConfig& cfg, std::uint64_t seed);

}  // namespace setdist
