// Acceptance criteria C1..C9. With no arguments every criterion runs;
// otherwise only the named ones ("C1", "C6", ...). One PASS/FAIL line is
// printed per criterion and the exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "setdist/approx.hpp"
#include "setdist/geometry.hpp"
#include "setdist/hyptest.hpp"
#include "setdist/kernels.hpp"
#include "setdist/nstat.hpp"
#include "setdist/pointproc.hpp"
#include "setdist/rng.hpp"
#include "setdist/study.hpp"

namespace {

using namespace setdist;

constexpr std::uint64_t kSeed = 20160901;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- quadrature

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tensor Gauss-Legendre rule of order N on [0, 40]^k; the weight exp(-x)
// is below 5e-18 beyond the cut.
constexpr double kCut = 40.0;

template <unsigned N>
double orthant_integral(const std::vector<double>& b, const std::function<double(double)>& f,
                        std::size_t j = 0, double phase = 0.0) {
  if (j == b.size()) return f(phase);
  return boost::math::quadrature::gauss<double, N>::integrate(
      [&](double x) { return std::exp(-x) * orthant_integral<N>(b, f, j + 1, phase + b[j] * x); },
      0.0, kCut);
}

double one_minus_cos(double t) {
  const double s = std::sin(0.5 * t);
  return 2.0 * s * s;
}

// Defining integral of one subset term over R^k as a sum over orthants,
// after the substitution t_j = w_j x_j.
template <unsigned N>
double subset_integral(const std::vector<double>& a, const std::vector<double>& w) {
  const std::size_t k = a.size();
  double jac = 1.0;
  for (double v : w) jac *= v;
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    std::vector<double> b(k);
    for (std::size_t j = 0; j < k; ++j) b[j] = ((mask >> j) & 1 ? -1.0 : 1.0) * a[j] * w[j];
    total += orthant_integral<N>(b, one_minus_cos);
  }
  return jac * total;
}

template <unsigned N>
double subset_sum(const std::vector<double>& a, const std::vector<double>& w) {
  double total = 0.0;
  for (const auto& s : subsets_up_to(a.size(), static_cast<int>(a.size()))) {
    std::vector<double> as, ws;
    for (std::size_t i : s) {
      as.push_back(a[i]);
      ws.push_back(w[i]);
    }
    total += subset_integral<N>(as, ws);
  }
  return total;
}

// Integral of g(sum a_j t_j) prod exp(-t_j / w_j) over [0, inf)^k.
template <unsigned N>
double orthant_oracle(const std::vector<double>& a, const std::vector<double>& w,
                      double (*g)(double)) {
  std::vector<double> b(a.size());
  double jac = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    b[j] = a[j] * w[j];
    jac *= w[j];
  }
  return jac * orthant_integral<N>(b, g);
}

double cos_fn(double t) { return std::cos(t); }
double sin_fn(double t) { return std::sin(t); }

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

Outcome c1_kernel_integral() {
  Rng rng(kSeed, 1);
  double worst_closed = 0.0, worst_orth = 0.0, worst_order = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t k = 1 + static_cast<std::size_t>(c % 3);
    std::vector<double> a(k), w(k);
    for (std::size_t j = 0; j < k; ++j) {
      w[j] = rng.uniform(0.3, 2.0);
      a[j] = rng.uniform(-1.5, 1.5) / w[j];
    }
    const double quad = subset_sum<64>(a, w);
    worst_order = std::max(worst_order, rel_err(subset_sum<48>(a, w), quad));
    worst_closed = std::max(worst_closed, rel_err(exp_weighted_L(a, w, static_cast<int>(k)), quad));
    const auto rec = orthant_recursion(a, w);
    const double qc = orthant_oracle<64>(a, w, cos_fn), qs = orthant_oracle<64>(a, w, sin_fn);
    worst_orth = std::max({worst_orth, rel_err(rec.cos_part, qc), rel_err(rec.sin_part, qs)});
  }
  return {worst_closed <= 1e-6 && worst_orth <= 1e-6 && worst_order <= 1e-9,
          "closed form max rel err " + fmt("%.2e", worst_closed) + ", orthant recursion " +
              fmt("%.2e", worst_orth) + ", quadrature order 48 vs 64 " + fmt("%.2e", worst_order)};
}

Outcome c2_typo_check() {
  const std::vector<double> a{1.0}, w{2.0};
  const double got = orthant_recursion(a, w).cos_part;
  const double quad = orthant_oracle<64>(a, w, cos_fn);
  const bool pass = std::abs(got - 0.4) <= 1e-12 && std::abs(quad - 0.4) <= 1e-10 &&
                    std::abs(got - 0.2) > 0.1;
  return {pass, "I_c(1; a=1, w=2) = " + fmt("%.15g", got) + ", quadrature " + fmt("%.15g", quad)};
}

// ---------------------------------------------------------------- statistics

SupportVector random_vector(Rng& rng, std::size_t n, double shift) {
  SupportVector v;
  for (std::size_t i = 0; i < n; ++i) v.values.push_back(rng.uniform(0.0, 4.0) + shift);
  return v;
}

Outcome c3_u_statistic() {
  Rng rng(kSeed, 3);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t m1 = 2 + rng.below(9), m2 = 2 + rng.below(9), n = 3 + rng.below(8);
    SampleSet s;
    for (std::size_t i = 0; i < m1; ++i) s.group_a.push_back(random_vector(rng, n, 0.0));
    for (std::size_t i = 0; i < m2; ++i) s.group_b.push_back(random_vector(rng, n, 0.5));
    for (const auto& spec : default_kernels()) {
      long double ab = 0.0L, aa = 0.0L, bb = 0.0L;
      for (const auto& x : s.group_a) {
        for (const auto& y : s.group_b) ab += kernel_eval(spec, x, y);
      }
      for (const auto& x : s.group_a) {
        for (const auto& y : s.group_a) aa += kernel_eval(spec, x, y);
      }
      for (const auto& x : s.group_b) {
        for (const auto& y : s.group_b) bb += kernel_eval(spec, x, y);
      }
      const long double a = m1, b = m2;
      const auto oracle =
          static_cast<double>(2.0L * ab / (a * b) - aa / (a * (a - 1.0L)) - bb / (b * (b - 1.0L)));
      std::vector<std::size_t> id(m1 + m2);
      std::iota(id.begin(), id.end(), std::size_t{0});
      const double got = nhat_permuted(kernel_matrix(s, spec), id, m1);
      worst = std::max(worst, std::abs(got - oracle));
    }
  }
  return {worst <= 1e-12, "max abs err " + fmt("%.2e", worst)};
}

Outcome c4_negative_definite() {
  Rng rng(kSeed, 4);
  double worst = -kInf;
  std::size_t checks = 0;
  for (const auto& spec : default_kernels()) {
    for (int t = 0; t < 1000; ++t) {
      const std::size_t m = 2 + rng.below(11);
      std::vector<SupportVector> x;
      for (std::size_t i = 0; i < m; ++i) x.push_back(random_vector(rng, 10, 0.0));
      std::vector<double> c(m);
      double mean = 0.0;
      for (double& v : c) {
        v = rng.uniform(-1.0, 1.0);
        mean += v;
      }
      for (double& v : c) v -= mean / static_cast<double>(m);
      double q = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) q += c[i] * c[j] * kernel_eval(spec, x[i], x[j]);
      }
      worst = std::max(worst, q);
      ++checks;
    }
  }
  return {worst <= 1e-9, std::to_string(checks) + " forms, max " + fmt("%.2e", worst)};
}

// Random convex polygon: hull of uniform points in a square of random size
// at a random position.
SupportVector random_body_support(Rng& rng, const AngleGrid& grid) {
  const double side = rng.uniform(1.0, 3.0);
  const Point shift{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(shift + Point{rng.uniform(0, side), rng.uniform(0, side)});
  return support_polygon(std::span<const Point>(pts), grid);
}

double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - p[i], p[i] - static_cast<double>(i) / n));
  }
  return kolmogorov_sf(std::sqrt(n) * d);
}

Outcome c5_null_calibration() {
  const AngleGrid grid(10);
  const KernelSpec spec = ExpWeighted{{}, 3};
  std::vector<double> p;
  std::size_t rejections = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(derive_seed(kSeed, 5, t));
    SampleSet s;
    for (int i = 0; i < 30; ++i) s.group_a.push_back(random_body_support(rng, grid));
    for (int i = 0; i < 30; ++i) s.group_b.push_back(random_body_support(rng, grid));
    const double pv = permutation_test(s, spec, 199, derive_seed(kSeed, 50, t)).p_value;
    p.push_back(pv);
    rejections += pv <= 0.05;
  }
  const double rate = static_cast<double>(rejections) / 200.0;
  const double ks_p = ks_uniform(p);
  return {rate >= 0.01 && rate <= 0.10 && ks_p >= 0.01,
          "rejection rate " + fmt("%.3f", rate) + ", uniformity KS p " + fmt("%.3f", ks_p)};
}

// ---------------------------------------------------------------- pipeline

Outcome c6_power() {
  StudyConfig cfg = study_preset("desk");
  cfg.pairs = {{"boolean", "cluster"}, {"boolean", "boolean"}, {"cluster", "cluster"}};
  cfg.radii = default_radii(cfg.processes, cfg.pairs);
  cfg.m_permutation = 100;
  cfg.permutations = 199;
  cfg.replications = 50;
  cfg.methods = {TestMethod::Permutation};
  const auto out = run_study(cfg, resolve_threads(0));
  bool pass = true;
  std::string detail;
  for (const auto& row : out.summary) {
    const bool primary = row.kernel.rfind("expweighted", 0) == 0 || row.kernel.rfind("radialpower", 0) == 0;
    const double rate = row.completed ? static_cast<double>(row.rejections) / row.completed : 0.0;
    const bool same = row.pair == "boolean-boolean" || row.pair == "cluster-cluster";
    bool ok = row.completed == row.replications;
    if (primary) ok = ok && (same ? rate >= 0.01 && rate <= 0.10 : rate >= 0.8);
    pass = pass && (!primary || ok);
    detail += "\n    " + row.pair + " " + row.kernel + ": " + fmt("%.2f", rate) + " (" +
              std::to_string(row.completed) + "/" + std::to_string(row.replications) + ")" +
              (primary ? (ok ? "" : "  <-- outside target") : "  [reported only]");
  }
  return {pass, "rejection rates at alpha=0.05:" + detail};
}

Outcome c7_geometry() {
  double worst = 0.0;
  for (std::size_t n : {4u, 8u, 10u, 36u, 360u, 1000u}) {
    const AngleGrid grid(n);
    for (double r : {0.5, 1.0, 7.0}) {
      for (double h : support_disc({{0.0, 0.0}, r}, grid).values) worst = std::max(worst, std::abs(h - r));
    }
    for (double a : {0.25, 1.0, 3.0}) {
      const ConvexBody sq({{-a, -a}, {a, -a}, {a, a}, {-a, a}});
      const auto h = support_polygon(sq, grid);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.angle(i);
        worst = std::max(worst, std::abs(h[i] - a * (std::abs(std::cos(t)) + std::abs(std::sin(t)))));
      }
    }
  }
  return {worst <= 1e-12, "max abs err " + fmt("%.2e", worst)};
}

Outcome c8_tessellation() {
  double worst_agree = 1.0;
  bool cover_ok = true;
  std::size_t cover_runs = 0;
  const ProcessSpec boolean = default_process(ProcessKind::Boolean);
  for (std::uint64_t c = 0; c < 20; ++c) {
    const double side = 120.0;
    const RasterMask mask = rasterize(simulate(boolean, Window{side, side, 1.0}, derive_seed(kSeed, 8, c)));
    const double r = 3.0 + static_cast<double>(c % 5) * 2.0;
    const auto centers = poisson_disc_cover(mask, r, derive_seed(kSeed, 80, c));
    ++cover_runs;
    double min_sep = kInf;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      for (std::size_t j = i + 1; j < centers.size(); ++j) min_sep = std::min(min_sep, distance(centers[i], centers[j]));
    }
    double max_gap = 0.0;
    for (int y = 0; y < mask.height; ++y) {
      for (int x = 0; x < mask.width; ++x) {
        if (!mask.at(x, y)) continue;
        const Point p{x + 0.5, y + 0.5};
        double best = kInf;
        for (Point q : centers) best = std::min(best, distance(p, q));
        max_gap = std::max(max_gap, best);
      }
    }
    cover_ok = cover_ok && min_sep >= r && max_gap <= r;

    const auto t = voronoi(centers, mask.width, mask.height);
    std::size_t agree = 0, total = 0;
    for (int y = 0; y < mask.height; ++y) {
      for (int x = 0; x < mask.width; ++x) {
        const Point p{x + 0.5, y + 0.5};
        std::size_t best = 0;
        double d1 = kInf, d2 = kInf;
        for (std::size_t i = 0; i < centers.size(); ++i) {
          const double d = distance(p, centers[i]);
          if (d < d1) {
            d2 = d1;
            d1 = d;
            best = i;
          } else if (d < d2) {
            d2 = d;
          }
        }
        if (d2 - d1 < 1e-9) continue;  // boundary pixel
        ++total;
        agree += contains(t.cells[best], p);
      }
    }
    worst_agree = std::min(worst_agree, static_cast<double>(agree) / static_cast<double>(total));
  }
  return {worst_agree >= 0.999 && cover_ok,
          "worst Voronoi agreement " + fmt("%.5f", worst_agree) + ", cover guarantees " +
              (cover_ok ? "held" : "violated") + " on " + std::to_string(cover_runs) + " runs"};
}

Outcome c9_determinism() {
  StudyConfig cfg = study_preset("desk");
  cfg.window = Window{250.0, 250.0, 1.0};
  cfg.pairs = {{"boolean", "cluster"}, {"repulsive", "repulsive"}};
  cfg.radii = default_radii(cfg.processes, cfg.pairs);
  cfg.m_permutation = 20;
  cfg.permutations = 49;
  cfg.replications = 3;
  const auto a = run_study(cfg, 1);
  const auto b = run_study(cfg, 1);
  const auto c = run_study(cfg, 4);
  const auto d = run_study(cfg, 4);
  auto same = [](const StudyOutput& x, const StudyOutput& y) {
    return x.pvalues_csv == y.pvalues_csv && x.summary_csv == y.summary_csv &&
           x.histogram_csv == y.histogram_csv;
  };
  const bool pass = same(a, b) && same(a, c) && same(c, d);
  return {pass, std::to_string(a.rows.size()) + " rows; repeat and thread-count outputs " +
                    (pass ? "identical" : "differ")};
}

struct Criterion {
  const char* id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"C1", "kernel-integral oracle", c1_kernel_integral},
      {"C2", "orthant base case", c2_typo_check},
      {"C3", "U-statistic oracle", c3_u_statistic},
      {"C4", "negative definiteness", c4_negative_definite},
      {"C5", "null calibration", c5_null_calibration},
      {"C6", "pipeline power", c6_power},
      {"C7", "geometry exactness", c7_geometry},
      {"C8", "tessellation oracle", c8_tessellation},
      {"C9", "study determinism", c9_determinism},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures;
}
