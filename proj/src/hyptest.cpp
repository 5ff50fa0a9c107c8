#include "setdist/hyptest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "setdist/error.hpp"
#include "setdist/rng.hpp"

namespace setdist {
namespace {

constexpr std::size_t kSplitMinimumThird = 8;
constexpr std::size_t kSplitRecommendedSize = 120;
constexpr std::size_t kAdSmallThird = 30;

// Quadratic least-squares fit of log(significance) on the critical values
// of the two-sample (k = 2) Anderson-Darling table.
struct AdInterpolation {
  std::array<double, 3> coef{};  // c0 + c1 t + c2 t^2

  AdInterpolation() {
    constexpr std::array<double, 7> sig{0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001};
    constexpr std::array<double, 7> b0{0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085};
    constexpr std::array<double, 7> b1{-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615};
    constexpr std::array<double, 7> b2{-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154};
    Eigen::Matrix<double, 7, 3> design;
    Eigen::Matrix<double, 7, 1> target;
    for (int i = 0; i < 7; ++i) {
      // k - 1 = 1 sample degrees of freedom.
      const double crit = b0[i] + b1[i] + b2[i];
      design(i, 0) = 1.0;
      design(i, 1) = crit;
      design(i, 2) = crit * crit;
      target(i) = std::log(sig[i]);
    }
    const Eigen::Vector3d c = design.colPivHouseholderQr().solve(target);
    coef = {c(0), c(1), c(2)};
  }

  double p_value(double t) const {
    const double p = std::exp(coef[0] + t * (coef[1] + t * coef[2]));
    return std::clamp(p, 0.001, 0.25);
  }
};

double ad_sigma(std::size_t m, std::size_t n) {
  const double N = static_cast<double>(m + n);
  const double k = 2.0;
  const double H = 1.0 / static_cast<double>(m) + 1.0 / static_cast<double>(n);
  double h = 0.0;
  for (std::size_t i = 1; i < m + n; ++i) h += 1.0 / static_cast<double>(i);
  double g = 0.0;
  const std::size_t big_n = m + n;
  for (std::size_t i = 1; i + 1 < big_n; ++i) {
    double inner = 0.0;
    for (std::size_t j = i + 1; j < big_n; ++j) inner += 1.0 / static_cast<double>(j);
    g += inner / static_cast<double>(big_n - i);
  }
  const double a = (4 * g - 6) * (k - 1) + (10 - 6 * g) * H;
  const double b = (2 * g - 4) * k * k + 8 * h * k + (2 * g - 14 * h - 4) * H - 8 * h + 4 * g - 6;
  const double c = (6 * h + 2 * g - 2) * k * k + (4 * h - 4 * g + 6) * k + (2 * h - 6) * H + 4 * h;
  const double d = (2 * h + 6) * k * k - 4 * h * k;
  const double var = (a * N * N * N + b * N * N + c * N + d) / ((N - 1) * (N - 2) * (N - 3));
  return std::sqrt(var);
}

}  // namespace

std::string to_string(TestMethod method) {
  switch (method) {
    case TestMethod::Permutation: return "permutation";
    case TestMethod::SplitKS: return "split_ks";
    case TestMethod::SplitAD: return "split_ad";
  }
  return "unknown";
}

TestMethod parse_test_method(const std::string& name) {
  if (name == "permutation") return TestMethod::Permutation;
  if (name == "split_ks" || name == "split-ks" || name == "split") return TestMethod::SplitKS;
  if (name == "split_ad" || name == "split-ad") return TestMethod::SplitAD;
  throw InputError("unknown test method '" + name + "'");
}

TestResult permutation_test(const KernelMatrix& matrix, std::size_t m1,
                            std::size_t permutations, std::uint64_t seed) {
  if (permutations < 1) throw InputError("permutation count must be at least 1");
  const std::size_t n = matrix.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const double observed = nhat_permuted(matrix, perm, m1);
  std::size_t at_least = 0;
  for (std::size_t i = 0; i < permutations; ++i) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed, i);
    rng.shuffle(perm);
    if (nhat_permuted(matrix, perm, m1) >= observed) ++at_least;
  }
  TestResult out;
  out.method = TestMethod::Permutation;
  out.statistic = observed;
  out.p_value = static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
  out.replicates = permutations;
  out.seed = seed;
  out.kernel = matrix.spec();
  return out;
}

TestResult permutation_test(const SampleSet& samples, const KernelSpec& spec,
                            std::size_t permutations, std::uint64_t seed) {
  if (permutations < 1) throw InputError("permutation count must be at least 1");
  return permutation_test(kernel_matrix(samples, spec), samples.group_a.size(), permutations,
                          seed);
}

std::pair<std::vector<double>, std::vector<double>> split_samples(const SampleSet& samples,
                                                                  const KernelSpec& spec,
                                                                  std::uint64_t seed) {
  const std::size_t m = samples.group_a.size();
  if (m != samples.group_b.size() || m % 3 != 0 || m == 0) {
    throw InputError("split test requires m1=m2 divisible by 3");
  }
  const std::size_t third = m / 3;
  if (third < kSplitMinimumThird) {
    throw InputError("split test requires m/3 >= 8 (m=" + std::to_string(m) + ")");
  }
  samples.validate();
  validate(spec, samples.grid_size());

  std::vector<std::size_t> ia(m), ib(m);
  std::iota(ia.begin(), ia.end(), std::size_t{0});
  std::iota(ib.begin(), ib.end(), std::size_t{0});
  Rng rng_a(seed, 0);
  Rng rng_b(seed, 1);
  rng_a.shuffle(ia);
  rng_b.shuffle(ib);

  auto A = [&](std::size_t part, std::size_t i) -> const SupportVector& {
    return samples.group_a[ia[part * third + i]];
  };
  auto B = [&](std::size_t part, std::size_t i) -> const SupportVector& {
    return samples.group_b[ib[part * third + i]];
  };
  std::vector<double> u(third), v(third);
  for (std::size_t i = 0; i < third; ++i) {
    u[i] = kernel_eval(spec, A(0, i), B(0, i)) - kernel_eval(spec, A(0, i), A(1, i));
    v[i] = kernel_eval(spec, B(1, i), B(2, i)) - kernel_eval(spec, A(2, i), B(2, i));
  }
  return {std::move(u), std::move(v)};
}

TestResult split_test(const SampleSet& samples, const KernelSpec& spec, Univariate uni,
                      std::uint64_t seed) {
  const auto [u, v] = split_samples(samples, spec, seed);
  const auto r = uni == Univariate::KS ? ks_two_sample(u, v) : ad_two_sample(u, v);
  TestResult out;
  out.method = uni == Univariate::KS ? TestMethod::SplitKS : TestMethod::SplitAD;
  out.statistic = r.statistic;
  out.p_value = r.p_value;
  out.replicates = 0;
  out.seed = seed;
  out.kernel = spec;
  const std::size_t m = samples.group_a.size();
  if (m < kSplitRecommendedSize) {
    out.warnings.push_back("split test with m=" + std::to_string(m) +
                           " < 120: asymptotic p-values are unreliable, prefer the "
                           "permutation test");
  }
  if (uni == Univariate::AD && m / 3 < kAdSmallThird) {
    out.warnings.push_back("Anderson-Darling p-value from the asymptotic table with only " +
                           std::to_string(m / 3) + " values per sample");
  }
  return out;
}

double kolmogorov_sf(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form of the CDF.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
      cdf += term;
      if (term < 1e-16 * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double p = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

UnivariateResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw InputError("KS test needs non-empty samples");
  std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() || j < ys.size()) {
    double v;
    if (j == ys.size() || (i < xs.size() && xs[i] <= ys[j])) {
      v = xs[i];
    } else {
      v = ys[j];
    }
    // Step past every copy of v so both ECDFs are evaluated after the jump.
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  return {d, kolmogorov_sf(std::sqrt(ne) * d)};
}

UnivariateResult ad_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) {
    throw InputError("Anderson-Darling test needs at least two values per sample");
  }
  const std::size_t m = x.size();
  const std::size_t n = y.size();
  const std::size_t big_n = m + n;
  const double N = static_cast<double>(big_n);
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(big_n);
  for (double v : x) pooled.emplace_back(v, 0);
  for (double v : y) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());

  bool ties = false;
  for (std::size_t i = 1; i < big_n; ++i) ties = ties || pooled[i].first == pooled[i - 1].first;

  double a2 = 0.0;
  if (!ties) {
    double count_x = 0.0;
    for (std::size_t i = 1; i < big_n; ++i) {
      if (pooled[i - 1].second == 0) count_x += 1.0;
      const double fi = static_cast<double>(i);
      const double diff = count_x * N - fi * static_cast<double>(m);
      a2 += diff * diff / (fi * (N - fi));
    }
    a2 /= static_cast<double>(m) * static_cast<double>(n);
  } else {
    // Midrank version A^2_akN.
    const std::array<double, 2> sizes{static_cast<double>(m), static_cast<double>(n)};
    std::array<double, 2> below{0.0, 0.0};
    std::array<double, 2> sums{0.0, 0.0};
    double pooled_below = 0.0;
    std::size_t i = 0;
    while (i < big_n) {
      std::size_t j = i;
      std::array<double, 2> equal{0.0, 0.0};
      while (j < big_n && pooled[j].first == pooled[i].first) {
        equal[static_cast<std::size_t>(pooled[j].second)] += 1.0;
        ++j;
      }
      const double l = static_cast<double>(j - i);
      const double b_mid = pooled_below + 0.5 * l;
      const double denom = b_mid * (N - b_mid) - N * l / 4.0;
      if (denom > 0.0) {
        for (std::size_t s = 0; s < 2; ++s) {
          const double m_mid = below[s] + 0.5 * equal[s];
          const double diff = N * m_mid - sizes[s] * b_mid;
          sums[s] += l * diff * diff / denom;
        }
      }
      below[0] += equal[0];
      below[1] += equal[1];
      pooled_below += l;
      i = j;
    }
    a2 = (N - 1.0) / (N * N) * (sums[0] / sizes[0] + sums[1] / sizes[1]);
  }
  static const AdInterpolation table;
  const double standardized = (a2 - 1.0) / ad_sigma(m, n);
  return {a2, table.p_value(standardized)};
}

}  // namespace setdist
