#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "setdist/kernels.hpp"
#include "setdist/nstat.hpp"

namespace setdist {

enum class TestMethod { Permutation, SplitKS, SplitAD };

std::string to_string(TestMethod method);
/// Accepts "permutation", "split_ks" / "split-ks", "split_ad" / "split-ad".
TestMethod parse_test_method(const std::string& name);

struct TestResult {
  TestMethod method = TestMethod::Permutation;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t replicates = 0;  // permutations drawn; 0 for split tests
  std::uint64_t seed = 0;
  KernelSpec kernel;
  /// Provenance added by callers (radius, sample size, origin policy, ...).
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kDefaultPermutations = 999;

/// Permutation test on nhat. Permutation i is a Fisher-Yates shuffle of the
/// identity driven by Rng(seed, i), so the p-value
///   (#{i : nhat_i >= nhat} + 1) / (s + 1)
/// does not depend on the order in which replicates are evaluated.
TestResult permutation_test(const SampleSet& samples, const KernelSpec& spec,
                            std::size_t permutations, std::uint64_t seed);
TestResult permutation_test(const KernelMatrix& matrix, std::size_t m1,
                            std::size_t permutations, std::uint64_t seed);

enum class Univariate { KS, AD };

/// Three-way split test: both groups are shuffled (Rng(seed, 0) and
/// Rng(seed, 1)) and cut into thirds A', A'', A''' and B', B'', B''';
///   U_i = L(A'_i, B'_i) - L(A'_i, A''_i),
///   V_i = L(B''_i, B'''_i) - L(A'''_i, B'''_i),
/// and {U_i} vs {V_i} go to the chosen univariate two-sample test.
/// Requires m1 = m2 = m, m divisible by 3 and m / 3 >= 8.
TestResult split_test(const SampleSet& samples, const KernelSpec& spec,
                      Univariate uni, std::uint64_t seed);

/// The (U, V) samples used by split_test, exposed for diagnostics.
std::pair<std::vector<double>, std::vector<double>> split_samples(
    const SampleSet& samples, const KernelSpec& spec, std::uint64_t seed);

struct UnivariateResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// p-value at lambda = sqrt(nx ny / (nx + ny)) * D.
UnivariateResult ks_two_sample(std::span<const double> x, std::span<const double> y);

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

/// Two-sample Anderson-Darling test (Scholz & Stephens). Without ties the
/// statistic is (1/(mn)) sum_{i<N} (N M_i - i m)^2 / (i (N - i)); with ties
/// the midrank version is used. The p-value interpolates the standardized
/// statistic in the published asymptotic percentile table and is capped
/// to [0.001, 0.25].
UnivariateResult ad_two_sample(std::span<const double> x, std::span<const double> y);

}  // namespace setdist
