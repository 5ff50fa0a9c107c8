#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "setdist/error.hpp"
#include "setdist/hyptest.hpp"
#include "setdist/rng.hpp"

namespace setdist {
namespace {

SampleSet gaussian_like(Rng& rng, std::size_t m1, std::size_t m2, std::size_t n, double shift) {
  SampleSet s;
  for (std::size_t i = 0; i < m1 + m2; ++i) {
    SupportVector v;
    for (std::size_t k = 0; k < n; ++k) {
      // Sum of uniforms, roughly normal.
      double x = 0.0;
      for (int t = 0; t < 4; ++t) x += rng.uniform(-1.0, 1.0);
      v.values.push_back(5.0 + x + (i >= m1 ? shift : 0.0));
    }
    (i < m1 ? s.group_a : s.group_b).push_back(std::move(v));
  }
  return s;
}

double oracle_stat(const SampleSet& s, const KernelSpec& spec, const std::vector<std::size_t>& perm,
                   std::size_t m1) {
  const std::size_t n = perm.size();
  const double a = static_cast<double>(m1), b = static_cast<double>(n - m1);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double l = kernel_eval(spec, s.pooled(perm[i]), s.pooled(perm[j]));
      if (i < m1 && j < m1) aa += l;
      else if (i >= m1 && j >= m1) bb += l;
      else if (i < m1) ab += l;
    }
  }
  return 2.0 * ab / (a * b) - aa / (a * (a - 1.0)) - bb / (b * (b - 1.0));
}

double kolmogorov_series(double lambda) {
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) {
    p += (k % 2 == 1 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return p;
}

TEST(PermutationTest, MatchesIndependentReplicateStream) {
  Rng rng(1);
  const SampleSet s = gaussian_like(rng, 6, 7, 5, 0.4);
  const KernelSpec spec = ExpWeighted{{}, 2};
  const std::size_t perms = 19;
  const std::uint64_t seed = 77;
  const auto r = permutation_test(s, spec, perms, seed);

  std::vector<std::size_t> id(13);
  std::iota(id.begin(), id.end(), std::size_t{0});
  const double observed = oracle_stat(s, spec, id, 6);
  std::size_t count = 0;
  for (std::size_t i = 0; i < perms; ++i) {
    std::vector<std::size_t> p = id;
    Rng prng(seed, i);
    prng.shuffle(p);
    count += oracle_stat(s, spec, p, 6) >= observed - 1e-12 ? 1 : 0;
  }
  EXPECT_NEAR(r.statistic, observed, 1e-12);
  EXPECT_DOUBLE_EQ(r.p_value, static_cast<double>(count + 1) / (perms + 1));
  EXPECT_EQ(r.replicates, perms);
  EXPECT_EQ(r.seed, seed);
}

TEST(PermutationTest, IdenticalDataGivesPValueOne) {
  SampleSet s;
  const SupportVector v{{1.0, 2.0, 3.0, 4.0}};
  s.group_a.assign(5, v);
  s.group_b.assign(5, v);
  for (const auto& spec : default_kernels()) {
    EXPECT_DOUBLE_EQ(permutation_test(s, spec, 49, 3).p_value, 1.0) << kernel_label(spec);
  }
}

TEST(PermutationTest, PValueGranularityAndStrongShift) {
  Rng rng(2);
  const SampleSet s = gaussian_like(rng, 10, 10, 6, 4.0);
  const auto r = permutation_test(s, RadialPower{}, 99, 5);
  EXPECT_DOUBLE_EQ(r.p_value, 0.01);
  const SampleSet null = gaussian_like(rng, 10, 10, 6, 0.0);
  const auto q = permutation_test(null, RadialPower{}, 99, 5);
  const double k = q.p_value * 100.0;
  EXPECT_NEAR(k, std::round(k), 1e-9);
  EXPECT_GE(q.p_value, 0.01);
  EXPECT_LE(q.p_value, 1.0);
}

TEST(PermutationTest, DeterministicInSeed) {
  Rng rng(3);
  const SampleSet s = gaussian_like(rng, 8, 8, 4, 0.3);
  const auto a = permutation_test(s, Cauchy{}, 99, 11);
  const auto b = permutation_test(s, Cauchy{}, 99, 11);
  EXPECT_EQ(a.p_value, b.p_value);
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_THROW(permutation_test(s, Cauchy{}, 0, 11), InputError);
}

TEST(Kolmogorov, MatchesSeriesOnBothBranches) {
  for (double lambda : {0.3, 0.5, 0.8, 1.0, 1.17, 1.19, 1.36, 2.0}) {
    EXPECT_NEAR(kolmogorov_sf(lambda), kolmogorov_series(lambda), 1e-12) << lambda;
  }
  EXPECT_NEAR(kolmogorov_sf(1.0), 0.2699996716735, 1e-10);
  EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
  EXPECT_NEAR(kolmogorov_sf(1.18 - 1e-12), kolmogorov_sf(1.18 + 1e-12), 1e-10);
}

TEST(Kolmogorov, SurvivalIsMonotone) {
  double prev = 1.0;
  for (double l = 0.05; l < 3.0; l += 0.01) {
    const double p = kolmogorov_sf(l);
    EXPECT_LE(p, prev + 1e-15);
    prev = p;
  }
}

TEST(KsTwoSample, SmallExamples) {
  const std::vector<double> a{1, 2, 3}, b{1, 2, 3};
  EXPECT_EQ(ks_two_sample(a, b).statistic, 0.0);
  EXPECT_EQ(ks_two_sample(a, b).p_value, 1.0);

  const std::vector<double> lo{1, 2}, hi{3, 4};
  const auto r = ks_two_sample(lo, hi);
  EXPECT_EQ(r.statistic, 1.0);
  EXPECT_NEAR(r.p_value, kolmogorov_series(1.0), 1e-12);

  const std::vector<double> x{1, 3}, y{2, 4};
  const auto q = ks_two_sample(x, y);
  EXPECT_EQ(q.statistic, 0.5);
  EXPECT_NEAR(q.p_value, kolmogorov_series(0.5), 1e-12);

  const std::vector<double> empty;
  EXPECT_THROW(ks_two_sample(empty, y), InputError);
}

TEST(KsTwoSample, HandlesTiesAcrossSamples) {
  const std::vector<double> x{1, 1, 2}, y{1, 2, 2};
  EXPECT_NEAR(ks_two_sample(x, y).statistic, 1.0 / 3.0, 1e-15);
}

TEST(KsTwoSample, InvariantUnderMonotoneMaps) {
  Rng rng(4);
  std::vector<double> x(17), y(23);
  for (double& v : x) v = rng.uniform();
  for (double& v : y) v = rng.uniform() + 0.2;
  auto fx = x, fy = y;
  for (double& v : fx) v = std::exp(3.0 * v) - 7.0;
  for (double& v : fy) v = std::exp(3.0 * v) - 7.0;
  EXPECT_EQ(ks_two_sample(x, y).statistic, ks_two_sample(fx, fy).statistic);
}

// k-sample Anderson-Darling statistic written for k = 2 over both samples.
double ad_oracle(std::vector<double> x, std::vector<double> y) {
  std::vector<double> z = x;
  z.insert(z.end(), y.begin(), y.end());
  std::sort(z.begin(), z.end());
  const double N = static_cast<double>(z.size());
  double total = 0.0;
  for (const auto* s : {&x, &y}) {
    const double nk = static_cast<double>(s->size());
    double inner = 0.0;
    for (std::size_t j = 1; j < z.size(); ++j) {
      const double mkj = static_cast<double>(
          std::count_if(s->begin(), s->end(), [&](double v) { return v <= z[j - 1]; }));
      const double jj = static_cast<double>(j);
      inner += (N * mkj - jj * nk) * (N * mkj - jj * nk) / (jj * (N - jj));
    }
    total += inner / nk;
  }
  return total / N;
}

TEST(AndersonDarling, MatchesOracleWithoutTies) {
  const std::vector<double> x{1, 2, 3, 4}, y{5, 6, 7, 8};
  EXPECT_NEAR(ad_two_sample(x, y).statistic, ad_oracle(x, y), 1e-12);
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(5 + rng.below(20)), b(5 + rng.below(20));
    for (double& v : a) v = rng.uniform();
    for (double& v : b) v = rng.uniform() * 1.3;
    EXPECT_NEAR(ad_two_sample(a, b).statistic, ad_oracle(a, b), 1e-10);
  }
}

TEST(AndersonDarling, SeparatedSamplesHaveSmallPValue) {
  std::vector<double> x(20), y(20);
  std::iota(x.begin(), x.end(), 0.0);
  std::iota(y.begin(), y.end(), 100.0);
  EXPECT_DOUBLE_EQ(ad_two_sample(x, y).p_value, 0.001);
}

TEST(AndersonDarling, InterleavedSamplesCapAtQuarter) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) (i % 2 ? y : x).push_back(i);
  EXPECT_DOUBLE_EQ(ad_two_sample(x, y).p_value, 0.25);
}

TEST(AndersonDarling, ShiftAndScaleInvariance) {
  Rng rng(6);
  std::vector<double> x(15), y(12);
  for (double& v : x) v = rng.uniform();
  for (double& v : y) v = rng.uniform() + 0.1;
  auto fx = x, fy = y;
  for (double& v : fx) v = 2.5 * v - 4.0;
  for (double& v : fy) v = 2.5 * v - 4.0;
  EXPECT_NEAR(ad_two_sample(x, y).statistic, ad_two_sample(fx, fy).statistic, 1e-12);
}

TEST(AndersonDarling, TiesUseMidranks) {
  const std::vector<double> x{1, 1, 2, 3}, y{1, 2, 2, 4};
  const auto r = ad_two_sample(x, y);
  EXPECT_TRUE(std::isfinite(r.statistic));
  EXPECT_GE(r.p_value, 0.001);
  EXPECT_LE(r.p_value, 0.25);
  const std::vector<double> one{1.0};
  EXPECT_THROW(ad_two_sample(one, y), InputError);
}

TEST(SplitTest, RejectsBadSizes) {
  Rng rng(7);
  EXPECT_THROW(split_test(gaussian_like(rng, 30, 27, 4, 0.0), Cauchy{}, Univariate::KS, 1),
               InputError);
  EXPECT_THROW(split_test(gaussian_like(rng, 31, 31, 4, 0.0), Cauchy{}, Univariate::KS, 1),
               InputError);
  EXPECT_THROW(split_test(gaussian_like(rng, 21, 21, 4, 0.0), Cauchy{}, Univariate::KS, 1),
               InputError);
}

TEST(SplitTest, ConstantVectorsGiveKsPValueOne) {
  SampleSet s;
  const SupportVector v{{2.0, 2.0, 2.0}};
  s.group_a.assign(30, v);
  s.group_b.assign(30, v);
  const auto r = split_test(s, EuclideanPower{}, Univariate::KS, 9);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.method, TestMethod::SplitKS);
}

TEST(SplitTest, SamplesFollowTheDefinition) {
  Rng rng(8);
  const SampleSet s = gaussian_like(rng, 24, 24, 3, 0.0);
  const KernelSpec spec = EuclideanPower{};
  const auto [u, v] = split_samples(s, spec, 31);
  std::vector<std::size_t> ia(24), ib(24);
  std::iota(ia.begin(), ia.end(), std::size_t{0});
  std::iota(ib.begin(), ib.end(), std::size_t{0});
  Rng ra(31, 0), rb(31, 1);
  ra.shuffle(ia);
  rb.shuffle(ib);
  ASSERT_EQ(u.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& a1 = s.group_a[ia[i]];
    const auto& a2 = s.group_a[ia[8 + i]];
    const auto& a3 = s.group_a[ia[16 + i]];
    const auto& b1 = s.group_b[ib[i]];
    const auto& b2 = s.group_b[ib[8 + i]];
    const auto& b3 = s.group_b[ib[16 + i]];
    EXPECT_EQ(u[i], kernel_eval(spec, a1, b1) - kernel_eval(spec, a1, a2));
    EXPECT_EQ(v[i], kernel_eval(spec, b2, b3) - kernel_eval(spec, a3, b3));
  }
}

TEST(SplitTest, NullRejectionRateIsModest) {
  Rng rng(9);
  int rejections = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const SampleSet s = gaussian_like(rng, 60, 60, 4, 0.0);
    rejections += split_test(s, Cauchy{}, Univariate::KS, derive_seed(9, t)).p_value < 0.05;
  }
  EXPECT_LE(rejections, trials / 10);
}

TEST(SplitTest, DetectsLargeShift) {
  Rng rng(10);
  const SampleSet s = gaussian_like(rng, 90, 90, 4, 3.0);
  EXPECT_LT(split_test(s, RadialPower{}, Univariate::KS, 2).p_value, 0.01);
  EXPECT_LT(split_test(s, RadialPower{}, Univariate::AD, 2).p_value, 0.01);
}

TEST(TestMethod, ParseAndPrint) {
  EXPECT_EQ(parse_test_method("permutation"), TestMethod::Permutation);
  EXPECT_EQ(parse_test_method("split-ks"), TestMethod::SplitKS);
  EXPECT_EQ(parse_test_method("split_ad"), TestMethod::SplitAD);
  EXPECT_EQ(to_string(TestMethod::SplitAD), "split_ad");
  EXPECT_THROW(parse_test_method("bootstrap"), InputError);
}

}  // namespace
}  // namespace setdist
