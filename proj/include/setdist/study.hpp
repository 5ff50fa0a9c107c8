#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "setdist/approx.hpp"
#include "setdist/hyptest.hpp"
#include "setdist/kernels.hpp"
#include "setdist/pointproc.hpp"

namespace setdist {

struct ProcessPair {
  std::string first;
  std::string second;

  /// "first-second"
  std::string label() const { return first + "-" + second; }
  friend bool operator==(const ProcessPair&, const ProcessPair&) = default;
};

struct StudyConfig {
  std::string preset = "desk";
  std::string rng_algorithm;
  int rng_version = 0;
  std::uint64_t master_seed = 20160901;
  Window window;
  std::vector<ProcessSpec> processes;
  std::vector<ProcessPair> pairs;
  /// Covering radius per pair label; looked up in either order.
  std::map<std::string, double> radii;
  std::size_t n = 10;
  std::size_t m_permutation = 100;
  std::size_t m_split = 300;
  std::size_t permutations = 199;
  double alpha = 0.05;
  std::size_t histogram_bins = 20;
  std::vector<KernelSpec> kernels;
  std::vector<TestMethod> methods;
  std::size_t replications = 50;
  int disc_poly_k = 64;
  OriginPolicy origin = OriginPolicy::Generator;

  const ProcessSpec& process(const std::string& name) const;
  /// Radius for a pair, taking either orientation of the table key.
  double radius_for(const ProcessPair& pair) const;
  /// Cell sample size used with `method`.
  std::size_t m_for(TestMethod method) const;
  /// Every problem found, empty when the config is usable.
  std::vector<std::string> problems() const;
  /// Throws InputError listing all problems.
  void validate() const;
};

/// Desk preset: 50 replications, s = 199. Full preset: 200 replications,
/// s = 999. Both use the three default processes, all six pairs, the five
/// default kernels, and the permutation method.
StudyConfig study_preset(const std::string& name);

/// min(optimal radius of first, optimal radius of second) for every pair.
std::map<std::string, double> default_radii(const std::vector<ProcessSpec>& processes,
                                            const std::vector<ProcessPair>& pairs);

nlohmann::json study_to_json(const StudyConfig& cfg);
/// Missing keys fall back to the desk preset. Throws InputError listing
/// every problem at once.
StudyConfig study_from_json(const nlohmann::json& j);

nlohmann::json process_to_json(const ProcessSpec& p);
ProcessSpec process_from_json(const nlohmann::json& j);

struct StudyRow {
  std::size_t pair_index = 0;
  std::string pair;
  std::size_t replication = 0;
  TestMethod method = TestMethod::Permutation;
  std::size_t kernel_index = 0;
  std::string kernel;
  std::size_t m = 0;
  double radius = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> statistic;
  std::optional<double> p_value;
  std::string status = "ok";
};

struct StudySummaryRow {
  std::string pair;
  TestMethod method = TestMethod::Permutation;
  std::string kernel;
  std::size_t replications = 0;
  std::size_t completed = 0;
  std::size_t rejections = 0;
  double rejection_rate = 0.0;
};

struct StudyOutput {
  std::vector<StudyRow> rows;  // sorted by (pair, method, kernel, replication)
  std::vector<StudySummaryRow> summary;
  std::string pvalues_csv;
  std::string summary_csv;
  std::string histogram_csv;
};

/// Worker count: `requested` (0 = hardware concurrency), capped by the
/// SETDIST_THREADS environment variable when it holds a positive integer.
std::size_t resolve_threads(std::size_t requested);

/// Runs every (pair, replication) task on a pool of `threads` workers.
/// Each task simulates two realisations with seeds derived from
/// (master_seed, pair index, replication), approximates both with the
/// pair's radius, and tests them for every method and kernel. Outputs do
/// not depend on the thread count.
StudyOutput run_study(const StudyConfig& cfg, std::size_t threads = 0);

}  // namespace setdist
