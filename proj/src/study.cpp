#include "setdist/study.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <set>
#include <thread>

#include "setdist/error.hpp"
#include "setdist/io.hpp"
#include "setdist/rng.hpp"

namespace setdist {
namespace {

constexpr std::uint64_t kRealisationTag = 1;
constexpr std::uint64_t kApproximationTag = 2;
constexpr std::uint64_t kTestTag = 3;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string radius_key(const std::string& a, const std::string& b) { return a + "-" + b; }

// Reads one field, recording a problem instead of throwing.
template <class T>
void read_field(const nlohmann::json& j, const char* key, T& target,
                std::vector<std::string>& problems, const std::string& where = "") {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    problems.push_back(where + key + ": wrong type");
  }
}

nlohmann::json radius_law_to_json(const RadiusLaw& law) {
  if (law.kind == RadiusLaw::Kind::Fixed) return {{"law", "fixed"}, {"r", law.lo}};
  return {{"law", "uniform"}, {"lo", law.lo}, {"hi", law.hi}};
}

RadiusLaw radius_law_from_json(const nlohmann::json& j) {
  const std::string law = j.at("law").get<std::string>();
  if (law == "fixed") return RadiusLaw::fixed(j.at("r").get<double>());
  if (law == "uniform") return RadiusLaw::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  throw InputError("unknown radius law '" + law + "'");
}

std::vector<ProcessPair> all_pairs(const std::vector<ProcessSpec>& processes) {
  std::vector<ProcessPair> pairs;
  for (const auto& p : processes) pairs.push_back({p.name, p.name});
  for (std::size_t i = 0; i < processes.size(); ++i) {
    for (std::size_t k = i + 1; k < processes.size(); ++k) {
      pairs.push_back({processes[i].name, processes[k].name});
    }
  }
  return pairs;
}

struct Task {
  std::size_t pair_index;
  std::size_t replication;
};

std::vector<StudyRow> run_task(const StudyConfig& cfg, const Task& task) {
  const ProcessPair& pair = cfg.pairs[task.pair_index];
  const double radius = cfg.radius_for(pair);
  const std::uint64_t task_seed = derive_seed(cfg.master_seed, task.pair_index, task.replication);
  const AngleGrid grid(cfg.n);
  const CoverConfig cover{radius, cfg.disc_poly_k, cfg.origin};

  std::vector<StudyRow> rows;
  auto base_row = [&](TestMethod method, std::size_t k) {
    StudyRow row;
    row.pair_index = task.pair_index;
    row.pair = pair.label();
    row.replication = task.replication;
    row.method = method;
    row.kernel_index = k;
    row.kernel = kernel_label(cfg.kernels[k]);
    row.m = cfg.m_for(method);
    row.radius = radius;
    row.seed = task_seed;
    return row;
  };
  auto fail_all = [&](const std::vector<TestMethod>& methods, const std::string& msg) {
    for (TestMethod method : methods) {
      for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
        StudyRow row = base_row(method, k);
        row.status = "error: " + msg;
        rows.push_back(std::move(row));
      }
    }
  };

  std::optional<Approximation> first, second;
  try {
    const std::uint64_t sim_seed = derive_seed(task_seed, kRealisationTag);
    const RasterMask mask1 =
        rasterize(simulate(cfg.process(pair.first), cfg.window, derive_seed(sim_seed, 1)));
    const RasterMask mask2 =
        rasterize(simulate(cfg.process(pair.second), cfg.window, derive_seed(sim_seed, 2)));
    const std::uint64_t approx_seed = derive_seed(task_seed, kApproximationTag);
    first = divide(mask1, cover, derive_seed(approx_seed, 1));
    second = divide(mask2, cover, derive_seed(approx_seed, 2));
  } catch (const std::runtime_error& e) {
    fail_all(cfg.methods, e.what());
    return rows;
  } catch (const std::invalid_argument& e) {
    fail_all(cfg.methods, e.what());
    return rows;
  }

  const std::uint64_t approx_seed = derive_seed(task_seed, kApproximationTag);
  const std::uint64_t test_seed = derive_seed(task_seed, kTestTag);
  for (TestMethod method : cfg.methods) {
    const std::size_t m = cfg.m_for(method);
    try {
      draw_sample(*first, m, grid, cfg.origin, derive_seed(approx_seed, 1));
      draw_sample(*second, m, grid, cfg.origin, derive_seed(approx_seed, 2));
    } catch (const std::runtime_error& e) {
      fail_all({method}, e.what());
      continue;
    }
    for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
      StudyRow row = base_row(method, k);
      try {
        const auto seed = derive_seed(test_seed, static_cast<std::uint64_t>(method), k);
        const TestResult r = test_samples(first->samples, second->samples, cfg.kernels[k], method,
                                          cfg.permutations, seed);
        row.statistic = r.statistic;
        row.p_value = r.p_value;
      } catch (const std::runtime_error& e) {
        row.status = std::string("error: ") + e.what();
      } catch (const std::invalid_argument& e) {
        row.status = std::string("error: ") + e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_pvalues(const std::vector<StudyRow>& rows) {
  std::string out = "pair,replication,method,kernel,m,R,seed,statistic,p_value,status\n";
  for (const auto& r : rows) {
    out += csv_field(r.pair) + ',' + std::to_string(r.replication) + ',' + to_string(r.method) +
           ',' + csv_field(r.kernel) + ',' + std::to_string(r.m) + ',' + io::format_real(r.radius) +
           ',' + std::to_string(r.seed) + ',' +
           (r.statistic ? io::format_real(*r.statistic) : std::string()) + ',' +
           (r.p_value ? io::format_real(*r.p_value) : std::string()) + ',' + csv_field(r.status) +
           '\n';
  }
  return out;
}

}  // namespace

const ProcessSpec& StudyConfig::process(const std::string& name) const {
  for (const auto& p : processes) {
    if (p.name == name) return p;
  }
  throw InputError("unknown process '" + name + "'");
}

double StudyConfig::radius_for(const ProcessPair& pair) const {
  if (auto it = radii.find(radius_key(pair.first, pair.second)); it != radii.end()) return it->second;
  if (auto it = radii.find(radius_key(pair.second, pair.first)); it != radii.end()) return it->second;
  throw InputError("no covering radius for pair '" + pair.label() + "'");
}

std::size_t StudyConfig::m_for(TestMethod method) const {
  return method == TestMethod::Permutation ? m_permutation : m_split;
}

std::vector<std::string> StudyConfig::problems() const {
  std::vector<std::string> out;
  if (!rng_algorithm.empty() && rng_algorithm != Rng::kAlgorithm) {
    out.push_back("rng.algorithm '" + rng_algorithm + "' is not available (have " +
                  std::string(Rng::kAlgorithm) + ")");
  }
  if (rng_version != 0 && rng_version != Rng::kVersion) {
    out.push_back("rng.version " + std::to_string(rng_version) + " is not available (have " +
                  std::to_string(Rng::kVersion) + ")");
  }
  if (!(window.width > 0.0) || !(window.height > 0.0) || !(window.pixels_per_unit > 0.0)) {
    out.push_back("window: dimensions and resolution must be positive");
  }
  std::set<std::string> names;
  for (const auto& p : processes) {
    if (p.name.empty()) out.push_back("processes: every process needs a name");
    if (!names.insert(p.name).second) out.push_back("processes: duplicate name '" + p.name + "'");
    try {
      p.validate();
    } catch (const InputError& e) {
      out.push_back("process '" + p.name + "': " + e.what());
    }
  }
  if (pairs.empty()) out.push_back("pairs: at least one pair is required");
  for (const auto& pair : pairs) {
    for (const auto* name : {&pair.first, &pair.second}) {
      if (!names.count(*name)) out.push_back("pair '" + pair.label() + "': unknown process '" + *name + "'");
    }
    if (!radii.count(radius_key(pair.first, pair.second)) &&
        !radii.count(radius_key(pair.second, pair.first))) {
      out.push_back("radii: no entry for pair '" + pair.label() + "'");
    }
  }
  for (const auto& [key, r] : radii) {
    if (!(r >= 1.0) || !std::isfinite(r)) out.push_back("radii['" + key + "'] must be >= 1 pixel");
  }
  if (n < 1) out.push_back("n must be at least 1");
  if (kernels.empty()) out.push_back("kernels: at least one kernel is required");
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    try {
      setdist::validate(kernels[k], n);
    } catch (const InputError& e) {
      out.push_back("kernels[" + std::to_string(k) + "]: " + e.what());
    }
  }
  if (methods.empty()) out.push_back("methods: at least one method is required");
  const bool any_split = std::any_of(methods.begin(), methods.end(),
                                     [](TestMethod m) { return m != TestMethod::Permutation; });
  const bool any_perm = std::any_of(methods.begin(), methods.end(),
                                    [](TestMethod m) { return m == TestMethod::Permutation; });
  if (any_perm && m_permutation < 2) out.push_back("m_permutation must be at least 2");
  if (any_perm && permutations < 1) out.push_back("permutations must be at least 1");
  if (any_split && (m_split % 3 != 0 || m_split / 3 < 8)) {
    out.push_back("m_split must be divisible by 3 with m_split / 3 >= 8");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) out.push_back("alpha must lie in (0, 1)");
  if (histogram_bins < 1) out.push_back("histogram_bins must be at least 1");
  if (replications < 1) out.push_back("replications must be at least 1");
  if (disc_poly_k < 16) out.push_back("disc_poly_k must be at least 16");
  return out;
}

void StudyConfig::validate() const {
  const auto list = problems();
  if (list.empty()) return;
  std::string msg = "invalid study config (" + std::to_string(list.size()) + " problems):";
  for (const auto& p : list) msg += "\n  - " + p;
  throw InputError(msg);
}

std::map<std::string, double> default_radii(const std::vector<ProcessSpec>& processes,
                                            const std::vector<ProcessPair>& pairs) {
  std::map<std::string, double> out;
  auto optimal = [&](const std::string& name) {
    for (const auto& p : processes) {
      if (p.name == name) return p.optimal_radius;
    }
    throw InputError("unknown process '" + name + "'");
  };
  for (const auto& pair : pairs) {
    out[pair.label()] = std::min(optimal(pair.first), optimal(pair.second));
  }
  return out;
}

StudyConfig study_preset(const std::string& name) {
  StudyConfig cfg;
  cfg.preset = name;
  cfg.rng_algorithm = Rng::kAlgorithm;
  cfg.rng_version = Rng::kVersion;
  cfg.processes = {default_process(ProcessKind::Boolean), default_process(ProcessKind::Cluster),
                   default_process(ProcessKind::Repulsive)};
  cfg.pairs = all_pairs(cfg.processes);
  cfg.radii = default_radii(cfg.processes, cfg.pairs);
  cfg.kernels = default_kernels();
  cfg.methods = {TestMethod::Permutation};
  if (name == "desk") {
    cfg.replications = 50;
    cfg.permutations = 199;
  } else if (name == "full") {
    cfg.replications = 200;
    cfg.permutations = 999;
  } else {
    throw InputError("unknown preset '" + name + "' (expected desk or full)");
  }
  return cfg;
}

nlohmann::json process_to_json(const ProcessSpec& p) {
  nlohmann::json j;
  j["name"] = p.name;
  j["kind"] = to_string(p.kind);
  j["intensity"] = p.intensity;
  if (p.kind == ProcessKind::Cluster) {
    j["mean_children"] = p.mean_children;
    j["cluster_radius"] = p.cluster_radius;
  }
  if (p.kind == ProcessKind::Repulsive) j["hardcore_distance"] = p.hardcore_distance;
  j["radius"] = radius_law_to_json(p.radius);
  j["optimal_radius"] = p.optimal_radius;
  return j;
}

ProcessSpec process_from_json(const nlohmann::json& j) {
  try {
    const ProcessKind kind = parse_process_kind(j.at("kind").get<std::string>());
    ProcessSpec p = default_process(kind);
    p.name = j.value("name", p.name);
    p.intensity = j.value("intensity", p.intensity);
    p.mean_children = j.value("mean_children", p.mean_children);
    p.cluster_radius = j.value("cluster_radius", p.cluster_radius);
    p.hardcore_distance = j.value("hardcore_distance", p.hardcore_distance);
    if (j.contains("radius")) p.radius = radius_law_from_json(j.at("radius"));
    p.optimal_radius = j.value("optimal_radius", p.optimal_radius);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid process: ") + e.what());
  }
}

nlohmann::json study_to_json(const StudyConfig& cfg) {
  nlohmann::json j;
  j["preset"] = cfg.preset;
  j["rng"] = {{"algorithm", cfg.rng_algorithm}, {"version", cfg.rng_version}};
  j["master_seed"] = cfg.master_seed;
  j["window"] = {{"width", cfg.window.width},
                 {"height", cfg.window.height},
                 {"pixels_per_unit", cfg.window.pixels_per_unit}};
  j["processes"] = nlohmann::json::array();
  for (const auto& p : cfg.processes) j["processes"].push_back(process_to_json(p));
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : cfg.pairs) j["pairs"].push_back({p.first, p.second});
  j["radii"] = cfg.radii;
  j["n"] = cfg.n;
  j["m_permutation"] = cfg.m_permutation;
  j["m_split"] = cfg.m_split;
  j["permutations"] = cfg.permutations;
  j["alpha"] = cfg.alpha;
  j["histogram_bins"] = cfg.histogram_bins;
  j["kernels"] = nlohmann::json::array();
  for (const auto& k : cfg.kernels) j["kernels"].push_back(io::kernel_to_json(k));
  j["methods"] = nlohmann::json::array();
  for (auto m : cfg.methods) j["methods"].push_back(to_string(m));
  j["replications"] = cfg.replications;
  j["cover"] = {{"disc_poly_k", cfg.disc_poly_k}, {"origin_policy", to_string(cfg.origin)}};
  return j;
}

StudyConfig study_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("study config must be a JSON object");
  std::vector<std::string> problems;
  StudyConfig cfg;
  try {
    cfg = study_preset(j.value("preset", std::string("desk")));
  } catch (const std::exception& e) {
    problems.push_back(std::string("preset: ") + e.what());
    cfg = study_preset("desk");
  }
  cfg.rng_algorithm.clear();
  cfg.rng_version = 0;
  if (j.contains("rng")) {
    read_field(j["rng"], "algorithm", cfg.rng_algorithm, problems, "rng.");
    read_field(j["rng"], "version", cfg.rng_version, problems, "rng.");
  }
  read_field(j, "master_seed", cfg.master_seed, problems);
  if (j.contains("window")) {
    read_field(j["window"], "width", cfg.window.width, problems, "window.");
    read_field(j["window"], "height", cfg.window.height, problems, "window.");
    read_field(j["window"], "pixels_per_unit", cfg.window.pixels_per_unit, problems, "window.");
  }
  if (j.contains("processes")) {
    cfg.processes.clear();
    const auto& list = j["processes"];
    for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
      try {
        cfg.processes.push_back(process_from_json(list[i]));
      } catch (const std::exception& e) {
        problems.push_back("processes[" + std::to_string(i) + "]: " + e.what());
      }
    }
    if (!list.is_array()) problems.push_back("processes: must be an array");
  }
  if (j.contains("pairs")) {
    cfg.pairs.clear();
    const auto& list = j["pairs"];
    for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
      const auto& p = list[i];
      if (p.is_array() && p.size() == 2 && p[0].is_string() && p[1].is_string()) {
        cfg.pairs.push_back({p[0].get<std::string>(), p[1].get<std::string>()});
      } else {
        problems.push_back("pairs[" + std::to_string(i) + "]: expected [\"first\", \"second\"]");
      }
    }
    if (!list.is_array()) problems.push_back("pairs: must be an array");
  }
  if (j.contains("radii")) {
    cfg.radii.clear();
    read_field(j, "radii", cfg.radii, problems);
  } else if (j.contains("processes") || j.contains("pairs")) {
    try {
      cfg.radii = default_radii(cfg.processes, cfg.pairs);
    } catch (const InputError&) {
      cfg.radii.clear();
    }
  }
  read_field(j, "n", cfg.n, problems);
  read_field(j, "m_permutation", cfg.m_permutation, problems);
  read_field(j, "m_split", cfg.m_split, problems);
  read_field(j, "permutations", cfg.permutations, problems);
  read_field(j, "alpha", cfg.alpha, problems);
  read_field(j, "histogram_bins", cfg.histogram_bins, problems);
  read_field(j, "replications", cfg.replications, problems);
  if (j.contains("kernels")) {
    cfg.kernels.clear();
    const auto& list = j["kernels"];
    for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
      try {
        cfg.kernels.push_back(io::kernel_from_json(list[i]));
      } catch (const std::exception& e) {
        problems.push_back("kernels[" + std::to_string(i) + "]: " + e.what());
      }
    }
    if (!list.is_array()) problems.push_back("kernels: must be an array");
  }
  if (j.contains("methods")) {
    cfg.methods.clear();
    const auto& list = j["methods"];
    for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
      try {
        cfg.methods.push_back(parse_test_method(list[i].get<std::string>()));
      } catch (const std::exception& e) {
        problems.push_back("methods[" + std::to_string(i) + "]: " + e.what());
      }
    }
    if (!list.is_array()) problems.push_back("methods: must be an array");
  }
  if (j.contains("cover")) {
    read_field(j["cover"], "disc_poly_k", cfg.disc_poly_k, problems, "cover.");
    std::string origin = to_string(cfg.origin);
    read_field(j["cover"], "origin_policy", origin, problems, "cover.");
    try {
      cfg.origin = parse_origin_policy(origin);
    } catch (const InputError& e) {
      problems.push_back(std::string("cover.origin_policy: ") + e.what());
    }
  }
  const auto semantic = cfg.problems();
  problems.insert(problems.end(), semantic.begin(), semantic.end());
  if (!problems.empty()) {
    std::string msg = "invalid study config (" + std::to_string(problems.size()) + " problems):";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InputError(msg);
  }
  return cfg;
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t threads = requested;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SETDIST_THREADS")) {
    std::size_t cap = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && ptr == s.data() + s.size() && cap > 0) threads = std::min(threads, cap);
  }
  return threads;
}

StudyOutput run_study(const StudyConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
    for (std::size_t r = 0; r < cfg.replications; ++r) tasks.push_back({p, r});
  }
  std::vector<std::vector<StudyRow>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) results[i] = run_task(cfg, tasks[i]);
  };
  const std::size_t pool = std::min(resolve_threads(threads), std::max<std::size_t>(tasks.size(), 1));
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 1; t < pool; ++t) workers.emplace_back(worker);
    worker();
  }

  StudyOutput out;
  for (auto& rows : results) {
    for (auto& row : rows) out.rows.push_back(std::move(row));
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const StudyRow& a, const StudyRow& b) {
    return std::tie(a.pair_index, a.method, a.kernel_index, a.replication) <
           std::tie(b.pair_index, b.method, b.kernel_index, b.replication);
  });
  out.pvalues_csv = format_pvalues(out.rows);

  out.summary_csv = "pair,method,kernel,replications,completed,rejections,rejection_rate\n";
  out.histogram_csv = "pair,method,kernel,bin_lo,bin_hi,count\n";
  const std::size_t bins = cfg.histogram_bins;
  for (std::size_t i = 0; i < out.rows.size();) {
    std::size_t k = i;
    StudySummaryRow s{out.rows[i].pair, out.rows[i].method, out.rows[i].kernel, 0, 0, 0, 0.0};
    std::vector<std::size_t> counts(bins, 0);
    while (k < out.rows.size() && out.rows[k].pair_index == out.rows[i].pair_index &&
           out.rows[k].method == out.rows[i].method &&
           out.rows[k].kernel_index == out.rows[i].kernel_index) {
      ++s.replications;
      if (const auto& p = out.rows[k].p_value) {
        ++s.completed;
        if (*p <= cfg.alpha) ++s.rejections;
        const auto bin = std::min(bins - 1, static_cast<std::size_t>(*p * static_cast<double>(bins)));
        ++counts[bin];
      }
      ++k;
    }
    s.rejection_rate = s.completed ? static_cast<double>(s.rejections) / static_cast<double>(s.completed) : 0.0;
    const std::string key = csv_field(s.pair) + ',' + to_string(s.method) + ',' + csv_field(s.kernel);
    out.summary_csv += key + ',' + std::to_string(s.replications) + ',' + std::to_string(s.completed) +
                       ',' + std::to_string(s.rejections) + ',' + io::format_real(s.rejection_rate) + '\n';
    for (std::size_t b = 0; b < bins; ++b) {
      out.histogram_csv += key + ',' + io::format_real(static_cast<double>(b) / static_cast<double>(bins)) +
                           ',' + io::format_real(static_cast<double>(b + 1) / static_cast<double>(bins)) +
                           ',' + std::to_string(counts[b]) + '\n';
    }
    out.summary.push_back(std::move(s));
    i = k;
  }
  return out;
}

}  // namespace setdist
