#include "setdist/kernels.hpp"

#include <cmath>
#include <sstream>

#include "setdist/error.hpp"

namespace setdist {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_depth(std::size_t n, int depth) {
  if (depth < 1 || static_cast<std::size_t>(depth) > n) {
    throw InputError("truncation depth D must satisfy 1 <= D <= n (D=" +
                     std::to_string(depth) + ", n=" + std::to_string(n) + ")");
  }
}

void check_power(double r) {
  if (!(r > 0.0 && r < 2.0)) throw InputError("kernel exponent r must lie in (0, 2)");
}

void check_form(const QuadraticForm& v, std::size_t n) {
  if (v.matrix) {
    const auto& m = *v.matrix;
    if (static_cast<std::size_t>(m.rows()) != n ||
        static_cast<std::size_t>(m.cols()) != n) {
      throw InputError("kernel matrix V must be n x n");
    }
    if (!m.isApprox(m.transpose(), 1e-12)) throw InputError("kernel matrix V must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw InputError("kernel matrix V must be positive definite");
    }
  } else if (!(v.scale > 0.0) || !std::isfinite(v.scale)) {
    throw InputError("kernel scale for V must be positive");
  }
}

double power_of_norm(double sum_sq, double r) {
  if (r == 1.0) return std::sqrt(sum_sq);
  return std::pow(sum_sq, 0.5 * r);
}

// Depth-first walk over subsets of {start..n-1}; `visit` sees each subset
// once via its accumulated state.
template <class State, class Extend, class Visit>
void walk_subsets(std::size_t n, int depth, std::size_t start, int size,
                  const State& state, const Extend& extend, const Visit& visit) {
  for (std::size_t l = start; l < n; ++l) {
    const State next = extend(state, l);
    visit(next);
    if (size + 1 < depth) walk_subsets(n, depth, l + 1, size + 1, next, extend, visit);
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

double QuadraticForm::apply(std::span<const double> d) const {
  if (matrix) {
    const Eigen::Map<const Eigen::VectorXd> v(d.data(), static_cast<Eigen::Index>(d.size()));
    return v.dot(*matrix * v);
  }
  double s = 0.0;
  for (double x : d) s += x * x;
  return scale * s;
}

std::string kernel_kind(const KernelSpec& spec) {
  return std::visit(Overloaded{
                        [](const EuclideanPower&) { return std::string("euclidean"); },
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const Cauchy&) { return std::string("cauchy"); },
                        [](const ExpWeighted&) { return std::string("expweighted"); },
                        [](const RadialPower&) { return std::string("radialpower"); },
                    },
                    spec);
}

std::string kernel_label(const KernelSpec& spec) {
  auto form = [](const QuadraticForm& v) {
    return v.matrix ? std::string("V=full") : "V=" + format_double(v.scale) + "I";
  };
  return std::visit(
      Overloaded{
          [](const EuclideanPower& k) { return "euclidean(r=" + format_double(k.r) + ")"; },
          [&](const Gaussian& k) { return "gaussian(" + form(k.v) + ")"; },
          [&](const Cauchy& k) { return "cauchy(" + form(k.v) + ")"; },
          [](const ExpWeighted& k) {
            std::string w = "1";
            if (!k.w.empty()) {
              bool uniform = true;
              for (double x : k.w) uniform = uniform && x == k.w.front();
              w = uniform ? format_double(k.w.front()) : std::string("custom");
            }
            return "expweighted(w=" + w + ",D=" + std::to_string(k.depth) + ")";
          },
          [](const RadialPower& k) {
            return "radialpower(r=" + format_double(k.r) + ",D=" + std::to_string(k.depth) + ")";
          },
      },
      spec);
}

void validate(const KernelSpec& spec, std::size_t n) {
  if (n == 0) throw InputError("kernel dimension must be positive");
  std::visit(Overloaded{
                 [](const EuclideanPower& k) { check_power(k.r); },
                 [&](const Gaussian& k) { check_form(k.v, n); },
                 [&](const Cauchy& k) { check_form(k.v, n); },
                 [&](const ExpWeighted& k) {
                   check_depth(n, k.depth);
                   if (k.w.size() > 1 && k.w.size() != n) {
                     throw InputError("expweighted needs one weight per direction");
                   }
                   for (double x : k.w) {
                     if (!(x > 0.0) || !std::isfinite(x)) {
                       throw InputError("expweighted weights must be positive");
                     }
                   }
                 },
                 [&](const RadialPower& k) {
                   check_power(k.r);
                   check_depth(n, k.depth);
                 },
             },
             spec);
}

double kernel_diagonal(const KernelSpec& spec) {
  return std::holds_alternative<Gaussian>(spec) || std::holds_alternative<Cauchy>(spec)
             ? 0.5
             : 0.0;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("kernel arguments differ in dimension");
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InputError("kernel argument is not finite");
    }
    d[i] = x[i] - y[i];
  }
  return std::visit(
      Overloaded{
          [&](const EuclideanPower& k) {
            double s = 0.0;
            for (double v : d) s += v * v;
            return power_of_norm(s, k.r);
          },
          [&](const Gaussian& k) {
            if (k.v.matrix && static_cast<std::size_t>(k.v.matrix->rows()) != n) {
              throw InputError("kernel matrix V does not match the vector dimension");
            }
            return 1.0 - 0.5 * std::exp(-0.5 * k.v.apply(d));
          },
          [&](const Cauchy& k) {
            if (k.v.matrix && static_cast<std::size_t>(k.v.matrix->rows()) != n) {
              throw InputError("kernel matrix V does not match the vector dimension");
            }
            return 1.0 - 0.5 / (1.0 + k.v.apply(d));
          },
          [&](const ExpWeighted& k) {
            if (k.w.size() <= 1) {
              const std::vector<double> same(n, k.w.empty() ? 1.0 : k.w.front());
              return exp_weighted_L(d, same, k.depth);
            }
            return exp_weighted_L(d, k.w, k.depth);
          },
          [&](const RadialPower& k) { return radial_power_L(d, k.r, k.depth); },
      },
      spec);
}

double exp_weighted_L(std::span<const double> a, std::span<const double> w,
                      int depth) {
  const std::size_t n = a.size();
  if (w.size() != n) throw InputError("expweighted needs one weight per direction");
  check_depth(n, depth);
  std::vector<double> twice_w(n), log_factor(n);
  for (std::size_t l = 0; l < n; ++l) {
    if (!(w[l] > 0.0)) throw InputError("expweighted weights must be positive");
    twice_w[l] = 2.0 * w[l];
    const double wa = w[l] * a[l];
    log_factor[l] = std::log1p(wa * wa);
  }
  struct State {
    double mass;     // prod 2 w_l
    double log_sum;  // sum log1p(w_l^2 a_l^2)
  };
  double total = 0.0;
  walk_subsets(
      n, depth, 0, 0, State{1.0, 0.0},
      [&](const State& s, std::size_t l) {
        return State{s.mass * twice_w[l], s.log_sum + log_factor[l]};
      },
      [&](const State& s) { total += s.mass * -std::expm1(-s.log_sum); });
  return total;
}

OrthantIntegrals orthant_recursion(std::span<const double> a,
                                   std::span<const double> w) {
  if (a.empty() || a.size() != w.size()) {
    throw InputError("orthant recursion needs k >= 1 matching (a, w) pairs");
  }
  const double wa1 = w[0] * a[0];
  const double d1 = 1.0 + wa1 * wa1;
  OrthantIntegrals I{w[0] / d1, w[0] * wa1 / d1};
  for (std::size_t k = 1; k < a.size(); ++k) {
    const double wa = w[k] * a[k];
    const double scale = w[k] / (1.0 + wa * wa);
    I = {scale * (I.cos_part - wa * I.sin_part), scale * (wa * I.cos_part + I.sin_part)};
  }
  return I;
}

double exp_weighted_L_by_orthants(std::span<const double> a,
                                  std::span<const double> w, int depth) {
  const std::size_t n = a.size();
  if (w.size() != n) throw InputError("expweighted needs one weight per direction");
  check_depth(n, depth);
  double total = 0.0;
  for (const auto& subset : subsets_up_to(n, static_cast<std::size_t>(depth))) {
    const std::size_t k = subset.size();
    std::vector<double> sa(k), sw(k);
    double mass = 1.0;
    for (std::size_t l = 0; l < k; ++l) {
      sw[l] = w[subset[l]];
      mass *= 2.0 * sw[l];
    }
    double full_space = 0.0;
    for (std::size_t pattern = 0; pattern < (std::size_t{1} << k); ++pattern) {
      for (std::size_t l = 0; l < k; ++l) {
        sa[l] = ((pattern >> l) & 1u) ? -a[subset[l]] : a[subset[l]];
      }
      full_space += orthant_recursion(sa, sw).cos_part;
    }
    total += mass - full_space;
  }
  return total;
}

double radial_power_L(std::span<const double> a, double r, int depth) {
  check_power(r);
  check_depth(a.size(), depth);
  std::vector<double> sq(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) sq[l] = a[l] * a[l];
  double total = 0.0;
  walk_subsets(
      a.size(), depth, 0, 0, 0.0,
      [&](double s, std::size_t l) { return s + sq[l]; },
      [&](double s) { total += power_of_norm(s, r); });
  return total;
}

SubsetRange::SubsetRange(std::size_t n, std::size_t depth) : n_(n), depth_(depth) {
  if (depth < 1 || depth > n) {
    throw InputError("subset depth D must satisfy 1 <= D <= n");
  }
}

SubsetRange::iterator SubsetRange::begin() const { return iterator(n_, depth_, {0}); }
SubsetRange::iterator SubsetRange::end() const { return iterator(n_, depth_, {}); }

SubsetRange::iterator& SubsetRange::iterator::operator++() {
  const std::size_t k = current_.size();
  // Rightmost position that can still move.
  std::size_t pos = k;
  while (pos > 0 && current_[pos - 1] == n_ - k + (pos - 1)) --pos;
  if (pos > 0) {
    ++current_[pos - 1];
    for (std::size_t i = pos; i < k; ++i) current_[i] = current_[i - 1] + 1;
  } else if (k < depth_) {
    current_.resize(k + 1);
    for (std::size_t i = 0; i <= k; ++i) current_[i] = i;
  } else {
    current_.clear();
  }
  return *this;
}

std::size_t SubsetRange::count() const {
  std::size_t total = 0;
  std::size_t binom = 1;
  for (std::size_t j = 1; j <= depth_; ++j) {
    binom = binom * (n_ - j + 1) / j;
    total += binom;
  }
  return total;
}

SubsetRange subsets_up_to(std::size_t n, std::size_t depth) {
  return SubsetRange(n, depth);
}

std::vector<KernelSpec> default_kernels() {
  return {EuclideanPower{1.0}, Gaussian{{10.0, std::nullopt}}, Cauchy{{1.0, std::nullopt}},
          ExpWeighted{{}, 3}, RadialPower{1.0, 3}};
}

}  // namespace setdist
