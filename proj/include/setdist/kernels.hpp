#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "setdist/geometry.hpp"

namespace setdist {

/// Positive-definite form x' V x. Either scale * I (the common case and the
/// only form the CLI accepts) or an explicit symmetric matrix.
struct QuadraticForm {
  double scale = 1.0;
  std::optional<Eigen::MatrixXd> matrix;

  double apply(std::span<const double> d) const;
};

/// ||x - y||^r, 0 < r < 2.
struct EuclideanPower {
  double r = 1.0;
};
/// 1 - exp(-q/2)/2 with q = (x-y)' V (x-y).
struct Gaussian {
  QuadraticForm v{10.0, std::nullopt};
};
/// 1 - 1/(2(1 + q)) with q = (x-y)' V (x-y).
struct Cauchy {
  QuadraticForm v{1.0, std::nullopt};
};
/// Truncated l0 kernel for the weight exp(-sum |t_i| / w_i), subsets up to
/// size `depth`. An empty `w` means all weights equal to one; a single
/// entry is used for every direction.
struct ExpWeighted {
  std::vector<double> w;
  int depth = 3;
};
/// Truncated l0 kernel with the radial weight: sum over subsets S with
/// |S| <= depth of ||a_S||^r.
struct RadialPower {
  double r = 1.0;
  int depth = 3;
};

using KernelSpec =
    std::variant<EuclideanPower, Gaussian, Cauchy, ExpWeighted, RadialPower>;

/// "euclidean" | "gaussian" | "cauchy" | "expweighted" | "radialpower".
std::string kernel_kind(const KernelSpec& spec);
/// Kind plus parameters, e.g. "expweighted(w=1,D=3)". Used as a CSV key.
std::string kernel_label(const KernelSpec& spec);

/// Throws InputError if the parameters are out of range or the kernel
/// cannot act on n-dimensional vectors.
void validate(const KernelSpec& spec, std::size_t n);

/// Value on the diagonal, L(x, x): 0.5 for Gaussian and Cauchy, else 0.
double kernel_diagonal(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y);
inline double kernel_eval(const KernelSpec& spec, const SupportVector& x,
                          const SupportVector& y) {
  return kernel_eval(spec, std::span<const double>(x.values),
                     std::span<const double>(y.values));
}

/// Sum over index subsets S, 1 <= |S| <= depth, of
///   integral over R^|S| of (1 - cos(sum a_l t_l)) prod exp(-|t_l| / w_l) dt.
///
/// Each integrand factorises into even univariate terms, so the subset
/// integral is prod(2 w_l) - prod(2 w_l / (1 + w_l^2 a_l^2)); it is evaluated
/// as prod(2 w_l) * (-expm1(-sum log1p(w_l^2 a_l^2))) to avoid cancellation
/// for small differences.
double exp_weighted_L(std::span<const double> a, std::span<const double> w,
                      int depth);

/// Same quantity through the orthant integrals: every subset integral is the
/// sum over the 2^|S| sign patterns s of I_c(s * a, w). Exponential in the
/// depth; kept as an independent cross-check of exp_weighted_L.
double exp_weighted_L_by_orthants(std::span<const double> a,
                                  std::span<const double> w, int depth);

struct OrthantIntegrals {
  double cos_part = 0.0;  // I_c(k)
  double sin_part = 0.0;  // I_s(k)
};

/// Integrals of cos / sin(sum a_j t_j) * exp(-sum t_j / w_j) over [0, inf)^k
/// by the 2x2 rotation-scaling recursion over coordinates.
///
/// The base case is I_c(1) = w / (1 + (w a)^2), I_s(1) = w^2 a / (1 + (w a)^2).
/// A commonly quoted form of this recursion prints I_c(1) without the
/// leading factor w; that version disagrees with direct integration
/// (k = 1, a = 1, w = 2 must give 0.4, not 0.2).
OrthantIntegrals orthant_recursion(std::span<const double> a,
                                   std::span<const double> w);

/// Sum over index subsets S, 1 <= |S| <= depth, of (sum_{l in S} a_l^2)^(r/2).
double radial_power_L(std::span<const double> a, double r, int depth);

/// Index subsets of {0..n-1} with 1..depth elements, ordered by size and
/// then lexicographically.
class SubsetRange {
 public:
  SubsetRange(std::size_t n, std::size_t depth);

  class iterator {
   public:
    using value_type = std::vector<std::size_t>;
    using difference_type = std::ptrdiff_t;

    const std::vector<std::size_t>& operator*() const { return current_; }
    iterator& operator++();
    iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    bool operator==(const iterator& other) const {
      return current_ == other.current_;
    }

   private:
    friend class SubsetRange;
    iterator(std::size_t n, std::size_t depth, std::vector<std::size_t> current)
        : n_(n), depth_(depth), current_(std::move(current)) {}
    std::size_t n_ = 0;
    std::size_t depth_ = 0;
    std::vector<std::size_t> current_;  // empty == end
  };

  iterator begin() const;
  iterator end() const;
  /// sum_{j=1..depth} C(n, j).
  std::size_t count() const;

 private:
  std::size_t n_;
  std::size_t depth_;
};

SubsetRange subsets_up_to(std::size_t n, std::size_t depth);

/// The five kernels of the reference simulation study: Euclidean r=1,
/// Gaussian V=10I, Cauchy V=I, ExpWeighted w=1 D=3, RadialPower r=1 D=3.
std::vector<KernelSpec> default_kernels();

}  // namespace setdist
