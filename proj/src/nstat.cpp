#include "setdist/nstat.hpp"

#include <cmath>

#include "setdist/error.hpp"

namespace setdist {
namespace {

// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// sum over all ordered pairs (i, j) of `members`, members ascending.
double block_sum(const KernelMatrix& k, std::span<const std::size_t> members) {
  CompensatedSum diag, upper;
  for (std::size_t a = 0; a < members.size(); ++a) {
    const std::size_t i = members[a];
    diag.add(k(i, i));
    for (std::size_t b = a + 1; b < members.size(); ++b) upper.add(k(i, members[b]));
  }
  return diag.value() + 2.0 * upper.value();
}

template <class Mask>
double nhat_from_mask(const KernelMatrix& k, const Mask& in_a, std::size_t m1) {
  const std::size_t n = k.size();
  std::vector<std::size_t> a, b;
  a.reserve(m1);
  b.reserve(n - m1);
  for (std::size_t i = 0; i < n; ++i) (in_a[i] ? a : b).push_back(i);
  if (a.size() != m1) throw InputError("label counts do not match the group sizes");
  if (a.size() < 2 || b.size() < 2) throw InputError("each group needs at least two members");
  const double saa = block_sum(k, a);
  const double sbb = block_sum(k, b);
  const double cross = 0.5 * (k.total() - (saa + sbb));
  const double ma = static_cast<double>(a.size());
  const double mb = static_cast<double>(b.size());
  return 2.0 * cross / (ma * mb) - (saa / (ma * (ma - 1.0)) + sbb / (mb * (mb - 1.0)));
}

}  // namespace

std::size_t SampleSet::grid_size() const {
  if (!group_a.empty()) return group_a.front().size();
  if (!group_b.empty()) return group_b.front().size();
  return 0;
}

const SupportVector& SampleSet::pooled(std::size_t i) const {
  return i < group_a.size() ? group_a[i] : group_b[i - group_a.size()];
}

void SampleSet::validate() const {
  if (group_a.size() < 2 || group_b.size() < 2) {
    throw InputError("each sample needs at least two support vectors");
  }
  const std::size_t n = grid_size();
  for (std::size_t i = 0; i < pooled_size(); ++i) {
    if (pooled(i).size() != n) throw InputError("support vectors live on different angle grids");
  }
}

KernelMatrix::KernelMatrix(std::size_t size, KernelSpec spec)
    : size_(size), spec_(std::move(spec)), data_(size * size, 0.0) {}

void KernelMatrix::set(std::size_t i, std::size_t j, double value) {
  data_[i * size_ + j] = value;
  data_[j * size_ + i] = value;
}

void KernelMatrix::shift(double c) {
  for (double& v : data_) v += c;
  refresh_total();
}

void KernelMatrix::refresh_total() {
  CompensatedSum s;
  for (double v : data_) s.add(v);
  total_ = s.value();
}

KernelMatrix kernel_matrix(const SampleSet& samples, const KernelSpec& spec) {
  samples.validate();
  validate(spec, samples.grid_size());
  const std::size_t n = samples.pooled_size();
  KernelMatrix k(n, spec);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& xi = samples.pooled(i);
    for (std::size_t j = i; j < n; ++j) {
      k.set(i, j, kernel_eval(spec, xi, samples.pooled(j)));
    }
  }
  k.refresh_total();
  return k;
}

double nhat(const KernelMatrix& matrix, std::span<const bool> in_group_a, std::size_t m1) {
  if (in_group_a.size() != matrix.size()) {
    throw InputError("label vector does not match the kernel matrix");
  }
  return nhat_from_mask(matrix, in_group_a, m1);
}

double nhat_permuted(const KernelMatrix& matrix, std::span<const std::size_t> permutation,
                     std::size_t m1) {
  const std::size_t n = matrix.size();
  if (permutation.size() != n) throw InputError("permutation has the wrong length");
  if (m1 > n) throw InputError("group size exceeds the pooled sample");
  std::vector<char> seen(n, 0);
  std::vector<char> in_a(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t idx = permutation[pos];
    if (idx >= n || seen[idx]) throw InputError("invalid permutation");
    seen[idx] = 1;
    in_a[idx] = pos < m1 ? 1 : 0;
  }
  return nhat_from_mask(matrix, in_a, m1);
}

}  // namespace setdist
