#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "setdist/geometry.hpp"
#include "setdist/kernels.hpp"

namespace setdist {

/// Two labelled groups of support vectors on a common angle grid.
struct SampleSet {
  std::vector<SupportVector> group_a;
  std::vector<SupportVector> group_b;

  std::size_t grid_size() const;
  std::size_t pooled_size() const { return group_a.size() + group_b.size(); }
  /// group_a followed by group_b.
  const SupportVector& pooled(std::size_t i) const;
  /// Throws InputError unless both groups have >= 2 members and share a grid.
  void validate() const;
};

/// Dense symmetric matrix of kernel values over the pooled sample.
class KernelMatrix {
 public:
  KernelMatrix(std::size_t size, KernelSpec spec);

  std::size_t size() const { return size_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * size_ + j]; }
  const KernelSpec& spec() const { return spec_; }
  /// Sets (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value);
  /// Adds `c` to every entry, diagonal included.
  void shift(double c);
  /// Compensated sum of all entries.
  double total() const { return total_; }

 private:
  friend KernelMatrix kernel_matrix(const SampleSet&, const KernelSpec&);
  void refresh_total();

  std::size_t size_;
  KernelSpec spec_;
  std::vector<double> data_;
  double total_ = 0.0;
};

KernelMatrix kernel_matrix(const SampleSet& samples, const KernelSpec& spec);

/// Unbiased U-statistic estimate of the squared N-distance,
///
///   2/(m1 m2) sum_{A x B} L - 1/(m1(m1-1)) sum_{A x A} L - 1/(m2(m2-1)) sum_{B x B} L,
///
/// where the within-group sums run over all ordered pairs, i = j included.
/// `in_group_a[i]` assigns pooled index i; the counts must be (m1, m2).
double nhat(const KernelMatrix& matrix, std::span<const bool> in_group_a,
            std::size_t m1);

/// nhat with group A = the first m1 entries of `permutation`.
double nhat_permuted(const KernelMatrix& matrix,
                     std::span<const std::size_t> permutation, std::size_t m1);

}  // namespace setdist
