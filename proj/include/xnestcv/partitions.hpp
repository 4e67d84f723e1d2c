#ifndef XNESTCV_PARTITIONS_HPP
#define XNESTCV_PARTITIONS_HPP

#include <cstdint>
#include <vector>

#include "xnestcv/dataset.hpp"
#include "xnestcv/errors.hpp"

namespace xnestcv {

// Number of size-k subsets of [n], saturating at a large sentinel to keep the
// combinatorial guards overflow-safe.
inline std::uint64_t binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (Index i = 1; i <= k; ++i) {
    const std::uint64_t cap = UINT64_MAX / static_cast<std::uint64_t>(n);
    if (c > cap) return UINT64_MAX;
    c = c * static_cast<std::uint64_t>(n - k + i) /
        static_cast<std::uint64_t>(i);
  }
  return c;
}

// Exhaustive test-set enumeration: all C(n, n0) strictly increasing index
// subsets of size n0, visited in lexicographic order.
struct PartitionSpec {
  Index n;
  Index n0;
  Index n0_out;
  Index n0_in;

  PartitionSpec(Index n_in, Index n0_total, Index out_size, Index in_size)
      : n(n_in), n0(n0_total), n0_out(out_size), n0_in(in_size) {
    if (n0 < 0 || n0 >= n || n0_out < 0 || n0_in < 0 || n0_out + n0_in != n0)
      throw InvalidInput("invalid partition sizes");
  }

  static PartitionSpec leave_out(Index n_in, Index n0_total) {
    return PartitionSpec(n_in, n0_total, n0_total, 0);
  }

  std::uint64_t count() const { return binomial(n, n0); }

  template <typename Fn>
  void for_each_subset(Fn&& fn) const {
    if (n0 == 0) return;
    std::vector<Index> idx(static_cast<std::size_t>(n0));
    for (Index i = 0; i < n0; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      fn(idx);
      Index i = n0 - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - n0 + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (Index j = i + 1; j < n0; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
};

}  // namespace xnestcv

#endif  // XNESTCV_PARTITIONS_HPP
