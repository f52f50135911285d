#include "rfon/cumulant.hpp"

#include <array>
#include <mutex>
#include <stdexcept>
#include <string>

namespace rfon {
namespace {

std::vector<SetPartition> build(int j) {
  // Restricted growth strings a_0 = 0, a_i <= 1 + max(a_0..a_{i-1}).
  std::vector<SetPartition> out;
  std::vector<int> a(j, 0);
  for (;;) {
    int blocks = 0;
    for (int v : a) blocks = std::max(blocks, v + 1);
    SetPartition p;
    p.blocks.assign(blocks, 0u);
    for (int i = 0; i < j; ++i) p.blocks[a[i]] |= 1u << i;
    double fact = 1.0;
    for (int m = 2; m < blocks; ++m) fact *= m;
    p.coefficient = ((blocks - 1) % 2 == 0 ? 1.0 : -1.0) * fact;
    out.push_back(std::move(p));

    int i = j - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int m = 0; m < i; ++m) prefix_max = std::max(prefix_max, a[m]);
      if (a[i] <= prefix_max) {
        ++a[i];
        for (int m = i + 1; m < j; ++m) a[m] = 0;
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

}  // namespace

const std::vector<SetPartition>& set_partitions(int j) {
  if (j < 1 || j > kMaxCumulantOrder)
    throw std::invalid_argument("cumulant order " + std::to_string(j) + " outside [1, " +
                                std::to_string(kMaxCumulantOrder) + "]");
  static const std::array<std::vector<SetPartition>, kMaxCumulantOrder + 1> table = [] {
    std::array<std::vector<SetPartition>, kMaxCumulantOrder + 1> t;
    for (int m = 1; m <= kMaxCumulantOrder; ++m) t[m] = build(m);
    return t;
  }();
  return table[j];
}

cplx connected_from_moments(std::span<const cplx> subset_moments, int j) {
  const auto& partitions = set_partitions(j);
  if (subset_moments.size() < (std::size_t{1} << j))
    throw std::invalid_argument("need 2^j subset moments");
  cplx total = 0.0;
  for (const auto& p : partitions) {
    cplx term = p.coefficient;
    for (unsigned block : p.blocks) term *= subset_moments[block];
    total += term;
  }
  return total;
}

}  // namespace rfon
