#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rfon {

using cplx = std::complex<double>;

inline constexpr int kMaxCumulantOrder = 6;

/// A set partition of {0..j-1}: blocks as bitmasks plus the Moebius weight
/// (-1)^{|pi|-1} (|pi|-1)!.
struct SetPartition {
  std::vector<unsigned> blocks;
  double coefficient = 1.0;
};

/// All Bell(j) partitions, j in [1, 6].
const std::vector<SetPartition>& set_partitions(int j);

/// Joint cumulant <A_1; ...; A_j> from the mixed moments <prod_{i in S} A_i>,
/// indexed by the bitmask S (size 2^j, entry 0 ignored).
cplx connected_from_moments(std::span<const cplx> subset_moments, int j);

}  // namespace rfon
