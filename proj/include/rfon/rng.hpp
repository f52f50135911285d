#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rfon {

using Rng = std::mt19937_64;

/// Stream tags keep disorder, inner-disorder and sampler streams disjoint.
enum class StreamTag : std::uint64_t {
  kDisorder = 1,
  kInnerDisorder = 2,
  kSampler = 3,
  kAuxiliary = 4,
};

/// Counter-based seed derivation: the seed depends only on (base, tag, counters),
/// never on the order in which workers request streams.
std::uint64_t stream_seed(std::uint64_t base, StreamTag tag,
                          std::initializer_list<std::uint64_t> counters);

inline Rng make_rng(std::uint64_t base, StreamTag tag,
                    std::initializer_list<std::uint64_t> counters) {
  return Rng(stream_seed(base, tag, counters));
}

}  // namespace rfon
