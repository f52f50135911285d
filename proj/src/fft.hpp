#pragma once

#include <cstddef>

#include "rfon/lattice.hpp"

namespace rfon::detail {

/// Unnormalized d-dimensional DFT of `howmany` interleaved fields
/// (element (x, n) at x * howmany + n). sign = -1 gives sum_x e^{-iq.x} f(x).
void dft(const Lattice& lattice, std::size_t howmany, int sign, const cplx* in, cplx* out);

}  // namespace rfon::detail
