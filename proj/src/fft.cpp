#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace rfon::detail {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex plan_mutex;

struct PlanCache {
  std::map<std::tuple<int, int, std::size_t, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

fftw_plan get_plan(const Lattice& lattice, std::size_t howmany, int sign) {
  static PlanCache cache;
  std::lock_guard lock(plan_mutex);
  auto key = std::make_tuple(lattice.dim(), lattice.size(), howmany, sign);
  if (auto it = cache.plans.find(key); it != cache.plans.end()) return it->second;

  std::vector<int> dims(lattice.dim(), lattice.size());
  const std::size_t total = lattice.volume() * howmany;
  auto* in = fftw_alloc_complex(total);
  auto* out = fftw_alloc_complex(total);
  const int many = static_cast<int>(howmany);
  fftw_plan plan = fftw_plan_many_dft(lattice.dim(), dims.data(), many, in, nullptr, many, 1, out,
                                      nullptr, many, 1, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  cache.plans.emplace(key, plan);
  return plan;
}

}  // namespace

void dft(const Lattice& lattice, std::size_t howmany, int sign, const cplx* in, cplx* out) {
  fftw_plan plan = get_plan(lattice, howmany, sign);
  // fftw_execute_dft never writes to `in` for out-of-place plans.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace rfon::detail
