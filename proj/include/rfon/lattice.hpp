#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rfon {

using cplx = std::complex<double>;

/// Periodic hypercubic lattice [0,L)^d.
///
/// Sites and momenta share one flat enumeration: index = sum_mu c_mu L^mu with
/// the first coordinate fastest. A momentum index k stands for q = 2*pi*k/L,
/// so negation and matching are exact integer operations.
///
/// L = 1 is accepted as a single site without bonds. L = 2 is rejected because
/// both periodic neighbours of a site coincide.
class Lattice {
 public:
  Lattice(int dim, int size);

  int dim() const { return dim_; }
  int size() const { return size_; }
  std::size_t volume() const { return volume_; }

  std::vector<int> coords(std::size_t index) const;
  std::size_t index(std::span<const int> coords) const;

  /// Periodic nearest neighbours (2d entries, none when L = 1).
  std::span<const std::size_t> neighbors(std::size_t site) const;
  std::size_t coordination() const { return neighbor_count_; }

  /// Momentum index of -q (mod 2*pi).
  std::size_t negate(std::size_t k) const { return negation_[k]; }
  /// Index of (k + p) mod L componentwise.
  std::size_t add(std::size_t k, std::size_t p) const;
  std::size_t subtract(std::size_t k, std::size_t p) const;

  /// Components of q = 2*pi*k/L in [0, 2*pi).
  std::vector<double> momentum(std::size_t k) const;

  /// e^{-i q.x} evaluated from an exact integer phase table.
  cplx plane_wave(std::size_t k, std::size_t x) const;

  /// 2 * sum_mu (cos q_mu - 1), the lattice Laplacian in momentum space.
  double laplacian(std::size_t k) const { return laplacian_[k]; }
  /// sum_mu cos q_mu
  double cos_sum(std::size_t k) const { return cos_sum_[k]; }

  bool operator==(const Lattice& other) const {
    return dim_ == other.dim_ && size_ == other.size_;
  }

 private:
  int dim_;
  int size_;
  std::size_t volume_;
  std::size_t neighbor_count_;
  std::vector<std::size_t> neighbors_;
  std::vector<std::size_t> negation_;
  std::vector<double> laplacian_;
  std::vector<double> cos_sum_;
  std::vector<cplx> roots_;  // e^{-2 pi i m / L}
};

/// All V grid momenta as index vectors (k_1..k_d), enumeration order.
std::vector<std::vector<int>> build_momentum_grid(const Lattice& lattice);

double laplacian_symbol(std::span<const double> q);

enum class FourierNorm {
  kRootVolume,   // 1/sqrt(V), unitary
  kUnnormalized  // prefactor 1
};

/// Complex field over (momentum, component), layout k * components + n.
struct MomentumField {
  std::vector<cplx> values;
  std::size_t components = 1;
  FourierNorm norm = FourierNorm::kRootVolume;

  cplx at(std::size_t k, std::size_t n) const { return values[k * components + n]; }
};

/// phi~_q^n = c sum_x e^{-iq.x} phi_x^n for a real field laid out x * N + n.
MomentumField fourier_forward(std::span<const double> field, const Lattice& lattice,
                              std::size_t components,
                              FourierNorm norm = FourierNorm::kRootVolume);

/// Complex-input version used for propagator convolutions.
MomentumField fourier_forward(std::span<const cplx> field, const Lattice& lattice,
                              std::size_t components,
                              FourierNorm norm = FourierNorm::kRootVolume);

/// Inverse of fourier_forward under the same normalization tag.
std::vector<cplx> fourier_inverse(const MomentumField& field, const Lattice& lattice);

}  // namespace rfon
