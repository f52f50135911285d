#include "rfon/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace rfon {

Lattice::Lattice(int dim, int size) : dim_(dim), size_(size) {
  if (dim < 1) throw std::invalid_argument("lattice dimension must be >= 1");
  if (size < 1) throw std::invalid_argument("lattice size must be >= 1");
  if (size == 2)
    throw std::invalid_argument(
        "lattice size L = 2 is not supported: periodic neighbours would coincide");

  volume_ = 1;
  for (int mu = 0; mu < dim; ++mu) {
    if (volume_ > (std::size_t{1} << 40) / static_cast<std::size_t>(size))
      throw std::invalid_argument("lattice volume too large");
    volume_ *= static_cast<std::size_t>(size);
  }

  roots_.resize(size);
  for (int m = 0; m < size; ++m) {
    const double angle = -2.0 * std::numbers::pi * m / size;
    roots_[m] = {std::cos(angle), std::sin(angle)};
  }

  neighbor_count_ = size >= 3 ? static_cast<std::size_t>(2 * dim) : 0;
  neighbors_.resize(volume_ * neighbor_count_);
  negation_.resize(volume_);
  laplacian_.resize(volume_);
  cos_sum_.resize(volume_);

  std::vector<int> c(dim);
  for (std::size_t i = 0; i < volume_; ++i) {
    c = coords(i);
    std::vector<int> neg(dim);
    double cs = 0.0;
    for (int mu = 0; mu < dim; ++mu) {
      neg[mu] = (size - c[mu]) % size;
      cs += roots_[c[mu]].real();
    }
    negation_[i] = index(neg);
    cos_sum_[i] = cs;
    laplacian_[i] = 2.0 * (cs - dim);

    if (neighbor_count_ == 0) continue;
    for (int mu = 0; mu < dim; ++mu) {
      auto shifted = c;
      shifted[mu] = (c[mu] + 1) % size;
      neighbors_[i * neighbor_count_ + 2 * mu] = index(shifted);
      shifted[mu] = (c[mu] + size - 1) % size;
      neighbors_[i * neighbor_count_ + 2 * mu + 1] = index(shifted);
    }
  }
}

std::vector<int> Lattice::coords(std::size_t idx) const {
  std::vector<int> c(dim_);
  for (int mu = 0; mu < dim_; ++mu) {
    c[mu] = static_cast<int>(idx % size_);
    idx /= size_;
  }
  return c;
}

std::size_t Lattice::index(std::span<const int> c) const {
  if (static_cast<int>(c.size()) != dim_)
    throw std::invalid_argument("coordinate vector has wrong dimension");
  std::size_t idx = 0;
  for (int mu = dim_ - 1; mu >= 0; --mu) {
    const int v = ((c[mu] % size_) + size_) % size_;
    idx = idx * size_ + static_cast<std::size_t>(v);
  }
  return idx;
}

std::span<const std::size_t> Lattice::neighbors(std::size_t site) const {
  return {neighbors_.data() + site * neighbor_count_, neighbor_count_};
}

std::size_t Lattice::add(std::size_t k, std::size_t p) const {
  std::size_t out = 0, stride = 1;
  for (int mu = 0; mu < dim_; ++mu) {
    const std::size_t a = k % size_, b = p % size_;
    out += ((a + b) % size_) * stride;
    stride *= size_;
    k /= size_;
    p /= size_;
  }
  return out;
}

std::size_t Lattice::subtract(std::size_t k, std::size_t p) const { return add(k, negation_[p]); }

std::vector<double> Lattice::momentum(std::size_t k) const {
  std::vector<double> q(dim_);
  auto c = coords(k);
  for (int mu = 0; mu < dim_; ++mu) q[mu] = 2.0 * std::numbers::pi * c[mu] / size_;
  return q;
}

cplx Lattice::plane_wave(std::size_t k, std::size_t x) const {
  std::size_t phase = 0;
  for (int mu = 0; mu < dim_; ++mu) {
    phase += (k % size_) * (x % size_);
    k /= size_;
    x /= size_;
  }
  return roots_[phase % size_];
}

std::vector<std::vector<int>> build_momentum_grid(const Lattice& lattice) {
  std::vector<std::vector<int>> grid;
  grid.reserve(lattice.volume());
  for (std::size_t k = 0; k < lattice.volume(); ++k) grid.push_back(lattice.coords(k));
  return grid;
}

double laplacian_symbol(std::span<const double> q) {
  double s = 0.0;
  for (double qm : q) s += std::cos(qm) - 1.0;
  return 2.0 * s;
}

namespace {

double prefactor(FourierNorm norm, std::size_t volume, bool inverse) {
  if (norm == FourierNorm::kRootVolume) return 1.0 / std::sqrt(static_cast<double>(volume));
  return inverse ? 1.0 / static_cast<double>(volume) : 1.0;
}

}  // namespace

MomentumField fourier_forward(std::span<const cplx> field, const Lattice& lattice,
                              std::size_t components, FourierNorm norm) {
  if (field.size() != lattice.volume() * components)
    throw std::invalid_argument("field size " + std::to_string(field.size()) +
                                " does not match V*N = " +
                                std::to_string(lattice.volume() * components));
  MomentumField out;
  out.components = components;
  out.norm = norm;
  out.values.resize(field.size());
  detail::dft(lattice, components, -1, field.data(), out.values.data());
  const double c = prefactor(norm, lattice.volume(), false);
  if (c != 1.0)
    for (auto& v : out.values) v *= c;
  return out;
}

MomentumField fourier_forward(std::span<const double> field, const Lattice& lattice,
                              std::size_t components, FourierNorm norm) {
  std::vector<cplx> tmp(field.begin(), field.end());
  return fourier_forward(std::span<const cplx>(tmp), lattice, components, norm);
}

std::vector<cplx> fourier_inverse(const MomentumField& field, const Lattice& lattice) {
  if (field.values.size() != lattice.volume() * field.components)
    throw std::invalid_argument("momentum field does not match lattice");
  std::vector<cplx> out(field.values.size());
  detail::dft(lattice, field.components, +1, field.values.data(), out.data());
  const double c = prefactor(field.norm, lattice.volume(), true);
  for (auto& v : out) v *= c;
  return out;
}

}  // namespace rfon
