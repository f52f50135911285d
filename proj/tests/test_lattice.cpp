#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rfon/lattice.hpp"

using namespace rfon;

TEST_CASE("laplacian symbol at the zone boundary") {
  const double pi = std::numbers::pi;
  const std::vector<double> q1{pi};
  CHECK(laplacian_symbol(q1) == doctest::Approx(-4.0).epsilon(1e-15));
  const std::vector<double> q2{pi / 2, pi / 2};
  CHECK(laplacian_symbol(q2) == doctest::Approx(-4.0).epsilon(1e-15));
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(laplacian_symbol(zero) == 0.0);
}

TEST_CASE("laplacian table matches the symbol and is even") {
  for (int d = 1; d <= 3; ++d) {
    const Lattice lat(d, 5);
    for (std::size_t k = 0; k < lat.volume(); ++k) {
      CHECK(lat.laplacian(k) == doctest::Approx(laplacian_symbol(lat.momentum(k))).epsilon(1e-13));
      CHECK(lat.laplacian(k) == doctest::Approx(lat.laplacian(lat.negate(k))).epsilon(1e-13));
    }
  }
}

TEST_CASE("sum of the laplacian over the grid is -2 d V") {
  for (int d = 1; d <= 3; ++d)
    for (int L : {3, 4, 5}) {
      const Lattice lat(d, L);
      double s = 0.0;
      for (std::size_t k = 0; k < lat.volume(); ++k) s += lat.laplacian(k);
      CHECK(s == doctest::Approx(-2.0 * d * static_cast<double>(lat.volume())).epsilon(1e-12));
    }
}

TEST_CASE("L = 2 is rejected, L = 1 has no bonds") {
  CHECK_THROWS_AS(Lattice(1, 2), std::invalid_argument);
  CHECK_THROWS_AS(Lattice(0, 4), std::invalid_argument);
  const Lattice one(3, 1);
  CHECK(one.volume() == 1);
  CHECK(one.neighbors(0).empty());
}

TEST_CASE("neighbours are periodic and symmetric") {
  const Lattice lat(2, 4);
  for (std::size_t x = 0; x < lat.volume(); ++x) {
    CHECK(lat.neighbors(x).size() == 4);
    for (std::size_t y : lat.neighbors(x)) {
      const auto back = lat.neighbors(y);
      CHECK(std::count(back.begin(), back.end(), x) == 1);
    }
  }
}

TEST_CASE("momentum arithmetic is exact") {
  const Lattice lat(3, 4);
  for (std::size_t k = 0; k < lat.volume(); ++k) {
    CHECK(lat.negate(lat.negate(k)) == k);
    CHECK(lat.add(k, lat.negate(k)) == 0);
    for (std::size_t p = 0; p < lat.volume(); p += 7) CHECK(lat.subtract(lat.add(k, p), p) == k);
  }
  const auto grid = build_momentum_grid(lat);
  CHECK(grid.size() == lat.volume());
  CHECK(lat.index(grid[37]) == 37);
}

TEST_CASE("forward then inverse transform reproduces the field") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (auto norm : {FourierNorm::kRootVolume, FourierNorm::kUnnormalized}) {
    const Lattice lat(3, 5);
    std::vector<double> f(lat.volume() * 2);
    for (auto& v : f) v = n(rng);
    const auto ft = fourier_forward(f, lat, 2, norm);
    const auto back = fourier_inverse(ft, lat);
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(std::abs(back[i].real() - f[i]) <= 1e-10 * std::abs(f[i]) + 1e-13);
      CHECK(std::abs(back[i].imag()) < 1e-12);
    }
  }
}

TEST_CASE("transform agrees with the plane-wave sum and is unitary") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  const Lattice lat(2, 3);
  std::vector<double> f(lat.volume());
  for (auto& v : f) v = n(rng);
  const auto ft = fourier_forward(f, lat, 1);
  double norm_x = 0.0, norm_q = 0.0;
  for (std::size_t k = 0; k < lat.volume(); ++k) {
    cplx direct = 0.0;
    for (std::size_t x = 0; x < lat.volume(); ++x) {
      const auto q = lat.momentum(k);
      const auto c = lat.coords(x);
      double phase = 0.0;
      for (int mu = 0; mu < 2; ++mu) phase += q[mu] * c[mu];
      direct += std::polar(1.0, -phase) * f[x];
    }
    direct /= std::sqrt(static_cast<double>(lat.volume()));
    CHECK(std::abs(direct - ft.at(k, 0)) < 1e-12);
    // a real field has conjugate-symmetric transform
    CHECK(std::abs(ft.at(lat.negate(k), 0) - std::conj(ft.at(k, 0))) < 1e-12);
    norm_q += std::norm(ft.at(k, 0));
  }
  for (double v : f) norm_x += v * v;
  CHECK(norm_q == doctest::Approx(norm_x).epsilon(1e-12));
}
