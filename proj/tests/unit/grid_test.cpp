#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fpa/grid.hpp"

using namespace fpa;

TEST_CASE("make_grids validates sizes and the velocity tail") {
  CHECK_NOTHROW(make_grids(1.0, 64, 8.0, 257, 1.0));
  CHECK_THROWS_AS(make_grids(1.0, 48, 8.0, 257, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grids(1.0, 4, 8.0, 257, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grids(1.0, 64, 8.0, 15, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grids(1.0, 64, 4.0, 257, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grids(1.0, 64, 8.0, 257, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grids(0.0, 64, 8.0, 257, 1.0), std::invalid_argument);
}

TEST_CASE("tail mass matches erfc") {
  CHECK(maxwellian_tail_mass(8.0, 1.0) == doctest::Approx(std::erfc(8.0 / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(maxwellian_tail_mass(1.0, 1.0) == doctest::Approx(0.3173105078629141).epsilon(1e-12));
}

TEST_CASE("velocity nodes are mirror symmetric, weights integrate constants exactly") {
  const VelocityGrid vg{8.0, 257};
  const Field v = vg.nodes();
  for (int j = 0; j < vg.nv; ++j) CHECK(v[j] == -v[vg.nv - 1 - j]);
  CHECK(v[128] == 0.0);
  CHECK(vg.weights().sum() == doctest::Approx(16.0).epsilon(1e-15));
}

TEST_CASE("mollifier has unit mass") {
  // composite midpoint on a fine grid
  const int n = 200000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += mollifier_chi(-1.0 + (k + 0.5) * 2.0 / n);
  CHECK(acc * 2.0 / n == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mollifier_chi(1.0) == 0.0);
  CHECK(mollifier_chi(-1.5) == 0.0);
  CHECK(mollifier_chi(0.0f) == doctest::Approx(std::exp(-1.0) / 0.443993816168079437823));
}

TEST_CASE("rescaled mollifier has unit discrete mass and radius support") {
  const PeriodicGrid grid{1.0, 64};
  const Field k = rescaled_mollifier(grid, 0.175);
  CHECK(k.sum() * grid.dx() == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 0; i < grid.nx; ++i)
    if (grid.distance(grid.node(i), 0.0) >= 0.175) CHECK(k[i] == 0.0);
}

TEST_CASE("FFT convolution matches a direct periodic sum") {
  const PeriodicGrid grid{2.0, 32};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field g(32), phi(32);
  for (int i = 0; i < 32; ++i) {
    g[i] = u(rng);
    phi[i] = u(rng);
  }
  const Field fast = periodic_convolve(g, phi, grid.dx());
  for (int i = 0; i < 32; ++i) {
    double direct = 0.0;
    for (int k = 0; k < 32; ++k) direct += g[k] * phi[grid.wrap(i - k)] * grid.dx();
    CHECK(fast[i] == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK_THROWS_AS(periodic_convolve(g, Field::Ones(16), grid.dx()), std::invalid_argument);
}

TEST_CASE("moments of a global Maxwellian") {
  const auto [xg, vg] = make_grids(1.0, 16, 8.0, 257, 1.0);
  const KineticState mu = global_maxwellian(xg, vg, 1.0, 0.3, 2.0);
  const MacroMoments mm = moments(mu);
  CHECK(mu.mass() == doctest::Approx(2.0).epsilon(1e-13));
  for (int i = 0; i < xg.nx; ++i) {
    CHECK(mm.rho[i] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(mm.m[i] == doctest::Approx(0.6).epsilon(1e-13));
  }
}

TEST_CASE("periodic distance and wrap") {
  const PeriodicGrid grid{1.0, 8};
  CHECK(grid.distance(0.05, 0.95) == doctest::Approx(0.1));
  CHECK(grid.wrap(-1) == 7);
  CHECK(grid.wrap(8) == 0);
  CHECK(grid.wrap(-0.25) == doctest::Approx(0.75));
  CHECK(grid.wrap(1.0) == doctest::Approx(0.0));
}

TEST_CASE("delta kernel is the identity and constants survive convolution") {
  const PeriodicGrid g{1.0, 32};
  Field delta = Field::Zero(g.nx);
  delta[0] = 1.0 / g.dx();
  Field data(g.nx);
  for (int i = 0; i < g.nx; ++i) data[i] = std::sin(3.0 * i) + 0.1 * i;
  CHECK((periodic_convolve(data, delta, g.dx()) - data).abs().maxCoeff() < 1e-12);
  const Field chi = rescaled_mollifier(g, 0.2);
  CHECK((periodic_convolve(Field::Constant(g.nx, 2.5), chi, g.dx()) - 2.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("moments of zero and of velocity-even data") {
  const auto [xg, vg] = make_grids(1.0, 16, 8.0, 129, 1.0);
  KineticState s(xg, vg);
  MacroMoments mm = moments(s);
  CHECK((mm.rho == 0.0).all());
  CHECK((mm.m == 0.0).all());
  const Field v = vg.nodes();
  for (int i = 0; i < xg.nx; ++i)
    for (int j = 0; j < vg.nv; ++j) s.f(i, j) = (1.0 + 0.5 * std::cos(i)) * std::exp(-v[j] * v[j]) * (1.0 + v[j] * v[j]);
  mm = moments(s);
  CHECK(mm.m.abs().maxCoeff() < 1e-14);
  CHECK((mm.rho > 0.0).all());
}
