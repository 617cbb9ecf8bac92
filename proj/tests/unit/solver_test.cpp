#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fpa/diagnostics.hpp"
#include "fpa/solver.hpp"

using namespace fpa;

namespace {

KineticState random_state(std::uint64_t seed, int nx = 16, int nv = 257) {
  const auto [xg, vg] = make_grids(1.0, nx, 8.0, nv, 1.0);
  KineticState s(xg, vg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Field v = vg.nodes();
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nv; ++j) s.f(i, j) = u(rng) * std::exp(-0.5 * v[j] * v[j]) * (u(rng) < 0.2 ? 0.0 : 1.0);
  s.f /= s.mass();
  return s;
}

ModelSpec cs_model(const PeriodicGrid& grid, ModelKind kind = ModelKind::CS) {
  ModelOptions o;
  o.kind = kind;
  return make_model(o, grid);
}

}  // namespace

TEST_CASE("bernoulli weight") {
  CHECK(bernoulli_weight(0.0) == 1.0);
  CHECK(bernoulli_weight(1.0) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)));
  CHECK(bernoulli_weight(-2.0) == doctest::Approx(2.0 / (1.0 - std::exp(-2.0))));
  CHECK(bernoulli_weight(1e-9) == doctest::Approx(1.0 - 5e-10));
  // B(-z) - B(z) = z
  for (double z : {0.3, 2.0, 30.0}) CHECK(bernoulli_weight(-z) - bernoulli_weight(z) == doctest::Approx(z));
}

TEST_CASE("Thomas solve matches a dense solve") {
  const int n = 12;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Field lo(n), di(n), up(n), rhs(n);
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    lo[i] = -u(rng);
    up[i] = -u(rng);
    di[i] = 3.0 + u(rng);
    rhs[i] = u(rng);
    a(i, i) = di[i];
    if (i > 0) a(i, i - 1) = lo[i];
    if (i + 1 < n) a(i, i + 1) = up[i];
  }
  const Vector ref = a.partialPivLu().solve(rhs.matrix());
  Field x = rhs;
  solve_tridiagonal(lo, di, up, x);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  Field bad = rhs;
  CHECK_THROWS_AS(solve_tridiagonal(lo, Field(Field::Zero(n)), up, bad), SolverError);
}

TEST_CASE("velocity step conserves mass, keeps positivity, fixes the Maxwellian") {
  const VelocityGrid vg{8.0, 129};
  const Field w = vg.weights();
  const Field mu = gaussian_profile(vg, 0.7, 0.4);
  const Field next = fp_velocity_step(mu, 2.0, 0.4, 0.7, 0.05, vg);
  CHECK((next - mu).abs().maxCoeff() < 1e-15);

  Field g = Field::Zero(vg.nv);
  g[100] = 1.0;
  for (int n = 0; n < 50; ++n) {
    const Field h = fp_velocity_step(g, 1.0, -1.0, 0.3, 0.02, vg);
    CHECK((h * w).sum() == doctest::Approx((g * w).sum()).epsilon(1e-14));
    CHECK(h.minCoeff() >= 0.0);
    g = h;
  }
  // sigma = 0: pure relaxation toward ubar, still positive
  const Field cold = fp_velocity_step(gaussian_profile(vg, 0.5, 2.0), 1.0, 0.0, 0.0, 0.01, vg);
  CHECK(cold.minCoeff() >= 0.0);
  CHECK(fp_velocity_step(g, 0.0, 0.0, 1.0, 0.1, vg).isApprox(g));
}

TEST_CASE("velocity step reproduces Ornstein-Uhlenbeck moments") {
  const VelocityGrid vg{8.0, 257};
  const Field v = vg.nodes(), w = vg.weights();
  Field g = gaussian_profile(vg, 0.1, 1.0);
  const double dt = 1e-3;
  for (int n = 0; n < 1000; ++n) g = fp_velocity_step(g, 1.0, 0.0, 1.0, dt, vg);
  const double mass = (g * w).sum(), mean = (g * w * v).sum() / mass;
  const double var = (g * w * (v - mean).square()).sum() / mass;
  CHECK(mean == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
  CHECK(var == doctest::Approx(1.0 - 0.9 * std::exp(-2.0)).epsilon(1e-3));
}

TEST_CASE("transport is exact for whole-cell shifts and conserves mass") {
  KineticState s = random_state(4);
  const KineticState before = s;
  // dt such that v_j dt is a multiple of dx for every node: dv*dt = dx
  const double dt = s.xgrid.dx() / s.vgrid.dv();
  transport_step(s, dt);
  for (int j = 0; j < s.vgrid.nv; ++j) {
    const int shift = j - (s.vgrid.nv - 1) / 2;
    for (int i = 0; i < s.xgrid.nx; ++i) CHECK(s.f(i, j) == before.f(s.xgrid.wrap(i - shift), j));
  }
  transport_step(s, 0.0137);
  CHECK(s.mass() == doctest::Approx(before.mass()).epsilon(1e-14));
  CHECK(s.f.minCoeff() >= 0.0);
}

TEST_CASE("full steps conserve mass and momentum and stay positive on random data") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    KineticState s = random_state(seed);
    const ModelSpec model = cs_model(s.xgrid, seed % 2 ? ModelKind::CS : ModelKind::Mseg);
    SolverConfig config;
    config.dt = 0.01;
    const double m0 = s.mass(), p0 = total_momentum(s);
    for (int n = 0; n < 20; ++n) step(s, model, config);
    CHECK(s.mass() == doctest::Approx(m0).epsilon(1e-13));
    // up to the high-order velocity discretization defect
    CHECK(total_momentum(s) == doctest::Approx(p0).scale(1.0).epsilon(1e-8));
    CHECK(s.f.minCoeff() >= 0.0);
    CHECK(s.t == doctest::Approx(0.2));
  }
}

TEST_CASE("step rejects a time step too large for the strength") {
  KineticState s = random_state(9);
  SolverConfig config;
  config.dt = 1.0;
  CHECK_THROWS_AS(step(s, cs_model(s.xgrid), config), SolverError);
}

TEST_CASE("run records the initial and final states") {
  const KineticState s = random_state(10);
  SolverConfig config;
  config.dt = 0.01;
  config.t_end = 0.1;
  config.series_every = 3;
  config.snapshot_every = 5;
  int snapshots = 0;
  const RunResult r = run(s, cs_model(s.xgrid), config, [&](const KineticState&) { ++snapshots; });
  REQUIRE(r.series.size() == 5);
  CHECK(r.series.front().t == 0.0);
  CHECK(r.series.back().t == doctest::Approx(0.1));
  CHECK(snapshots == 3);  // t = 0, 0.05, 0.1
  CHECK(r.series.front().entropy_residual == 0.0);
}

TEST_CASE("transport leaves x-independent data unchanged") {
  const auto [xg, vg] = make_grids(1.0, 32, 8.0, 129, 1.0);
  KineticState s = global_maxwellian(xg, vg, 1.0, 0.3);
  const PhaseArray before = s.f;
  transport_step(s, 0.0173);
  CHECK((s.f - before).abs().maxCoeff() < 1e-15);
}

TEST_CASE("a square pulse returns after one period with first-order error") {
  // v = 1 row, three steps of dt = 1/3: every resolution sees a fractional shift of 1/3 or 2/3
  std::vector<double> errors;
  for (int nx : {64, 128, 256}) {
    KineticState s(PeriodicGrid{1.0, nx}, VelocityGrid{8.0, 17});
    for (int i = 0; i < nx; ++i) s.f(i, 9) = s.xgrid.node(i) >= 0.25 && s.xgrid.node(i) < 0.5 ? 1.0 : 0.0;
    const Field start = s.f.col(9);
    for (int n = 0; n < 3; ++n) transport_step(s, 1.0 / 3.0);
    errors.push_back((Field(s.f.col(9)) - start).abs().sum() * s.xgrid.dx());
  }
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    CHECK(errors[k] <= 2.0 / (64 << k));
    CHECK(errors[k + 1] / errors[k] == doctest::Approx(0.5).epsilon(0.1));
  }
}

TEST_CASE("a centred global Maxwellian is stationary step by step") {
  const auto [xg, vg] = make_grids(1.0, 32, 8.0, 257, 1.0);
  KineticState s = global_maxwellian(xg, vg, 1.0, 0.0);
  const ModelSpec model = cs_model(xg);
  SolverConfig config;
  for (int n = 0; n < 10; ++n) {
    const PhaseArray before = s.f;
    step(s, model, config);
    CHECK((s.f - before).abs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("conservative models keep a moving flock's momentum over many steps") {
  const auto [xg, vg] = make_grids(1.0, 16, 8.0, 257, 1.0);
  KineticState s(xg, vg);
  const Field v = vg.nodes();
  for (int i = 0; i < xg.nx; ++i) {
    const double mod = 1.0 + 0.4 * std::cos(2.0 * std::numbers::pi * xg.node(i));
    const Field g = mod * gaussian_profile(vg, 0.5, 0.8 + 0.3 * std::sin(2.0 * std::numbers::pi * xg.node(i)));
    s.f.row(i) = g.transpose();
  }
  s.f /= s.mass();
  for (ModelKind kind : {ModelKind::CS, ModelKind::Mphi, ModelKind::Mseg}) {
    CAPTURE(to_string(kind));
    KineticState t = s;
    const ModelSpec model = cs_model(xg, kind);
    SolverConfig config;
    const double p0 = total_momentum(t);
    for (int n = 0; n < 1000; ++n) step(t, model, config);
    CHECK(std::abs(total_momentum(t) - p0) <= 1e-8);
  }
}

TEST_CASE("without diffusion the velocity mean contracts at rate s") {
  const VelocityGrid vg{8.0, 801};
  const Field v = vg.nodes(), w = vg.weights();
  for (double s : {1.0, 2.0}) {
    Field g = gaussian_profile(vg, 1e-3, 2.0);
    const double dt = 1e-3;
    for (int n = 0; n < 1000; ++n) g = fp_velocity_step(g, s, 0.5, 0.0, dt, vg);
    const double mean = (g * w * v).sum() / (g * w).sum();
    CHECK(mean == doctest::Approx(0.5 + 1.5 * std::exp(-s)).epsilon(1e-2));
  }
}

TEST_CASE("empty runs and determinism") {
  const KineticState s = random_state(12);
  const ModelSpec model = cs_model(s.xgrid);
  SolverConfig config;
  config.dt = 0.01;
  config.t_end = 0.0;
  const RunResult empty = run(s, model, config);
  CHECK(empty.series.size() == 1);
  CHECK((empty.final_state.f == s.f).all());
  config.t_end = 0.1;
  const RunResult a = run(s, model, config), b = run(s, model, config);
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t k = 0; k < a.series.size(); ++k) {
    CHECK(a.series[k].entropy_b == b.series[k].entropy_b);
    CHECK(a.series[k].momentum == b.series[k].momentum);
    CHECK(a.series[k].entropy_residual == b.series[k].entropy_residual);
  }
  CHECK((a.final_state.f == b.final_state.f).all());
}

TEST_CASE("vacuum fills in by t = 1") {
  const auto [xg, vg] = make_grids(1.0, 32, 8.0, 129, 1.0);
  KineticState s(xg, vg);
  const Field v = vg.nodes();
  for (int i = 0; i < xg.nx; ++i)
    for (int j = 0; j < vg.nv; ++j) s.f(i, j) = mollifier_chi((xg.node(i) - 0.25) / 0.25) * mollifier_chi(v[j] / 3.0);
  s.f /= s.mass();
  CHECK(moments(s).rho.minCoeff() == 0.0);
  SolverConfig config;
  config.dt = 1e-2;
  config.t_end = 1.0;
  config.series_every = 100;
  const RunResult r = run(s, cs_model(xg), config);
  CHECK(moments(r.final_state).rho.minCoeff() > 0.0);
}
