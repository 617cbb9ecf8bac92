#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fpa/models.hpp"

using namespace fpa;

namespace {

const PeriodicGrid kGrid{1.0, 32};

Field random_density(std::mt19937_64& rng, bool vacuum) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Field rho(kGrid.nx);
  for (int i = 0; i < kGrid.nx; ++i) rho[i] = 0.2 + u(rng);
  if (vacuum)
    for (int i = 10; i < 20; ++i) rho[i] = 0.0;
  return rho / (rho.sum() * kGrid.dx());
}

// Direct-sum periodic convolution with the kernel samples.
Field direct_conv(const Field& phi, const Field& g) {
  Field out = Field::Zero(g.size());
  for (int i = 0; i < kGrid.nx; ++i)
    for (int k = 0; k < kGrid.nx; ++k) out[i] += phi[kGrid.wrap(i - k)] * g[k] * kGrid.dx();
  return out;
}

Field direct_w(const ModelSpec& model, const Field& rho, const Field& m) {
  const double eps = denominator_floor(kGrid, rho);
  const Field& phi = model.kernel.samples;
  switch (model.kind) {
    case ModelKind::CS:
      return direct_conv(phi, m);
    case ModelKind::MT:
      return direct_conv(phi, m) / direct_conv(phi, rho).max(eps);
    case ModelKind::Mbeta:
      return direct_conv(phi, m) / direct_conv(phi, rho).max(eps).pow(1.0 - model.beta);
    case ModelKind::Mphi:
      return direct_conv(phi, direct_conv(phi, m) / direct_conv(phi, rho).max(eps));
    case ModelKind::Mseg: {
      Field w = Field::Zero(kGrid.nx);
      for (const auto& g : model.partition_fields) {
        const double num = (g * m).sum() * kGrid.dx(), den = (g * rho).sum() * kGrid.dx();
        if (den > eps) w += g * num / den;
      }
      return w;
    }
  }
  return {};
}

ModelSpec model_of(ModelKind kind, KernelShape shape = KernelShape::bump) {
  ModelOptions o;
  o.kind = kind;
  o.beta = 0.5;
  o.kernel = shape;
  return make_model(o, kGrid);
}

}  // namespace

TEST_CASE("kernel samples are normalized and symmetric") {
  for (KernelShape shape : {KernelShape::bump, KernelShape::bochner, KernelShape::constant}) {
    const ModelSpec m = model_of(ModelKind::CS, shape);
    CHECK(m.kernel.samples.sum() * kGrid.dx() == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 1; i < kGrid.nx; ++i) CHECK(m.kernel.samples[i] == doctest::Approx(m.kernel.samples[kGrid.nx - i]));
    CHECK((m.kernel.samples >= 0.0).all());
  }
  const ModelSpec c = model_of(ModelKind::CS, KernelShape::constant);
  CHECK(c.kernel.value(kGrid, 0.3) == doctest::Approx(1.0));
}

TEST_CASE("bochner kernel has nonnegative Fourier coefficients") {
  const ModelSpec m = model_of(ModelKind::CS, KernelShape::bochner);
  for (const auto& c : m.convolver.spectrum()) CHECK(c.real() >= -1e-14);
}

TEST_CASE("weighted averages match direct sums for every model") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (ModelKind kind : {ModelKind::CS, ModelKind::MT, ModelKind::Mbeta, ModelKind::Mphi, ModelKind::Mseg}) {
    CAPTURE(to_string(kind));
    const ModelSpec model = model_of(kind);
    for (bool vacuum : {false, true}) {
      const Field rho = random_density(rng, vacuum);
      Field m(kGrid.nx);
      for (int i = 0; i < kGrid.nx; ++i) m[i] = rho[i] * u(rng);
      const Field fast = weighted_average(model, rho, m), slow = direct_w(model, rho, m);
      for (int i = 0; i < kGrid.nx; ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-10).scale(1.0));
      // dense kernel: w = sum_k phi_rho(x, y_k) m_k dy
      const Vector dense = kernel_phi_rho(model, rho).values * m.matrix() * kGrid.dx();
      for (int i = 0; i < kGrid.nx; ++i) CHECK(dense[i] == doctest::Approx(slow[i]).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("averages preserve constants and conservative models conserve momentum") {
  std::mt19937_64 rng(5);
  for (ModelKind kind : {ModelKind::CS, ModelKind::MT, ModelKind::Mbeta, ModelKind::Mphi, ModelKind::Mseg}) {
    CAPTURE(to_string(kind));
    const ModelSpec model = model_of(kind);
    const Field rho = random_density(rng, true);
    const Average avg = average(model, rho, rho * 2.5);
    for (int i = 0; i < kGrid.nx; ++i)
      if (!avg.unconstrained[i]) CHECK(avg.values[i] == doctest::Approx(2.5).epsilon(1e-12));
    if (model.conservative()) {
      CHECK(conservative_residual(model, rho) < 1e-12);
      // int rho <u> s = int rho u s: momentum exchange sums to zero
      Field u(kGrid.nx);
      for (int i = 0; i < kGrid.nx; ++i) u[i] = std::sin(2.0 * std::numbers::pi * kGrid.node(i));
      const Field w = weighted_average(model, rho, rho * u);
      const Field s = strength(model, rho);
      CHECK((rho * (w - s * u)).sum() == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("MT is not conservative on a nonuniform density") {
  Field rho(kGrid.nx);
  for (int i = 0; i < kGrid.nx; ++i) rho[i] = std::exp(2.0 * std::cos(2.0 * std::numbers::pi * kGrid.node(i)));
  rho /= rho.sum() * kGrid.dx();
  CHECK(conservative_residual(model_of(ModelKind::MT), rho) > 1e-2);
}

TEST_CASE("Mseg drops partition terms over vacuum") {
  const ModelSpec model = model_of(ModelKind::Mseg);
  Field rho = Field::Zero(kGrid.nx);
  for (int i = 0; i < kGrid.nx; ++i)
    if (kGrid.distance(kGrid.node(i), 0.25) < 0.05) rho[i] = 1.0;
  rho /= rho.sum() * kGrid.dx();
  // the second bump (centred at 3L/4, radius 0.4L) misses [0.2, 0.3]
  CHECK(dropped_partition_terms(model, rho));
  CHECK(kernel_phi_rho(model, rho).dropped_terms);
  CHECK_FALSE(dropped_partition_terms(model, Field::Constant(kGrid.nx, 1.0)));
}

TEST_CASE("partition of unity sums to one") {
  const ModelSpec model = model_of(ModelKind::Mseg);
  Field total = Field::Zero(kGrid.nx);
  for (const auto& g : model.partition_fields) total += g;
  CHECK((total - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("thickness vanishes exactly away from the support") {
  Field rho = Field::Zero(kGrid.nx);
  for (int i = 0; i < kGrid.nx / 2; ++i) rho[i] = 2.0;
  const Thickness th = thickness(kGrid, rho, 0.175);
  CHECK(th.min == 0.0);
  CHECK(th.theta[24] == 0.0);
  CHECK(th.theta[8] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(thickness(kGrid, rho, 0.6), std::invalid_argument);
}

TEST_CASE("spectral gap on the uniform density matches the Fourier formula") {
  for (KernelShape shape : {KernelShape::bump, KernelShape::bochner}) {
    const ModelSpec model = model_of(ModelKind::CS, shape);
    const auto& spec = model.convolver.spectrum();
    double top = -1e300;
    for (std::size_t k = 1; k < spec.size(); ++k) top = std::max(top, spec[k].real());
    const Field uniform = Field::Ones(kGrid.nx);
    CHECK(spectral_gap(model, uniform) == doctest::Approx(1.0 - top / spec[0].real()).epsilon(1e-10));
  }
  Field point = Field::Zero(kGrid.nx);
  point[3] = 1.0;
  CHECK_THROWS_AS(spectral_gap(model_of(ModelKind::CS), point), std::domain_error);
}

TEST_CASE("Schur bound and contractivity on random densities") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (ModelKind kind : {ModelKind::CS, ModelKind::MT, ModelKind::Mbeta, ModelKind::Mphi, ModelKind::Mseg}) {
    const ModelSpec model = model_of(kind);
    for (int n = 0; n < 20; ++n) {
      const Field rho = random_density(rng, n % 2 == 1);
      Field v(kGrid.nx);
      for (int i = 0; i < kGrid.nx; ++i) v[i] = u(rng);
      CHECK(energy_bound_check(model, rho, rho * v) <= 1.0 + 1e-12);
      if (model.symmetric()) {
        const QuadraticForms q = kappa_forms(model, rho, v);
        CHECK(q.cross <= q.norm * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("model and kernel names round trip") {
  for (ModelKind kind : {ModelKind::CS, ModelKind::MT, ModelKind::Mbeta, ModelKind::Mphi, ModelKind::Mseg})
    CHECK(parse_model_kind(to_string(kind)) == kind);
  for (KernelShape s : {KernelShape::bump, KernelShape::bochner, KernelShape::constant})
    CHECK(parse_kernel_shape(to_string(s)) == s);
  CHECK_THROWS(parse_model_kind("XY"));
  ModelOptions bad;
  bad.kind = ModelKind::Mbeta;
  bad.beta = 1.5;
  CHECK_THROWS_AS(make_model(bad, kGrid), std::invalid_argument);
}

TEST_CASE("Mbeta interpolates between MT and CS") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Field rho = random_density(rng, true);
  Field m(kGrid.nx);
  for (int i = 0; i < kGrid.nx; ++i) m[i] = rho[i] * u(rng);
  ModelOptions o;
  o.kind = ModelKind::Mbeta;
  o.beta = 1.0;
  const Field one = weighted_average(make_model(o, kGrid), rho, m);
  o.beta = 0.0;
  const Field zero = weighted_average(make_model(o, kGrid), rho, m);
  const Field cs = weighted_average(model_of(ModelKind::CS), rho, m);
  const Field mt = weighted_average(model_of(ModelKind::MT), rho, m);
  CHECK((one - cs).abs().maxCoeff() < 1e-14);
  CHECK((zero - mt).abs().maxCoeff() < 1e-14);
}

TEST_CASE("strength and kernel matrices on simple densities") {
  const Field uniform = Field::Ones(kGrid.nx);
  const ModelSpec cs = model_of(ModelKind::CS);
  CHECK(cs.kernel.c0 > 0.0);
  for (int i = 0; i < kGrid.nx; ++i)
    if (kGrid.distance(0.0, kGrid.node(i)) < cs.r0) CHECK(cs.kernel.samples[i] >= cs.kernel.c0 * (1.0 - 1e-12));
  CHECK((strength(cs, uniform) - 1.0).abs().maxCoeff() < 1e-12);
  std::mt19937_64 rng(3);
  const Field rho = random_density(rng, true);
  CHECK((strength(model_of(ModelKind::MT), rho) == 1.0).all());
  // CS: phi_rho(x, y) = phi(x - y) whatever rho is
  const Matrix a = kernel_phi_rho(cs, uniform).values, b = kernel_phi_rho(cs, rho).values;
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < kGrid.nx; ++i)
    for (int k = 0; k < kGrid.nx; ++k) CHECK(a(i, k) == doctest::Approx(cs.kernel.samples[kGrid.wrap(i - k)]));
  // Mphi at the uniform density is phi * phi
  const ModelSpec mphi = model_of(ModelKind::Mphi);
  const Field pp = direct_conv(mphi.kernel.samples, mphi.kernel.samples);
  const Matrix c = kernel_phi_rho(mphi, uniform).values;
  for (int i = 0; i < kGrid.nx; ++i)
    for (int k = 0; k < kGrid.nx; ++k) CHECK(c(i, k) == doctest::Approx(pp[kGrid.wrap(i - k)]).epsilon(1e-12));
  for (ModelKind kind : {ModelKind::CS, ModelKind::Mphi, ModelKind::Mseg}) {
    const Matrix d = kernel_phi_rho(model_of(kind), rho).values;
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("averages of proportional and zero momenta, order and bounds") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (ModelKind kind : {ModelKind::CS, ModelKind::MT, ModelKind::Mbeta, ModelKind::Mphi, ModelKind::Mseg}) {
    CAPTURE(to_string(kind));
    const ModelSpec model = model_of(kind);
    const Field rho = random_density(rng, false);
    const Field s = strength(model, rho);
    CHECK((weighted_average(model, rho, rho * -0.7) - s * -0.7).abs().maxCoeff() < 1e-12);
    CHECK((weighted_average(model, rho, Field::Zero(kGrid.nx)) == 0.0).all());
    Field v(kGrid.nx);
    for (int i = 0; i < kGrid.nx; ++i) v[i] = u(rng);
    const Field lo = average(model, rho, rho * v).values;
    const Field hi = average(model, rho, rho * (v + 0.3 * (u(rng) + 1.0))).values;
    CHECK((hi >= lo - 1e-12).all());
    CHECK((lo <= v.maxCoeff() + 1e-12).all());
    CHECK((lo >= v.minCoeff() - 1e-12).all());
  }
}

TEST_CASE("thickness on constant, half-supported and random densities") {
  const Thickness flat = thickness(kGrid, Field::Constant(kGrid.nx, 1.7), 0.1);
  CHECK((flat.theta - 1.7).abs().maxCoeff() < 1e-12);
  Field quarter = Field::Zero(kGrid.nx);
  for (int i = 0; i <= kGrid.nx / 4; ++i) quarter[i] = 1.0;
  CHECK(thickness(kGrid, quarter, 0.125).theta[kGrid.nx / 2] == 0.0);
  std::mt19937_64 rng(41);
  const Field rho = random_density(rng, true);
  const double r0 = 0.15;
  const Thickness th = thickness(kGrid, rho, r0);
  const Field chi = rescaled_mollifier(kGrid, r0);
  const Field oracle = direct_conv(chi, rho);
  for (int i = 0; i < kGrid.nx; ++i) CHECK(th.theta[i] == doctest::Approx(oracle[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("operator constants at the uniform density") {
  const Field uniform = Field::Ones(kGrid.nx);
  for (ModelKind kind : {ModelKind::CS, ModelKind::MT, ModelKind::Mbeta, ModelKind::Mphi, ModelKind::Mseg}) {
    CAPTURE(to_string(kind));
    const ModelSpec model = model_of(kind);
    const SchurConstants sc = schur_constants(model, uniform);
    CHECK(sc.row == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sc.column == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(conservative_residual(model, uniform) < 1e-10);
    CHECK(energy_bound_check(model, uniform, Field::Constant(kGrid.nx, 0.4)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(energy_bound_check(model, uniform, Field::Zero(kGrid.nx)) == 0.0);
    CHECK(spectral_gap(model, uniform) > 0.0);
  }
  std::mt19937_64 rng(51);
  const Field rho = random_density(rng, true);
  for (ModelKind kind : {ModelKind::CS, ModelKind::Mphi, ModelKind::Mseg}) {
    const SchurConstants sc = schur_constants(model_of(kind), rho);
    CHECK(sc.row == doctest::Approx(sc.column).epsilon(1e-12));
  }
  for (ModelKind kind : {ModelKind::CS, ModelKind::Mbeta}) {
    const ModelSpec model = model_of(kind);
    CHECK(l2_linf_constant(model, rho) <= model.kernel.sup() * (1.0 + 1e-12));
  }
}

TEST_CASE("a narrow bump has a smaller gap than the uniform density") {
  const ModelSpec model = model_of(ModelKind::CS, KernelShape::bochner);
  Field bump(kGrid.nx);
  for (int i = 0; i < kGrid.nx; ++i) bump[i] = std::exp(8.0 * std::cos(4.0 * std::numbers::pi * kGrid.node(i)));
  bump /= bump.sum() * kGrid.dx();
  CHECK(spectral_gap(model, bump) <= spectral_gap(model, Field::Ones(kGrid.nx)));
}
