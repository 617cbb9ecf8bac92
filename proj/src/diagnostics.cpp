#include "fpa/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fpa {

namespace {

// d/dv log f at (i, j); false when the stencil touches vacuum.
bool log_derivative_v(const PhaseArray& f, int i, int j, double dv, double& out) {
  const int nv = static_cast<int>(f.cols());
  const bool left = j > 0 && f(i, j - 1) > kVacuumFloor;
  const bool right = j + 1 < nv && f(i, j + 1) > kVacuumFloor;
  const double c = std::log(f(i, j));
  if (left && right) {
    out = (std::log(f(i, j + 1)) - std::log(f(i, j - 1))) / (2.0 * dv);
  } else if (right && j == 0) {
    out = (std::log(f(i, j + 1)) - c) / dv;
  } else if (left && j + 1 == nv) {
    out = (c - std::log(f(i, j - 1))) / dv;
  } else {
    return false;
  }
  return true;
}

double jap(double v) { return std::sqrt(1.0 + v * v); }

// sum_i c_i sum_j w_j f_ij (sigma dlogf + v_j)^2 dx
double weighted_flux_information(const KineticState& state, const Field& coeff, double sigma) {
  const auto& f = state.f;
  const Field w = state.vgrid.weights();
  const Field v = state.vgrid.nodes();
  const double dv = state.vgrid.dv();
  double acc = 0.0;
  for (int i = 0; i < f.rows(); ++i) {
    if (coeff[i] == 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < f.cols(); ++j) {
      if (!(f(i, j) > kVacuumFloor)) continue;
      double dlog = 0.0;
      if (!log_derivative_v(f, i, j, dv, dlog)) continue;
      const double flux = sigma * dlog + v[j];
      row += w[j] * f(i, j) * flux * flux;
    }
    acc += coeff[i] * row;
  }
  return acc * state.xgrid.dx();
}

// Integrates a per-velocity weight against a phase-space integrand.
template <typename Fn>
double phase_integral(const KineticState& state, Fn&& integrand) {
  const Field w = state.vgrid.weights();
  double acc = 0.0;
  for (int i = 0; i < state.f.rows(); ++i)
    for (int j = 0; j < state.f.cols(); ++j) acc += w[j] * integrand(i, j);
  return acc * state.xgrid.dx();
}

}  // namespace

double entropy(const KineticState& state) {
  return phase_integral(state, [&](int i, int j) {
    const double f = state.f(i, j);
    return f > kVacuumFloor ? f * std::log(f) : 0.0;
  });
}

double kinetic_energy(const KineticState& state) {
  const Field v = state.vgrid.nodes();
  return 0.5 * phase_integral(state, [&](int i, int j) { return v[j] * v[j] * state.f(i, j); });
}

double total_momentum(const KineticState& state) {
  const Field v = state.vgrid.nodes();
  return phase_integral(state, [&](int i, int j) { return v[j] * state.f(i, j); });
}

double fisher_vv(const KineticState& state, double sigma) {
  return weighted_flux_information(state, Field::Ones(state.xgrid.nx), sigma);
}

double dissipation(const KineticState& state, const Field& s, double sigma) {
  return weighted_flux_information(state, s, sigma);
}

double fisher_xx(const KineticState& state, double sigma) {
  const auto& grid = state.xgrid;
  const double dx = grid.dx();
  return sigma * phase_integral(state, [&](int i, int j) {
    const double f = state.f(i, j);
    const double fl = state.f(grid.wrap(i - 1), j);
    const double fr = state.f(grid.wrap(i + 1), j);
    if (!(f > kVacuumFloor && fl > kVacuumFloor && fr > kVacuumFloor)) return 0.0;
    const double dlog = (std::log(fr) - std::log(fl)) / (2.0 * dx);
    return f * dlog * dlog;
  });
}

KineticState matching_maxwellian(const KineticState& state, double sigma) {
  const double mass = state.mass();
  const double ubar = mass > 0.0 ? total_momentum(state) / mass : 0.0;
  KineticState mu = global_maxwellian(state.xgrid, state.vgrid, sigma, ubar, mass);
  mu.t = state.t;
  return mu;
}

double dist_to_maxwellian(const KineticState& state, double sigma) {
  const KineticState mu = matching_maxwellian(state, sigma);
  return phase_integral(state, [&](int i, int j) { return std::abs(state.f(i, j) - mu.f(i, j)); });
}

double relative_entropy_to_maxwellian(const KineticState& state, double sigma) {
  const KineticState mu = matching_maxwellian(state, sigma);
  return phase_integral(state, [&](int i, int j) {
    const double f = state.f(i, j);
    return f > kVacuumFloor ? f * std::log(f / mu.f(i, j)) : 0.0;
  });
}

RateFit rate_fit(const std::vector<double>& t, const std::vector<double>& y, double t_min, double t_max) {
  if (t.size() != y.size()) throw std::invalid_argument("rate_fit: length mismatch");
  std::vector<double> ts, ls;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_min || t[k] > t_max) continue;
    if (!(y[k] > 0.0)) throw std::invalid_argument("rate_fit: nonpositive value in window");
    ts.push_back(t[k]);
    ls.push_back(std::log(y[k]));
  }
  const int n = static_cast<int>(ts.size());
  if (n < 10) throw std::invalid_argument("rate_fit: fewer than 10 points in window");
  RateFit fit;
  fit.points = n;
  const auto [lo, hi] = std::minmax_element(ls.begin(), ls.end());
  if (*lo == *hi) return fit;
  double tm = 0.0, lm = 0.0;
  for (int k = 0; k < n; ++k) {
    tm += ts[k];
    lm += ls[k];
  }
  tm /= n;
  lm /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int k = 0; k < n; ++k) {
    sxx += (ts[k] - tm) * (ts[k] - tm);
    sxy += (ts[k] - tm) * (ls[k] - lm);
    syy += (ls[k] - lm) * (ls[k] - lm);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = ls[k] - (lm + slope * (ts[k] - tm));
    ssr += r * r;
  }
  fit.rate = -slope;
  fit.r2 = 1.0 - ssr / syy;
  return fit;
}

TailFit gaussian_tail_fit(const KineticState& state, double v_fit) {
  const Field v = state.vgrid.nodes();
  std::vector<int> window;
  for (int j = 0; j < v.size(); ++j)
    if (std::abs(v[j]) <= v_fit) window.push_back(j);
  TailFit fit;
  std::vector<double> fmin;
  for (int j : window) {
    const double lo = state.f.col(j).minCoeff();
    if (!(lo > 0.0)) return fit;
    fmin.push_back(lo);
  }
  if (window.size() < 2) return fit;

  const int n = static_cast<int>(window.size());
  double xm = 0.0, ym = 0.0;
  for (int k = 0; k < n; ++k) {
    xm += v[window[k]] * v[window[k]];
    ym += std::log(fmin[k]);
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = v[window[k]] * v[window[k]] - xm;
    sxx += x * x;
    sxy += x * (std::log(fmin[k]) - ym);
  }
  fit.a = -sxy / sxx;
  const double b_ls = std::exp(ym + fit.a * xm);
  double envelope = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double vj = v[window[k]];
    envelope = std::min(envelope, fmin[k] * std::exp(fit.a * vj * vj));
  }
  fit.b = std::min(b_ls, envelope);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < state.f.rows(); ++i)
    for (int j : window) margin = std::min(margin, state.f(i, j) * std::exp(fit.a * v[j] * v[j]) - fit.b);
  fit.min_margin = margin;
  fit.success = true;
  return fit;
}

double tapered_weight(double v, double q, double R) {
  return std::pow(jap(v), q) * std::pow(jap(v / R), -(q + 3.0));
}

double tapered_moment(const KineticState& state, double q, double R) {
  const Field v = state.vgrid.nodes();
  Field wq(v.size());
  for (int j = 0; j < v.size(); ++j) wq[j] = tapered_weight(v[j], q, R);
  return phase_integral(state, [&](int i, int j) { return wq[j] * state.f(i, j); });
}

double velocity_moment(const KineticState& state, double q) {
  const Field v = state.vgrid.nodes();
  Field wq(v.size());
  for (int j = 0; j < v.size(); ++j) wq[j] = std::pow(jap(v[j]), q);
  return phase_integral(state, [&](int i, int j) { return wq[j] * state.f(i, j); });
}

double sobolev_seminorm(const KineticState& state, int k, int l, double q) {
  if (k < 0 || l < 0 || 2 * k + l > 2) throw std::invalid_argument("sobolev_seminorm: need 2k + l <= 2");
  const auto& f = state.f;
  const auto& grid = state.xgrid;
  const int nv = static_cast<int>(f.cols());
  const double dx = grid.dx(), dv = state.vgrid.dv();
  const Field v = state.vgrid.nodes();
  const double power = q - 2.0 * k - l;
  auto at = [&](int i, int j) { return (j < 0 || j >= nv) ? 0.0 : f(grid.wrap(i), j); };
  return phase_integral(state, [&](int i, int j) {
    double d = 0.0;
    if (k == 1) {
      d = (at(i + 1, j) - at(i - 1, j)) / (2.0 * dx);
    } else if (l == 0) {
      d = f(i, j);
    } else if (l == 1) {
      d = (at(i, j + 1) - at(i, j - 1)) / (2.0 * dv);
    } else {
      d = (at(i, j + 1) - 2.0 * f(i, j) + at(i, j - 1)) / (dv * dv);
    }
    return std::pow(jap(v[j]), power) * d * d;
  });
}

DiagnosticsRecord record(const KineticState& state, const ModelSpec& model, double sigma,
                         const DiagnosticsOptions& options) {
  DiagnosticsRecord r;
  r.t = state.t;
  const MacroMoments mom = moments(state);
  const double dx = state.xgrid.dx();
  r.mass = mom.rho.sum() * dx;
  r.momentum = mom.m.sum() * dx;
  r.energy = kinetic_energy(state);
  r.entropy_b = entropy(state);
  r.entropy = r.entropy_b + r.energy;
  r.entropy_sigma = sigma * r.entropy_b + r.energy;
  r.fisher_vv = fisher_vv(state, sigma);
  r.fisher_xx = fisher_xx(state, sigma);
  r.theta_min = thickness(state.xgrid, mom.rho, model.r0).min;
  r.dist_maxwellian = dist_to_maxwellian(state, sigma);
  r.relative_entropy = relative_entropy_to_maxwellian(state, sigma);
  r.m2 = velocity_moment(state, 2.0);
  r.m4 = velocity_moment(state, 4.0);
  r.m8 = velocity_moment(state, 8.0);

  const Field s = strength(model, mom.rho);
  const Field w = weighted_average(model, mom.rho, mom.m);
  r.dissipation = dissipation(state, s, sigma);
  r.alignment_term = (w * mom.m).sum() * dx;
  const Field v = state.vgrid.nodes();
  const Field second = (state.f.matrix() * (state.vgrid.weights() * v * v).matrix()).array();
  r.energy_source = sigma * (s * mom.rho).sum() * dx - (s * second).sum() * dx + r.alignment_term;

  const double q = options.seminorm_q;
  r.h00 = sobolev_seminorm(state, 0, 0, q);
  r.h01 = sobolev_seminorm(state, 0, 1, q);
  r.h02 = sobolev_seminorm(state, 0, 2, q);
  r.h10 = sobolev_seminorm(state, 1, 0, q);
  r.min_f = state.f.minCoeff();
  return r;
}

void balance_residuals(std::vector<DiagnosticsRecord>& series) {
  if (series.empty()) return;
  double dissipated = 0.0, aligned = 0.0, sourced = 0.0;
  series[0].entropy_residual = 0.0;
  series[0].energy_residual = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    const auto& a = series[k - 1];
    auto& b = series[k];
    const double h = b.t - a.t;
    dissipated += 0.5 * h * (a.dissipation + b.dissipation);
    aligned += 0.5 * h * (a.alignment_term + b.alignment_term);
    sourced += 0.5 * h * (a.energy_source + b.energy_source);
    b.entropy_residual = b.entropy_sigma - series[0].entropy_sigma + dissipated - aligned;
    b.energy_residual = b.energy - series[0].energy - sourced;
  }
}

const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols = {
      "t",        "mass",          "momentum",       "E",           "H_B",  "H",   "I_vv",
      "I_xx",     "theta_min",     "dist_maxwellian", "m2",         "m4",   "m8",  "dissipation",
      "alignment_term", "entropy_residual", "energy_residual", "h00", "h01", "h02", "h10"};
  return cols;
}

void write_series_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& series) {
  out << "# schema: " << kSeriesSchema << '\n';
  const auto& cols = series_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  out << std::setprecision(17);
  for (const auto& r : series) {
    const double row[] = {r.t,  r.mass, r.momentum, r.energy, r.entropy_b, r.entropy, r.fisher_vv,
                          r.fisher_xx, r.theta_min, r.dist_maxwellian, r.m2, r.m4, r.m8, r.dissipation,
                          r.alignment_term, r.entropy_residual, r.energy_residual, r.h00, r.h01, r.h02,
                          r.h10};
    for (std::size_t c = 0; c < std::size(row); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
}

}  // namespace fpa
