#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "fpa/acceptance.hpp"
#include "fpa/diagnostics.hpp"
#include "fpa/io.hpp"
#include "fpa/particles.hpp"
#include "fpa/solver.hpp"

namespace fs = std::filesystem;
using namespace fpa;

namespace {

RunConfig load(const std::string& path) { return path.empty() ? parse_config("") : load_config(path); }

fs::path prepare_output(const RunConfig& config, const std::string& override_dir) {
  const fs::path dir = override_dir.empty() ? fs::path(config.output.directory) : fs::path(override_dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.ini") << serialize_config(config);
  return dir;
}

std::string snapshot_name(long index) {
  std::ostringstream os;
  os << "snapshot_" << std::setw(6) << std::setfill('0') << index << ".bin";
  return os.str();
}

int cmd_run(const std::string& path, const std::string& out_dir) {
  const RunConfig config = load(path);
  const auto [xg, vg] = make_grids(config);
  const ModelSpec model = make_model(config);
  const KineticState init = init_preset(config.init, xg, vg, config.sim.sigma);
  const fs::path dir = prepare_output(config, out_dir);
  long count = 0;
  const RunResult result = run(init, model, solver_config(config), [&](const KineticState& s) {
    write_snapshot(dir / snapshot_name(count++), s, config.sim.sigma);
  });
  write_snapshot(dir / "final.bin", result.final_state, config.sim.sigma);
  std::ofstream csv(dir / "series.csv");
  write_series_csv(csv, result.series);
  const auto& last = result.series.back();
  std::printf("t=%.6g mass=%.15g momentum=%.15g dist_maxwellian=%.6e entropy_residual=%.3e\n", last.t, last.mass,
              last.momentum, last.dist_maxwellian, last.entropy_residual);
  std::printf("wrote %s\n", (dir / "series.csv").string().c_str());
  return 0;
}

void write_particle_stats(std::ostream& out, const std::vector<EnsembleStats>& stats) {
  out << "# schema: fpa-particles/1\n";
  out << "t,mean_velocity,velocity_variance,max_deviation,energy\n";
  out << std::setprecision(17);
  for (const auto& s : stats)
    out << s.t << ',' << s.mean_velocity << ',' << s.velocity_variance << ',' << s.max_deviation << ',' << s.energy
        << '\n';
}

void require_particles(const RunConfig& config) {
  if (!config.particles.enabled) throw std::runtime_error("particles are disabled in the config (particles.enabled)");
}

int cmd_particles(const std::string& path, const std::string& out_dir) {
  const RunConfig config = load(path);
  require_particles(config);
  const auto [xg, vg] = make_grids(config);
  const ModelSpec model = make_model(config);
  const KineticState init = init_preset(config.init, xg, vg, config.sim.sigma);
  const fs::path dir = prepare_output(config, out_dir);
  ParticleRunConfig pc;
  pc.sigma = config.sim.sigma;
  pc.dt = config.particles.dt;
  pc.t_end = config.sim.t_end;
  pc.stats_every = 1;
  const auto result = run_particles(sample_ensemble(init, config.particles.n, config.particles.seed), model, pc);
  std::ofstream csv(dir / "particles.csv");
  write_particle_stats(csv, result.stats);
  const auto& last = result.stats.back();
  std::printf("N=%d t=%.6g mean_velocity=%.15g variance=%.6e\n", config.particles.n, last.t, last.mean_velocity,
              last.velocity_variance);
  std::printf("wrote %s\n", (dir / "particles.csv").string().c_str());
  return 0;
}

int cmd_compare(const std::string& path, const std::string& out_dir) {
  const RunConfig config = load(path);
  require_particles(config);
  const auto [xg, vg] = make_grids(config);
  const ModelSpec model = make_model(config);
  const KineticState init = init_preset(config.init, xg, vg, config.sim.sigma);
  const fs::path dir = prepare_output(config, out_dir);
  const double ratio = config.particles.dt / config.sim.dt;
  const long every = std::lround(ratio);
  if (every < 1 || std::abs(ratio - every) > 1e-9 * ratio)
    throw std::runtime_error("compare: particles.dt must be an integer multiple of sim.dt");

  std::vector<Field> rho_kinetic;
  SolverConfig sc = solver_config(config);
  sc.snapshot_every = static_cast<int>(every);
  sc.series_every = 1000000;
  run(init, model, sc, [&](const KineticState& s) { rho_kinetic.push_back(moments(s).rho); });

  ParticleEnsemble ens = sample_ensemble(init, config.particles.n, config.particles.seed);
  const KernelTable table(model.kernel, model.grid);
  std::ofstream csv(dir / "compare.csv");
  csv << "# schema: fpa-compare/1\n" << "t,l1_rho\n" << std::setprecision(17);
  double last = 0.0;
  for (std::size_t k = 0; k < rho_kinetic.size(); ++k) {
    if (k > 0) em_step(ens, model, table, config.sim.sigma, config.particles.dt);
    last = (empirical_macro(ens, xg).rho - rho_kinetic[k]).abs().sum() * xg.dx();
    csv << k * config.particles.dt << ',' << last << '\n';
  }
  std::printf("N=%d final L1(rho_particles, rho_kinetic)=%.6e\n", config.particles.n, last);
  std::printf("wrote %s\n", (dir / "compare.csv").string().c_str());
  return 0;
}

Field density_from(const std::string& spec, const PeriodicGrid& grid) {
  Field rho(grid.nx);
  if (spec == "uniform") {
    rho.setOnes();
  } else if (spec.rfind("bump:", 0) == 0) {
    const double kappa = std::stod(spec.substr(5));
    for (int i = 0; i < grid.nx; ++i) rho[i] = std::exp(kappa * std::cos(2.0 * std::numbers::pi * grid.node(i) / grid.L));
  } else if (spec.rfind("twin:", 0) == 0) {
    const double kappa = std::stod(spec.substr(5));
    for (int i = 0; i < grid.nx; ++i) rho[i] = std::exp(kappa * std::cos(4.0 * std::numbers::pi * grid.node(i) / grid.L));
  } else {
    std::ifstream in(spec);
    if (!in) throw std::runtime_error("gap: cannot open density file " + spec);
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto comma = line.rfind(',');
      try {
        values.push_back(std::stod(comma == std::string::npos ? line : line.substr(comma + 1)));
      } catch (const std::exception&) {
        // header row
      }
    }
    if (static_cast<int>(values.size()) != grid.nx)
      throw std::runtime_error("gap: density file has " + std::to_string(values.size()) + " values, grid Nx is " +
                               std::to_string(grid.nx));
    for (int i = 0; i < grid.nx; ++i) rho[i] = values[i];
  }
  if ((rho < 0.0).any() || !(rho.sum() > 0.0)) throw std::runtime_error("gap: density must be nonnegative with mass");
  return rho / (rho.sum() * grid.dx());
}

int cmd_gap(const std::string& path, const std::string& model_name, const std::string& density) {
  RunConfig config = load(path);
  std::vector<ModelKind> kinds;
  if (model_name.empty())
    kinds = {ModelKind::CS, ModelKind::MT, ModelKind::Mbeta, ModelKind::Mphi, ModelKind::Mseg};
  else
    kinds = {parse_model_kind(model_name)};
  const PeriodicGrid grid{config.grid.L, config.grid.nx};
  const Field rho = density_from(density, grid);
  const double theta = thickness(grid, rho, make_model(config).r0).min;
  std::printf("density %s, theta_min %.6e\n", density.c_str(), theta);
  std::printf("%-6s %14s %14s %14s %14s %14s %14s\n", "model", "eps0", "schur_row", "schur_col", "cons_resid",
              "l2_linf", "s/theta");
  for (ModelKind kind : kinds) {
    config.model.kind = kind;
    const ModelSpec model = make_model(config);
    double gap = std::nan("");
    try {
      gap = spectral_gap(model, rho);
    } catch (const std::domain_error&) {
    }
    const auto schur = schur_constants(model, rho);
    std::printf("%-6s %14.6e %14.6e %14.6e %14.6e %14.6e %14.6e\n", std::string(to_string(kind)).c_str(), gap,
                schur.row, schur.column, conservative_residual(model, rho), l2_linf_constant(model, rho),
                strength_thickness_ratio(model, rho));
  }
  return 0;
}

int cmd_verify(const std::string& path, const std::vector<int>& only) {
  const RunConfig config = load(path);
  std::vector<int> ids = only;
  if (ids.empty())
    for (int i = 1; i <= AcceptanceSuite::kCriteria; ++i) ids.push_back(i);
  AcceptanceSuite suite(config);
  bool all = true;
  suite.run_all(ids, [&](const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
    all = all && r.passed;
  });
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic Fokker-Planck-alignment simulator"};
  app.require_subcommand(1);
  std::string config, out_dir, model, density = "uniform";
  std::vector<int> only;

  auto* run = app.add_subcommand("run", "kinetic run: series CSV and snapshots");
  run->add_option("config", config, "configuration file")->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_dir, "output directory (overrides output.directory)");
  auto* particles = app.add_subcommand("particles", "interacting particle run");
  particles->add_option("config", config, "configuration file")->check(CLI::ExistingFile);
  particles->add_option("-o,--out", out_dir, "output directory (overrides output.directory)");
  auto* compare = app.add_subcommand("compare", "kinetic vs particle density, L1 series");
  compare->add_option("config", config, "configuration file")->check(CLI::ExistingFile);
  compare->add_option("-o,--out", out_dir, "output directory (overrides output.directory)");
  auto* gap = app.add_subcommand("gap", "averaging operator analysis table");
  gap->add_option("config", config, "configuration file")->check(CLI::ExistingFile);
  gap->add_option("--model", model, "CS, MT, Mbeta, Mphi or Mseg (default: all)");
  gap->add_option("--density", density, "uniform, bump:<kappa>, twin:<kappa> or a CSV file with Nx values");
  auto* verify = app.add_subcommand("verify", "acceptance suite, PASS/FAIL per criterion");
  verify->add_option("config", config, "configuration file")->check(CLI::ExistingFile);
  verify->add_option("--only", only, "criterion numbers to run")->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out_dir);
    if (*particles) return cmd_particles(config, out_dir);
    if (*compare) return cmd_compare(config, out_dir);
    if (*gap) return cmd_gap(config, model, density);
    if (*verify) return cmd_verify(config, only);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fpa: %s\n", e.what());
    return 2;
  }
  return 0;
}
