#include "fpa/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace fpa {

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

struct Ctx {
  const std::string& key;
  std::string_view value;
  int line;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(line, key + ": " + what); }

  double number() const {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) fail("expected a number, got '" + std::string(value) + "'");
    return out;
  }
  long long integer() const {
    long long out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) fail("expected an integer, got '" + std::string(value) + "'");
    return out;
  }
  bool boolean() const {
    if (value == "true") return true;
    if (value == "false") return false;
    fail("expected true or false, got '" + std::string(value) + "'");
  }
  std::string text() const { return unquote(value); }
};

struct Key {
  std::string name;
  std::function<void(RunConfig&, const Ctx&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

double positive(const Ctx& c, const char* constraint = "must be > 0") {
  const double x = c.number();
  if (!(x > 0.0)) c.fail(constraint);
  return x;
}

double non_negative(const Ctx& c) {
  const double x = c.number();
  if (x < 0.0) c.fail("must be >= 0");
  return x;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"model.kind", [](RunConfig& r, const Ctx& c) {
         try {
           r.model.kind = parse_model_kind(c.text());
         } catch (const std::exception&) {
           c.fail("expected one of CS, MT, Mbeta, Mphi, Mseg");
         }
       },
       [](const RunConfig& r) { return std::string(to_string(r.model.kind)); }},
      {"model.beta", [](RunConfig& r, const Ctx& c) {
         const double b = c.number();
         if (!(b >= 0.0 && b <= 1.0)) c.fail("must lie in [0, 1]");
         r.model.beta = b;
       },
       [](const RunConfig& r) { return fmt(r.model.beta); }},
      {"model.kernel", [](RunConfig& r, const Ctx& c) {
         try {
           r.model.kernel = parse_kernel_shape(c.text());
         } catch (const std::exception&) {
           c.fail("expected one of bump, bochner, constant");
         }
       },
       [](const RunConfig& r) { return std::string(to_string(r.model.kernel)); }},
      {"model.kernel_radius", [](RunConfig& r, const Ctx& c) { r.model.kernel_radius = non_negative(c); },
       [](const RunConfig& r) { return fmt(r.model.kernel_radius); }},
      {"model.r0", [](RunConfig& r, const Ctx& c) { r.model.r0 = non_negative(c); },
       [](const RunConfig& r) { return fmt(r.model.r0); }},
      {"model.partition", [](RunConfig& r, const Ctx& c) { r.model.partition = c.text(); },
       [](const RunConfig& r) { return quoted(r.model.partition); }},

      {"grid.L", [](RunConfig& r, const Ctx& c) { r.grid.L = positive(c); },
       [](const RunConfig& r) { return fmt(r.grid.L); }},
      {"grid.Nx", [](RunConfig& r, const Ctx& c) {
         const long long n = c.integer();
         if (n < 8 || n > (1 << 20) || (n & (n - 1)) != 0) c.fail("must be a power of two >= 8");
         r.grid.nx = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.grid.nx); }},
      {"grid.vmax", [](RunConfig& r, const Ctx& c) { r.grid.vmax = positive(c); },
       [](const RunConfig& r) { return fmt(r.grid.vmax); }},
      {"grid.Nv", [](RunConfig& r, const Ctx& c) {
         const long long n = c.integer();
         if (n < 16 || n > (1 << 20)) c.fail("must be >= 16");
         r.grid.nv = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.grid.nv); }},

      {"sim.sigma", [](RunConfig& r, const Ctx& c) { r.sim.sigma = positive(c, "must satisfy sigma > 0"); },
       [](const RunConfig& r) { return fmt(r.sim.sigma); }},
      {"sim.dt", [](RunConfig& r, const Ctx& c) { r.sim.dt = positive(c); },
       [](const RunConfig& r) { return fmt(r.sim.dt); }},
      {"sim.t_end", [](RunConfig& r, const Ctx& c) { r.sim.t_end = non_negative(c); },
       [](const RunConfig& r) { return fmt(r.sim.t_end); }},
      {"sim.splitting", [](RunConfig& r, const Ctx& c) {
         const std::string s = c.text();
         if (s == "strang") r.sim.splitting = Splitting::strang;
         else if (s == "lie") r.sim.splitting = Splitting::lie;
         else c.fail("expected strang or lie");
       },
       [](const RunConfig& r) { return std::string(r.sim.splitting == Splitting::strang ? "strang" : "lie"); }},

      {"init.preset", [](RunConfig& r, const Ctx& c) {
         static const std::vector<std::string> names = {"maxwellian", "shifted-maxwellian", "bimodal",
                                                        "vacuous-half-torus", "file"};
         const std::string s = c.text();
         if (std::find(names.begin(), names.end(), s) == names.end())
           c.fail("unknown preset '" + s + "'");
         r.init.preset = s;
       },
       [](const RunConfig& r) { return quoted(r.init.preset); }},
      {"init.ubar", [](RunConfig& r, const Ctx& c) { r.init.ubar = c.number(); },
       [](const RunConfig& r) { return fmt(r.init.ubar); }},
      {"init.u0", [](RunConfig& r, const Ctx& c) { r.init.u0 = non_negative(c); },
       [](const RunConfig& r) { return fmt(r.init.u0); }},
      {"init.amplitude", [](RunConfig& r, const Ctx& c) {
         const double a = c.number();
         if (!(a >= 0.0 && a < 1.0)) c.fail("must lie in [0, 1)");
         r.init.amplitude = a;
       },
       [](const RunConfig& r) { return fmt(r.init.amplitude); }},
      {"init.v_radius", [](RunConfig& r, const Ctx& c) { r.init.v_radius = positive(c); },
       [](const RunConfig& r) { return fmt(r.init.v_radius); }},
      {"init.file", [](RunConfig& r, const Ctx& c) { r.init.file = c.text(); },
       [](const RunConfig& r) { return quoted(r.init.file); }},

      {"particles.N", [](RunConfig& r, const Ctx& c) {
         const long long n = c.integer();
         if (n < 1 || n > 100000000) c.fail("must be >= 1");
         r.particles.n = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.particles.n); }},
      {"particles.seed", [](RunConfig& r, const Ctx& c) {
         const long long s = c.integer();
         if (s < 0) c.fail("must be >= 0");
         r.particles.seed = static_cast<std::uint64_t>(s);
       },
       [](const RunConfig& r) { return std::to_string(r.particles.seed); }},
      {"particles.enabled", [](RunConfig& r, const Ctx& c) { r.particles.enabled = c.boolean(); },
       [](const RunConfig& r) { return std::string(r.particles.enabled ? "true" : "false"); }},
      {"particles.dt", [](RunConfig& r, const Ctx& c) { r.particles.dt = positive(c); },
       [](const RunConfig& r) { return fmt(r.particles.dt); }},

      {"output.directory", [](RunConfig& r, const Ctx& c) { r.output.directory = c.text(); },
       [](const RunConfig& r) { return quoted(r.output.directory); }},
      {"output.snapshot_every", [](RunConfig& r, const Ctx& c) {
         const long long n = c.integer();
         if (n < 0) c.fail("must be >= 0");
         r.output.snapshot_every = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.output.snapshot_every); }},
      {"output.series_every", [](RunConfig& r, const Ctx& c) {
         const long long n = c.integer();
         if (n < 1) c.fail("must be >= 1");
         r.output.series_every = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.output.series_every); }},
  };
  return table;
}

std::vector<PartitionBump> parse_partition(const std::string& spec, const PeriodicGrid& grid) {
  if (spec.empty() || spec == "default") return default_partition(grid);
  if (spec == "full-support") return full_support_partition(grid);
  std::vector<PartitionBump> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(0, "model.partition: expected center:radius, got '" + item + "'");
    try {
      out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ConfigError(0, "model.partition: bad number in '" + item + "'");
    }
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::vector<std::string> sections = {"model", "grid", "sim", "init", "particles", "output"};
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
    const std::string raw_key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    std::string key = raw_key;
    if (key.find('.') == std::string::npos) {
      if (section.empty()) throw ConfigError(line_no, "key '" + key + "' outside of a section");
      key = section + "." + key;
    }
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ConfigError(line_no, "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(line_no, key + ": missing value");
    it->set(config, Ctx{key, value, line_no});
  }
  try {
    make_grids(config);
    make_model(config);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : keys()) {
    const auto dot = k.name.find('.');
    const std::string sec = k.name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << k.name.substr(dot + 1) << " = " << k.get(config) << '\n';
  }
  return out.str();
}

std::pair<PeriodicGrid, VelocityGrid> make_grids(const RunConfig& config) {
  return make_grids(config.grid.L, config.grid.nx, config.grid.vmax, config.grid.nv, config.sim.sigma);
}

ModelSpec make_model(const RunConfig& config) {
  const PeriodicGrid grid{config.grid.L, config.grid.nx};
  ModelOptions options;
  options.kind = config.model.kind;
  options.beta = config.model.beta;
  options.kernel = config.model.kernel;
  options.kernel_radius = config.model.kernel_radius;
  options.r0 = config.model.r0;
  options.partition = parse_partition(config.model.partition, grid);
  return make_model(options, grid);
}

SolverConfig solver_config(const RunConfig& config) {
  SolverConfig s;
  s.sigma = config.sim.sigma;
  s.dt = config.sim.dt;
  s.t_end = config.sim.t_end;
  s.splitting = config.sim.splitting;
  s.snapshot_every = config.output.snapshot_every;
  s.series_every = config.output.series_every;
  return s;
}

KineticState init_preset(const InitSection& init, const PeriodicGrid& xg, const VelocityGrid& vg, double sigma) {
  KineticState state(xg, vg);
  const double L = xg.L;
  if (init.preset == "maxwellian") {
    state = global_maxwellian(xg, vg, sigma, 0.0);
  } else if (init.preset == "shifted-maxwellian") {
    state = global_maxwellian(xg, vg, sigma, init.ubar);
  } else if (init.preset == "bimodal") {
    const Field plus = gaussian_profile(vg, 0.25 * sigma, init.ubar + init.u0);
    const Field minus = gaussian_profile(vg, 0.25 * sigma, init.ubar - init.u0);
    for (int i = 0; i < xg.nx; ++i) {
      const double phase = 2.0 * std::numbers::pi * xg.node(i) / L;
      state.f.row(i) = (0.5 * (1.0 + init.amplitude * std::cos(phase)) * plus +
                        0.5 * (1.0 + init.amplitude * std::sin(phase)) * minus)
                           .transpose();
    }
  } else if (init.preset == "vacuous-half-torus") {
    for (int i = 0; i < xg.nx; ++i) {
      const double bx = mollifier_chi((xg.node(i) - 0.25 * L) / (0.25 * L));
      for (int j = 0; j < vg.nv; ++j) state.f(i, j) = bx * mollifier_chi(vg.node(j) / init.v_radius);
    }
  } else if (init.preset == "file") {
    Snapshot snap = read_snapshot(std::filesystem::path(init.file));
    if (snap.state.xgrid.nx != xg.nx || snap.state.vgrid.nv != vg.nv || snap.state.xgrid.L != xg.L ||
        snap.state.vgrid.vmax != vg.vmax)
      throw std::runtime_error("init: snapshot grid does not match the configured grid");
    state = std::move(snap.state);
    state.t = 0.0;
  } else {
    throw std::invalid_argument("init: unknown preset '" + init.preset + "'");
  }
  const double mass = state.mass();
  if (!(mass > 0.0)) throw std::invalid_argument("init: initial data has no mass");
  state.f /= mass;
  return state;
}

void write_snapshot(std::ostream& out, const KineticState& state, double sigma) {
  const nlohmann::ordered_json header = {{"Nx", state.xgrid.nx}, {"Nv", state.vgrid.nv}, {"L", state.xgrid.L},
                                         {"vmax", state.vgrid.vmax}, {"sigma", sigma},   {"t", state.t}};
  out << header.dump() << '\n';
  const auto n = static_cast<std::size_t>(state.f.size());
  std::vector<std::uint64_t> words(n);
  std::memcpy(words.data(), state.f.data(), n * sizeof(double));
  if constexpr (std::endian::native == std::endian::big)
    for (auto& w : words) w = __builtin_bswap64(w);
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!out) throw std::runtime_error("snapshot: write failed");
}

void write_snapshot(const std::filesystem::path& path, const KineticState& state, double sigma) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path.string());
  write_snapshot(out, state, sigma);
}

Snapshot read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("snapshot: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("snapshot: bad header: ") + e.what());
  }
  Snapshot snap;
  int nx = 0, nv = 0;
  try {
    nx = header.at("Nx").get<int>();
    nv = header.at("Nv").get<int>();
    snap.state.xgrid = PeriodicGrid{header.at("L").get<double>(), nx};
    snap.state.vgrid = VelocityGrid{header.at("vmax").get<double>(), nv};
    snap.sigma = header.at("sigma").get<double>();
    snap.state.t = header.at("t").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("snapshot: bad header: ") + e.what());
  }
  if (nx <= 0 || nv <= 0) throw std::runtime_error("snapshot: non-positive shape in header");
  const auto n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(nv);
  std::vector<std::uint64_t> words(n);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
    throw std::runtime_error("snapshot: truncated payload, expected " + std::to_string(n) + " values");
  if (in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("snapshot: payload longer than Nx*Nv values");
  if constexpr (std::endian::native == std::endian::big)
    for (auto& w : words) w = __builtin_bswap64(w);
  snap.state.f.resize(nx, nv);
  std::memcpy(snap.state.f.data(), words.data(), n * sizeof(double));
  return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace fpa
