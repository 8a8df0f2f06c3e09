#include "nlch/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "nlch/errors.hpp"
#include "nlch/snapshot_io.hpp"

namespace nlch {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || !std::isfinite(x))
    throw ParseError(key + ": expected a number, got '" + v + "'", line);
  return x;
}

long parse_int(const std::string& v, const std::string& key, int line) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ParseError(key + ": expected an integer, got '" + v + "'", line);
  return x;
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError(key + ": expected true/false, got '" + v + "'", line);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(v);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!v.empty() && v.back() == ',') out.push_back("");
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "grid.dim", "grid.length", "grid.n",
      "kernel.type", "kernel.cj", "kernel.xi", "kernel.cutoff",
      "kernel.regularize", "kernel.file",
      "potential.type", "potential.lambda", "potential.file",
      "dynamics.variant", "dynamics.alpha", "dynamics.beta", "dynamics.b0",
      "dynamics.b0_file", "dynamics.dt", "dynamics.t_end",
      "dynamics.snapshot_every",
      "solver.newton_tol", "solver.newton_max", "solver.interior_margin",
      "ic.type", "ic.value", "ic.amplitude", "ic.seed", "ic.mode", "ic.path",
      "stationary.tol", "stationary.max_outer", "stationary.damping",
      "stationary.mass", "stationary.degenerate",
      "output.dir"};
  return keys;
}

} // namespace

double NoiseStream::next_unit() {
  // splitmix64; top 53 bits mapped to [0,1)
  state_ += 0x9e3779b97f4a7c15ULL;
  unsigned long long z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool alpha_set = false;
  std::set<std::string> seen;
  std::vector<std::tuple<std::string, std::string, int>> kvs;

  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value", lineno);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (!known_keys().count(key)) throw ParseError("unknown key '" + key + "'", lineno);
    if (!seen.insert(key).second)
      throw ParseError("duplicate key '" + key + "'", lineno);
    kvs.emplace_back(key, value, lineno);
    cfg.entries.emplace_back(key, value);
  }

  for (const auto& [key, value, ln] : kvs) {
    if (key == "grid.dim") cfg.grid_dim = static_cast<int>(parse_int(value, key, ln));
    else if (key == "grid.length") {
      cfg.grid_length.clear();
      for (const auto& v : split_list(value))
        cfg.grid_length.push_back(parse_double(v, key, ln));
    } else if (key == "grid.n") {
      cfg.grid_n.clear();
      for (const auto& v : split_list(value))
        cfg.grid_n.push_back(static_cast<int>(parse_int(v, key, ln)));
    } else if (key == "kernel.type") {
      if (value == "gaussian") cfg.kernel_type = KernelSpec::Type::gaussian;
      else if (value == "newtonian2d") cfg.kernel_type = KernelSpec::Type::newtonian2d;
      else if (value == "custom") cfg.kernel_type = KernelSpec::Type::custom;
      else throw ParseError("kernel.type: unknown kernel '" + value + "'", ln);
    } else if (key == "kernel.cj") {
      if (value == "auto") cfg.kernel_cj_auto = true;
      else {
        cfg.kernel_cj_auto = false;
        cfg.kernel_cj = parse_double(value, key, ln);
      }
    } else if (key == "kernel.xi") cfg.kernel_xi = parse_double(value, key, ln);
    else if (key == "kernel.cutoff") cfg.kernel_cutoff = parse_double(value, key, ln);
    else if (key == "kernel.regularize") cfg.kernel_regularize = parse_bool(value, key, ln);
    else if (key == "kernel.file") cfg.kernel_file = value;
    else if (key == "potential.type") {
      if (value == "double_well") cfg.potential_type = Potential::Kind::double_well;
      else if (value == "logarithmic") cfg.potential_type = Potential::Kind::logarithmic;
      else if (value == "entropy") cfg.potential_type = Potential::Kind::entropy;
      else if (value == "custom") cfg.potential_type = Potential::Kind::custom;
      else throw ParseError("potential.type: unknown potential '" + value + "'", ln);
    } else if (key == "potential.lambda") cfg.potential_lambda = parse_double(value, key, ln);
    else if (key == "potential.file") cfg.potential_file = value;
    else if (key == "dynamics.variant") {
      if (value.size() != 1) throw ParseError("dynamics.variant: expected A|B|C|D", ln);
      cfg.dynamics.variant = variant_from_letter(value[0]);
    } else if (key == "dynamics.alpha") {
      cfg.dynamics.alpha = parse_double(value, key, ln);
      alpha_set = true;
    } else if (key == "dynamics.beta") cfg.dynamics.beta = parse_double(value, key, ln);
    else if (key == "dynamics.b0") cfg.dynamics.mobility_b0 = parse_double(value, key, ln);
    else if (key == "dynamics.b0_file") cfg.mobility_file = value;
    else if (key == "dynamics.dt") cfg.dynamics.dt = parse_double(value, key, ln);
    else if (key == "dynamics.t_end") cfg.dynamics.t_end = parse_double(value, key, ln);
    else if (key == "dynamics.snapshot_every")
      cfg.dynamics.snapshot_every = static_cast<int>(parse_int(value, key, ln));
    else if (key == "solver.newton_tol") cfg.dynamics.newton_tol = parse_double(value, key, ln);
    else if (key == "solver.newton_max")
      cfg.dynamics.newton_max = static_cast<int>(parse_int(value, key, ln));
    else if (key == "solver.interior_margin")
      cfg.dynamics.interior_margin = parse_double(value, key, ln);
    else if (key == "ic.type") {
      if (value == "constant") cfg.ic_type = RunConfig::IcType::constant;
      else if (value == "noise" || value == "constant+noise")
        cfg.ic_type = RunConfig::IcType::noise;
      else if (value == "cosine") cfg.ic_type = RunConfig::IcType::cosine;
      else if (value == "file") cfg.ic_type = RunConfig::IcType::file;
      else throw ParseError("ic.type: unknown initial condition '" + value + "'", ln);
    } else if (key == "ic.value") cfg.ic_value = parse_double(value, key, ln);
    else if (key == "ic.amplitude") cfg.ic_amplitude = parse_double(value, key, ln);
    else if (key == "ic.seed")
      cfg.ic_seed = static_cast<unsigned long long>(parse_int(value, key, ln));
    else if (key == "ic.mode") {
      cfg.ic_mode.clear();
      for (const auto& v : split_list(value))
        cfg.ic_mode.push_back(static_cast<int>(parse_int(v, key, ln)));
    } else if (key == "ic.path") cfg.ic_path = value;
    else if (key == "stationary.tol") cfg.stationary_tol = parse_double(value, key, ln);
    else if (key == "stationary.max_outer")
      cfg.stationary_max_outer = static_cast<int>(parse_int(value, key, ln));
    else if (key == "stationary.damping")
      cfg.stationary_damping = parse_double(value, key, ln);
    else if (key == "stationary.mass") cfg.stationary_mass = parse_double(value, key, ln);
    else if (key == "stationary.degenerate")
      cfg.stationary_degenerate = parse_bool(value, key, ln);
    else if (key == "output.dir") cfg.output_dir = value;
  }

  // required keys
  for (const char* req : {"grid.dim", "grid.length", "grid.n", "kernel.type",
                          "potential.type", "dynamics.variant", "dynamics.dt",
                          "dynamics.t_end"})
    if (!seen.count(req))
      throw ParseError(std::string("missing required key '") + req + "'", lineno);

  // the viscous default is a deliberate choice, not a physical constant
  if (cfg.dynamics.variant == Variant::B && !alpha_set) cfg.dynamics.alpha = 0.1;

  cfg.make_grid();
  cfg.dynamics.validate();
  if (cfg.kernel_type == KernelSpec::Type::custom && cfg.kernel_file.empty())
    throw ConfigError("kernel.type = custom needs kernel.file");
  if (cfg.potential_type == Potential::Kind::custom && cfg.potential_file.empty())
    throw ConfigError("potential.type = custom needs potential.file");
  if (cfg.ic_type == RunConfig::IcType::file && cfg.ic_path.empty())
    throw ConfigError("ic.type = file needs ic.path");
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Grid RunConfig::make_grid() const {
  std::vector<double> len = grid_length;
  std::vector<int> n = grid_n;
  // a single entry applies to every axis
  if (grid_dim == 2 && len.size() == 1) len.push_back(len[0]);
  if (grid_dim == 2 && n.size() == 1) n.push_back(n[0]);
  return nlch::make_grid(grid_dim, len, n);
}

KernelSpec RunConfig::make_kernel_spec() const {
  KernelSpec spec;
  if (kernel_type == KernelSpec::Type::custom) {
    spec = custom_kernel_from_file(kernel_file);
  } else {
    spec.type = kernel_type;
  }
  spec.normalize = kernel_cj_auto;
  if (!kernel_cj_auto) spec.cj = kernel_cj;
  spec.xi = kernel_xi;
  spec.cutoff = kernel_cutoff;
  spec.regularize = kernel_regularize;
  return spec;
}

Potential RunConfig::make_potential() const {
  switch (potential_type) {
    case Potential::Kind::double_well: return Potential::double_well();
    case Potential::Kind::logarithmic: return Potential::logarithmic(potential_lambda);
    case Potential::Kind::entropy: return Potential::entropy();
    case Potential::Kind::custom: return Potential::custom_from_file(potential_file);
  }
  throw ConfigError("unreachable potential kind");
}

ModelConfig RunConfig::make_model_config() const {
  ModelConfig mc = dynamics;
  if (!mobility_file.empty()) mc.mobility_field = read_snapshot(mobility_file).field;
  return mc;
}

Field RunConfig::make_initial_field(const Grid& g) const {
  Field f(g, ic_value, FieldTag::order_parameter);
  switch (ic_type) {
    case IcType::constant:
      break;
    case IcType::noise: {
      NoiseStream rng(ic_seed);
      std::vector<double> r(g.size());
      for (double& v : r) v = 2.0 * rng.next_unit() - 1.0;
      double m = kahan_sum(r) / static_cast<double>(r.size());
      for (std::size_t k = 0; k < f.size(); ++k)
        f.values[k] = ic_value + ic_amplitude * (r[k] - m);
      break;
    }
    case IcType::cosine: {
      std::vector<int> mode = ic_mode;
      if (mode.empty()) mode.assign(g.dim, 1);
      if (static_cast<int>(mode.size()) == 1 && g.dim == 2) mode.push_back(mode[0]);
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
          double v = std::cos(M_PI * mode[0] * g.center(0, i) / g.length[0]);
          if (g.dim == 2)
            v *= std::cos(M_PI * mode[1] * g.center(1, j) / g.length[1]);
          f.at(i, j) = ic_value + ic_amplitude * v;
        }
      break;
    }
    case IcType::file: {
      SnapshotData snap = read_snapshot(ic_path);
      if (!(snap.field.grid == g))
        throw ConfigError("ic.path snapshot grid does not match the configured grid");
      f = std::move(snap.field);
      f.tag = FieldTag::order_parameter;
      break;
    }
  }
  return f;
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("grid.dim", std::to_string(grid_dim));
  {
    std::string l, n;
    for (std::size_t i = 0; i < grid_length.size(); ++i)
      l += (i ? "," : "") + fmt(grid_length[i]);
    for (std::size_t i = 0; i < grid_n.size(); ++i)
      n += (i ? "," : "") + std::to_string(grid_n[i]);
    out.emplace_back("grid.length", l);
    out.emplace_back("grid.n", n);
  }
  switch (kernel_type) {
    case KernelSpec::Type::gaussian: out.emplace_back("kernel.type", "gaussian"); break;
    case KernelSpec::Type::newtonian2d: out.emplace_back("kernel.type", "newtonian2d"); break;
    case KernelSpec::Type::custom: out.emplace_back("kernel.type", "custom"); break;
  }
  out.emplace_back("kernel.cj", kernel_cj_auto ? "auto" : fmt(kernel_cj));
  out.emplace_back("kernel.xi", fmt(kernel_xi));
  if (kernel_cutoff) out.emplace_back("kernel.cutoff", fmt(*kernel_cutoff));
  out.emplace_back("kernel.regularize", kernel_regularize ? "true" : "false");
  if (!kernel_file.empty()) out.emplace_back("kernel.file", kernel_file);
  switch (potential_type) {
    case Potential::Kind::double_well: out.emplace_back("potential.type", "double_well"); break;
    case Potential::Kind::logarithmic: out.emplace_back("potential.type", "logarithmic"); break;
    case Potential::Kind::entropy: out.emplace_back("potential.type", "entropy"); break;
    case Potential::Kind::custom: out.emplace_back("potential.type", "custom"); break;
  }
  out.emplace_back("potential.lambda", fmt(potential_lambda));
  if (!potential_file.empty()) out.emplace_back("potential.file", potential_file);
  out.emplace_back("dynamics.variant", std::string(1, variant_letter(dynamics.variant)));
  out.emplace_back("dynamics.alpha", fmt(dynamics.alpha));
  out.emplace_back("dynamics.beta", fmt(dynamics.beta));
  out.emplace_back("dynamics.b0", fmt(dynamics.mobility_b0));
  if (!mobility_file.empty()) out.emplace_back("dynamics.b0_file", mobility_file);
  out.emplace_back("dynamics.dt", fmt(dynamics.dt));
  out.emplace_back("dynamics.t_end", fmt(dynamics.t_end));
  out.emplace_back("dynamics.snapshot_every", std::to_string(dynamics.snapshot_every));
  out.emplace_back("solver.newton_tol", fmt(dynamics.newton_tol));
  out.emplace_back("solver.newton_max", std::to_string(dynamics.newton_max));
  out.emplace_back("solver.interior_margin", fmt(dynamics.interior_margin));
  switch (ic_type) {
    case IcType::constant: out.emplace_back("ic.type", "constant"); break;
    case IcType::noise: out.emplace_back("ic.type", "noise"); break;
    case IcType::cosine: out.emplace_back("ic.type", "cosine"); break;
    case IcType::file: out.emplace_back("ic.type", "file"); break;
  }
  out.emplace_back("ic.value", fmt(ic_value));
  out.emplace_back("ic.amplitude", fmt(ic_amplitude));
  out.emplace_back("ic.seed", std::to_string(ic_seed));
  if (!ic_mode.empty()) {
    std::string m;
    for (std::size_t i = 0; i < ic_mode.size(); ++i)
      m += (i ? "," : "") + std::to_string(ic_mode[i]);
    out.emplace_back("ic.mode", m);
  }
  if (!ic_path.empty()) out.emplace_back("ic.path", ic_path);
  out.emplace_back("stationary.tol", fmt(stationary_tol));
  out.emplace_back("stationary.max_outer", std::to_string(stationary_max_outer));
  out.emplace_back("stationary.damping", fmt(stationary_damping));
  if (stationary_mass) out.emplace_back("stationary.mass", fmt(*stationary_mass));
  out.emplace_back("stationary.degenerate", stationary_degenerate ? "true" : "false");
  out.emplace_back("output.dir", output_dir);
  return out;
}

std::string override_entry(const std::vector<std::pair<std::string, std::string>>& entries,
                           const std::string& key, const std::string& value) {
  std::ostringstream os;
  bool replaced = false;
  for (const auto& [k, v] : entries) {
    if (k == key) {
      os << k << " = " << value << "\n";
      replaced = true;
    } else {
      os << k << " = " << v << "\n";
    }
  }
  if (!replaced) os << key << " = " << value << "\n";
  return os.str();
}

} // namespace nlch
