#include "paircrystal/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "paircrystal/io.hpp"

namespace paircrystal::config {

using nlohmann::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::find_orbit: return "find-orbit";
    case Command::unit_cell: return "unit-cell";
    case Command::poincare: return "poincare";
    case Command::lyapunov: return "lyapunov";
    case Command::quantum: return "quantum";
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : {Command::simulate, Command::find_orbit, Command::unit_cell, Command::poincare,
                    Command::lyapunov, Command::quantum})
    if (name == to_string(c)) return c;
  return std::nullopt;
}

namespace {

// Typed access to the flat object. Every accessor registers its key as known,
// so after a command has read its schema, finish() reports leftovers.
class Reader {
 public:
  explicit Reader(const json& obj) : obj_(obj) {}

  bool has(const std::string& key) {
    known_.insert(key);
    return obj_.contains(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("config key '" + key + "' must be finite");
    return d;
  }

  /// `key` in plain units or `key_over_pi` in multiples of pi; not both.
  double number_pi(const std::string& key, double def) {
    const std::string alt = key + "_over_pi";
    const bool a = has(key), b = has(alt);
    if (a && b) throw ConfigError("config keys '" + key + "' and '" + alt + "' are mutually exclusive");
    if (b) return number(alt, 0.0) * std::numbers::pi;
    return number(key, def);
  }

  long long integer(const std::string& key, long long def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ConfigError("config key '" + key + "' must be an integer");
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
    return v.get<bool>();
  }

  std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    const std::string s = v.get<std::string>();
    for (const auto& a : allowed)
      if (s == a) return s;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ConfigError("config key '" + key + "' must be one of: " + list);
  }

  std::string text(const std::string& key) {
    if (!has(key)) return {};
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
  }

  Vec5 vec5(const std::string& key, const Vec5& def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_array() || v.size() != 5) throw ConfigError("config key '" + key + "' must be an array of 5 numbers");
    Vec5 out{};
    for (std::size_t i = 0; i < 5; ++i) {
      if (!v[i].is_number()) throw ConfigError("config key '" + key + "' must be an array of 5 numbers");
      out[i] = v[i].get<double>();
      if (!std::isfinite(out[i])) throw ConfigError("config key '" + key + "' must be finite");
    }
    return out;
  }

  void finish(const char* command) const {
    for (const auto& [key, value] : obj_.items())
      if (!known_.count(key))
        throw ConfigError("unknown config key '" + key + "' for command " + std::string(command));
  }

 private:
  const json& obj_;
  std::set<std::string> known_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

StateVector read_state(Reader& r) {
  const StateVector ref = reference_initial_state(0.0);
  return {r.number("mx0", ref.mx), r.number("my0", ref.my), r.number("mz0", ref.mz), r.number("x0", ref.x),
          r.number("p0", ref.p)};
}

IntegratorConfig read_integrator(Reader& r, IntegratorConfig cfg) {
  const std::string method =
      r.choice("method", cfg.method == Method::adaptive_rk ? "adaptive" : "splitting", {"adaptive", "splitting"});
  cfg.method = method == "adaptive" ? Method::adaptive_rk : Method::strang_split;
  cfg.rel_tol = r.number("rel_tol", cfg.rel_tol);
  cfg.abs_tol = r.number("abs_tol", cfg.abs_tol);
  cfg.max_step = r.number("max_step", cfg.max_step);
  cfg.fixed_dt = r.number("fixed_dt", cfg.fixed_dt);
  cfg.sample_dt = r.number_pi("sample_dt", cfg.sample_dt);
  cfg.max_steps = static_cast<long>(r.integer("max_steps", cfg.max_steps));
  cfg.validate();
  return cfg;
}

LyapunovConfig read_lyapunov(Reader& r, LyapunovConfig cfg) {
  cfg.renorm_dtau = r.number_pi("renorm_dtau", cfg.renorm_dtau);
  cfg.delta0 = r.number("lyapunov_delta0", cfg.delta0);
  cfg.direction = r.vec5("lyapunov_direction", cfg.direction);
  require(cfg.renorm_dtau > 0.0, "renorm_dtau must be positive");
  require(cfg.delta0 > 0.0, "lyapunov_delta0 must be positive");
  double norm = 0.0;
  for (double v : cfg.direction) norm += v * v;
  require(norm > 0.0, "lyapunov_direction must be non-zero");
  return cfg;
}

OrbitSearchConfig read_search(Reader& r) {
  OrbitSearchConfig s;
  s.integrator = read_integrator(r, s.integrator);
  s.t_box = r.number("t_box", s.t_box);
  s.x0_box = r.number("x0_box", s.x0_box);
  s.line_grid = static_cast<int>(r.integer("line_grid", s.line_grid));
  s.max_sweeps = static_cast<int>(r.integer("max_sweeps", s.max_sweeps));
  s.min_period = r.number_pi("min_period", s.min_period);
  s.max_candidates = static_cast<std::size_t>(r.integer("max_candidates", static_cast<long long>(s.max_candidates)));
  s.threads = static_cast<unsigned>(r.integer("threads", s.threads));
  auto& c = s.classify;
  c.periodic_threshold = r.number("periodic_threshold", c.periodic_threshold);
  c.quasiperiodic_threshold = r.number("quasiperiodic_threshold", c.quasiperiodic_threshold);
  c.chaos_lambda = r.number("chaos_lambda", c.chaos_lambda);
  c.horizon_periods = static_cast<int>(r.integer("horizon_periods", c.horizon_periods));
  c.compute_lyapunov = r.boolean("compute_lyapunov", c.compute_lyapunov);
  c.lyapunov_tau = r.number("lyapunov_tau", c.lyapunov_tau);
  c.lyapunov = read_lyapunov(r, c.lyapunov);

  require(s.t_box > 0.0 && s.t_box < 1.0, "t_box must lie in (0, 1)");
  require(s.x0_box >= 0.0, "x0_box must be non-negative");
  require(s.line_grid >= 3, "line_grid must be at least 3");
  require(s.max_sweeps >= 1, "max_sweeps must be at least 1");
  require(s.min_period >= 0.0, "min_period must be non-negative");
  require(s.max_candidates >= 1, "max_candidates must be at least 1");
  require(c.periodic_threshold > 0.0, "periodic_threshold must be positive");
  require(c.quasiperiodic_threshold >= c.periodic_threshold,
          "quasiperiodic_threshold must be at least periodic_threshold");
  require(c.chaos_lambda > 0.0, "chaos_lambda must be positive");
  require(c.horizon_periods >= 1, "horizon_periods must be at least 1");
  require(!c.compute_lyapunov || c.lyapunov_tau >= 100.0 * c.lyapunov.renorm_dtau,
          "lyapunov_tau must be at least 100 renorm_dtau");
  return s;
}

SimulateSpec read_simulate(Reader& r) {
  SimulateSpec s;
  s.init = read_state(r);
  s.tau_end = r.number_pi("tau_end", 0.0);
  require(s.tau_end > 0.0, "tau_end (or tau_end_over_pi) must be positive");
  s.integrator = read_integrator(r, {});
  s.observable = r.choice("observable", "mx", {"mx", "my", "mz", "x", "p", "H", "Msq", "Np"});
  s.pair_number = r.boolean("pair_number", false);
  s.scales.m = r.number("scale_m", 1.0);
  s.scales.e = r.number("scale_e", 1.0);
  s.scales.gamma = r.number("scale_gamma", 1.0);
  s.scales.p_c = r.number("scale_pc", 0.0);
  if (s.pair_number || s.observable == "Np") {
    s.pair_number = true;
    require(s.scales.m > 0.0 && s.scales.e != 0.0 && s.scales.gamma != 0.0,
            "pair_number requires scale_m > 0 and non-zero scale_e, scale_gamma");
  }
  return s;
}

FindOrbitSpec read_find_orbit(Reader& r) {
  FindOrbitSpec s;
  s.window.base = read_state(r);
  s.window.x0_min = r.number("x0_min", s.window.x0_min);
  s.window.x0_max = r.number("x0_max", s.window.x0_max);
  s.window.grid_n = static_cast<int>(r.integer("grid_n", s.window.grid_n));
  s.window.tau_horizon = r.number_pi("tau_horizon", s.window.tau_horizon);
  require(s.window.grid_n >= 0, "grid_n must be non-negative");
  if (s.window.grid_n > 0) {
    try {
      s.window.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  s.search = read_search(r);
  return s;
}

UnitCellSpec read_unit_cell(Reader& r) {
  UnitCellSpec s;
  s.init = read_state(r);
  s.period = r.number_pi("period", 0.0);
  require(s.period > 0.0, "period (or period_over_pi) must be positive");
  s.copies = static_cast<int>(r.integer("copies", s.copies));
  s.points = static_cast<int>(r.integer("points", s.points));
  s.refine = r.boolean("refine", s.refine);
  require(s.copies >= 2, "copies must be at least 2");
  require(s.points >= 2, "points must be at least 2");
  s.search = read_search(r);
  return s;
}

PoincareSpec read_poincare(Reader& r) {
  PoincareSpec s;
  s.init = read_state(r);
  s.tau_end = r.number_pi("tau_end", 0.0);
  require(s.tau_end > 0.0, "tau_end (or tau_end_over_pi) must be positive");
  const std::string f = r.choice("filter", "both", {"both", "upward", "downward"});
  s.filter = f == "both" ? CrossingFilter::both : f == "upward" ? CrossingFilter::upward : CrossingFilter::downward;
  s.epsilon = r.number("epsilon", s.epsilon);
  require(s.epsilon > 0.0, "epsilon must be positive");
  s.integrator = read_integrator(r, {1e-12, 1e-14});
  return s;
}

LyapunovSpec read_lyapunov_spec(Reader& r) {
  LyapunovSpec s;
  s.init = read_state(r);
  s.tau_total = r.number_pi("tau_total", 0.0);
  s.lyapunov = read_lyapunov(r, s.lyapunov);
  s.lyapunov.integrator = read_integrator(r, s.lyapunov.integrator);
  require(s.tau_total >= 100.0 * s.lyapunov.renorm_dtau, "tau_total must be at least 100 renorm_dtau");
  return s;
}

QuantumSpec read_quantum(Reader& r) {
  QuantumSpec s;
  const double energy = r.number("energy", 2.0);
  const std::string kind = r.choice("configuration", "first", {"first", "second", "custom"});
  auto& p = s.problem;
  p = kind == "second" ? quantum::ShootingProblem::second_kind(energy)
                       : quantum::ShootingProblem::first_kind(energy);
  const char* ic_keys[] = {"phi1_0", "dphi1_0", "phi2_0", "dphi2_0"};
  if (kind == "custom") {
    for (std::size_t i = 0; i < 4; ++i) p.initial[i] = r.number(ic_keys[i], 0.0);
    const std::string slot = r.choice("free_slot", "dphi2", {"phi1", "dphi1", "phi2", "dphi2"});
    p.free_slot = slot == "phi1"    ? quantum::Slot::phi1
                  : slot == "dphi1" ? quantum::Slot::dphi1
                  : slot == "phi2"  ? quantum::Slot::phi2
                                    : quantum::Slot::dphi2;
  } else {
    for (const char* k : ic_keys)
      require(!r.has(k), std::string("config key '") + k + "' requires configuration = custom");
    require(!r.has("free_slot"), "config key 'free_slot' requires configuration = custom");
  }
  p.y_max = r.number("y_max", p.y_max);
  p.bracket_lo = r.number("bracket_lo", p.bracket_lo);
  p.bracket_hi = r.number("bracket_hi", p.bracket_hi);
  p.defect_cap = r.number("defect_cap", p.defect_cap);
  p.tolerance = r.number("tolerance", p.tolerance);
  p.rel_tol = r.number("rel_tol", p.rel_tol);
  p.abs_tol = r.number("abs_tol", p.abs_tol);
  p.coupling = r.number("coupling", p.coupling);
  s.grid_step = r.number("grid_step", s.grid_step);
  s.mirror = r.boolean("mirror", s.mirror);
  s.plot_range = r.number("plot_range", 0.0);
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  require(s.grid_step > 0.0 && s.grid_step <= p.y_max, "grid_step must lie in (0, y_max]");
  require(s.plot_range >= 0.0, "plot_range must be non-negative");
  return s;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::optional<Command> expected) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) throw ConfigError("config key '" + key + "' is nested; configs are flat");
    if (value.is_array())
      for (const auto& v : value)
        if (!v.is_number()) throw ConfigError("config key '" + key + "' must be an array of numbers");
    if (value.is_null()) throw ConfigError("config key '" + key + "' is null");
  }

  if (!doc.contains("command") || !doc["command"].is_string())
    throw ConfigError("config must name its command in the 'command' key");
  const auto cmd = parse_command(doc["command"].get<std::string>());
  if (!cmd) throw ConfigError("unknown command '" + doc["command"].get<std::string>() + "' in config");
  if (expected && *expected != *cmd)
    throw ConfigError(std::string("config is for command ") + to_string(*cmd) + ", not " + to_string(*expected));

  ExperimentConfig out;
  out.command = *cmd;
  Reader r(doc);
  r.has("command");
  out.description = r.text("description");
  try {
    switch (*cmd) {
      case Command::simulate: out.spec = read_simulate(r); break;
      case Command::find_orbit: out.spec = read_find_orbit(r); break;
      case Command::unit_cell: out.spec = read_unit_cell(r); break;
      case Command::poincare: out.spec = read_poincare(r); break;
      case Command::lyapunov: out.spec = read_lyapunov_spec(r); break;
      case Command::quantum: out.spec = read_quantum(r); break;
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  r.finish(to_string(*cmd));
  out.canonical = doc;
  out.hash = io::fnv1a64(doc.dump());
  return out;
}

ExperimentConfig load_config(const std::string& path, std::optional<Command> expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), expected);
}

}  // namespace paircrystal::config
