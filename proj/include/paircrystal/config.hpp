#pragma once

// Flat-key experiment configuration. A config is a single JSON object whose
// values are numbers, booleans, strings or arrays of numbers; nested objects
// are not allowed. Every key must be known to the selected command — unknown
// keys are rejected before anything is computed.

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "paircrystal/chaos.hpp"
#include "paircrystal/errors.hpp"
#include "paircrystal/integrator.hpp"
#include "paircrystal/orbit.hpp"
#include "paircrystal/quantum.hpp"
#include "paircrystal/state.hpp"

namespace paircrystal::config {

enum class Command { simulate, find_orbit, unit_cell, poincare, lyapunov, quantum };

const char* to_string(Command c);
std::optional<Command> parse_command(std::string_view name);

struct SimulateSpec {
  StateVector init;
  double tau_end = 0.0;
  IntegratorConfig integrator;
  std::string observable = "mx";  ///< plotted column: mx, my, mz, x, p, H, Msq, Np
  bool pair_number = false;       ///< add the N_p column
  PhysicalScales scales;
};

struct FindOrbitSpec {
  SearchWindow window;
  OrbitSearchConfig search;
};

struct UnitCellSpec {
  StateVector init;
  double period = 0.0;
  int copies = 4;
  int points = 2000;
  bool refine = false;  ///< refine (X(0), T) before certifying
  OrbitSearchConfig search;
};

struct PoincareSpec {
  StateVector init;
  double tau_end = 0.0;
  CrossingFilter filter = CrossingFilter::both;
  double epsilon = 1e-3;
  IntegratorConfig integrator;
};

struct LyapunovSpec {
  StateVector init;
  double tau_total = 0.0;
  LyapunovConfig lyapunov;
};

struct QuantumSpec {
  quantum::ShootingProblem problem;
  double grid_step = 0.01;
  bool mirror = false;       ///< also solve the mirrored problem and write its table
  double plot_range = 0.0;   ///< |y| shown in the plot (0 = y_max)
};

using Spec = std::variant<SimulateSpec, FindOrbitSpec, UnitCellSpec, PoincareSpec, LyapunovSpec, QuantumSpec>;

struct ExperimentConfig {
  Command command = Command::simulate;
  std::string description;
  Spec spec;
  nlohmann::json canonical;  ///< the parsed object; dumps with sorted keys
  std::string hash;          ///< fnv1a64 of canonical.dump()
};

/// Parses and validates. Throws ConfigError on malformed JSON, a non-object
/// document, nested values, unknown keys, wrong types, out-of-range values,
/// or a "command" key that disagrees with `expected`.
ExperimentConfig parse_config(std::string_view text, std::optional<Command> expected = std::nullopt);

ExperimentConfig load_config(const std::string& path, std::optional<Command> expected = std::nullopt);

}  // namespace paircrystal::config
