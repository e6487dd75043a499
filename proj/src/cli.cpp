#include "paircrystal/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "CLI11.hpp"
#include "paircrystal/chaos.hpp"
#include "paircrystal/errors.hpp"
#include "paircrystal/integrator.hpp"
#include "paircrystal/orbit.hpp"
#include "paircrystal/quantum.hpp"

namespace paircrystal::cli {

using nlohmann::json;
using config::Command;

namespace {

constexpr double kPi = std::numbers::pi;

json state_json(const StateVector& s) {
  return {{"mx", s.mx}, {"my", s.my}, {"mz", s.mz}, {"x", s.x}, {"p", s.p}};
}

class Emitter {
 public:
  Emitter(const RunOptions& opt, RunResult& run) : opt_(opt), run_(run) {}

  void table(const std::string& stem, const io::Table& t) {
    run_.files.push_back({stem + io::extension(opt_.format), io::render(t, opt_.format)});
  }

  void plot(const std::string& stem, const io::Plot& p) {
    if (opt_.plot) run_.files.push_back({stem + ".svg", io::render_svg(p)});
  }

 private:
  const RunOptions& opt_;
  RunResult& run_;
};

// ---------------------------------------------------------------- simulate

RunResult run_simulate(const config::SimulateSpec& s, const RunOptions& opt) {
  RunResult run;
  Emitter emit(opt, run);
  const Trajectory traj = integrate(s.init, s.tau_end, s.integrator);

  io::Table t;
  t.columns = {"tau", "Mx", "My", "Mz", "X", "P", "H", "Msq"};
  if (s.pair_number) t.columns.push_back("Np");
  std::vector<double> obs;
  obs.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const StateVector& z = traj.states()[i];
    const double h = hamiltonian(z);
    const double msq = casimir(z);
    std::vector<io::Cell> row{traj.times()[i], z.mx, z.my, z.mz, z.x, z.p, h, msq};
    double np = 0.0;
    if (s.pair_number) {
      const PhysicalState phys = to_physical(s.scales, {z, traj.times()[i]});
      np = pair_number(phys.f3, s.scales.p_c, s.scales.m);
      row.emplace_back(np);
    }
    t.add_row(std::move(row));
    const std::string& o = s.observable;
    obs.push_back(o == "mx"    ? z.mx
                  : o == "my"  ? z.my
                  : o == "mz"  ? z.mz
                  : o == "x"   ? z.x
                  : o == "p"   ? z.p
                  : o == "H"   ? h
                  : o == "Msq" ? msq
                               : np);
  }
  emit.table("trajectory", t);

  io::Plot p;
  p.title = "simulate: " + s.observable + "(tau), X(0) = " + io::format_double(s.init.x);
  p.x_label = "tau";
  p.y_label = s.observable;
  p.series.push_back({s.observable, traj.times(), obs, false, ""});
  emit.plot("trajectory", p);

  // Fast (Zitterbewegung) period of Mx from the uniformly spaced prefix of the samples.
  std::optional<double> fast;
  if (traj.size() > 16) {
    const double dt = traj.times()[1] - traj.times()[0];
    std::vector<double> mx{traj.states()[0].mx};
    for (std::size_t i = 1; i < traj.size(); ++i) {
      if (std::abs(traj.times()[i] - traj.times()[i - 1] - dt) > 1e-9 * dt) break;
      mx.push_back(traj.states()[i].mx);
    }
    if (mx.size() >= 16) fast = dominant_frequency(mx, dt, 0.5, 0.9 * kPi / dt);
  }

  const auto& st = traj.stats();
  run.results = {{"samples", traj.size()},
                 {"steps", st.steps},
                 {"rejected_steps", st.rejected},
                 {"max_hamiltonian_drift", st.max_hamiltonian_drift},
                 {"max_casimir_drift", st.max_casimir_drift},
                 {"initial_state", state_json(s.init)},
                 {"final_state", state_json(traj.back())},
                 {"H0", hamiltonian(s.init)},
                 {"Msq0", casimir(s.init)},
                 {"fast_period", fast ? json(2.0 * kPi / *fast) : json(nullptr)},
                 {"fast_period_over_pi", fast ? json(2.0 / *fast) : json(nullptr)}};
  return run;
}

// -------------------------------------------------------------- find-orbit

io::Table candidate_table(const std::vector<OrbitCandidate>& cands) {
  io::Table t;
  t.columns = {"rank", "X0", "T", "T_over_pi", "residual", "horizon_residual", "classification", "lambda_max",
               "hit_boundary"};
  long long rank = 1;
  for (const auto& c : cands)
    t.add_row({rank++, c.init.x, c.period, c.period / kPi, c.residual, c.horizon_residual,
               std::string(to_string(c.classification)), c.lambda_max ? *c.lambda_max : std::nan(""),
               static_cast<long long>(c.hit_boundary)});
  return t;
}

json candidate_json(const OrbitCandidate& c) {
  return {{"x0", c.init.x},
          {"period", c.period},
          {"period_over_pi", c.period / kPi},
          {"residual", c.residual},
          {"horizon_residual", c.horizon_residual},
          {"classification", to_string(c.classification)},
          {"lambda_max", c.lambda_max ? json(*c.lambda_max) : json(nullptr)},
          {"degenerate", c.degenerate},
          {"hit_boundary", c.hit_boundary}};
}

RunResult run_find_orbit(const config::FindOrbitSpec& s, const RunOptions& opt) {
  RunResult run;
  Emitter emit(opt, run);
  OrbitSearchConfig search = s.search;
  if (opt.threads) search.threads = *opt.threads;

  ScanResult scan;
  if (s.window.grid_n == 0) {
    run.warnings.push_back("empty window: grid_n = 0, nothing scanned");
  } else {
    scan = scan_time_crystals(s.window, search);
    for (const auto& [x0, msg] : scan.failures)
      run.warnings.push_back("X0 = " + io::format_double(x0) + ": " + msg);
    if (scan.candidates.empty())
      throw SearchError("find-orbit: no grid point produced a candidate (" + std::to_string(scan.failures.size()) +
                        " failures)");
  }
  emit.table("candidates", candidate_table(scan.candidates));

  io::Plot p;
  p.title = "find-orbit: recurrence residual of refined candidates";
  p.x_label = "X(0)";
  p.y_label = "log10 residual";
  io::Series ser{"candidates", {}, {}, true, ""};
  for (const auto& c : scan.candidates) {
    ser.x.push_back(c.init.x);
    ser.y.push_back(std::log10(std::max(c.residual, 1e-300)));
  }
  p.series.push_back(ser);
  emit.plot("candidates", p);

  json top = scan.candidates.empty() ? json(nullptr) : candidate_json(scan.candidates.front());
  run.results = {{"grid_points", s.window.grid_n == 0 ? 0 : (s.window.x0_min == s.window.x0_max ? 1 : s.window.grid_n)},
                 {"candidates", scan.candidates.size()},
                 {"failures", scan.failures.size()},
                 {"best", top}};
  return run;
}

// --------------------------------------------------------------- unit-cell

RunResult run_unit_cell(const config::UnitCellSpec& s, const RunOptions& opt) {
  RunResult run;
  Emitter emit(opt, run);
  const OrbitCandidate cand =
      s.refine ? refine_orbit(s.init, s.period, s.search) : evaluate_candidate(s.init, s.period, s.search);
  if (cand.classification != Classification::periodic)
    throw SearchError(std::string("unit-cell: candidate X0 = ") + io::format_double(cand.init.x) +
                      ", T = " + io::format_double(cand.period) + " is " + to_string(cand.classification) +
                      " (residual " + io::format_double(cand.residual) + ", horizon residual " +
                      io::format_double(cand.horizon_residual) + "); refusing to draw a unit cell");

  const UnitCell cell = unit_cell(cand.init, cand.period, s.copies, s.points, s.search.integrator);
  io::Table t;
  t.columns = {"tau"};
  for (int k = 0; k < s.copies; ++k) t.columns.push_back("Mx_shift" + std::to_string(k));
  for (std::size_t i = 0; i < cell.tau.size(); ++i) {
    std::vector<io::Cell> row{cell.tau[i]};
    for (const auto& tr : cell.traces) row.emplace_back(tr[i]);
    t.add_row(std::move(row));
  }
  emit.table("unit_cell", t);

  io::Plot p;
  p.title = "unit cell: Mx(tau + kT), X(0) = " + io::format_double(cand.init.x) +
            ", T = " + io::format_double(cand.period / kPi) + " pi";
  p.x_label = "tau";
  p.y_label = "Mx";
  for (int k = 0; k < s.copies; ++k)
    p.series.push_back({"k = " + std::to_string(k), cell.tau, cell.traces[static_cast<std::size_t>(k)], false, ""});
  emit.plot("unit_cell", p);

  run.results = candidate_json(cand);
  run.results["refined"] = s.refine;
  run.results["requested_x0"] = s.init.x;
  run.results["requested_period"] = s.period;
  run.results["requested_period_over_pi"] = s.period / kPi;
  run.results["copies"] = s.copies;
  run.results["overlap"] = cell.overlap;
  return run;
}

// ---------------------------------------------------------------- poincare

RunResult run_poincare(const config::PoincareSpec& s, const RunOptions& opt) {
  RunResult run;
  Emitter emit(opt, run);
  const Trajectory traj = integrate(s.init, s.tau_end, s.integrator);
  const PoincareSection sec = poincare_section(traj, s.filter);
  const auto counts = epsilon_distinct_count(sec, s.epsilon);

  io::Table t;
  t.columns = {"tau", "Mx", "My", "direction"};
  for (std::size_t i = 0; i < sec.size(); ++i)
    t.add_row({sec.crossing_times[i], sec.points[i].first, sec.points[i].second,
               static_cast<long long>(sec.directions[i])});
  emit.table("section", t);

  io::Table c;
  c.columns = {"crossings", "distinct"};
  for (std::size_t i = 0; i < counts.size(); ++i)
    c.add_row({static_cast<long long>(i + 1), static_cast<long long>(counts[i])});
  emit.table("distinct_counts", c);

  io::Plot p;
  p.title = "Poincare section at P = 0";
  p.x_label = "Mx";
  p.y_label = "My";
  io::Series ser{"crossings", {}, {}, true, ""};
  for (const auto& [x, y] : sec.points) {
    ser.x.push_back(x);
    ser.y.push_back(y);
  }
  p.series.push_back(ser);
  emit.plot("section", p);

  if (sec.degenerate) run.warnings.push_back("degenerate: P vanishes identically, section is empty");
  else if (sec.size() == 0) run.warnings.push_back("no sign change of P within tau_end; section is empty");

  run.results = {{"crossings", sec.size()},
                 {"distinct", counts.empty() ? 0 : counts.back()},
                 {"epsilon", s.epsilon},
                 {"plateaued", count_plateaued(counts)},
                 {"degenerate", sec.degenerate},
                 {"tau_end", s.tau_end},
                 {"max_hamiltonian_drift", traj.stats().max_hamiltonian_drift},
                 {"max_casimir_drift", traj.stats().max_casimir_drift}};
  return run;
}

// ---------------------------------------------------------------- lyapunov

RunResult run_lyapunov(const config::LyapunovSpec& s, const RunOptions& opt) {
  RunResult run;
  Emitter emit(opt, run);
  const LyapunovEstimate est = lyapunov_max(s.init, s.tau_total, s.lyapunov);
  io::Table t;
  t.columns = {"tau", "lambda"};
  io::Series ser{"running estimate", {}, {}, false, ""};
  for (const auto& [tau, lam] : est.history) {
    t.add_row({tau, lam});
    ser.x.push_back(tau);
    ser.y.push_back(lam);
  }
  emit.table("lyapunov", t);
  io::Plot p;
  p.title = "largest Lyapunov exponent (Benettin)";
  p.x_label = "tau";
  p.y_label = "lambda_max";
  p.series.push_back(ser);
  emit.plot("lyapunov", p);
  run.results = {{"lambda_max", est.lambda_max},
                 {"renorm_interval", est.renorm_interval},
                 {"tau_total", s.tau_total},
                 {"initial_state", state_json(s.init)}};
  return run;
}

// ----------------------------------------------------------------- quantum

io::Table eigen_table(const quantum::EigenSolution& sol) {
  io::Table t;
  t.columns = {"y", "phi1", "phi2"};
  for (std::size_t i = 0; i < sol.grid.size(); ++i) t.add_row({sol.grid[i], sol.phi1[i], sol.phi2[i]});
  return t;
}

io::Plot eigen_plot(const quantum::EigenSolution& sol, double range, const std::string& title) {
  // Display-only rescaling to max |phi| = 1 over the plotted window.
  double scale = 0.0;
  for (std::size_t i = 0; i < sol.grid.size(); ++i)
    if (std::abs(sol.grid[i]) <= range + 1e-12)
      scale = std::max({scale, std::abs(sol.phi1[i]), std::abs(sol.phi2[i])});
  if (!(scale > 0.0)) scale = 1.0;
  io::Series a{"phi1", {}, {}, false, ""};
  io::Series b{"phi2", {}, {}, false, ""};
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    if (std::abs(sol.grid[i]) > range + 1e-12) continue;
    a.x.push_back(sol.grid[i]);
    a.y.push_back(sol.phi1[i] / scale);
    b.x.push_back(sol.grid[i]);
    b.y.push_back(sol.phi2[i] / scale);
  }
  io::Plot p;
  p.title = title;
  p.x_label = "y";
  p.y_label = "phi / max|phi|";
  p.series = {a, b};
  return p;
}

RunResult run_quantum(const config::QuantumSpec& s, const RunOptions& opt) {
  RunResult run;
  Emitter emit(opt, run);
  const auto& prob = s.problem;
  const quantum::EigenSolution sol = quantum::find_regular_derivative(prob, s.grid_step);
  const double range = s.plot_range > 0.0 ? std::min(s.plot_range, prob.y_max) : prob.y_max;
  const auto res = quantum::equation_residual(sol, prob.y_max - 1.0);

  emit.table("eigenfunction", eigen_table(sol));
  emit.plot("eigenfunction",
            eigen_plot(sol, range, "E = " + io::format_double(prob.energy) + ", free " + to_string(prob.free_slot) +
                                       "(0) = " + io::format_double(sol.solved_free_value)));

  run.results = {{"energy", prob.energy},
                 {"free_slot", to_string(prob.free_slot)},
                 {"solved_free_value", sol.solved_free_value},
                 {"initial", sol.initial},
                 {"y_max", prob.y_max},
                 {"defect_plus", sol.defect_plus},
                 {"defect_minus", sol.defect_minus},
                 {"bisection_iterations", sol.bracket_widths.empty() ? 0 : sol.bracket_widths.size() - 1},
                 {"final_bracket_width", sol.bracket_widths.empty() ? 0.0 : sol.bracket_widths.back()},
                 {"equation_residual_abs", res.absolute},
                 {"equation_residual_scaled", res.scaled}};

  if (s.mirror) {
    // Mirror of the solved solution versus a direct integration of the
    // mirrored initial data (no new bisection).
    const quantum::EigenSolution mirrored = quantum::mirror_solution(sol);
    const quantum::ShootingProblem mprob = quantum::mirrored_problem(prob);
    const quantum::EigenSolution direct =
        quantum::integrate_solution(mprob, mirrored.solved_free_value, s.grid_step);
    double diff = 0.0;
    for (std::size_t i = 0; i < direct.grid.size(); ++i) {
      const double sc = std::max(1.0, std::abs(mirrored.phi1[i]) + std::abs(mirrored.phi2[i]));
      diff = std::max(diff, std::max(std::abs(direct.phi1[i] - mirrored.phi1[i]),
                                     std::abs(direct.phi2[i] - mirrored.phi2[i])) / sc);
    }
    emit.table("eigenfunction_mirror", eigen_table(direct));
    emit.plot("eigenfunction_mirror", eigen_plot(direct, range, "mirrored solution, E = " +
                                                                     io::format_double(prob.energy)));
    run.results["mirror"] = {{"free_slot", to_string(mprob.free_slot)},
                             {"free_value", mirrored.solved_free_value},
                             {"defect_plus", direct.defect_plus},
                             {"defect_minus", direct.defect_minus},
                             {"max_scaled_difference_vs_mirror_solution", diff}};
  }
  return run;
}

}  // namespace

RunResult execute(const config::ExperimentConfig& cfg, const RunOptions& opt) {
  return std::visit(
      [&](const auto& spec) -> RunResult {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, config::SimulateSpec>) return run_simulate(spec, opt);
        else if constexpr (std::is_same_v<T, config::FindOrbitSpec>) return run_find_orbit(spec, opt);
        else if constexpr (std::is_same_v<T, config::UnitCellSpec>) return run_unit_cell(spec, opt);
        else if constexpr (std::is_same_v<T, config::PoincareSpec>) return run_poincare(spec, opt);
        else if constexpr (std::is_same_v<T, config::LyapunovSpec>) return run_lyapunov(spec, opt);
        else return run_quantum(spec, opt);
      },
      cfg.spec);
}

json build_manifest(const config::ExperimentConfig& cfg, const RunOptions& opt, const RunResult& run) {
  json outputs = json::array();
  for (const auto& f : run.files)
    outputs.push_back({{"file", f.name}, {"fnv1a64", io::fnv1a64(f.bytes)}, {"bytes", f.bytes.size()}});
  return {{"artifact", "paircrystal"},
          {"artifact_version", kArtifactVersion},
          {"csv_schema_version", io::kCsvSchemaVersion},
          {"command", config::to_string(cfg.command)},
          {"description", cfg.description},
          {"config_hash", cfg.hash},
          {"config", cfg.canonical},
          {"format", opt.format == io::TableFormat::csv ? "csv" : "json"},
          {"plot", opt.plot},
          {"outputs", outputs},
          {"results", run.results},
          {"warnings", run.warnings}};
}

json run_and_write(const config::ExperimentConfig& cfg, const RunOptions& opt) {
  const RunResult run = execute(cfg, opt);
  std::filesystem::create_directories(opt.out_dir);
  for (const auto& f : run.files) io::write_file(opt.out_dir / f.name, f.bytes);
  json manifest = build_manifest(cfg, opt, run);
  io::write_file(opt.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"paircrystal: time crystals, chaos and shooting for the pair/field model"};
  app.set_version_flag("--version", kArtifactVersion);
  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv";
  std::string plot = "on";
  unsigned threads = 0;
  bool timings = false;

  std::vector<std::pair<Command, CLI::App*>> subs;
  for (Command c : {Command::simulate, Command::find_orbit, Command::unit_cell, Command::poincare,
                    Command::lyapunov, Command::quantum}) {
    CLI::App* sub = app.add_subcommand(config::to_string(c));
    sub->add_option("--config", config_path, "flat-key JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_option("--plot", plot, "write SVG plots")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
    sub->add_option("--threads", threads, "worker threads for sweeps (0 = config/hardware)");
    sub->add_flag("--timings", timings, "also write timings.json (wall clock; not part of the manifest)");
    subs.emplace_back(c, sub);
  }
  app.require_subcommand(1);
  app.get_subcommand("simulate")->description("integrate a trajectory (Figs. 1-2)");
  app.get_subcommand("find-orbit")->description("scan X(0) for periodic orbits (Figs. 3-6)");
  app.get_subcommand("unit-cell")->description("superimpose Mx(tau + kT) for a certified orbit (Figs. 3-6)");
  app.get_subcommand("poincare")->description("Poincare section at P = 0 (Figs. 7-8)");
  app.get_subcommand("lyapunov")->description("largest Lyapunov exponent");
  app.get_subcommand("quantum")->description("shooting solution of the eigenproblem (Figs. 9-11)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  Command command = Command::simulate;
  for (const auto& [c, sub] : subs)
    if (sub->parsed()) command = c;

  RunOptions opt;
  opt.out_dir = out_dir;
  opt.format = format == "json" ? io::TableFormat::json : io::TableFormat::csv;
  opt.plot = plot == "on";
  if (threads > 0) opt.threads = threads;

  try {
    const auto cfg = config::load_config(config_path, command);
    const auto t0 = std::chrono::steady_clock::now();
    const json manifest = run_and_write(cfg, opt);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (timings) io::write_file(opt.out_dir / "timings.json", json{{"wall_clock_seconds", seconds}}.dump(2) + "\n");
    for (const auto& w : manifest["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
    out << config::to_string(command) << ": wrote " << manifest["outputs"].size() << " outputs and manifest.json to "
        << opt.out_dir.string() << "\n";
    return kSuccess;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BracketError& e) {
    err << "bracket failure: " << e.what() << "\n";
    return kSearchFailure;
  } catch (const SearchError& e) {
    err << "search failure: " << e.what() << "\n";
    return kSearchFailure;
  } catch (const IntegrationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const DomainError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace paircrystal::cli
