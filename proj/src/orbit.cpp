#include "paircrystal/orbit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <thread>

#include "paircrystal/errors.hpp"

namespace paircrystal {

const char* to_string(Classification c) {
  switch (c) {
    case Classification::periodic: return "periodic";
    case Classification::quasiperiodic: return "quasiperiodic";
    case Classification::chaotic: return "chaotic";
    case Classification::undetermined: return "undetermined";
  }
  return "undetermined";
}

double zitter_period(double x) { return std::numbers::pi / std::sqrt(1.0 + x * x); }

void SearchWindow::validate() const {
  if (!(x0_min <= x0_max)) throw DomainError("search window: x0_min must not exceed x0_max");
  if (x0_min < x0_max && grid_n < 2) throw DomainError("search window: grid_n must be at least 2");
  if (!(tau_horizon > 0.0)) throw DomainError("search window: tau_horizon must be positive");
  require_finite(base, "search window");
}

namespace {

IntegratorConfig tightened(IntegratorConfig cfg) {
  cfg.method = Method::adaptive_rk;
  cfg.rel_tol = std::min(cfg.rel_tol, 1e-10);
  cfg.abs_tol = std::min(cfg.abs_tol, 1e-12);
  return cfg;
}

bool is_equilibrium(const StateVector& s) {
  const Vec5 f = vector_field_unchecked(s.to_array());
  return std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; });
}

}  // namespace

double recurrence_residual(const StateVector& init, double period, const IntegratorConfig& cfg) {
  if (!(period > 0.0)) throw DomainError("recurrence_residual: period must be positive");
  return distance(propagate(init, period, tightened(cfg)), init);
}

std::vector<double> periodogram(std::span<const double> samples, double dt,
                                std::span<const double> omegas) {
  const std::size_t n = samples.size();
  std::vector<double> power(omegas.size(), 0.0);
  if (n < 2) return power;
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
    w[i] = hann * (samples[i] - mean);
  }
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const std::complex<double> rot = std::polar(1.0, -omegas[k] * dt);
    std::complex<double> phase(1.0, 0.0);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      acc += w[i] * phase;
      phase *= rot;
      // Renormalise the phasor occasionally to keep it on the unit circle.
      if ((i & 1023) == 1023) phase /= std::abs(phase);
    }
    power[k] = std::norm(acc);
  }
  return power;
}

std::optional<double> dominant_frequency(std::span<const double> samples, double dt, double omega_lo,
                                         double omega_hi) {
  const std::size_t n = samples.size();
  if (n < 8 || !(omega_hi > omega_lo) || !(omega_lo >= 0.0)) return std::nullopt;
  const double length = static_cast<double>(n) * dt;
  const double bin = 2.0 * std::numbers::pi / length;
  // Coarse pass at one bin per point (the Hann main lobe spans four), then a
  // 16x finer pass around the winner.
  std::vector<double> coarse;
  for (double w = omega_lo; w <= omega_hi; w += bin) coarse.push_back(w);
  if (coarse.size() < 3) return std::nullopt;
  const std::vector<double> coarse_power = periodogram(samples, dt, coarse);
  const auto top = std::max_element(coarse_power.begin(), coarse_power.end());
  double total = 0.0;
  for (double v : samples) total += std::abs(v);
  if (!(*top > 1e-28 * (1.0 + total * total))) return std::nullopt;
  const double centre = coarse[static_cast<std::size_t>(top - coarse_power.begin())];
  const double step = bin / 16.0;
  std::vector<double> omegas;
  for (int k = -32; k <= 32; ++k) {
    const double w = centre + k * step;
    if (w >= omega_lo && w <= omega_hi) omegas.push_back(w);
  }
  const std::vector<double> power = periodogram(samples, dt, omegas);
  const auto best = std::max_element(power.begin(), power.end());
  const std::size_t i = static_cast<std::size_t>(best - power.begin());
  // A maximum on the band edge is not a peak.
  if (i == 0 || i + 1 == power.size()) return std::nullopt;
  const double a = power[i - 1], b = power[i], c = power[i + 1];
  const double denom = a - 2.0 * b + c;
  const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  return omegas[i] + std::clamp(shift, -0.5, 0.5) * step;
}

std::vector<PeriodCandidate> estimate_period(const Trajectory& traj, double min_period,
                                             std::size_t max_candidates) {
  std::vector<PeriodCandidate> out;
  const auto& times = traj.times();
  const auto& states = traj.states();
  if (times.size() < 8) return out;

  // Uniformly spaced prefix (adaptive runs end on tau_end, which may be off-grid).
  const double dt = times[1] - times[0];
  std::size_t n = 1;
  while (n < times.size() &&
         std::abs((times[n] - times[0]) - static_cast<double>(n) * dt) <= 1e-6 * dt)
    ++n;
  if (n < 8) return out;

  std::vector<double> mx(n);
  for (std::size_t i = 0; i < n; ++i) mx[i] = states[i].mx;
  const auto [lo_it, hi_it] = std::minmax_element(mx.begin(), mx.end());
  double mean = 0.0;
  for (double v : mx) mean += v;
  mean /= static_cast<double>(n);
  if (*hi_it - *lo_it <= 1e-14 * (1.0 + std::abs(mean))) return out;

  if (min_period <= 0.0) min_period = 4.0 * zitter_period(states.front().x);
  const double length = times[n - 1] - times[0];
  const double max_period = length / 4.0;

  // Recurrence function over the uniform samples.
  std::vector<double> rec(n);
  for (std::size_t i = 0; i < n; ++i) rec[i] = distance(states[i], states[0]);
  std::vector<double> tail;
  for (std::size_t i = 0; i < n; ++i)
    if (times[i] - times[0] >= min_period) tail.push_back(rec[i]);
  if (tail.empty()) return out;
  std::nth_element(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2), tail.end());
  const double noise_floor = tail[tail.size() / 2];

  auto score_near = [&](double period) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double t = times[i] - times[0];
      if (std::abs(t - period) <= 0.01 * period) best = std::min(best, rec[i]);
    }
    return best;
  };

  std::vector<PeriodCandidate> raw;

  // (a) spectral: dominant fast line first, then the low band below half of it.
  const double nyquist = std::numbers::pi / dt;
  const double band_top = std::min(25.0, 0.9 * nyquist);
  const auto fast = dominant_frequency(mx, dt, 0.5, band_top);
  double low_hi = fast ? 0.5 * *fast : 1.0;
  low_hi = std::min(low_hi, 2.0 * std::numbers::pi / min_period);
  const double low_lo = 2.0 * std::numbers::pi / max_period;
  if (low_hi > low_lo) {
    std::vector<double> envelope(n);
    for (std::size_t i = 0; i < n; ++i) envelope[i] = (mx[i] - mean) * (mx[i] - mean);
    for (const auto& signal : {mx, envelope}) {
      if (const auto w = dominant_frequency(signal, dt, low_lo, low_hi)) {
        const double period = 2.0 * std::numbers::pi / *w;
        raw.push_back({period, score_near(period)});
      }
    }
  }

  // (b) local minima of the recurrence function, best first, 2% apart.
  std::vector<std::size_t> minima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double t = times[i] - times[0];
    if (t < min_period || t > max_period) continue;
    if (rec[i] < rec[i - 1] && rec[i] <= rec[i + 1]) minima.push_back(i);
  }
  std::stable_sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return rec[a] < rec[b]; });
  std::vector<double> picked;
  for (std::size_t i : minima) {
    const double t = times[i] - times[0];
    const bool close = std::any_of(picked.begin(), picked.end(),
                                   [&](double p) { return std::abs(p - t) <= 0.02 * p; });
    if (close) continue;
    picked.push_back(t);
    raw.push_back({t, rec[i]});
    if (picked.size() >= max_candidates) break;
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [](const PeriodCandidate& a, const PeriodCandidate& b) { return a.score < b.score; });
  for (const auto& c : raw) {
    if (!(c.score < noise_floor)) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const PeriodCandidate& k) {
      return std::abs(k.period - c.period) <= 0.01 * k.period;
    });
    if (!dup) out.push_back(c);
    if (out.size() >= max_candidates) break;
  }
  return out;
}

void classify(OrbitCandidate& cand, const ClassifyConfig& cfg) {
  if (cand.degenerate) {
    cand.classification = Classification::periodic;
    return;
  }
  if (cand.hit_boundary) {
    cand.classification = Classification::undetermined;
    return;
  }
  if (cand.residual <= cfg.periodic_threshold && cand.horizon_residual <= cfg.periodic_threshold) {
    cand.classification = Classification::periodic;
    return;
  }
  if (cand.lambda_max && *cand.lambda_max > cfg.chaos_lambda) {
    cand.classification = Classification::chaotic;
    return;
  }
  if (cand.lambda_max && cand.residual <= cfg.quasiperiodic_threshold) {
    cand.classification = Classification::quasiperiodic;
    return;
  }
  cand.classification = Classification::undetermined;
}

OrbitCandidate evaluate_candidate(const StateVector& init, double period, const OrbitSearchConfig& cfg) {
  if (!(period > 0.0)) throw DomainError("evaluate_candidate: period must be positive");
  OrbitCandidate cand;
  cand.init = init;
  cand.period = period;
  if (is_equilibrium(init)) {
    cand.degenerate = true;
    classify(cand, cfg.classify);
    return cand;
  }
  IntegratorConfig icfg = tightened(cfg.integrator);
  cand.residual = recurrence_residual(init, period, icfg);
  const int k_max = std::max(1, cfg.classify.horizon_periods);
  icfg.sample_dt = period;
  const Trajectory traj = integrate_adaptive(init, k_max * period, icfg);
  cand.horizon_residual = cand.residual;
  for (int k = 2; k <= k_max; ++k)
    cand.horizon_residual = std::max(cand.horizon_residual, distance(traj.at(k * period), init));

  const bool periodic = cand.residual <= cfg.classify.periodic_threshold &&
                        cand.horizon_residual <= cfg.classify.periodic_threshold;
  if (!periodic && cfg.classify.compute_lyapunov) {
    try {
      cand.lambda_max = lyapunov_max(init, cfg.classify.lyapunov_tau, cfg.classify.lyapunov).lambda_max;
    } catch (const IntegrationError&) {
      cand.lambda_max.reset();
    }
  }
  classify(cand, cfg.classify);
  return cand;
}

namespace {

struct LineMin {
  double arg;
  double value;
};

// Coarse grid followed by golden-section refinement around the best grid point.
template <class F>
LineMin line_search(F&& f, double lo, double hi, int grid, double tol) {
  grid = std::max(grid, 3);
  std::vector<double> xs(static_cast<std::size_t>(grid));
  std::vector<double> fs(xs.size());
  for (int i = 0; i < grid; ++i) {
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (grid - 1);
    fs[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);
  }
  const std::size_t best = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  double a = xs[best == 0 ? 0 : best - 1];
  double b = xs[std::min(best + 1, xs.size() - 1)];
  LineMin result{xs[best], fs[best]};
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc < result.value) result = {c, fc};
  if (fd < result.value) result = {d, fd};
  return result;
}

}  // namespace

OrbitCandidate refine_orbit(const StateVector& init, double period_guess, const OrbitSearchConfig& cfg) {
  if (!(period_guess > 0.0)) throw DomainError("refine_orbit: period guess must be positive");
  require_finite(init, "refine_orbit");
  if (is_equilibrium(init)) return evaluate_candidate(init, period_guess, cfg);

  const IntegratorConfig icfg = tightened(cfg.integrator);
  const double t_lo = period_guess * (1.0 - cfg.t_box);
  const double t_hi = period_guess * (1.0 + cfg.t_box);
  const double x_lo = init.x - cfg.x0_box;
  const double x_hi = init.x + cfg.x0_box;

  StateVector start = init;
  double period = period_guess;
  double best = std::numeric_limits<double>::infinity();

  auto search_period = [&](const StateVector& s) {
    IntegratorConfig dense = icfg;
    dense.sample_dt = t_hi;
    const Trajectory traj = integrate_adaptive(s, t_hi, dense);
    return line_search([&](double t) { return distance(traj.at(t), s); }, t_lo, t_hi, cfg.line_grid,
                       1e-10 * period_guess);
  };

  for (int sweep = 0; sweep < std::max(1, cfg.max_sweeps); ++sweep) {
    const double prev_best = best;
    const double prev_x = start.x;
    const double prev_t = period;

    const LineMin tmin = search_period(start);
    period = tmin.arg;
    best = tmin.value;

    if (cfg.x0_box > 0.0) {
      const LineMin xmin = line_search(
          [&](double x) {
            StateVector s = start;
            s.x = x;
            return distance(propagate(s, period, icfg), s);
          },
          x_lo, x_hi, cfg.line_grid, 1e-12);
      if (xmin.value <= best) {
        start.x = xmin.arg;
        best = xmin.value;
      }
    }
    if (std::abs(start.x - prev_x) < 1e-12 && std::abs(period - prev_t) < 1e-10 * period_guess) break;
    if (prev_best - best < 1e-3 * prev_best && sweep > 0) break;
  }

  OrbitCandidate cand = evaluate_candidate(start, period, cfg);
  const double t_edge = 1e-3 * (t_hi - t_lo);
  const double x_edge = 1e-3 * (x_hi - x_lo);
  cand.hit_boundary = period - t_lo < t_edge || t_hi - period < t_edge ||
                      (cfg.x0_box > 0.0 && (start.x - x_lo < x_edge || x_hi - start.x < x_edge));
  classify(cand, cfg.classify);
  return cand;
}

ScanResult scan_time_crystals(const SearchWindow& win, const OrbitSearchConfig& cfg) {
  win.validate();
  const int n = win.x0_min == win.x0_max ? 1 : win.grid_n;
  struct Slot {
    std::optional<OrbitCandidate> cand;
    std::optional<std::string> failure;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(n));

  auto work = [&](int i) {
    const double x0 = n == 1 ? win.x0_min : win.x0_min + (win.x0_max - win.x0_min) * i / (n - 1);
    StateVector init = win.base;
    init.x = x0;
    Slot& slot = slots[static_cast<std::size_t>(i)];
    try {
      IntegratorConfig icfg = tightened(cfg.integrator);
      if (is_equilibrium(init)) {
        slot.cand = evaluate_candidate(init, win.tau_horizon / 4.0, cfg);
        return;
      }
      const Trajectory traj = integrate_adaptive(init, win.tau_horizon, icfg);
      const auto periods = estimate_period(traj, cfg.min_period, cfg.max_candidates);
      if (periods.empty()) {
        slot.failure = "no period candidate";
        return;
      }
      slot.cand = refine_orbit(init, periods.front().period, cfg);
    } catch (const std::exception& e) {
      slot.failure = e.what();
    }
  };

  unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) work(i);
      });
  }

  ScanResult result;
  for (int i = 0; i < n; ++i) {
    const Slot& slot = slots[static_cast<std::size_t>(i)];
    const double x0 = n == 1 ? win.x0_min : win.x0_min + (win.x0_max - win.x0_min) * i / (n - 1);
    if (slot.cand) result.candidates.push_back(*slot.cand);
    if (slot.failure) result.failures.emplace_back(x0, *slot.failure);
  }
  std::stable_sort(result.candidates.begin(), result.candidates.end(),
                   [](const OrbitCandidate& a, const OrbitCandidate& b) { return a.residual < b.residual; });
  return result;
}

UnitCell unit_cell(const StateVector& init, double period, int copies, int points,
                   const IntegratorConfig& cfg) {
  if (!(period > 0.0)) throw DomainError("unit_cell: period must be positive");
  if (copies < 1 || points < 2) throw DomainError("unit_cell: need at least one copy and two points");
  IntegratorConfig dense = cfg;
  dense.method = Method::adaptive_rk;
  dense.sample_dt = period;
  const Trajectory traj = integrate_adaptive(init, copies * period, dense);
  UnitCell cell;
  cell.tau.resize(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) cell.tau[static_cast<std::size_t>(i)] = period * i / (points - 1);
  cell.traces.assign(static_cast<std::size_t>(copies), std::vector<double>(cell.tau.size()));
  for (int k = 0; k < copies; ++k)
    for (std::size_t i = 0; i < cell.tau.size(); ++i)
      cell.traces[static_cast<std::size_t>(k)][i] = traj.at(cell.tau[i] + k * period).mx;
  for (int k = 0; k < copies; ++k)
    for (int l = k + 1; l < copies; ++l)
      for (std::size_t i = 0; i < cell.tau.size(); ++i)
        cell.overlap = std::max(cell.overlap, std::abs(cell.traces[static_cast<std::size_t>(k)][i] -
                                                       cell.traces[static_cast<std::size_t>(l)][i]));
  return cell;
}

}  // namespace paircrystal
