#include "paircrystal/chaos.hpp"

#include <cmath>

#include "paircrystal/errors.hpp"

namespace paircrystal {

PoincareSection poincare_section(const Trajectory& traj, CrossingFilter filter) {
  PoincareSection out;
  out.filter = filter;
  const EventSearch found = locate_events(traj, field_value);
  out.degenerate = found.degenerate;
  for (const Event& ev : found.events) {
    if (filter == CrossingFilter::upward && ev.direction < 0) continue;
    if (filter == CrossingFilter::downward && ev.direction > 0) continue;
    out.points.emplace_back(ev.state.mx, ev.state.my);
    out.crossing_times.push_back(ev.tau);
    out.directions.push_back(ev.direction);
  }
  return out;
}

PoincareSection poincare_section(const StateVector& init, double tau_end, CrossingFilter filter,
                                 const IntegratorConfig& cfg) {
  return poincare_section(integrate(init, tau_end, cfg), filter);
}

std::vector<std::size_t> epsilon_distinct_count(const PoincareSection& section, double eps) {
  if (!(eps > 0.0)) throw DomainError("epsilon_distinct_count: eps must be positive");
  std::vector<std::pair<double, double>> reps;
  std::vector<std::size_t> history;
  history.reserve(section.size());
  for (const auto& [mx, my] : section.points) {
    bool fresh = true;
    for (const auto& [rx, ry] : reps) {
      if (std::hypot(mx - rx, my - ry) < eps) {
        fresh = false;
        break;
      }
    }
    if (fresh) reps.emplace_back(mx, my);
    history.push_back(reps.size());
  }
  return history;
}

bool count_plateaued(const std::vector<std::size_t>& history) {
  if (history.empty()) return false;
  return history.back() == history[history.size() / 2];
}

LyapunovEstimate lyapunov_max(const StateVector& init, double tau_total, const LyapunovConfig& cfg) {
  require_finite(init, "lyapunov_max");
  if (!(cfg.renorm_dtau > 0.0) || !(cfg.delta0 > 0.0))
    throw DomainError("lyapunov_max: renormalisation interval and delta0 must be positive");
  if (tau_total < 100.0 * cfg.renorm_dtau * (1.0 - 1e-12))
    throw DomainError("lyapunov_max: tau_total must cover at least 100 renormalisations");

  double dnorm = 0.0;
  for (double v : cfg.direction) dnorm += v * v;
  dnorm = std::sqrt(dnorm);
  if (!(dnorm > 0.0)) throw DomainError("lyapunov_max: zero perturbation direction");

  Vec5 a = init.to_array();
  Vec5 b = a;
  for (std::size_t i = 0; i < 5; ++i) b[i] += cfg.delta0 * cfg.direction[i] / dnorm;

  const long n = std::lround(tau_total / cfg.renorm_dtau);
  LyapunovEstimate est;
  est.renorm_interval = cfg.renorm_dtau;
  est.history.reserve(static_cast<std::size_t>(n));
  double log_sum = 0.0;
  for (long k = 1; k <= n; ++k) {
    a = propagate(StateVector::from_array(a), cfg.renorm_dtau, cfg.integrator).to_array();
    b = propagate(StateVector::from_array(b), cfg.renorm_dtau, cfg.integrator).to_array();
    double d = 0.0;
    for (std::size_t i = 0; i < 5; ++i) d += (b[i] - a[i]) * (b[i] - a[i]);
    d = std::sqrt(d);
    if (!(d > 0.0)) {
      // Trajectories merged to rounding; restart the separation along the configured direction.
      for (std::size_t i = 0; i < 5; ++i) b[i] = a[i] + cfg.delta0 * cfg.direction[i] / dnorm;
      d = cfg.delta0;
    } else {
      for (std::size_t i = 0; i < 5; ++i) b[i] = a[i] + (b[i] - a[i]) * cfg.delta0 / d;
    }
    log_sum += std::log(d / cfg.delta0);
    const double tau = static_cast<double>(k) * cfg.renorm_dtau;
    est.history.emplace_back(tau, log_sum / tau);
  }
  est.lambda_max = est.history.empty() ? 0.0 : est.history.back().second;
  return est;
}

}  // namespace paircrystal
