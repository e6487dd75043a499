#include "paircrystal/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "paircrystal/errors.hpp"

namespace paircrystal {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("integrator: tolerances must be positive");
  if (!(max_step > 0.0)) throw DomainError("integrator: max_step must be positive");
  if (!(sample_dt > 0.0)) throw DomainError("integrator: sample_dt must be positive");
  if (max_steps <= 0) throw DomainError("integrator: max_steps must be positive");
  if (method == Method::strang_split && !(fixed_dt > 0.0))
    throw DomainError("integrator: fixed_dt must be positive for splitting");
}

Trajectory::Trajectory(std::vector<double> times, std::vector<StateVector> states,
                       std::vector<Segment> segments, TrajectoryStats stats)
    : times_(std::move(times)),
      states_(std::move(states)),
      segments_(std::move(segments)),
      stats_(stats) {
  if (times_.size() != states_.size()) throw std::invalid_argument("trajectory: length mismatch");
  if (times_.empty()) throw std::invalid_argument("trajectory: no samples");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw std::invalid_argument("trajectory: times not increasing");
  for (const auto& s : states_) require_finite(s, "trajectory");
  for (std::size_t i = 1; i < segments_.size(); ++i)
    if (segments_[i].t0 != segments_[i - 1].t1())
      throw std::invalid_argument("trajectory: dense segments not contiguous");
}

Trajectory Trajectory::from_samples(std::vector<double> times, std::vector<StateVector> states) {
  return Trajectory(std::move(times), std::move(states), {});
}

StateVector Trajectory::at(double tau) const {
  if (segments_.empty()) throw std::logic_error("trajectory: no dense output");
  const double lo = segments_.front().t0;
  const double hi = segments_.back().t1();
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  if (tau < lo - slack || tau > hi + slack) throw DomainError("trajectory: time outside dense range");
  tau = std::clamp(tau, lo, hi);
  auto it = std::upper_bound(segments_.begin(), segments_.end(), tau,
                             [](double t, const Segment& s) { return t < s.t0; });
  if (it != segments_.begin()) --it;
  return StateVector::from_array((*it)(tau));
}

namespace {

void accumulate_drift(TrajectoryStats& stats, const StateVector& s0,
                      const std::vector<StateVector>& states) {
  const double h0 = hamiltonian(s0);
  const double c0 = casimir(s0);
  for (const auto& s : states) {
    stats.max_hamiltonian_drift = std::max(stats.max_hamiltonian_drift, std::abs(hamiltonian(s) - h0));
    stats.max_casimir_drift = std::max(stats.max_casimir_drift, std::abs(casimir(s) - c0));
  }
}

void check_run(const StateVector& s0, double tau_end, const IntegratorConfig& cfg) {
  require_finite(s0, "integrate");
  if (!(tau_end > 0.0)) throw DomainError("integrate: tau_end must be positive");
  cfg.validate();
}

ode::AdaptiveOptions adaptive_options(const IntegratorConfig& cfg) {
  ode::AdaptiveOptions opt;
  opt.rel_tol = cfg.rel_tol;
  opt.abs_tol = cfg.abs_tol;
  opt.max_step = cfg.max_step;
  opt.max_steps = cfg.max_steps;
  return opt;
}

auto model_rhs = [](double, const Vec5& z) { return vector_field_unchecked(z); };

}  // namespace

Trajectory integrate_adaptive(const StateVector& s0, double tau_end, const IntegratorConfig& cfg) {
  check_run(s0, tau_end, cfg);
  std::vector<double> times{0.0};
  std::vector<StateVector> states{s0};
  std::vector<Segment> segments;
  long next = 1;

  const auto run = ode::integrate_dopri5<5>(
      model_rhs, 0.0, s0.to_array(), tau_end, adaptive_options(cfg),
      [&](const Segment& seg, const Vec5& y) {
        segments.push_back(seg);
        const bool last = seg.t1() >= tau_end;
        for (;;) {
          const double ts = static_cast<double>(next) * cfg.sample_dt;
          // Grid points within a hair of tau_end are replaced by tau_end itself.
          if (ts >= tau_end - 1e-9 * cfg.sample_dt || ts > seg.t1()) break;
          times.push_back(ts);
          states.push_back(StateVector::from_array(seg(ts)));
          ++next;
        }
        if (last) {
          times.push_back(tau_end);
          states.push_back(StateVector::from_array(y));
        }
        return true;
      });

  TrajectoryStats stats;
  stats.steps = run.accepted;
  stats.rejected = run.rejected;
  stats.evaluations = run.evaluations;
  accumulate_drift(stats, s0, states);
  return Trajectory(std::move(times), std::move(states), std::move(segments), stats);
}

StateVector splitting_step(const StateVector& s, double dt) {
  StateVector out = s;
  const double half = 0.5 * dt;
  auto kick_drift = [&](StateVector& z) {
    // My is frozen in this sub-flow: P is linear in time and X quadratic.
    const double p_mid = z.p - z.my * half;
    z.x += p_mid * half;
    z.p -= 2.0 * z.my * half;
  };
  kick_drift(out);

  // dM/dtau = Omega x M with Omega = (2, 2X, 0); X is constant here.
  const double ox = 2.0;
  const double oy = 2.0 * out.x;
  const double norm = std::hypot(ox, oy);
  const double kx = ox / norm;
  const double ky = oy / norm;
  const double angle = norm * dt;
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  const double mx = out.mx, my = out.my, mz = out.mz;
  const double kdotm = kx * mx + ky * my;
  // k x M with k = (kx, ky, 0)
  const double cx = ky * mz;
  const double cy = -kx * mz;
  const double cz = kx * my - ky * mx;
  out.mx = mx * c + cx * sn + kx * kdotm * (1.0 - c);
  out.my = my * c + cy * sn + ky * kdotm * (1.0 - c);
  out.mz = mz * c + cz * sn;

  kick_drift(out);
  return out;
}

Trajectory integrate_splitting(const StateVector& s0, double tau_end, const IntegratorConfig& cfg) {
  IntegratorConfig checked = cfg;
  checked.method = Method::strang_split;
  check_run(s0, tau_end, checked);
  const long n = std::max(1L, static_cast<long>(std::ceil(tau_end / cfg.fixed_dt - 1e-9)));
  const double dt = tau_end / static_cast<double>(n);
  const long stride = std::max(1L, std::lround(cfg.sample_dt / dt));

  std::vector<double> times{0.0};
  std::vector<StateVector> states{s0};
  std::vector<Segment> segments;
  segments.reserve(static_cast<std::size_t>(n));

  StateVector s = s0;
  Vec5 f0 = vector_field_unchecked(s.to_array());
  for (long k = 1; k <= n; ++k) {
    const double t0 = static_cast<double>(k - 1) * dt;
    const double t1 = k == n ? tau_end : static_cast<double>(k) * dt;
    const StateVector next = splitting_step(s, dt);
    if (!next.finite()) throw IntegrationError("splitting: non-finite state", t1);
    const Vec5 f1 = vector_field_unchecked(next.to_array());
    segments.push_back(Segment::hermite(t0, t1 - t0, s.to_array(), next.to_array(), f0, f1));
    s = next;
    f0 = f1;
    if (k % stride == 0 || k == n) {
      times.push_back(t1);
      states.push_back(s);
    }
  }

  TrajectoryStats stats;
  stats.steps = n;
  stats.evaluations = n;
  accumulate_drift(stats, s0, states);
  return Trajectory(std::move(times), std::move(states), std::move(segments), stats);
}

Trajectory integrate(const StateVector& s0, double tau_end, const IntegratorConfig& cfg) {
  return cfg.method == Method::adaptive_rk ? integrate_adaptive(s0, tau_end, cfg)
                                           : integrate_splitting(s0, tau_end, cfg);
}

StateVector propagate(const StateVector& s0, double tau_end, const IntegratorConfig& cfg) {
  require_finite(s0, "propagate");
  if (tau_end == 0.0) return s0;
  if (!(tau_end > 0.0)) throw DomainError("propagate: tau_end must be non-negative");
  cfg.validate();
  if (cfg.method == Method::strang_split) {
    const long n = std::max(1L, static_cast<long>(std::ceil(tau_end / cfg.fixed_dt - 1e-9)));
    const double dt = tau_end / static_cast<double>(n);
    StateVector s = s0;
    for (long k = 0; k < n; ++k) s = splitting_step(s, dt);
    if (!s.finite()) throw IntegrationError("splitting: non-finite state", tau_end);
    return s;
  }
  Vec5 out = s0.to_array();
  ode::integrate_dopri5<5>(model_rhs, 0.0, s0.to_array(), tau_end, adaptive_options(cfg),
                           [&](const Segment&, const Vec5& y) {
                             out = y;
                             return true;
                           });
  return StateVector::from_array(out);
}

EventSearch locate_events(const Trajectory& traj, const EventFunction& event) {
  if (!traj.has_dense()) throw std::logic_error("locate_events: trajectory has no dense output");
  EventSearch result;
  const auto& segs = traj.segments();

  std::vector<double> knots;
  knots.reserve(segs.size() + 1);
  knots.push_back(segs.front().t0);
  for (const auto& s : segs) knots.push_back(s.t1());

  auto g = [&](double tau) { return event(traj.at(tau)); };

  bool any_nonzero = false;
  double last_t = 0.0;
  double last_g = 0.0;
  bool have_last = false;
  for (double t : knots) {
    const double gv = g(t);
    if (gv == 0.0) continue;
    any_nonzero = true;
    if (have_last && (gv > 0.0) != (last_g > 0.0)) {
      double a = last_t, b = t;
      double ga = last_g;
      while (b - a > 1e-12) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double gm = g(mid);
        if (gm == 0.0) {
          a = b = mid;
          break;
        }
        if ((gm > 0.0) == (ga > 0.0)) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      const double root = std::abs(g(a)) <= std::abs(g(b)) ? a : b;
      Event ev;
      ev.tau = root;
      ev.state = traj.at(root);
      ev.direction = last_g < 0.0 ? 1 : -1;
      const double step = 1e-6;
      const double lo = std::max(root - step, knots.front());
      const double hi = std::min(root + step, knots.back());
      const double slope = (g(hi) - g(lo)) / (hi - lo);
      ev.tangent = std::abs(slope) < 1e-8;
      result.events.push_back(ev);
    }
    last_t = t;
    last_g = gv;
    have_last = true;
  }
  result.degenerate = !any_nonzero;
  return result;
}

}  // namespace paircrystal
