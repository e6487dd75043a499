#include "paircrystal/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "paircrystal/errors.hpp"
#include "paircrystal/ode.hpp"

namespace paircrystal::quantum {

namespace {

using Segment4 = ode::DenseSegment<4>;

// States beyond this magnitude are treated as an escape: the growing channel
// has long since dominated and continuing only risks overflow.
constexpr double kEscape = 1e200;

ode::AdaptiveOptions options(const ShootingProblem& prob) {
  ode::AdaptiveOptions opt;
  opt.rel_tol = prob.rel_tol;
  opt.abs_tol = prob.abs_tol;
  return opt;
}

struct Run {
  Vec4 end{};
  double y_end = 0.0;
  bool escaped = false;
  std::vector<Segment4> segments;
};

// Integrates from y = 0 to `target` (either sign). Stops early on escape.
Run run(const ShootingProblem& prob, const Vec4& u0, double target, bool keep_segments) {
  Run r;
  r.end = u0;
  auto rhs = [&](double y, const Vec4& u) { return coupled_rhs(y, u, prob.energy, prob.coupling); };
  try {
    ode::integrate_dopri5<4>(rhs, 0.0, u0, target, options(prob), [&](const Segment4& seg, const Vec4& u) {
      if (keep_segments) r.segments.push_back(seg);
      double mag = 0.0;
      for (double v : u) mag = std::max(mag, std::abs(v));
      if (!(mag < kEscape)) {
        r.escaped = true;
        return false;
      }
      r.end = u;
      r.y_end = seg.t1();
      return true;
    });
  } catch (const IntegrationError& e) {
    // Non-finite state: the last finite state carries the escape sign.
    r.escaped = true;
  }
  return r;
}

double saturate(double defect, double cap) {
  if (!std::isfinite(defect)) return std::signbit(defect) ? -cap : cap;
  return std::clamp(defect, -cap, cap);
}

double sign_or_one(double v) { return v < 0.0 ? -1.0 : 1.0; }

double plus_defect(const ShootingProblem& prob, const Run& r) {
  if (r.escaped) return sign_or_one(r.end[0]) * prob.defect_cap;
  return saturate(growing_component(r.y_end, r.end[0], r.end[1], prob.energy / kCbrt2),
                  prob.defect_cap);
}

double minus_defect(const ShootingProblem& prob, const Run& r) {
  if (r.escaped) return sign_or_one(r.end[2]) * prob.defect_cap;
  // u = -y: d phi2 / du = -d phi2 / dy.
  return saturate(growing_component(-r.y_end, r.end[2], -r.end[3], prob.energy / kCbrt2),
                  prob.defect_cap);
}

}  // namespace

Vec4 coupled_rhs(double y, const Vec4& u, double energy, double coupling) {
  const double shift = energy / kCbrt2;
  return {u[1], (y - shift) * u[0] + coupling * u[2], u[3], (-y - shift) * u[2] + coupling * u[0]};
}

Spinor to_psi(std::complex<double> phi1, std::complex<double> phi2) {
  using namespace std::complex_literals;
  const double r = 1.0 / std::numbers::sqrt2;
  return {(phi1 + 1i * phi2) * r, (phi2 + 1i * phi1) * r};
}

std::array<std::complex<double>, 2> to_phi(const Spinor& s) {
  using namespace std::complex_literals;
  const double r = 1.0 / std::numbers::sqrt2;
  return {(s.psi1 - 1i * s.psi2) * r, (s.psi2 - 1i * s.psi1) * r};
}

const char* to_string(Slot s) {
  switch (s) {
    case Slot::phi1: return "phi1";
    case Slot::dphi1: return "dphi1";
    case Slot::phi2: return "phi2";
    case Slot::dphi2: return "dphi2";
  }
  return "unknown";
}

ShootingProblem ShootingProblem::first_kind(double energy) {
  ShootingProblem p;
  p.energy = energy;
  p.initial = {1.0, 0.0, 0.0, 0.0};
  p.free_slot = Slot::dphi2;
  p.bracket_lo = -1.0;
  p.bracket_hi = 0.0;
  return p;
}

ShootingProblem ShootingProblem::second_kind(double energy) {
  ShootingProblem p;
  p.energy = energy;
  p.initial = {0.0, 0.0, 1.0, 0.0};
  p.free_slot = Slot::dphi1;
  p.bracket_lo = -1.0;
  p.bracket_hi = 0.0;
  return p;
}

void ShootingProblem::validate() const {
  if (!std::isfinite(energy)) throw DomainError("shooting: energy must be finite");
  for (double v : initial)
    if (!std::isfinite(v)) throw DomainError("shooting: initial values must be finite");
  if (static_cast<std::size_t>(free_slot) > 3) throw DomainError("shooting: invalid free slot");
  if (!(y_max > 0.0) || !std::isfinite(y_max)) throw DomainError("shooting: y_max must be positive");
  if (!std::isfinite(bracket_lo) || !std::isfinite(bracket_hi) || !(bracket_lo < bracket_hi))
    throw DomainError("shooting: bracket must satisfy lo < hi");
  if (!std::isfinite(coupling)) throw DomainError("shooting: coupling must be finite");
  if (!(defect_cap > 0.0)) throw DomainError("shooting: defect_cap must be positive");
  if (!(tolerance > 0.0)) throw DomainError("shooting: tolerance must be positive");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("shooting: tolerances must be positive");
}

Vec4 ShootingProblem::initial_with(double free_value) const {
  Vec4 u = initial;
  u[static_cast<std::size_t>(free_slot)] = free_value;
  return u;
}

double growing_component(double u, double phi, double dphi_du, double shift) {
  const double q = u - shift;
  if (!(q > 0.0)) return phi;  // not in the classically forbidden region; fall back to the value
  const double kappa = std::sqrt(q);
  // Growing WKB mode: phi ~ q^(-1/4) exp(+S), phi'/phi = kappa - kappa'/(2 kappa),
  // kappa' = 1/(2 kappa). The projection removes the decaying mode exactly at leading order.
  const double dkappa = 0.5 / kappa;
  return 0.5 * (phi + (dphi_du + dkappa / (2.0 * kappa) * phi) / kappa);
}

double shoot(const ShootingProblem& prob, double free_value) {
  prob.validate();
  if (!std::isfinite(free_value)) throw DomainError("shoot: free value must be finite");
  return plus_defect(prob, run(prob, prob.initial_with(free_value), prob.y_max, false));
}

double shoot_negative(const ShootingProblem& prob, double free_value) {
  prob.validate();
  if (!std::isfinite(free_value)) throw DomainError("shoot: free value must be finite");
  return minus_defect(prob, run(prob, prob.initial_with(free_value), -prob.y_max, false));
}

EigenSolution integrate_solution(const ShootingProblem& prob, double free_value, double grid_step) {
  prob.validate();
  if (!(grid_step > 0.0) || grid_step > prob.y_max) throw DomainError("quantum: invalid grid step");
  const Vec4 u0 = prob.initial_with(free_value);
  const Run pos = run(prob, u0, prob.y_max, true);
  const Run neg = run(prob, u0, -prob.y_max, true);
  if (pos.escaped || neg.escaped)
    throw IntegrationError("quantum: solution overflowed before the truncation radius",
                           pos.escaped ? pos.y_end : neg.y_end);

  const long n = std::max(1L, std::lround(prob.y_max / grid_step));
  const double h = prob.y_max / static_cast<double>(n);

  EigenSolution sol;
  sol.energy = prob.energy;
  sol.free_slot = prob.free_slot;
  sol.solved_free_value = free_value;
  sol.initial = u0;
  sol.y_max = prob.y_max;
  sol.coupling = prob.coupling;
  sol.grid.resize(static_cast<std::size_t>(2 * n + 1));
  sol.phi1.resize(sol.grid.size());
  sol.phi2.resize(sol.grid.size());

  auto fill = [&](const Run& r, int sign) {
    std::size_t seg = 0;
    for (long k = 1; k <= n; ++k) {
      const std::size_t idx = static_cast<std::size_t>(n + sign * k);
      const double y = sign * (k == n ? prob.y_max : static_cast<double>(k) * h);
      Vec4 u;
      if (k == n) {
        u = r.end;
      } else {
        while (seg + 1 < r.segments.size() && !r.segments[seg].contains(y)) ++seg;
        u = r.segments[seg](y);
      }
      sol.grid[idx] = y;
      sol.phi1[idx] = u[0];
      sol.phi2[idx] = u[2];
    }
  };
  sol.grid[static_cast<std::size_t>(n)] = 0.0;
  sol.phi1[static_cast<std::size_t>(n)] = u0[0];
  sol.phi2[static_cast<std::size_t>(n)] = u0[2];
  fill(pos, +1);
  fill(neg, -1);

  sol.defect_plus = plus_defect(prob, pos);
  sol.defect_minus = minus_defect(prob, neg);
  return sol;
}

EigenSolution find_regular_derivative(const ShootingProblem& prob, double grid_step) {
  prob.validate();
  double lo = prob.bracket_lo;
  double hi = prob.bracket_hi;
  double d_lo = shoot(prob, lo);
  const double d_hi = shoot(prob, hi);
  std::vector<double> widths;

  double root;
  if (d_lo == 0.0) {
    root = lo;
  } else if (d_hi == 0.0) {
    root = hi;
  } else {
    if ((d_lo > 0.0) == (d_hi > 0.0))
      throw BracketError("shooting: no sign change of the regularity defect in [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "] (defects " + std::to_string(d_lo) + ", " +
                             std::to_string(d_hi) + ")",
                         d_lo, d_hi);
    widths.push_back(hi - lo);
    while (hi - lo > prob.tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double d_mid = shoot(prob, mid);
      if (d_mid == 0.0) {
        lo = hi = mid;
      } else if ((d_mid > 0.0) == (d_lo > 0.0)) {
        lo = mid;
        d_lo = d_mid;
      } else {
        hi = mid;
      }
      widths.push_back(hi - lo);
    }
    root = 0.5 * (lo + hi);
  }

  EigenSolution sol = integrate_solution(prob, root, grid_step);
  sol.bracket_widths = std::move(widths);
  return sol;
}

EigenSolution mirror_solution(const EigenSolution& sol) {
  EigenSolution m = sol;
  const std::size_t n = sol.grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    m.grid[i] = sol.grid[i];
    m.phi1[i] = sol.phi2[n - 1 - i];
    m.phi2[i] = sol.phi1[n - 1 - i];
  }
  const Vec4& u = sol.initial;
  m.initial = {u[2], -u[3], u[0], -u[1]};
  switch (sol.free_slot) {
    case Slot::phi1: m.free_slot = Slot::phi2; break;
    case Slot::dphi1: m.free_slot = Slot::dphi2; break;
    case Slot::phi2: m.free_slot = Slot::phi1; break;
    case Slot::dphi2: m.free_slot = Slot::dphi1; break;
  }
  m.solved_free_value = m.initial[static_cast<std::size_t>(m.free_slot)];
  m.defect_plus = sol.defect_minus;
  m.defect_minus = sol.defect_plus;
  m.bracket_widths.clear();
  return m;
}

ShootingProblem mirrored_problem(const ShootingProblem& prob) {
  ShootingProblem m = prob;
  const Vec4& u = prob.initial;
  m.initial = {u[2], -u[3], u[0], -u[1]};
  const bool derivative = prob.free_slot == Slot::dphi1 || prob.free_slot == Slot::dphi2;
  switch (prob.free_slot) {
    case Slot::phi1: m.free_slot = Slot::phi2; break;
    case Slot::dphi1: m.free_slot = Slot::dphi2; break;
    case Slot::phi2: m.free_slot = Slot::phi1; break;
    case Slot::dphi2: m.free_slot = Slot::dphi1; break;
  }
  if (derivative) {
    m.bracket_lo = -prob.bracket_hi;
    m.bracket_hi = -prob.bracket_lo;
  }
  return m;
}

EquationResidual equation_residual(const EigenSolution& sol, double limit) {
  static constexpr std::array<double, 5> w{-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
  EquationResidual out;
  const std::size_t n = sol.grid.size();
  if (n < 9) return out;
  const double h = sol.grid[1] - sol.grid[0];
  for (std::size_t i = 4; i + 4 < n; ++i) {
    const double y = sol.grid[i];
    if (std::abs(y) > limit) continue;
    double d1 = w[0] * sol.phi1[i];
    double d2 = w[0] * sol.phi2[i];
    for (std::size_t k = 1; k < 5; ++k) {
      d1 += w[k] * (sol.phi1[i + k] + sol.phi1[i - k]);
      d2 += w[k] * (sol.phi2[i + k] + sol.phi2[i - k]);
    }
    d1 /= h * h;
    d2 /= h * h;
    const Vec4 f = coupled_rhs(y, {sol.phi1[i], 0.0, sol.phi2[i], 0.0}, sol.energy, sol.coupling);
    const double r = std::max(std::abs(d1 - f[1]), std::abs(d2 - f[3]));
    const double scale = std::max(1.0, std::abs(sol.phi1[i]) + std::abs(sol.phi2[i]));
    out.absolute = std::max(out.absolute, r);
    out.scaled = std::max(out.scaled, r / scale);
  }
  return out;
}

}  // namespace paircrystal::quantum
