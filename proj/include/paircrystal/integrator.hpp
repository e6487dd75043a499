#pragma once

#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "paircrystal/ode.hpp"
#include "paircrystal/state.hpp"

namespace paircrystal {

enum class Method { adaptive_rk, strang_split };

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  Method method = Method::adaptive_rk;
  double fixed_dt = 1e-3;
  /// Output sampling interval; resolves the Zitterbewegung period pi with 100 points.
  double sample_dt = std::numbers::pi / 100.0;
  /// Adaptive step budget; exhausting it raises IntegrationError.
  long max_steps = 20'000'000;

  /// Throws DomainError when a tolerance or step is not positive.
  void validate() const;
};

struct TrajectoryStats {
  long steps = 0;
  long rejected = 0;
  long evaluations = 0;
  double max_hamiltonian_drift = 0.0;  ///< max |H(tau) - H(0)| over samples
  double max_casimir_drift = 0.0;      ///< max |M^2(tau) - M^2(0)| over samples
};

using Segment = ode::DenseSegment<5>;

/// Sampled solution of the equations of motion plus the per-step
/// interpolants that make it continuous. Immutable once built.
class Trajectory {
 public:
  Trajectory() = default;

  /// Validates: times strictly increasing, equal lengths, finite states,
  /// segments contiguous and covering [times.front(), times.back()].
  Trajectory(std::vector<double> times, std::vector<StateVector> states,
             std::vector<Segment> segments, TrajectoryStats stats = {});

  /// Sample-only trajectory without dense output (e.g. externally supplied data).
  static Trajectory from_samples(std::vector<double> times, std::vector<StateVector> states);

  const std::vector<double>& times() const { return times_; }
  const std::vector<StateVector>& states() const { return states_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const TrajectoryStats& stats() const { return stats_; }

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  bool has_dense() const { return !segments_.empty(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const StateVector& front() const { return states_.front(); }
  const StateVector& back() const { return states_.back(); }

  /// State at arbitrary tau in [t_begin, t_end] from the dense interpolant.
  /// Throws std::logic_error without dense output, DomainError out of range.
  StateVector at(double tau) const;

 private:
  std::vector<double> times_;
  std::vector<StateVector> states_;
  std::vector<Segment> segments_;
  TrajectoryStats stats_;
};

/// Dormand-Prince 5(4) integration of the model on [0, tau_end].
/// Throws IntegrationError (with the failure time) on step-size underflow.
Trajectory integrate_adaptive(const StateVector& s0, double tau_end, const IntegratorConfig& cfg);

/// Casimir-preserving Strang splitting with step fixed_dt (shrunk so that an
/// integer number of steps lands on tau_end). Samples are the step states
/// closest to every sample_dt, plus the final state.
Trajectory integrate_splitting(const StateVector& s0, double tau_end, const IntegratorConfig& cfg);

/// Dispatches on cfg.method.
Trajectory integrate(const StateVector& s0, double tau_end, const IntegratorConfig& cfg);

/// One splitting step: (X,P) half step, exact rotation of M about
/// Omega = (2, 2X, 0) by |Omega| dt, (X,P) half step.
StateVector splitting_step(const StateVector& s, double dt);

/// Final state only, without storing a trajectory.
StateVector propagate(const StateVector& s0, double tau_end, const IntegratorConfig& cfg);

using EventFunction = std::function<double(const StateVector&)>;

/// Scalar event function for the electric-field surface P = 0.
inline double field_value(const StateVector& s) { return s.p; }

struct Event {
  double tau = 0.0;
  StateVector state;
  int direction = 0;     ///< +1 upward (g increasing), -1 downward
  bool tangent = false;  ///< |dg/dtau| < 1e-8 at the root
};

struct EventSearch {
  std::vector<Event> events;
  bool degenerate = false;  ///< event function identically zero on the trajectory
};

/// Finds sign changes of event(state) between consecutive step boundaries and
/// refines each by bisection on the dense interpolant to 1e-12 in tau.
EventSearch locate_events(const Trajectory& traj, const EventFunction& event);

}  // namespace paircrystal
