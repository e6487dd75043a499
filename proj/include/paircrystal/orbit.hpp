#pragma once

#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paircrystal/chaos.hpp"
#include "paircrystal/integrator.hpp"

namespace paircrystal {

enum class Classification { periodic, quasiperiodic, chaotic, undetermined };

const char* to_string(Classification c);

/// Initial data from which every time-crystal figure starts; only X(0) varies.
inline StateVector reference_initial_state(double x0) { return {0.009, -0.027, 0.0, x0, 0.006}; }

/// Fast period of the pair-field phase, pi / sqrt(1 + X^2).
double zitter_period(double x);

struct OrbitCandidate {
  StateVector init;
  double period = 0.0;
  double residual = 0.0;           ///< |z(T) - z(0)|
  double horizon_residual = 0.0;   ///< max_k |z(kT) - z(0)| for k up to the classification horizon
  std::optional<double> lambda_max;
  Classification classification = Classification::undetermined;
  bool degenerate = false;         ///< equilibrium, trivially periodic
  bool hit_boundary = false;       ///< refinement stopped on the search box
};

struct ClassifyConfig {
  double periodic_threshold = 1e-3;
  double quasiperiodic_threshold = 1e-1;
  double chaos_lambda = 0.01;
  int horizon_periods = 8;
  bool compute_lyapunov = true;
  double lyapunov_tau = 4000.0;
  LyapunovConfig lyapunov{};
};

struct SearchWindow {
  double x0_min = -0.06;
  double x0_max = -0.03;
  int grid_n = 61;
  StateVector base = reference_initial_state(0.0);  ///< X is overwritten per grid point
  double tau_horizon = 200.0 * std::numbers::pi;

  void validate() const;
};

struct OrbitSearchConfig {
  IntegratorConfig integrator{1e-12, 1e-14};
  double t_box = 0.02;     ///< relative half-width of the period search box
  double x0_box = 0.01;    ///< absolute half-width of the X(0) search box
  int line_grid = 21;      ///< coarse grid points per line search
  int max_sweeps = 6;
  double min_period = 0.0; ///< 0 selects four Zitterbewegung periods
  std::size_t max_candidates = 8;
  ClassifyConfig classify{};
  unsigned threads = 0;    ///< 0 uses the hardware concurrency
};

/// |z(T) - z(0)| over all five components, integrated at tolerance <= 1e-10.
double recurrence_residual(const StateVector& init, double period, const IntegratorConfig& cfg = {});

struct PeriodCandidate {
  double period = 0.0;
  double score = 0.0;  ///< recurrence distance near the period; lower is better
};

/// Period candidates from the spectrum of Mx (raw and squared, for the
/// modulation envelope) and from the minima of the sampled recurrence
/// function, merged within 1% and sorted by score. Empty when the signal is
/// constant or no dip beats the median recurrence distance.
std::vector<PeriodCandidate> estimate_period(const Trajectory& traj, double min_period = 0.0,
                                             std::size_t max_candidates = 8);

/// Periodogram of a uniformly sampled signal after mean removal and a Hann
/// window, on the angular frequencies given.
std::vector<double> periodogram(std::span<const double> samples, double dt,
                                std::span<const double> omegas);

/// Frequency (rad per unit tau) of the highest periodogram peak in
/// [omega_lo, omega_hi], refined by parabolic interpolation. nullopt for a
/// constant signal.
std::optional<double> dominant_frequency(std::span<const double> samples, double dt, double omega_lo,
                                         double omega_hi);

/// Assigns the classification from residuals (and Lyapunov exponent when
/// the orbit is not periodic).
void classify(OrbitCandidate& cand, const ClassifyConfig& cfg);

/// Fills residual/horizon_residual/lambda for (init, period) and classifies.
OrbitCandidate evaluate_candidate(const StateVector& init, double period,
                                  const OrbitSearchConfig& cfg);

/// Coordinate descent with golden-section line searches on (X(0), T) inside
/// T_guess (1 +- t_box) and X(0) +- x0_box.
OrbitCandidate refine_orbit(const StateVector& init, double period_guess,
                            const OrbitSearchConfig& cfg = {});

struct ScanResult {
  std::vector<OrbitCandidate> candidates;  ///< sorted by residual
  std::vector<std::pair<double, std::string>> failures;  ///< grid X(0) and message
};

/// Grid scan over X(0): integrate, estimate periods, refine the best
/// candidate. Grid points run concurrently; output order is deterministic.
ScanResult scan_time_crystals(const SearchWindow& win, const OrbitSearchConfig& cfg = {});

/// Max pairwise sup-distance among Mx(tau + kT), k = 0..copies-1, over one
/// cell tau in [0, T], from a dense trajectory sampled with n points per cell.
struct UnitCell {
  std::vector<double> tau;
  std::vector<std::vector<double>> traces;
  double overlap = 0.0;
};

UnitCell unit_cell(const StateVector& init, double period, int copies = 4, int points = 2000,
                   const IntegratorConfig& cfg = {1e-12, 1e-14});

}  // namespace paircrystal
