#pragma once

#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "paircrystal/integrator.hpp"

namespace paircrystal {

enum class CrossingFilter { both, upward, downward };

/// (Mx, My) sampled at the sign changes of the electric field P.
struct PoincareSection {
  std::vector<std::pair<double, double>> points;
  std::vector<double> crossing_times;
  std::vector<int> directions;  ///< +1 where P goes from negative to positive
  CrossingFilter filter = CrossingFilter::both;
  bool degenerate = false;  ///< P vanished identically along the trajectory

  std::size_t size() const { return points.size(); }
};

PoincareSection poincare_section(const Trajectory& traj, CrossingFilter filter = CrossingFilter::both);

PoincareSection poincare_section(const StateVector& init, double tau_end,
                                 CrossingFilter filter = CrossingFilter::both,
                                 const IntegratorConfig& cfg = {});

/// For each prefix of the section, the number of greedy epsilon-separated
/// representatives (Euclidean in the (Mx, My) plane, insertion order).
std::vector<std::size_t> epsilon_distinct_count(const PoincareSection& section, double eps);

/// True when the count history is flat over its second half (and non-empty).
bool count_plateaued(const std::vector<std::size_t>& history);

struct LyapunovConfig {
  double renorm_dtau = std::numbers::pi / 2.0;
  double delta0 = 1e-8;
  /// Direction of the initial separation; normalised internally.
  Vec5 direction{1.0, 1.0, 1.0, 1.0, 1.0};
  IntegratorConfig integrator{1e-12, 1e-15};
};

struct LyapunovEstimate {
  double lambda_max = 0.0;
  std::vector<std::pair<double, double>> history;  ///< (tau, running estimate)
  double renorm_interval = 0.0;
};

/// Two-trajectory Benettin estimate of the largest Lyapunov exponent:
/// the separation is rescaled to delta0 every renorm_dtau and the log growth
/// factors are averaged. Requires tau_total >= 100 renorm_dtau.
LyapunovEstimate lyapunov_max(const StateVector& init, double tau_total,
                              const LyapunovConfig& cfg = {});

}  // namespace paircrystal
