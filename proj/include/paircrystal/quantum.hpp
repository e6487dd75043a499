#pragma once

// Shooting solver for the two-component eigenproblem of
//   H = -1/2 d^2/dx^2 + 2 x sigma_y + 2 sigma_x
// after the rescaling x = 2^(-2/3) y and the basis change
//   psi1 = (phi1 + i phi2)/sqrt2,  psi2 = (phi2 + i phi1)/sqrt2,
// which turns H psi = E psi into the real system
//   phi1'' = (y - E/2^(1/3)) phi1 + 2^(2/3) phi2
//   phi2'' = (-y - E/2^(1/3)) phi2 + 2^(2/3) phi1.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace paircrystal::quantum {

/// (phi1, phi1', phi2, phi2')
using Vec4 = std::array<double, 4>;

inline const double kCbrt2 = std::cbrt(2.0);           // 2^(1/3)
inline const double kCoupling = kCbrt2 * kCbrt2;       // 2^(2/3)

Vec4 coupled_rhs(double y, const Vec4& u, double energy, double coupling = kCoupling);

struct Spinor {
  std::complex<double> psi1;
  std::complex<double> psi2;
};

Spinor to_psi(std::complex<double> phi1, std::complex<double> phi2);

/// Inverse of to_psi: phi1 = (psi1 - i psi2)/sqrt2, phi2 = (psi2 - i psi1)/sqrt2.
std::array<std::complex<double>, 2> to_phi(const Spinor& s);

inline double y_from_x(double x) { return kCoupling * x; }
inline double x_from_y(double y) { return y / kCoupling; }

enum class Slot : std::size_t { phi1 = 0, dphi1 = 1, phi2 = 2, dphi2 = 3 };

const char* to_string(Slot s);

struct ShootingProblem {
  double energy = 2.0;
  Vec4 initial{1.0, 0.0, 0.0, 0.0};  ///< values at y = 0; the free slot entry is ignored
  Slot free_slot = Slot::dphi2;
  double y_max = 12.0;
  double bracket_lo = -1.0;
  double bracket_hi = 0.0;
  double coupling = kCoupling;
  double defect_cap = 1e12;
  double tolerance = 1e-10;  ///< bisection stops once the bracket is this narrow
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;

  /// phi1 = 1, phi1' = 0, phi2 = 0, phi2' free.
  static ShootingProblem first_kind(double energy);
  /// phi1 = 0, phi1' free, phi2 = 1, phi2' = 0.
  static ShootingProblem second_kind(double energy);

  void validate() const;
  Vec4 initial_with(double free_value) const;
};

/// Growing-mode amplitude of (phi, dphi/du) at u, where u is the coordinate
/// in which phi sees the potential u - shift: the WKB growing component
/// (phi + (dphi/du + kappa'/(2 kappa) phi)/kappa)/2 with kappa = sqrt(u - shift).
double growing_component(double u, double phi, double dphi_du, double shift);

/// Signed growing-mode amplitude of phi1 at +y_max (saturated to
/// +-defect_cap). Zero for a solution regular at +infinity.
double shoot(const ShootingProblem& prob, double free_value);

/// Same on the negative side: growing amplitude of phi2 at -y_max.
double shoot_negative(const ShootingProblem& prob, double free_value);

struct EigenSolution {
  double energy = 0.0;
  Slot free_slot = Slot::dphi2;
  double solved_free_value = 0.0;
  Vec4 initial{};
  double y_max = 0.0;
  std::vector<double> grid;  ///< symmetric about 0
  std::vector<double> phi1;
  std::vector<double> phi2;
  double defect_plus = 0.0;   ///< growing amplitude of phi1 at +y_max
  double defect_minus = 0.0;  ///< growing amplitude of phi2 at -y_max
  std::vector<double> bracket_widths;  ///< per bisection iteration
  double coupling = kCoupling;

  double defect() const { return std::max(std::abs(defect_plus), std::abs(defect_minus)); }
};

/// Bisection on the free value inside the problem bracket to `tolerance`,
/// then integration from y = 0 to both ends with the converged data, sampled
/// on a symmetric grid with spacing `grid_step`. Throws BracketError when the
/// defect has the same sign at both bracket ends.
EigenSolution find_regular_derivative(const ShootingProblem& prob, double grid_step = 0.01);

/// Integrates the given initial data to +-y_max and samples on the grid.
EigenSolution integrate_solution(const ShootingProblem& prob, double free_value, double grid_step = 0.01);

/// phi1~(y) = phi2(-y), phi2~(y) = phi1(-y): the partner solution at the same energy.
EigenSolution mirror_solution(const EigenSolution& sol);

/// Free-slot problem whose initial data reproduce the mirrored solution.
ShootingProblem mirrored_problem(const ShootingProblem& prob);

struct EquationResidual {
  double absolute = 0.0;  ///< sup |phi'' - rhs|
  double scaled = 0.0;    ///< sup |phi'' - rhs| / max(1, |phi1| + |phi2|)
};

/// Residual of the coupled equations on the grid points with |y| <= limit,
/// using an eighth-order central second difference.
EquationResidual equation_residual(const EigenSolution& sol, double limit);

}  // namespace paircrystal::quantum
