#pragma once

// State space of the reduced pair/field model: a pseudo-spin M = (Mx, My, Mz)
// built from the f3, g1, g2 components of the phase-space distribution, the
// kinetic momentum X and the electric field P, all dimensionless.

#include <array>
#include <cmath>
#include <cstddef>

namespace paircrystal {

using Vec5 = std::array<double, 5>;

struct StateVector {
  double mx = 0.0;
  double my = 0.0;
  double mz = 0.0;
  double x = 0.0;
  double p = 0.0;

  static StateVector from_array(const Vec5& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
  Vec5 to_array() const { return {mx, my, mz, x, p}; }

  bool finite() const {
    return std::isfinite(mx) && std::isfinite(my) && std::isfinite(mz) && std::isfinite(x) &&
           std::isfinite(p);
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// d/dtau of each StateVector slot.
struct StateDerivative {
  double mx = 0.0;
  double my = 0.0;
  double mz = 0.0;
  double x = 0.0;
  double p = 0.0;

  Vec5 to_array() const { return {mx, my, mz, x, p}; }
};

/// Unweighted Euclidean distance over all five components.
double distance(const StateVector& a, const StateVector& b);

/// Throws DomainError if any component is NaN or infinite.
void require_finite(const StateVector& s, const char* where);

/// Right-hand side of the equations of motion:
///   Mx' = 2 X Mz,  My' = -2 Mz,  Mz' = 2 My - 2 X Mx,  X' = P,  P' = -2 My.
StateDerivative vector_field(const StateVector& s);

/// Same as vector_field, without the finiteness check, for the integrator hot loop.
inline Vec5 vector_field_unchecked(const Vec5& z) {
  return {2.0 * z[3] * z[2], -2.0 * z[2], 2.0 * z[1] - 2.0 * z[3] * z[0], z[4], -2.0 * z[1]};
}

/// H = P^2/2 + 2 X My + 2 Mx. Not bounded from below.
double hamiltonian(const StateVector& s);

/// |M|^2 = Mx^2 + My^2 + Mz^2.
double casimir(const StateVector& s);

/// Gradients used for the analytic conservation checks.
Vec5 hamiltonian_gradient(const StateVector& s);
Vec5 casimir_gradient(const StateVector& s);

/// Flow generated through the Lie-Poisson bracket {X,P}=1, {Mi,Mj}=eps_ijk Mk:
/// dF/dtau = sum_ij {z_i, z_j} dF/dz_i dH/dz_j. Evaluated from the bracket
/// structure and grad H, independently of vector_field.
StateDerivative bracket_flow(const StateVector& s);

/// Physical-unit parameters of the model. p_c is the canonical momentum of
/// the characteristic being followed.
struct PhysicalScales {
  double m = 1.0;
  double e = 1.0;
  double gamma = 1.0;
  double p_c = 0.0;
};

/// Distribution components and field in physical units.
struct PhysicalState {
  double f3 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double a = 0.0;  ///< vector potential A(t)
  double e = 0.0;  ///< electric field E(t)
  double t = 0.0;
};

struct DimensionlessPoint {
  StateVector state;
  double tau = 0.0;
};

/// Mx = e*gamma*f3/2m, My = e*gamma*g1/2m, Mz = e*gamma*g2/2m,
/// X = -eA/m + p_c/m, P = eE/m, tau = m t. Requires m > 0.
DimensionlessPoint to_dimensionless(const PhysicalScales& scales, const PhysicalState& phys);

/// Exact inverse of to_dimensionless. Requires m > 0, e != 0 and gamma != 0.
PhysicalState to_physical(const PhysicalScales& scales, const DimensionlessPoint& point);

/// Pair number from f3 = 2m/sqrt(m^2+p^2) (N_p - 2), i.e.
/// N_p = 2 + f3 sqrt(m^2+p^2)/(2m). Not clamped.
double pair_number(double f3, double p, double m);

}  // namespace paircrystal
