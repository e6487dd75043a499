#include "paircrystal/state.hpp"

#include <string>

#include "paircrystal/errors.hpp"

namespace paircrystal {

double distance(const StateVector& a, const StateVector& b) {
  const double d[5] = {a.mx - b.mx, a.my - b.my, a.mz - b.mz, a.x - b.x, a.p - b.p};
  double sum = 0.0;
  for (double v : d) sum += v * v;
  return std::sqrt(sum);
}

void require_finite(const StateVector& s, const char* where) {
  if (!s.finite()) throw DomainError(std::string(where) + ": non-finite state");
}

StateDerivative vector_field(const StateVector& s) {
  require_finite(s, "vector_field");
  return {2.0 * s.x * s.mz, -2.0 * s.mz, 2.0 * s.my - 2.0 * s.x * s.mx, s.p, -2.0 * s.my};
}

double hamiltonian(const StateVector& s) {
  require_finite(s, "hamiltonian");
  return 0.5 * s.p * s.p + 2.0 * s.x * s.my + 2.0 * s.mx;
}

double casimir(const StateVector& s) {
  require_finite(s, "casimir");
  return s.mx * s.mx + s.my * s.my + s.mz * s.mz;
}

Vec5 hamiltonian_gradient(const StateVector& s) { return {2.0, 2.0 * s.x, 0.0, 2.0 * s.my, s.p}; }

Vec5 casimir_gradient(const StateVector& s) { return {2.0 * s.mx, 2.0 * s.my, 2.0 * s.mz, 0.0, 0.0}; }

StateDerivative bracket_flow(const StateVector& s) {
  // Poisson tensor J with J_ij = {z_i, z_j}, z = (Mx, My, Mz, X, P).
  const double j[5][5] = {
      {0.0, s.mz, -s.my, 0.0, 0.0},
      {-s.mz, 0.0, s.mx, 0.0, 0.0},
      {s.my, -s.mx, 0.0, 0.0, 0.0},
      {0.0, 0.0, 0.0, 0.0, 1.0},
      {0.0, 0.0, 0.0, -1.0, 0.0},
  };
  const Vec5 grad = hamiltonian_gradient(s);
  Vec5 out{};
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 5; ++k) out[i] += j[i][k] * grad[k];
  return {out[0], out[1], out[2], out[3], out[4]};
}

DimensionlessPoint to_dimensionless(const PhysicalScales& sc, const PhysicalState& ph) {
  if (!(sc.m > 0.0)) throw DomainError("to_dimensionless: mass must be positive");
  const double spin = sc.e * sc.gamma / (2.0 * sc.m);
  DimensionlessPoint out;
  out.state = {spin * ph.f3, spin * ph.g1, spin * ph.g2, (sc.p_c - sc.e * ph.a) / sc.m,
               sc.e * ph.e / sc.m};
  out.tau = sc.m * ph.t;
  require_finite(out.state, "to_dimensionless");
  return out;
}

PhysicalState to_physical(const PhysicalScales& sc, const DimensionlessPoint& pt) {
  if (!(sc.m > 0.0)) throw DomainError("to_physical: mass must be positive");
  if (sc.gamma == 0.0) throw DomainError("to_physical: gamma must be non-zero");
  if (sc.e == 0.0) throw DomainError("to_physical: charge must be non-zero");
  const double spin = 2.0 * sc.m / (sc.e * sc.gamma);
  const StateVector& s = pt.state;
  return {spin * s.mx, spin * s.my, spin * s.mz, (sc.p_c - sc.m * s.x) / sc.e, sc.m * s.p / sc.e,
          pt.tau / sc.m};
}

double pair_number(double f3, double p, double m) {
  if (!(m > 0.0)) throw DomainError("pair_number: mass must be positive");
  return 2.0 + f3 * std::hypot(m, p) / (2.0 * m);
}

}  // namespace paircrystal
