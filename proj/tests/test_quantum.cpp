// quantum-shooting: Eq. 21 right-hand side, basis change, WKB shooting,
// bisection, mirror symmetry and the decoupled Airy oracle.
#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "paircrystal/errors.hpp"
#include "paircrystal/quantum.hpp"

using namespace paircrystal;
using namespace paircrystal::quantum;

namespace {

// Independent Airy oracle: Maclaurin series of y'' = z y with
// a0 = Ai(0), a1 = Ai'(0) and a_{n+3} = a_n / ((n+3)(n+2)). Accurate to
// round-off for |z| <~ 3, which covers the shifts used here.
std::pair<double, double> airy_series(double z) {
  const double ai0 = 1.0 / (std::pow(3.0, 2.0 / 3.0) * std::tgamma(2.0 / 3.0));
  const double dai0 = -1.0 / (std::pow(3.0, 1.0 / 3.0) * std::tgamma(1.0 / 3.0));
  std::vector<double> a(120, 0.0);
  a[0] = ai0;
  a[1] = dai0;
  for (std::size_t n = 0; n + 3 < a.size(); ++n) a[n + 3] = a[n] / ((n + 3.0) * (n + 2.0));
  double v = 0.0, dv = 0.0;
  for (std::size_t n = a.size(); n-- > 0;) {
    v = v * z + a[n];
    if (n >= 1) dv = dv * z + n * a[n];
  }
  return {v, dv};
}

}  // namespace

TEST_CASE("coupled_rhs: spec substitution examples") {
  const Vec4 a = coupled_rhs(0.0, {1, 0, 0, 0}, 0.0);
  CHECK(a[1] == 0.0);
  CHECK(a[3] == doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-15));
  const Vec4 b = coupled_rhs(0.0, {0, 0, 1, 0}, 2.0);
  CHECK(b[1] == doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-15));
  CHECK(b[3] == doctest::Approx(-2.0 / std::cbrt(2.0)).epsilon(1e-15));
  const Vec4 c = coupled_rhs(1.0, {0.5, 0.25, -1, 3}, 2.0);
  CHECK(c[0] == 0.25);
  CHECK(c[2] == 3.0);
}

TEST_CASE("coupled_rhs: mirror property on random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const double y = d(rng), e = d(rng);
    const Vec4 u{d(rng), d(rng), d(rng), d(rng)};
    const Vec4 f = coupled_rhs(y, u, e);
    const Vec4 g = coupled_rhs(-y, {u[2], u[3], u[0], u[1]}, e);
    CHECK(g[1] == doctest::Approx(f[3]).epsilon(1e-14));
    CHECK(g[3] == doctest::Approx(f[1]).epsilon(1e-14));
  }
}

TEST_CASE("basis change: spec examples and round trip") {
  const double r = 1.0 / std::sqrt(2.0);
  const Spinor a = to_psi(1.0, 0.0);
  CHECK(std::abs(a.psi1 - std::complex<double>(r, 0)) <= 1e-16);
  CHECK(std::abs(a.psi2 - std::complex<double>(0, r)) <= 1e-16);
  const Spinor b = to_psi(0.0, 1.0);
  CHECK(std::abs(b.psi1 - std::complex<double>(0, r)) <= 1e-16);
  CHECK(std::abs(b.psi2 - std::complex<double>(r, 0)) <= 1e-16);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int i = 0; i < 200; ++i) {
    const std::complex<double> p1{d(rng), d(rng)}, p2{d(rng), d(rng)};
    const auto back = to_phi(to_psi(p1, p2));
    CHECK(std::abs(back[0] - p1) <= 1e-15);
    CHECK(std::abs(back[1] - p2) <= 1e-15);
  }
  CHECK(x_from_y(y_from_x(0.37)) == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("ShootingProblem validation") {
  auto p = ShootingProblem::first_kind(2.0);
  CHECK_NOTHROW(p.validate());
  p.y_max = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = ShootingProblem::first_kind(2.0);
  p.bracket_lo = 1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK_THROWS_AS(shoot(ShootingProblem::first_kind(2.0), NAN), DomainError);
}

TEST_CASE("shoot: Fig. 9 / Fig. 10 defects change sign across the caption values") {
  const auto p9 = ShootingProblem::first_kind(2.0);
  CHECK((shoot(p9, -0.354651985 - 1e-6) > 0) != (shoot(p9, -0.354651985 + 1e-6) > 0));
  const auto p10 = ShootingProblem::second_kind(2.0);
  CHECK((shoot(p10, -0.665192338 - 1e-6) > 0) != (shoot(p10, -0.665192338 + 1e-6) > 0));
}

TEST_CASE("shoot: gross divergence") {
  const auto p = ShootingProblem::first_kind(2.0);
  // +10 diverges by ~1e11 at y_max = 12 (short of the 1e12 cap, see ledger);
  // far larger offsets overflow and saturate with the escape sign.
  CHECK(std::abs(shoot(p, 10.0)) >= 1e10);
  CHECK(std::abs(shoot(p, 1e3)) == p.defect_cap);
  CHECK(std::abs(shoot(p, -1e3)) == p.defect_cap);
  CHECK((shoot(p, 1e3) > 0) != (shoot(p, -1e3) > 0));
}

TEST_CASE("find_regular_derivative: caption values of Figs. 9-11") {
  const auto s9 = find_regular_derivative(ShootingProblem::first_kind(2.0));
  CHECK(std::abs(s9.solved_free_value + 0.354651985) <= 1e-4);
  const auto s10 = find_regular_derivative(ShootingProblem::second_kind(2.0));
  CHECK(std::abs(s10.solved_free_value + 0.665192338) <= 1e-4);
  const auto s11 = find_regular_derivative(ShootingProblem::second_kind(5.0));
  CHECK(std::abs(s11.solved_free_value + 0.36012) <= 1e-3);

  // Grid symmetric, values finite, initial data as pinned.
  REQUIRE(s9.grid.size() % 2 == 1);
  for (std::size_t i = 0; i < s9.grid.size(); ++i) {
    CHECK(s9.grid[i] == -s9.grid[s9.grid.size() - 1 - i]);
    CHECK(std::isfinite(s9.phi1[i]));
    CHECK(std::isfinite(s9.phi2[i]));
  }
  const std::size_t mid = s9.grid.size() / 2;
  CHECK(s9.phi1[mid] == 1.0);
  CHECK(s9.phi2[mid] == 0.0);
}

TEST_CASE("find_regular_derivative: stable under y_max 10 -> 14 and bisection halves the bracket") {
  auto p = ShootingProblem::first_kind(2.0);
  p.y_max = 10.0;
  const auto a = find_regular_derivative(p);
  p.y_max = 14.0;
  const auto b = find_regular_derivative(p);
  CHECK(std::abs(a.solved_free_value - b.solved_free_value) <= 1e-5);
  REQUIRE(b.bracket_widths.size() > 10);
  for (std::size_t i = 1; i < b.bracket_widths.size(); ++i)
    CHECK(b.bracket_widths[i] == doctest::Approx(b.bracket_widths[i - 1] / 2).epsilon(1e-12));
  CHECK(b.bracket_widths.back() <= p.tolerance);
}

TEST_CASE("equation residual <= 1e-6 on |y| <= y_max - 1") {
  for (const auto& prob : {ShootingProblem::first_kind(2.0), ShootingProblem::second_kind(5.0)}) {
    const auto s = find_regular_derivative(prob);
    const auto r = equation_residual(s, s.y_max - 1.0);
    CHECK(r.scaled <= 1e-6);
    CHECK(equation_residual(mirror_solution(s), s.y_max - 1.0).scaled <= 2 * r.scaled + 1e-15);
  }
}

TEST_CASE("mirror_solution: Fig. 9 partner data, involution, defect within 10x") {
  const auto prob = ShootingProblem::first_kind(2.0);
  const auto s = find_regular_derivative(prob);
  const auto m = mirror_solution(s);
  CHECK(m.initial[0] == 0.0);
  CHECK(m.initial[2] == 1.0);
  CHECK(m.initial[1] == doctest::Approx(0.354651985).epsilon(1e-4));
  CHECK(m.free_slot == Slot::dphi1);

  const auto mm = mirror_solution(m);
  CHECK(mm.phi1 == s.phi1);
  CHECK(mm.phi2 == s.phi2);
  CHECK(mm.initial == s.initial);

  const auto mp = mirrored_problem(prob);
  const double md = std::abs(shoot(mp, m.solved_free_value));
  CHECK(md <= 10 * std::max(s.defect(), 1e-300));

  // Integrating the mirrored initial data reproduces the mirrored grid values.
  // (The mirrored solution is regular on -y, so it is integrated, not re-shot.)
  const auto direct = integrate_solution(mp, m.solved_free_value);
  REQUIRE(direct.grid.size() == m.grid.size());
  double diff = 0.0;
  for (std::size_t i = 0; i < m.grid.size(); ++i) {
    const double scale = std::max(1.0, std::abs(m.phi1[i]) + std::abs(m.phi2[i]));
    diff = std::max({diff, std::abs(direct.phi1[i] - m.phi1[i]) / scale,
                     std::abs(direct.phi2[i] - m.phi2[i]) / scale});
  }
  CHECK(diff <= 1e-9);
}

TEST_CASE("decoupled Airy oracle: regular phi1'(0)/phi1(0) = Ai'(z)/Ai(z), z = -E/2^(1/3)") {
  // Oracle self-check against tabulated values.
  CHECK(airy_series(0.0).first == doctest::Approx(0.35502805388781724).epsilon(1e-14));
  CHECK(airy_series(-1.0).first == doctest::Approx(0.53556088329235211).epsilon(1e-13));
  for (double energy : {2.0, 1.0}) {
    ShootingProblem p;
    p.energy = energy;
    p.coupling = 0.0;
    p.initial = {1.0, 0.0, 0.0, 0.0};
    p.free_slot = Slot::dphi1;
    p.bracket_lo = -2.0;
    p.bracket_hi = 2.0;
    const auto s = find_regular_derivative(p);
    const auto [ai, dai] = airy_series(-energy / std::cbrt(2.0));
    CHECK(std::abs(s.solved_free_value - dai / ai) <= 1e-6);
    // phi1 on y >= 0 is Ai(y + z) / Ai(z).
    const std::size_t mid = s.grid.size() / 2;
    for (std::size_t i = mid; i < s.grid.size() && s.grid[i] <= 2.0; i += 10) {
      const double ref = airy_series(s.grid[i] - energy / std::cbrt(2.0)).first / ai;
      CHECK(std::abs(s.phi1[i] - ref) <= 1e-6);
    }
  }
}

TEST_CASE("bracket without sign change -> BracketError with the endpoint defects") {
  auto p = ShootingProblem::first_kind(2.0);
  p.bracket_lo = 0.5;
  p.bracket_hi = 1.0;
  try {
    find_regular_derivative(p);
    FAIL("expected BracketError");
  } catch (const BracketError& e) {
    CHECK((e.defect_lo() > 0) == (e.defect_hi() > 0));
  }
}
