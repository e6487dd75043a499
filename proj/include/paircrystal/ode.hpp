#pragma once

// Embedded Dormand-Prince 5(4) stepper with the free fourth-order continuous
// extension (Hairer, Norsett & Wanner, "Solving ODEs I", DOPRI5/CONTD5).
// Shared by the classical model and the quantum shooting equations, for
// fixed-size state arrays.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "paircrystal/errors.hpp"

namespace paircrystal::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

/// Interpolant over one accepted step [t0, t0 + h]; h may be negative.
/// Evaluates y(t0 + s h) = c0 + s (c1 + (1-s) (c2 + s (c3 + (1-s) c4))).
template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> c{};

  double t1() const { return t0 + h; }

  bool contains(double t) const {
    return h > 0.0 ? (t >= t0 && t <= t0 + h) : (t <= t0 && t >= t0 + h);
  }

  double component(double t, std::size_t i) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
  }

  Vec<N> operator()(double t) const {
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = component(t, i);
    return out;
  }

  /// Cubic Hermite interpolant through (y0, f0) and (y1, f1); the continuous
  /// extension above with c4 = 0.
  static DenseSegment hermite(double t0, double h, const Vec<N>& y0, const Vec<N>& y1,
                              const Vec<N>& f0, const Vec<N>& f1) {
    DenseSegment seg;
    seg.t0 = t0;
    seg.h = h;
    for (std::size_t i = 0; i < N; ++i) {
      const double diff = y1[i] - y0[i];
      const double bspl = h * f0[i] - diff;
      seg.c[0][i] = y0[i];
      seg.c[1][i] = diff;
      seg.c[2][i] = bspl;
      seg.c[3][i] = diff - h * f1[i] - bspl;
      seg.c[4][i] = 0.0;
    }
    return seg;
  }
};

struct AdaptiveOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  ///< 0 selects the step automatically
  long max_steps = 50'000'000;
};

struct RunStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
  bool stopped_early = false;
  double t_reached = 0.0;
};

namespace detail {

// Butcher tableau and error/dense coefficients of DOPRI5.
inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double a21 = 0.2;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Pairwise sum over [lo, hi). Each level adds two half sums, so the result is
// unchanged when the halves are swapped or when components are exchanged
// inside a pair. This makes the quantum stepper exactly symmetric under the
// mirror map (phi1, phi1', phi2, phi2') -> (phi2, -phi2', phi1, -phi1').
template <std::size_t N>
double pairwise_sum(const Vec<N>& r, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return r[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum<N>(r, lo, mid) + pairwise_sum<N>(r, mid, hi);
}

template <std::size_t N>
double scaled_norm(const Vec<N>& v, const Vec<N>& y0, const Vec<N>& y1, const AdaptiveOptions& o) {
  Vec<N> sq;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = o.abs_tol + o.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = v[i] / sk;
    sq[i] = r * r;
  }
  return std::sqrt(pairwise_sum<N>(sq, 0, N) / static_cast<double>(N));
}

template <std::size_t N, class Rhs>
double initial_step(Rhs& f, double t, const Vec<N>& y, const Vec<N>& f0, double dir,
                    const AdaptiveOptions& o, RunStats& stats) {
  const double dnf = scaled_norm<N>(f0, y, y, o);
  const double dny = scaled_norm<N>(y, y, y, o);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min(h, o.max_step);
  Vec<N> y1;
  for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h * f0[i];
  const Vec<N> f1 = f(t + dir * h, y1);
  ++stats.evaluations;
  Vec<N> diff;
  for (std::size_t i = 0; i < N; ++i) diff[i] = f1[i] - f0[i];
  const double der2 = scaled_norm<N>(diff, y, y, o) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, o.max_step});
}

}  // namespace detail

/// Integrates y' = f(t, y) from t0 to t1 (either direction). After each
/// accepted step, calls on_step(segment, y_new); returning false stops the
/// run. Throws IntegrationError on step-size underflow, a non-finite state, or
/// when max_steps is exhausted.
template <std::size_t N, class Rhs, class Observer>
RunStats integrate_dopri5(Rhs&& f, double t0, const Vec<N>& y0, double t1,
                          const AdaptiveOptions& opt, Observer&& on_step) {
  using namespace detail;
  RunStats stats;
  stats.t_reached = t0;
  if (t1 == t0) return stats;
  const double dir = t1 > t0 ? 1.0 : -1.0;

  double t = t0;
  Vec<N> y = y0;
  Vec<N> k1 = f(t, y);
  ++stats.evaluations;
  double h = opt.initial_step > 0.0 ? opt.initial_step : initial_step<N>(f, t, y, k1, dir, opt, stats);
  double facold = 1e-4;
  bool last_rejected = false;

  Vec<N> k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
  while (dir * (t1 - t) > 0.0) {
    if (stats.accepted + stats.rejected >= opt.max_steps)
      throw IntegrationError("integrator: step budget exhausted", t);
    h = std::min(h, opt.max_step);
    const double remaining = dir * (t1 - t);
    bool lands = false;
    if (1.01 * h >= remaining) {
      h = remaining;
      lands = true;
    }
    if (h <= 1e-14 * std::max(1.0, std::abs(t)))
      throw IntegrationError("integrator: step size underflow", t);
    const double hs = dir * h;

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    k2 = f(t + c2 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(t + c3 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(t + c4 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(t + c5 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double tnew = lands ? t1 : t + hs;
    k6 = f(t + hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = f(tnew, ynew);
    stats.evaluations += 6;
    for (std::size_t i = 0; i < N; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    double en = scaled_norm<N>(err, y, ynew, opt);
    if (!std::isfinite(en)) en = 1e10;
    constexpr double beta = 0.04, safe = 0.9;
    const double fac11 = std::pow(en, 0.2 - beta * 0.75);
    if (en <= 1.0) {
      for (std::size_t i = 0; i < N; ++i)
        if (!std::isfinite(ynew[i])) throw IntegrationError("integrator: non-finite state", t);
      DenseSegment<N> seg;
      seg.t0 = t;
      seg.h = tnew - t;
      for (std::size_t i = 0; i < N; ++i) {
        const double diff = ynew[i] - y[i];
        const double bspl = hs * k1[i] - diff;
        seg.c[0][i] = y[i];
        seg.c[1][i] = diff;
        seg.c[2][i] = bspl;
        seg.c[3][i] = diff - hs * k7[i] - bspl;
        seg.c[4][i] =
            hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      ++stats.accepted;
      facold = std::max(en, 1e-4);
      double fac = fac11 / std::pow(facold, beta);
      fac = std::clamp(fac / safe, 0.1, 5.0);
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      t = tnew;
      y = ynew;
      k1 = k7;
      stats.t_reached = t;
      if (!on_step(static_cast<const DenseSegment<N>&>(seg), static_cast<const Vec<N>&>(y))) {
        stats.stopped_early = true;
        return stats;
      }
      h = hnew;
    } else {
      ++stats.rejected;
      h = h / std::min(5.0, fac11 / safe);
      last_rejected = true;
    }
  }
  return stats;
}

}  // namespace paircrystal::ode
