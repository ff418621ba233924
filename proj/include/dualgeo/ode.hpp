#pragma once

#include "dualgeo/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace dualgeo::ode {

inline constexpr int kMaxState = 3 * kMaxDim;
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxState, 1>;

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  int max_steps = 200000;
  /// Relative to the integration span.
  double min_step = 1e-13;
};

enum class Status { Ok, DomainExit, StepCollapse, TooManySteps };

struct Result {
  Status status = Status::Ok;
  double t = 0.0;
  State y;
  int accepted = 0;
  int rejected = 0;
};

namespace dp {
// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp

/// Adaptive Dormand-Prince 5(4) from t0 to t1 (t1 > t0).
///
/// `rhs(t, y, dy)` writes the derivative. `admissible(y)` rejects states
/// outside the domain; a rejected step is retried with half the step, and
/// repeated rejection down to the minimum step ends with DomainExit.
/// `observe(t, y, dy)` runs at t0 and after every accepted step. Every time in
/// `stops` (ascending, inside (t0, t1]) is landed on exactly.
template <class Rhs, class Admissible, class Observer>
Result dopri5(Rhs&& rhs, double t0, double t1, State y, const Options& opt,
              std::span<const double> stops, Admissible&& admissible, Observer&& observe) {
  using namespace dp;
  const Eigen::Index m = y.size();
  const double span = t1 - t0;
  const double h_min = opt.min_step * span;

  auto scaled_norm = [&](const State& v, const State& ya, const State& yb) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double r = v[i] / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(m));
  };

  Result res;
  double t = t0;
  State k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), ytmp(m), ynew(m), err(m);
  rhs(t, y, k1);
  observe(t, y, k1);

  // Initial step from the local Lipschitz estimate.
  double h;
  {
    const double d0 = scaled_norm(y, y, y);
    const double d1 = scaled_norm(k1, y, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    ytmp = y + h0 * k1;
    rhs(t + h0, ytmp, k2);
    const double d2 = scaled_norm(State(k2 - k1), y, y) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = (!std::isfinite(dmax))  ? h0
                      : (dmax <= 1e-15)       ? std::max(1e-6 * span, h0 * 1e-3)
                                              : std::pow(0.01 / dmax, 1.0 / 5.0);
    h = std::min(100.0 * h0, h1);
    if (!(h > 0)) h = 1e-6 * span;
  }

  std::size_t next_stop = 0;
  while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;

  bool last_reject_domain = false;
  bool previous_rejected = false;
  while (true) {
    const double target = next_stop < stops.size() ? std::min(stops[next_stop], t1) : t1;
    h = std::min(h, opt.max_step);
    const double h_proposed = h;
    bool lands = false;
    if (t + h >= target - 1e-14 * span) {
      h = target - t;
      lands = true;
    }
    if (h < h_min && !lands) {
      res.status = last_reject_domain ? Status::DomainExit : Status::StepCollapse;
      break;
    }
    if (res.accepted + res.rejected >= opt.max_steps) {
      res.status = Status::TooManySteps;
      break;
    }

    ytmp = y + h * (a21 * k1);
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);

    if (!ynew.allFinite() || !admissible(ynew)) {
      ++res.rejected;
      last_reject_domain = true;
      previous_rejected = true;
      h *= 0.5;
      if (h < h_min) {
        res.status = Status::DomainExit;
        break;
      }
      continue;
    }
    rhs(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double e = scaled_norm(err, y, ynew);

    if (!std::isfinite(e) || !k7.allFinite()) {
      ++res.rejected;
      last_reject_domain = true;
      previous_rejected = true;
      h *= 0.5;
      continue;
    }
    if (e > 1.0) {
      ++res.rejected;
      last_reject_domain = false;
      previous_rejected = true;
      h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
      continue;
    }

    t = lands ? target : t + h;
    y = ynew;
    k1 = k7;
    ++res.accepted;
    observe(t, y, k1);
    if (lands) {
      if (target >= t1) break;
      ++next_stop;
    }
    double fac = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
    if (previous_rejected) fac = std::min(fac, 1.0);
    previous_rejected = false;
    // A step clipped to land on a stop says little about the next one.
    h = lands ? std::max(h * fac, std::min(h_proposed, opt.max_step)) : h * fac;
  }
  res.t = t;
  res.y = y;
  return res;
}

template <class Rhs>
Result dopri5(Rhs&& rhs, double t0, double t1, State y, const Options& opt) {
  return dopri5(std::forward<Rhs>(rhs), t0, t1, std::move(y), opt, {},
                [](const State&) { return true; }, [](double, const State&, const State&) {});
}

}  // namespace dualgeo::ode
