#pragma once

// Reference computations written straight from the model equations, kept
// independent of the library so tests compare two separate derivations.

#include <cmath>
#include <functional>
#include <random>
#include <utility>

namespace oracle {

struct Params {
  double theta_a = 0.5;
  double kappa = 3.0;
  double delta = 2.0;
  double theta_d = 0.0;
};

struct State {
  double theta, p;
};

inline State drift(const Params& q, State s) {
  const double th = s.theta, p = s.p;
  const double dth = th * (1 - th) * ((1 - p) * (1 - th) + q.delta * p * (q.theta_d - th));
  const double dp = q.kappa * p * (1 - p) * ((1 - th) * (1 - th) - (1 - q.theta_a) * (1 - q.theta_a));
  return {dth, dp};
}

inline State rk4(const std::function<State(State)>& f, State s, double h) {
  auto add = [](State a, State b, double c) { return State{a.theta + c * b.theta, a.p + c * b.p}; };
  const auto k1 = f(s);
  const auto k2 = f(add(s, k1, h / 2));
  const auto k3 = f(add(s, k2, h / 2));
  const auto k4 = f(add(s, k3, h));
  return {s.theta + h / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta),
          s.p + h / 6 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p)};
}

inline double saddle_p(const Params& q) {
  return (1 - q.theta_a) / ((1 - q.theta_a) + q.delta * (q.theta_a - q.theta_d));
}

inline double no_ai_rate(double th) { return th * (1 - th) * (1 - th); }

/// Time for theta' = theta(1-theta)^2 to climb from a to b, by RK4 with the
/// final partial step found by bisection on the step length.
inline double no_ai_arrival(double a, double b, double h = 1e-3) {
  auto step = [](double th, double dt) {
    const double k1 = no_ai_rate(th);
    const double k2 = no_ai_rate(th + dt / 2 * k1);
    const double k3 = no_ai_rate(th + dt / 2 * k2);
    const double k4 = no_ai_rate(th + dt * k3);
    return th + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  };
  double t = 0, th = a;
  while (true) {
    const double next = step(th, h);
    if (next >= b) break;
    th = next;
    t += h;
  }
  double lo = 0, hi = h;
  for (int i = 0; i < 80; ++i) {
    const double mid = (lo + hi) / 2;
    (step(th, mid) >= b ? hi : lo) = mid;
  }
  return t + (lo + hi) / 2;
}

/// Whether the simplified flow from s ends near (1, 0).
inline bool reaches_high(const Params& q, State s, double t_end = 300, double h = 0.01) {
  auto f = [&](State x) { return drift(q, x); };
  for (double t = 0; t < t_end; t += h) s = rk4(f, s, h);
  return s.p < 0.5;
}

/// Basin threshold in p at skill theta, by bisection on the flow's outcome.
inline double threshold_at(const Params& q, double theta, double tol = 1e-5) {
  double lo = 0, hi = 1;  // lo reaches high skill, hi does not
  while (hi - lo > tol) {
    const double mid = (lo + hi) / 2;
    (reaches_high(q, {theta, mid}) ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

}  // namespace oracle
