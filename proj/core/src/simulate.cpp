#include "skilldyn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "skilldyn/dynamics.hpp"
#include "skilldyn/equilibria.hpp"
#include "skilldyn/errors.hpp"

namespace skilldyn {

std::string_view to_string(LimitLabel l) {
  switch (l) {
    case LimitLabel::HighSkill: return "HighSkill";
    case LimitLabel::LowSkill: return "LowSkill";
    case LimitLabel::SaddleNeighborhood: return "SaddleNeighborhood";
    case LimitLabel::Unresolved: return "Unresolved";
  }
  return "Unresolved";
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DiscreteSimConfig DiscreteSimConfig::for_horizon(double eta, double horizon, std::uint64_t seed) {
  const auto steps = static_cast<std::size_t>(std::llround(horizon / (2.0 * eta)));
  return {eta, steps, seed};
}

namespace {

void require_state(PhaseState s) {
  if (!(s.theta >= 0.0 && s.theta <= 1.0 && s.p >= 0.0 && s.p <= 1.0))
    throw DomainError("initial state must lie in [0,1]^2");
}

void require_finite(PhaseState s) {
  if (!std::isfinite(s.theta) || !std::isfinite(s.p))
    throw NonFinite("state became non-finite");
}

// Clamp to the unit square; overshoot beyond `tolerance` means the step is
// too coarse for the logistic barrier to hold.
PhaseState clamp_checked(PhaseState s, double tolerance) {
  require_finite(s);
  auto fix = [&](double v) {
    const double excess = v < 0.0 ? -v : (v > 1.0 ? v - 1.0 : 0.0);
    if (excess > tolerance)
      throw StepTooLarge("update left [0,1] by " + std::to_string(excess));
    return std::clamp(v, 0.0, 1.0);
  };
  return {fix(s.theta), fix(s.p)};
}

PhaseState clamp_silent(PhaseState s) {
  require_finite(s);
  return {std::clamp(s.theta, 0.0, 1.0), std::clamp(s.p, 0.0, 1.0)};
}

double max_norm(PhaseState a, PhaseState b) {
  return std::max(std::abs(a.theta - b.theta), std::abs(a.p - b.p));
}

// Skill thresholds for the sign of the delegation drift: dp < 0 for every
// interior p when theta > falls_above, dp > 0 when theta < rises_below.
struct DelegationSign {
  double falls_above = 2.0;
  double rises_below = -1.0;
};

DelegationSign delegation_sign(const ModelParams& params) {
  DelegationSign sign;
  if (params.kappa <= 0.0 || std::holds_alternative<NoAI>(params.variant)) return sign;
  double lo = ai_output_loss(params);
  double hi = lo;
  if (const auto* m = std::get_if<MisperceivedAI>(&params.variant)) {
    const double miss = 1.0 - m->theta_tilde_a;
    lo = std::min(lo, miss * miss);
    hi = std::max(hi, miss * miss);
  }
  bool falls = true;
  if (const auto* a = std::get_if<Asymmetric>(&params.variant)) falls = a->alpha > 0.0;
  if (falls) sign.falls_above = 1.0 - std::sqrt(lo);
  sign.rises_below = 1.0 - std::sqrt(hi);
  return sign;
}

// `depth` = 1 tests membership of the forward-invariant box; smaller values
// demand the state sit that fraction of the way into it.
LimitLabel trap_label(const ModelParams& params, PhaseState s, double depth) {
  if (std::holds_alternative<NoAI>(params.variant))
    return s.theta > 0.0 ? LimitLabel::HighSkill : LimitLabel::Unresolved;

  const auto sign = delegation_sign(params);
  const double theta = s.theta;
  const double p = s.p;
  const double td = params.theta_d;

  // High box [theta, 1] x [0, n(theta)]: dp < 0 inside, dtheta >= 0 on the
  // left edge, so the flow drains to (1, 0).
  if (theta > sign.falls_above && theta > td) {
    if (theta == 1.0) {
      if (p < 1.0) return LimitLabel::HighSkill;
    } else if (p <= depth * skill_nullcline(params, theta)) {
      return LimitLabel::HighSkill;
    }
  }

  // Low box [0, theta_l] x [n(theta_l), 1] with theta_l < rises_below: dp > 0
  // inside, dtheta <= 0 on the right edge, so the flow drains to (theta_d, 1).
  if (theta < sign.rises_below && p > 0.0) {
    if (theta == 0.0 && td == 0.0) return LimitLabel::LowSkill;
    if (theta > 0.0) {
      const double theta_l = std::max(theta, td + 1e-6 * (sign.rises_below - td));
      if (theta_l < sign.rises_below) {
        const double n = skill_nullcline(params, theta_l);
        if (1.0 - p <= depth * (1.0 - n)) return LimitLabel::LowSkill;
      }
    }
  }
  return LimitLabel::Unresolved;
}

std::optional<PhaseState> try_saddle(const ModelParams& params) {
  try {
    return saddle_point(params);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

LimitLabel label_state(const ModelParams& params, PhaseState s, const NumericsConfig& cfg) {
  if (!std::holds_alternative<NoAI>(params.variant)) {
    if (max_norm(s, {1.0, 0.0}) < cfg.eq_radius) return LimitLabel::HighSkill;
    if (max_norm(s, {params.theta_d, 1.0}) < cfg.eq_radius) return LimitLabel::LowSkill;
  }
  return trap_label(params, s, 1.0);
}

LimitLabel label_absorbed(const ModelParams& params, PhaseState s, const NumericsConfig& cfg) {
  return trap_label(params, s, cfg.sde_absorb_ratio);
}

PhaseState rk4_step(const ModelParams& params, PhaseState s, double h) {
  const auto k1 = eval_drift(params, s);
  const auto k2 = eval_drift(params, {s.theta + 0.5 * h * k1.d_theta, s.p + 0.5 * h * k1.d_p});
  const auto k3 = eval_drift(params, {s.theta + 0.5 * h * k2.d_theta, s.p + 0.5 * h * k2.d_p});
  const auto k4 = eval_drift(params, {s.theta + h * k3.d_theta, s.p + h * k3.d_p});
  return {s.theta + h / 6.0 * (k1.d_theta + 2.0 * k2.d_theta + 2.0 * k3.d_theta + k4.d_theta),
          s.p + h / 6.0 * (k1.d_p + 2.0 * k2.d_p + 2.0 * k3.d_p + k4.d_p)};
}

Trajectory integrate_ode(const ModelParams& params, PhaseState init, double t_end, double step,
                         const NumericsConfig& cfg) {
  require_simulable(params);
  require_state(init);
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("step must be > 0");
  if (!(t_end >= 0.0)) throw DomainError("t_end must be >= 0");

  const auto n = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));
  Trajectory traj;
  traj.times.reserve(n + 1);
  traj.states.reserve(n + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(init);

  PhaseState s = init;
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = std::min(t_end, static_cast<double>(i) * step);
    const double h = t - traj.times.back();
    s = clamp_checked(rk4_step(params, s, h), cfg.clamp_tolerance);
    traj.times.push_back(t);
    traj.states.push_back(s);
  }
  traj.terminal = label_state(params, s, cfg);
  return traj;
}

double no_ai_potential(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("skill must lie in (0,1)");
  return std::log(theta / (1.0 - theta)) + 1.0 / (1.0 - theta);
}

double no_ai_time_to_reach(double theta_0, double theta_target) {
  if (!(theta_0 > 0.0 && theta_target < 1.0 && theta_0 <= theta_target))
    throw DomainError("require 0 < theta_0 <= theta_target < 1");
  if (theta_0 == theta_target) return 0.0;
  return no_ai_potential(theta_target) - no_ai_potential(theta_0);
}

namespace {

double max_update_rate(const ModelParams& params) {
  double alpha = 1.0;
  if (const auto* a = std::get_if<Asymmetric>(&params.variant)) alpha = std::max(1.0, a->alpha);
  return std::max({1.0, params.delta, params.kappa * alpha});
}

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

Trajectory simulate_discrete(const ModelParams& params, PhaseState init,
                             const DiscreteSimConfig& cfg, const NumericsConfig& num) {
  require_simulable(params);
  require_state(init);
  if (!(cfg.eta > 0.0)) throw DomainError("eta must be > 0");
  if (2.0 * cfg.eta * max_update_rate(params) >= 1.0)
    throw StepTooLarge("eta too large: 2*eta*max rate must be < 1");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const bool no_ai = std::holds_alternative<NoAI>(params.variant);
  const double true_miss = (1.0 - params.theta_a) * (1.0 - params.theta_a);
  const double two_eta = 2.0 * cfg.eta;

  Trajectory traj;
  traj.times.reserve(cfg.n_steps + 1);
  traj.states.reserve(cfg.n_steps + 1);
  traj.decisions.reserve(cfg.n_steps);
  traj.times.push_back(0.0);
  traj.states.push_back(init);

  PhaseState s = init;
  for (std::size_t k = 1; k <= cfg.n_steps; ++k) {
    const double theta = s.theta;
    const double p = s.p;
    const bool delegated = !no_ai && unit(rng) < p;
    const double own = (1.0 - theta) * (1.0 - theta);

    const double skill_step =
        delegated ? params.delta * theta * (1.0 - theta) * (params.theta_d - theta)
                  : theta * (1.0 - theta) * (1.0 - theta);

    // Observed loss advantage of the AI this round, per variant.
    double advantage = 0.0;
    if (!no_ai) {
      advantage = std::visit(
          [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, JaggedAI>) {
              if (!delegated) return own - v.expected_loss;
              std::discrete_distribution<std::size_t> pick(v.distribution.weights.begin(),
                                                           v.distribution.weights.end());
              const double miss = 1.0 - v.distribution.support[pick(rng)];
              return own - miss * miss;
            } else if constexpr (std::is_same_v<T, MisperceivedAI>) {
              const double believed = (1.0 - v.theta_tilde_a) * (1.0 - v.theta_tilde_a);
              return own - (delegated ? true_miss : believed);
            } else if constexpr (std::is_same_v<T, Asymmetric>) {
              const double f = own - true_miss;
              return positive_part(f) - v.alpha * positive_part(-f);
            } else if constexpr (std::is_same_v<T, DetectionPenalty>) {
              const double penalty = std::abs(1.0 - params.theta_a);
              if (!delegated) return own - ((1.0 - v.q) * true_miss + v.q * penalty);
              const bool detected = unit(rng) < v.q;
              return own - (detected ? penalty : true_miss);
            } else {
              return own - true_miss;
            }
          },
          params.variant);
    }

    s = clamp_checked({theta + two_eta * skill_step,
                       p + params.kappa * two_eta * p * (1.0 - p) * advantage},
                      num.clamp_tolerance);
    traj.decisions.push_back(delegated ? 1 : 0);
    traj.times.push_back(two_eta * static_cast<double>(k));
    traj.states.push_back(s);
  }
  traj.terminal = label_state(params, s, num);
  return traj;
}

Trajectory simulate_sde(const ModelParams& params, PhaseState init, const SdeConfig& cfg,
                        const NumericsConfig& num) {
  require_simulable(params);
  require_state(init);
  if (!(cfg.sigma >= 0.0)) throw DomainError("sigma must be >= 0");
  if (!(cfg.step > 0.0)) throw DomainError("step must be > 0");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_scale = std::holds_alternative<NoAI>(params.variant)
                                 ? 0.0
                                 : params.kappa * cfg.sigma * std::sqrt(cfg.step);

  const auto n = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.step - 1e-9));
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(init);

  PhaseState s = init;
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = std::min(cfg.t_end, static_cast<double>(i) * cfg.step);
    const double h = t - traj.times.back();
    const auto v = eval_drift(params, s);
    double shock = 0.0;
    if (noise_scale > 0.0) shock = noise_scale * s.p * (1.0 - s.p) * std::sqrt(h / cfg.step) * normal(rng);
    s = clamp_silent({s.theta + h * v.d_theta, s.p + h * v.d_p + shock});
    traj.times.push_back(t);
    traj.states.push_back(s);
    if (cfg.stop_when_absorbed && label_absorbed(params, s, num) != LimitLabel::Unresolved) break;
  }
  traj.terminal = label_state(params, s, num);
  return traj;
}

LimitLabel classify_limit(const ModelParams& params, PhaseState init, double t_max,
                          const NumericsConfig& cfg) {
  require_simulable(params);
  require_state(init);

  const auto saddle = try_saddle(params);
  auto near_saddle = [&](PhaseState s) {
    return saddle && max_norm(s, *saddle) < cfg.eq_radius;
  };

  PhaseState s = init;
  if (auto l = label_state(params, s, cfg); l != LimitLabel::Unresolved) return l;
  if (eval_drift(params, s) == Velocity{0.0, 0.0})
    return near_saddle(s) ? LimitLabel::SaddleNeighborhood : LimitLabel::Unresolved;

  const double h = cfg.ode_step;
  const auto n = static_cast<std::size_t>(std::ceil(t_max / h));
  bool stayed_near_saddle = near_saddle(s);
  for (std::size_t i = 0; i < n; ++i) {
    s = clamp_checked(rk4_step(params, s, h), cfg.clamp_tolerance);
    if (auto l = label_state(params, s, cfg); l != LimitLabel::Unresolved) return l;
    stayed_near_saddle = stayed_near_saddle && near_saddle(s);
  }
  if (stayed_near_saddle || near_saddle(s)) return LimitLabel::SaddleNeighborhood;
  return LimitLabel::Unresolved;
}

}  // namespace skilldyn
