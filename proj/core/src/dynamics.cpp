#include "skilldyn/dynamics.hpp"

#include <cmath>
#include <limits>

namespace skilldyn {

namespace {

// (1-theta) + delta (theta - theta_d): the slope of the skill bracket in p.
double decay_weight(const ModelParams& params, double theta) {
  return (1.0 - theta) + params.delta * (theta - params.theta_d);
}

// Bracket written as D * (n(theta) - p) with n = (1-theta)/D. Computing the
// saddle's p as the same n(theta_a) makes the drift vanish bit-exactly there.
double skill_bracket(const ModelParams& params, double theta, double p) {
  const double d = decay_weight(params, theta);
  if (d != 0.0) return d * ((1.0 - theta) / d - p);
  return (1.0 - p) * (1.0 - theta) + params.delta * p * (params.theta_d - theta);
}

double squared_miss(double skill) {
  const double miss = 1.0 - skill;
  return miss * miss;
}

}  // namespace

double skill_drift(const ModelParams& params, double theta, double p) {
  return theta * (1.0 - theta) * skill_bracket(params, theta, p);
}

double skill_nullcline(const ModelParams& params, double theta) {
  const double d = decay_weight(params, theta);
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - theta) / d;
}

double ai_output_loss(const ModelParams& params) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, JaggedAI>) {
          return v.expected_loss;
        } else if constexpr (std::is_same_v<T, DetectionPenalty>) {
          return (1.0 - v.q) * squared_miss(params.theta_a) + v.q * std::abs(1.0 - params.theta_a);
        } else {
          return squared_miss(params.theta_a);
        }
      },
      params.variant);
}

Velocity eval_drift(const ModelParams& params, PhaseState s) {
  const double theta = s.theta;
  const double p = s.p;
  const double own = squared_miss(theta);
  const double logistic_p = params.kappa * p * (1.0 - p);

  return std::visit(
      [&](const auto& v) -> Velocity {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NoAI>) {
          return {skill_drift(params, theta, 0.0), 0.0};
        } else {
          const double d_theta = skill_drift(params, theta, p);
          if constexpr (std::is_same_v<T, MisperceivedAI>) {
            const double perceived = own - squared_miss(v.theta_tilde_a);
            const double realised = own - squared_miss(params.theta_a);
            return {d_theta, logistic_p * ((1.0 - p) * perceived + p * realised)};
          } else if constexpr (std::is_same_v<T, Asymmetric>) {
            const double f = logistic_p * (own - squared_miss(params.theta_a));
            return {d_theta, f > 0.0 ? f : v.alpha * f};
          } else {
            return {d_theta, logistic_p * (own - ai_output_loss(params))};
          }
        }
      },
      params.variant);
}

double loss(double theta, double p, const ModelParams& params) {
  return (1.0 - p) * squared_miss(theta) + p * ai_output_loss(params);
}

double effective_skill(const SkillDistribution& dist) {
  return 1.0 - std::sqrt(dist.expected_squared_error());
}

}  // namespace skilldyn
