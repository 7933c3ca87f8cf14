#pragma once

#include "skilldyn/model.hpp"

namespace skilldyn {

/// Right-hand side of the skill/delegation ODE for the params' variant.
/// Total on [0,1]^2; NoAI forces d_p = 0.
Velocity eval_drift(const ModelParams& params, PhaseState state);

/// Skill component only: theta(1-theta)((1-p)(1-theta) + delta p (theta_d - theta)).
double skill_drift(const ModelParams& params, double theta, double p);

/// Delegation level on the skill nullcline at `theta`: the p for which the
/// bracketed skill term vanishes. Returns +inf when no such p exists.
double skill_nullcline(const ModelParams& params, double theta);

/// Expected loss of a delegated output: (1-theta_a)^2, E[(1-s)^2] for jagged
/// AI, or the detection-penalised mixture.
double ai_output_loss(const ModelParams& params);

/// Expected instantaneous loss (1-p)(1-theta)^2 + p * ai_output_loss.
double loss(double theta, double p, const ModelParams& params);

/// 1 - sqrt(E[(1-s)^2]).
double effective_skill(const SkillDistribution& dist);

}  // namespace skilldyn
