#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "skilldyn/model.hpp"
#include "skilldyn/numerics.hpp"

namespace skilldyn {

enum class LimitLabel { HighSkill, LowSkill, SaddleNeighborhood, Unresolved };
std::string_view to_string(LimitLabel l);

/// Time-stamped phase path. `times` starts at 0 and strictly increases;
/// every state lies in [0,1]^2.
struct Trajectory {
  std::vector<double> times;
  std::vector<PhaseState> states;
  LimitLabel terminal = LimitLabel::Unresolved;
  /// simulate_discrete only: X(k) for the round that produced states[k+1].
  std::vector<std::uint8_t> decisions;

  const PhaseState& back() const { return states.back(); }
  std::size_t size() const { return states.size(); }
};

struct DiscreteSimConfig {
  double eta = 1e-3;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;

  /// Steps covering model time `horizon` (each discrete step advances 2*eta).
  static DiscreteSimConfig for_horizon(double eta, double horizon, std::uint64_t seed);
};

struct SdeConfig {
  double sigma = 0.0;
  double step = 1e-2;
  std::uint64_t seed = 0;
  double t_end = 10.0;
  /// Stop early once the state is deep inside a sink's trapping region.
  bool stop_when_absorbed = false;
};

/// One classical RK4 step of eval_drift, without clamping.
PhaseState rk4_step(const ModelParams& params, PhaseState s, double h);

/// Fixed-step RK4 on [0, t_end], clamped to [0,1]^2 after every step.
/// Throws StepTooLarge when a clamp exceeds cfg.clamp_tolerance and NonFinite
/// when the drift blows up.
Trajectory integrate_ode(const ModelParams& params, PhaseState init, double t_end, double step,
                         const NumericsConfig& cfg = {});

/// F(theta) = ln(theta/(1-theta)) + 1/(1-theta), the antiderivative of
/// 1/(theta(1-theta)^2).
double no_ai_potential(double theta);

/// Time for the no-AI learner to climb from theta_0 to theta_target.
double no_ai_time_to_reach(double theta_0, double theta_target);

/// The per-round Bernoulli learner, one round per step. Trajectory times are
/// model time 2*eta*k so the path is comparable with integrate_ode.
Trajectory simulate_discrete(const ModelParams& params, PhaseState init,
                             const DiscreteSimConfig& cfg, const NumericsConfig& num = {});

/// Euler-Maruyama for the noisy-delegation SDE.
Trajectory simulate_sde(const ModelParams& params, PhaseState init, const SdeConfig& cfg,
                        const NumericsConfig& num = {});

/// Long-run outcome of the deterministic flow from `init`.
LimitLabel classify_limit(const ModelParams& params, PhaseState init, double t_max,
                          const NumericsConfig& cfg = {});

/// Label a single state without integrating: HighSkill/LowSkill when it is
/// within cfg.eq_radius of the corresponding sink or inside a forward-
/// invariant box that provably drains into it; Unresolved otherwise.
LimitLabel label_state(const ModelParams& params, PhaseState s, const NumericsConfig& cfg = {});

/// Stricter variant of label_state used for noisy paths: the state must sit
/// deep inside the trapping box (distance ratio cfg.sde_absorb_ratio).
LimitLabel label_absorbed(const ModelParams& params, PhaseState s, const NumericsConfig& cfg = {});

/// Mix a base seed with a stream index (SplitMix64 finaliser).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace skilldyn
