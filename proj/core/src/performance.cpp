#include "skilldyn/performance.hpp"

#include <cmath>

#include "skilldyn/dynamics.hpp"
#include "skilldyn/errors.hpp"
#include "skilldyn/parallel.hpp"

namespace skilldyn {

namespace {

void require_gap_inputs(const ModelParams& params, PhaseState init, bool need_delegation) {
  require_simulable(params);
  if (params.theta_d != 0.0) throw DomainError("performance gap requires theta_d = 0");
  if (std::holds_alternative<NoAI>(params.variant))
    throw DomainError("performance gap compares against the no-AI learner; pass an AI variant");
  if (!(init.theta > 0.0 && init.theta < 1.0 && init.p >= 0.0 && init.p <= 1.0))
    throw DomainError("initial skill must lie in (0,1) and delegation in [0,1]");
  // Without delegation the two learners coincide and t_c is undefined.
  if (need_delegation && !(init.p > 0.0 && init.p < 1.0))
    throw DomainError("crossing time needs an initial delegation level in (0,1)");
}

ModelParams baseline_of(const ModelParams& params) {
  auto b = params;
  b.variant = NoAI{};
  return b;
}

double gap_at(const ModelParams& params, PhaseState assisted, double baseline_theta) {
  const double miss = 1.0 - baseline_theta;
  return loss(assisted.theta, assisted.p, params) - miss * miss;
}

}  // namespace

GapSeries performance_gap(const ModelParams& params, PhaseState init, double t_end, double step,
                          const NumericsConfig& cfg) {
  require_gap_inputs(params, init, false);
  GapSeries out;
  out.assisted = integrate_ode(params, init, t_end, step, cfg);
  out.baseline = integrate_ode(baseline_of(params), {init.theta, 0.0}, t_end, step, cfg);
  out.times = out.assisted.times;
  out.gap.reserve(out.times.size());
  for (std::size_t i = 0; i < out.times.size(); ++i)
    out.gap.push_back(gap_at(params, out.assisted.states[i], out.baseline.states[i].theta));
  return out;
}

CrossingResult crossing_time(const ModelParams& params, PhaseState init, double t_max,
                             const NumericsConfig& cfg) {
  require_gap_inputs(params, init, true);
  const auto baseline = baseline_of(params);
  const double ai_skill = 1.0 - std::sqrt(ai_output_loss(params));

  CrossingResult result;
  const bool ahead = init.theta >= ai_skill;
  if (!ahead) result.t_star = no_ai_time_to_reach(init.theta, ai_skill);
  const double natural_window = 2.0 * result.t_star + 10.0;
  const double window = std::min(t_max, natural_window);
  const double h = cfg.crossing_scan_step;
  const auto n = static_cast<std::size_t>(std::ceil(window / h - 1e-9));

  PhaseState a = init;
  PhaseState b{init.theta, 0.0};
  double g = gap_at(params, a, b.theta);
  bool positive = g > 0.0;

  // Last sample with a non-positive gap and the states there.
  bool any_nonpositive = !positive;
  double last_t = 0.0;
  PhaseState last_a = a, last_b = b;
  double last_step = h;

  double t = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double t_next = std::min(window, static_cast<double>(i) * h);
    const double dt = t_next - t;
    const PhaseState a_prev = a, b_prev = b;
    a = rk4_step(params, a, dt);
    b = rk4_step(baseline, b, dt);
    g = gap_at(params, a, b.theta);
    const bool now_positive = g > 0.0;
    if (now_positive != positive) ++result.sign_changes;
    if (!positive && now_positive) {
      last_t = t;
      last_a = a_prev;
      last_b = b_prev;
      last_step = dt;
    }
    if (!now_positive) any_nonpositive = true;
    positive = now_positive;
    t = t_next;
  }

  if (!positive)
    throw Unresolved("gap still non-positive at t=" + std::to_string(window) +
                     (window < natural_window ? " (t_max truncated the search)" : ""));

  if (!any_nonpositive || ahead) {
    result.t_c = 0.0;
    return result;
  }

  // Bisection inside [last_t, last_t + last_step] with sub-steps from the
  // bracketing sample.
  double lo = 0.0, hi = last_step;
  while (hi - lo > cfg.crossing_bracket) {
    const double mid = 0.5 * (lo + hi);
    const auto am = rk4_step(params, last_a, mid);
    const auto bm = rk4_step(baseline, last_b, mid);
    if (gap_at(params, am, bm.theta) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  result.bracket_lo = last_t + lo;
  result.bracket_hi = last_t + hi;
  result.t_c = 0.5 * (result.bracket_lo + result.bracket_hi);
  return result;
}

std::vector<std::pair<double, CrossingResult>> crossing_curve(const ModelParams& params,
                                                              PhaseState init,
                                                              const std::vector<double>& theta_a_values,
                                                              std::size_t jobs,
                                                              const NumericsConfig& cfg) {
  std::vector<std::pair<double, CrossingResult>> out(theta_a_values.size());
  parallel_for(theta_a_values.size(), jobs, [&](std::size_t i) {
    out[i] = {theta_a_values[i],
              crossing_time(params.with_theta_a(theta_a_values[i]), init, cfg.t_max, cfg)};
  });
  return out;
}

}  // namespace skilldyn
