#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "skilldyn/model.hpp"
#include "skilldyn/numerics.hpp"
#include "skilldyn/simulate.hpp"

namespace skilldyn {

/// Loss of the AI-assisted learner minus loss of the no-AI learner started
/// from the same skill, on a shared time grid.
struct GapSeries {
  std::vector<double> times;
  std::vector<double> gap;
  Trajectory assisted;
  Trajectory baseline;
};

GapSeries performance_gap(const ModelParams& params, PhaseState init, double t_end, double step,
                          const NumericsConfig& cfg = {});

struct CrossingResult {
  double t_c = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::size_t sign_changes = 0;
  /// No-AI time to reach theta_a; upper bound for t_c (0 if theta_0 >= theta_a).
  double t_star = 0.0;
};

/// End of the short-run advantage: the last time the gap is non-positive,
/// refined by bisection. Throws Unresolved when t_max truncates the search
/// before the gap turns permanently positive.
CrossingResult crossing_time(const ModelParams& params, PhaseState init, double t_max,
                             const NumericsConfig& cfg = {});

std::vector<std::pair<double, CrossingResult>> crossing_curve(const ModelParams& params,
                                                              PhaseState init,
                                                              const std::vector<double>& theta_a_values,
                                                              std::size_t jobs = 0,
                                                              const NumericsConfig& cfg = {});

}  // namespace skilldyn
