#pragma once

#include <cstddef>

namespace skilldyn {

/// Every tolerance and default resolution used by the library. Operations
/// take a `const NumericsConfig&` defaulted to these values so tests can
/// tighten or loosen them in one place.
struct NumericsConfig {
  // integrate_ode / classify_limit
  double ode_step = 1e-3;
  double clamp_tolerance = 1e-12;  // max per-step clamp before StepTooLarge
  double eq_radius = 1e-6;         // max-norm convergence radius
  double t_max = 1e4;

  // stable manifold tracing
  double manifold_seed_offset = 1e-6;
  double manifold_corner_radius = 1e-4;
  double manifold_arc_step = 1e-4;  // target arc length per RK4 step
  double manifold_max_step = 0.05;
  std::size_t separatrix_nodes = 512;
  double monotonicity_tolerance = 1e-9;
  double boundary_band = 1e-4;

  // piecewise approximation
  double pasting_singularity = 1e-9;

  // crossing time
  double crossing_scan_step = 1e-3;
  double crossing_bracket = 1e-6;

  // estimation
  double estimation_exclusion = 1e-9;

  // SDE basin classification
  double sde_step = 1e-2;
  double sde_t_end = 400.0;
  double sde_absorb_ratio = 1e-3;
};

}  // namespace skilldyn
