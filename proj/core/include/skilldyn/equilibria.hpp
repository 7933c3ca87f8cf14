#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "skilldyn/model.hpp"

namespace skilldyn {

struct Jacobian2 {
  double j11 = 0.0, j12 = 0.0, j21 = 0.0, j22 = 0.0;

  double det() const { return j11 * j22 - j12 * j21; }
  double trace() const { return j11 + j22; }
};

struct Vec2 {
  double x = 0.0, y = 0.0;
};

struct EigenPair {
  // Ordered by real part, largest first.
  std::array<std::complex<double>, 2> values;
  // Unit eigenvectors, only for real distinct eigenvalues (or a diagonal
  // matrix, where the axes are returned).
  std::optional<std::array<Vec2, 2>> vectors;

  bool real() const { return values[0].imag() == 0.0 && values[1].imag() == 0.0; }
};

enum class EquilibriumKind { StableSink, UnstableSource, Saddle };
std::string_view to_string(EquilibriumKind k);

struct Equilibrium {
  PhaseState state;
  EquilibriumKind kind;
  EigenPair eigen;
};

/// Interior saddle (theta_a, (1-theta_a) / ((1-theta_a) + delta (theta_a - theta_d))).
/// Requires theta_a in (0,1), delta > 0 and theta_d < theta_a; throws
/// DegenerateParams otherwise. Variants are first reduced to the equivalent
/// deterministic system.
PhaseState saddle_point(const ModelParams& params);

/// Analytic partial derivatives of the (reduced) simplified/general field.
Jacobian2 jacobian(const ModelParams& params, PhaseState state);

EigenPair eigen2(const Jacobian2& j);

/// Fixed points with their stability. theta_d = 0: the four corners plus the
/// saddle. theta_d > 0: the low-skill sink moves to (theta_d, 1) and (0, 1)
/// becomes a boundary saddle.
std::vector<Equilibrium> all_equilibria(const ModelParams& params);

/// Stable eigenvector of the interior saddle, oriented with positive theta
/// component.
Vec2 saddle_stable_direction(const ModelParams& params);

}  // namespace skilldyn
