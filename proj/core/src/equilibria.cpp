#include "skilldyn/equilibria.hpp"

#include <cmath>
#include <string>

#include "skilldyn/dynamics.hpp"
#include "skilldyn/errors.hpp"

namespace skilldyn {

std::string_view to_string(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::StableSink: return "StableSink";
    case EquilibriumKind::UnstableSource: return "UnstableSource";
    case EquilibriumKind::Saddle: return "Saddle";
  }
  return "Saddle";
}

namespace {

ModelParams analysable(const ModelParams& params) {
  require_simulable(params);
  auto base = reduce_to_base(params);
  if (!(base.theta_a > 0.0 && base.theta_a < 1.0))
    throw DegenerateParams("theta_a must lie in (0,1) for the interior saddle, got " +
                           std::to_string(base.theta_a));
  if (!(base.delta > 0.0)) throw DegenerateParams("delta must be > 0 for the interior saddle");
  if (!(base.theta_d < base.theta_a))
    throw DegenerateParams("theta_d must be < theta_a for the interior saddle");
  return base;
}

Vec2 unit(double x, double y) {
  const double n = std::hypot(x, y);
  return {x / n, y / n};
}

// Eigenvector for a real eigenvalue of a non-diagonal 2x2 matrix, from the
// better-conditioned of the two rows of (J - lambda I).
Vec2 eigenvector_for(const Jacobian2& j, double lambda) {
  const Vec2 from_row1{j.j12, lambda - j.j11};
  const Vec2 from_row2{lambda - j.j22, j.j21};
  const double n1 = std::hypot(from_row1.x, from_row1.y);
  const double n2 = std::hypot(from_row2.x, from_row2.y);
  const Vec2 v = n1 >= n2 ? from_row1 : from_row2;
  return unit(v.x, v.y);
}

std::optional<EquilibriumKind> kind_from_eigen(const EigenPair& e) {
  if (!e.real()) {
    const double re = e.values[0].real();
    if (re < 0.0) return EquilibriumKind::StableSink;
    if (re > 0.0) return EquilibriumKind::UnstableSource;
    return std::nullopt;
  }
  const double a = e.values[0].real();
  const double b = e.values[1].real();
  if (a > 0.0 && b < 0.0) return EquilibriumKind::Saddle;
  if (a < 0.0 && b < 0.0) return EquilibriumKind::StableSink;
  if (a > 0.0 && b > 0.0) return EquilibriumKind::UnstableSource;
  return std::nullopt;
}

}  // namespace

PhaseState saddle_point(const ModelParams& params) {
  const auto base = analysable(params);
  // Same expression the drift uses for its nullcline, so the field is
  // exactly zero at the returned point.
  return {base.theta_a, skill_nullcline(base, base.theta_a)};
}

Jacobian2 jacobian(const ModelParams& params, PhaseState s) {
  const auto base = reduce_to_base(params);
  const double th = s.theta;
  const double p = s.p;
  const double lin = th * (1.0 - th);
  const double bracket = (1.0 - p) * (1.0 - th) + base.delta * p * (base.theta_d - th);
  const double miss_a = 1.0 - base.theta_a;
  const double gain = (1.0 - th) * (1.0 - th) - miss_a * miss_a;

  Jacobian2 j;
  j.j11 = (1.0 - 2.0 * th) * bracket + lin * (-(1.0 - p) - base.delta * p);
  j.j12 = lin * (-(1.0 - th) + base.delta * (base.theta_d - th));
  j.j21 = -2.0 * base.kappa * p * (1.0 - p) * (1.0 - th);
  j.j22 = base.kappa * (1.0 - 2.0 * p) * gain;
  return j;
}

EigenPair eigen2(const Jacobian2& j) {
  EigenPair out;
  const double half_tr = 0.5 * j.trace();
  const double half_gap = 0.5 * (j.j11 - j.j22);
  const double disc = half_gap * half_gap + j.j12 * j.j21;

  if (disc < 0.0) {
    const double im = std::sqrt(-disc);
    out.values = {std::complex<double>(half_tr, im), std::complex<double>(half_tr, -im)};
    return out;
  }

  const double root = std::sqrt(disc);
  // Avoid cancellation: form the larger-magnitude root first, the other via det.
  const double big = half_tr + std::copysign(root, half_tr);
  const double other = big != 0.0 ? j.det() / big : half_tr - root;
  double hi = std::max(big, other);
  double lo = std::min(big, other);
  if (root == 0.0) hi = lo = half_tr;
  out.values = {std::complex<double>(hi, 0.0), std::complex<double>(lo, 0.0)};

  if (j.j12 == 0.0 && j.j21 == 0.0) {
    // Diagonal: the axes, matched to their diagonal entries.
    const bool first_is_j11 = j.j11 >= j.j22;
    out.vectors = first_is_j11 ? std::array<Vec2, 2>{Vec2{1, 0}, Vec2{0, 1}}
                               : std::array<Vec2, 2>{Vec2{0, 1}, Vec2{1, 0}};
  } else if (hi != lo) {
    out.vectors = std::array<Vec2, 2>{eigenvector_for(j, hi), eigenvector_for(j, lo)};
  }
  return out;
}

std::vector<Equilibrium> all_equilibria(const ModelParams& params) {
  const auto base = analysable(params);

  auto make = [&](PhaseState s, EquilibriumKind non_hyperbolic_kind) {
    Equilibrium e{s, non_hyperbolic_kind, eigen2(jacobian(base, s))};
    // A zero eigenvalue (the corner sinks along their skill direction) falls
    // back to the kind known from the one-dimensional boundary flow.
    if (auto k = kind_from_eigen(e.eigen)) e.kind = *k;
    return e;
  };

  std::vector<Equilibrium> out;
  out.push_back(make({1.0, 0.0}, EquilibriumKind::StableSink));
  if (base.theta_d == 0.0) {
    out.push_back(make({0.0, 1.0}, EquilibriumKind::StableSink));
  } else {
    out.push_back(make({base.theta_d, 1.0}, EquilibriumKind::StableSink));
    out.push_back(make({0.0, 1.0}, EquilibriumKind::Saddle));
  }
  out.push_back(make({0.0, 0.0}, EquilibriumKind::UnstableSource));
  out.push_back(make({1.0, 1.0}, EquilibriumKind::UnstableSource));
  out.push_back(make(saddle_point(base), EquilibriumKind::Saddle));
  return out;
}

Vec2 saddle_stable_direction(const ModelParams& params) {
  const auto saddle = saddle_point(params);
  const auto e = eigen2(jacobian(params, saddle));
  if (!e.vectors || !(e.values[1].real() < 0.0))
    throw DegenerateParams("saddle has no real stable direction");
  auto v = (*e.vectors)[1];
  if (v.x < 0.0) v = {-v.x, -v.y};
  return v;
}

}  // namespace skilldyn
