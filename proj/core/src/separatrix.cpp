#include "skilldyn/separatrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skilldyn/dynamics.hpp"
#include "skilldyn/equilibria.hpp"
#include "skilldyn/errors.hpp"
#include "skilldyn/parallel.hpp"

namespace skilldyn {

std::string_view to_string(Basin b) {
  switch (b) {
    case Basin::High: return "High";
    case Basin::Low: return "Low";
    case Basin::Boundary: return "Boundary";
  }
  return "Boundary";
}

std::string_view to_string(SweepParameter v) {
  switch (v) {
    case SweepParameter::ThetaA: return "theta_a";
    case SweepParameter::Kappa: return "kappa";
    case SweepParameter::Delta: return "delta";
  }
  return "theta_a";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "theta_a") return SweepParameter::ThetaA;
  if (name == "kappa") return SweepParameter::Kappa;
  if (name == "delta") return SweepParameter::Delta;
  throw DomainError("unknown sweep parameter '" + std::string(name) +
                    "' (expected theta_a, kappa or delta)");
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

namespace {

double max_norm(PhaseState a, PhaseState b) {
  return std::max(std::abs(a.theta - b.theta), std::abs(a.p - b.p));
}

// Follows the time-reversed flow from `seed` until it is within the corner
// radius of `corner`. Step length adapts to keep roughly constant arc length.
std::vector<PhaseState> trace_backward(const ModelParams& base, PhaseState seed,
                                       PhaseState corner, const NumericsConfig& cfg) {
  constexpr std::size_t kMaxSteps = 20'000'000;
  std::vector<PhaseState> path{seed};
  PhaseState s = seed;
  for (std::size_t i = 0; i < kMaxSteps; ++i) {
    if (max_norm(s, corner) < cfg.manifold_corner_radius) return path;
    const auto v = eval_drift(base, s);
    const double speed = std::hypot(v.d_theta, v.d_p);
    double h = speed > 0.0 ? cfg.manifold_arc_step / speed : cfg.manifold_max_step;
    h = std::clamp(h, cfg.ode_step, cfg.manifold_max_step);
    s = rk4_step(base, s, -h);
    if (!std::isfinite(s.theta) || !std::isfinite(s.p))
      throw ManifoldEscape("backward orbit became non-finite");
    s = {std::clamp(s.theta, 0.0, 1.0), std::clamp(s.p, 0.0, 1.0)};
    path.push_back(s);
  }
  throw ManifoldEscape("backward orbit did not approach (" + std::to_string(corner.theta) + "," +
                       std::to_string(corner.p) + ")");
}

// Keeps only points that advance in both coordinates. A retreat larger than
// the tolerance means the traced curve is not a graph over theta.
std::vector<PhaseState> monotone_chain(const std::vector<PhaseState>& raw, double tolerance) {
  std::vector<PhaseState> out;
  out.reserve(raw.size());
  for (const auto& s : raw) {
    if (out.empty()) {
      out.push_back(s);
      continue;
    }
    const auto& last = out.back();
    if (s.theta < last.theta - tolerance || s.p < last.p - tolerance)
      throw ManifoldEscape("stable manifold is not monotone near theta=" +
                           std::to_string(s.theta));
    if (s.theta > last.theta && s.p > last.p) out.push_back(s);
  }
  return out;
}

double interpolate(const std::vector<PhaseState>& nodes, double theta) {
  if (theta <= nodes.front().theta) return nodes.front().p;
  if (theta >= nodes.back().theta) return nodes.back().p;
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), theta,
                                   [](double t, const PhaseState& s) { return t < s.theta; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  if (theta == lo.theta) return lo.p;
  const double w = (theta - lo.theta) / (hi.theta - lo.theta);
  return lo.p + w * (hi.p - lo.p);
}

}  // namespace

Separatrix compute_separatrix(const ModelParams& params, std::size_t resolution,
                              const NumericsConfig& cfg) {
  if (resolution < 3) throw DomainError("separatrix resolution must be >= 3");
  const auto base = reduce_to_base(params);
  const auto saddle = saddle_point(base);
  const auto v = saddle_stable_direction(base);
  const double d = cfg.manifold_seed_offset;

  auto lower = trace_backward(base, {saddle.theta - d * v.x, saddle.p - d * v.y}, {0.0, 0.0}, cfg);
  auto upper = trace_backward(base, {saddle.theta + d * v.x, saddle.p + d * v.y}, {1.0, 1.0}, cfg);

  std::vector<PhaseState> raw;
  raw.reserve(lower.size() + upper.size() + 3);
  raw.push_back({0.0, 0.0});
  raw.insert(raw.end(), lower.rbegin(), lower.rend());
  raw.push_back(saddle);
  raw.insert(raw.end(), upper.begin(), upper.end());
  raw.push_back({1.0, 1.0});
  const auto chain = monotone_chain(raw, cfg.monotonicity_tolerance);

  Separatrix sep{saddle, {}, params};
  sep.nodes.reserve(resolution + 1);
  bool saddle_placed = false;
  for (double theta : linspace(0.0, 1.0, resolution)) {
    if (!saddle_placed && theta >= saddle.theta) {
      sep.nodes.push_back(saddle);
      saddle_placed = true;
      if (std::abs(theta - saddle.theta) <= 1e-12) continue;
    }
    sep.nodes.push_back({theta, interpolate(chain, theta)});
  }
  // Boundary values are exact by construction.
  sep.nodes.front() = {0.0, 0.0};
  sep.nodes.back() = {1.0, 1.0};
  for (std::size_t i = 1; i < sep.nodes.size(); ++i) {
    if (!(sep.nodes[i].theta > sep.nodes[i - 1].theta) ||
        sep.nodes[i].p < sep.nodes[i - 1].p - cfg.monotonicity_tolerance)
      throw ManifoldEscape("resampled separatrix is not monotone");
  }
  return sep;
}

double psi_eval(const Separatrix& sep, double theta) {
  return interpolate(sep.nodes, std::clamp(theta, 0.0, 1.0));
}

double PiecewiseSeparatrix::operator()(double theta) const {
  theta = std::clamp(theta, 0.0, 1.0);
  double value;
  if (theta_l > 0.0 && theta <= theta_l) {
    value = middle(theta_l) * std::pow(theta / theta_l, beta_l);
  } else if (theta < theta_r) {
    value = middle(theta);
  } else if (theta_r >= 1.0) {
    value = 1.0;
  } else {
    value = 1.0 - (1.0 - middle(theta_r)) * std::pow((1.0 - theta) / (1.0 - theta_r), beta_r);
  }
  return std::clamp(value, 0.0, 1.0);
}

PiecewiseSeparatrix psi_approx(const ModelParams& params, const NumericsConfig& cfg) {
  const auto base = reduce_to_base(params);
  const auto saddle = saddle_point(base);
  const auto j = jacobian(base, saddle);

  PiecewiseSeparatrix out;
  out.theta_dagger = saddle.theta;
  out.p_dagger = saddle.p;
  // Slope of the stable eigenvector (1, m) of [[j11, j12], [j21, 0]].
  out.m_dagger = (-j.j11 - std::sqrt(j.j11 * j.j11 + 4.0 * j.j12 * j.j21)) / (2.0 * j.j12);
  const double miss = 1.0 - saddle.theta;
  out.beta_l = base.kappa * (1.0 - miss * miss);
  out.beta_r = base.kappa * miss * miss / base.delta;

  if (std::abs(out.beta_l - 1.0) < cfg.pasting_singularity)
    throw SingularPasting("left exponent beta_l = 1: pasting point undefined");
  if (std::abs(out.beta_r - 1.0) < cfg.pasting_singularity)
    throw SingularPasting("right exponent beta_r = 1: pasting point undefined");

  const double m = out.m_dagger;
  const double td = out.theta_dagger;
  const double pd = out.p_dagger;

  const double left_paste = out.beta_l * (pd - m * td) / (m * (1.0 - out.beta_l));
  out.theta_l = std::min(td, left_paste);
  if (out.theta_l <= 0.0) {
    out.warnings.push_back("left pasting point " + std::to_string(left_paste) +
                           " <= 0; power-law branch dropped");
    out.theta_l = 0.0;
  }

  const double right_paste = (m - out.beta_r * (1.0 - pd + m * td)) / ((1.0 - out.beta_r) * m);
  out.theta_r = std::min(1.0, right_paste);
  if (out.theta_r < td) {
    out.warnings.push_back("right pasting point " + std::to_string(right_paste) +
                           " < theta_dagger; clamped to the saddle");
    out.theta_r = td;
  }
  return out;
}

BasinClassification classify_basin(const ModelParams& params, PhaseState init,
                                   const Separatrix& sep, const NumericsConfig& cfg) {
  const double margin = init.p - psi_eval(sep, init.theta);
  if (margin > cfg.boundary_band) return {Basin::Low, std::nullopt};
  if (margin < -cfg.boundary_band) return {Basin::High, std::nullopt};
  return {Basin::Boundary, classify_limit(params, init, cfg.t_max, cfg)};
}

BasinGrid basin_grid(const ModelParams& params, const std::vector<double>& theta_axis,
                     const std::vector<double>& p_axis, const BasinMethod& method,
                     std::size_t jobs, const NumericsConfig& cfg) {
  if (theta_axis.empty() || p_axis.empty()) throw DomainError("basin grid axes must be non-empty");
  BasinGrid grid{theta_axis, p_axis, {}, {}, method};
  const std::size_t cells = theta_axis.size() * p_axis.size();
  auto state_of = [&](std::size_t c) {
    return PhaseState{theta_axis[c % theta_axis.size()], p_axis[c / theta_axis.size()]};
  };

  if (std::holds_alternative<DeterministicMethod>(method)) {
    const auto sep = compute_separatrix(params, cfg.separatrix_nodes, cfg);
    grid.labels.assign(cells, Basin::Boundary);
    parallel_for(cells, jobs, [&](std::size_t c) {
      grid.labels[c] = classify_basin(params, state_of(c), sep, cfg).basin;
    });
    return grid;
  }

  const auto& sde = std::get<SdeMethod>(method);
  if (sde.n_samples == 0) throw DomainError("sde method needs n_samples > 0");
  grid.probability.assign(cells, 0.0);
  parallel_for(cells, jobs, [&](std::size_t c) {
    std::size_t high = 0;
    for (std::size_t k = 0; k < sde.n_samples; ++k) {
      SdeConfig run{sde.sigma, cfg.sde_step, derive_seed(sde.seed, c * sde.n_samples + k),
                    cfg.sde_t_end, true};
      const auto traj = simulate_sde(params, state_of(c), run, cfg);
      if (traj.terminal == LimitLabel::HighSkill) ++high;
    }
    grid.probability[c] = static_cast<double>(high) / static_cast<double>(sde.n_samples);
  });
  return grid;
}

ModelParams with_parameter(const ModelParams& base, SweepParameter vary, double value) {
  switch (vary) {
    case SweepParameter::ThetaA: return base.with_theta_a(value);
    case SweepParameter::Kappa: return base.with_kappa(value);
    case SweepParameter::Delta: return base.with_delta(value);
  }
  return base;
}

SweepTable separatrix_sweep(const ModelParams& base, SweepParameter vary,
                            const std::vector<double>& values, const std::vector<double>& probes,
                            std::size_t jobs, const NumericsConfig& cfg) {
  SweepTable table{vary, values, probes, std::vector<std::vector<double>>(values.size())};
  parallel_for(values.size(), jobs, [&](std::size_t i) {
    const auto sep = compute_separatrix(with_parameter(base, vary, values[i]),
                                        cfg.separatrix_nodes, cfg);
    auto& row = table.psi[i];
    row.reserve(probes.size());
    for (double theta : probes) row.push_back(psi_eval(sep, theta));
  });
  return table;
}

}  // namespace skilldyn
