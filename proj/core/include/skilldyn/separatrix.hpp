#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skilldyn/model.hpp"
#include "skilldyn/numerics.hpp"
#include "skilldyn/simulate.hpp"

namespace skilldyn {

/// Stable manifold of the interior saddle as a polyline p = psi(theta),
/// strictly increasing in both coordinates from (0,0) through the saddle to
/// (1,1).
struct Separatrix {
  PhaseState saddle;
  std::vector<PhaseState> nodes;
  ModelParams params;
};

Separatrix compute_separatrix(const ModelParams& params, std::size_t resolution,
                              const NumericsConfig& cfg = {});
inline Separatrix compute_separatrix(const ModelParams& params) {
  return compute_separatrix(params, NumericsConfig{}.separatrix_nodes);
}

/// Linear interpolation on the polyline; theta is clamped to [0,1].
double psi_eval(const Separatrix& sep, double theta);

/// Three-branch closed-form approximation of psi: power law near (0,0), the
/// saddle's tangent line, power law near (1,1), pasted with C^1 matching.
struct PiecewiseSeparatrix {
  double theta_dagger = 0.0;
  double p_dagger = 0.0;
  double m_dagger = 0.0;
  double beta_l = 0.0;
  double beta_r = 0.0;
  double theta_l = 0.0;
  double theta_r = 0.0;
  std::vector<std::string> warnings;

  double operator()(double theta) const;
  double middle(double theta) const { return p_dagger + m_dagger * (theta - theta_dagger); }
};

PiecewiseSeparatrix psi_approx(const ModelParams& params, const NumericsConfig& cfg = {});

enum class Basin { High, Low, Boundary };
std::string_view to_string(Basin b);

struct BasinClassification {
  Basin basin = Basin::Boundary;
  /// Filled only for Boundary: the outcome of integrating the flow.
  std::optional<LimitLabel> simulated;
};

BasinClassification classify_basin(const ModelParams& params, PhaseState init,
                                   const Separatrix& sep, const NumericsConfig& cfg = {});

struct DeterministicMethod {};
struct SdeMethod {
  double sigma = 0.1;
  std::size_t n_samples = 200;
  std::uint64_t seed = 0;
};
using BasinMethod = std::variant<DeterministicMethod, SdeMethod>;

/// Row-major over (p, theta): cell (ip, it) is at ip * theta.size() + it.
struct BasinGrid {
  std::vector<double> theta;
  std::vector<double> p;
  std::vector<Basin> labels;        // deterministic method
  std::vector<double> probability;  // sde method: HighSkill frequency
  BasinMethod method;

  std::size_t index(std::size_t ip, std::size_t it) const { return ip * theta.size() + it; }
};

std::vector<double> linspace(double lo, double hi, std::size_t n);

BasinGrid basin_grid(const ModelParams& params, const std::vector<double>& theta_axis,
                     const std::vector<double>& p_axis, const BasinMethod& method,
                     std::size_t jobs = 0, const NumericsConfig& cfg = {});

enum class SweepParameter { ThetaA, Kappa, Delta };
std::string_view to_string(SweepParameter v);
SweepParameter parse_sweep_parameter(std::string_view name);

struct SweepTable {
  SweepParameter vary;
  std::vector<double> values;
  std::vector<double> probes;
  std::vector<std::vector<double>> psi;  // psi[value][probe]
};

ModelParams with_parameter(const ModelParams& base, SweepParameter vary, double value);

SweepTable separatrix_sweep(const ModelParams& base, SweepParameter vary,
                            const std::vector<double>& values, const std::vector<double>& probes,
                            std::size_t jobs = 0, const NumericsConfig& cfg = {});

}  // namespace skilldyn
