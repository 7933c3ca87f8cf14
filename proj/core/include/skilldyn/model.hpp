#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace skilldyn {

/// Distribution of per-instance AI skill for the jagged-AI variant.
struct SkillDistribution {
  std::vector<double> support;
  std::vector<double> weights;

  static SkillDistribution point_mass(double s) { return {{s}, {1.0}}; }

  /// E[(1 - s)^2], the expected squared error of one AI output.
  double expected_squared_error() const;
  double mean() const;

  bool operator==(const SkillDistribution&) const = default;
};

// Model variants. Each carries only its own extra parameters; the shared
// scalars live in ModelParams.
struct Simplified {
  bool operator==(const Simplified&) const = default;
};
struct General {
  bool operator==(const General&) const = default;
};
struct NoAI {
  bool operator==(const NoAI&) const = default;
};
struct JaggedAI {
  SkillDistribution distribution;
  double expected_loss = 0.0;  // cached E[(1-s)^2]

  JaggedAI() = default;
  explicit JaggedAI(SkillDistribution dist);

  bool operator==(const JaggedAI&) const = default;
};
struct MisperceivedAI {
  double theta_tilde_a = 0.0;
  bool operator==(const MisperceivedAI&) const = default;
};
struct Asymmetric {
  double alpha = 1.0;
  bool operator==(const Asymmetric&) const = default;
};
struct DetectionPenalty {
  double q = 0.0;
  bool operator==(const DetectionPenalty&) const = default;
};

using ModelVariant = std::variant<Simplified, General, NoAI, JaggedAI,
                                  MisperceivedAI, Asymmetric, DetectionPenalty>;

std::string_view variant_tag(const ModelVariant& v);

struct ModelParams {
  double theta_a = 0.5;
  double kappa = 3.0;
  double delta = 2.0;
  double theta_d = 0.0;
  ModelVariant variant = Simplified{};

  /// (theta_a, kappa, delta) = (0.5, 3, 2), theta_d = 0.
  static ModelParams defaults() { return {}; }
  static ModelParams simplified(double theta_a, double kappa, double delta) {
    return {theta_a, kappa, delta, 0.0, Simplified{}};
  }

  ModelParams with_theta_a(double v) const {
    auto c = *this;
    c.theta_a = v;
    return c;
  }
  ModelParams with_kappa(double v) const {
    auto c = *this;
    c.kappa = v;
    return c;
  }
  ModelParams with_delta(double v) const {
    auto c = *this;
    c.delta = v;
    return c;
  }

  bool operator==(const ModelParams&) const = default;
};

struct PhaseState {
  double theta = 0.0;
  double p = 0.0;
  bool operator==(const PhaseState&) const = default;
};

struct Velocity {
  double d_theta = 0.0;
  double d_p = 0.0;
  bool operator==(const Velocity&) const = default;
};

enum class IssueKind { Range, BoundaryDegenerate, Regime };
std::string_view to_string(IssueKind k);

struct ValidationIssue {
  IssueKind kind;
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  /// True when nothing at all was flagged.
  bool ok() const { return issues.empty(); }
  /// True when the params are usable for simulation (no Range issues).
  bool simulable() const;
  bool has(IssueKind k) const;
  std::string summary() const;
};

ValidationReport validate_params(const ModelParams& params);

/// Throws DomainError listing Range issues, if any.
void require_simulable(const ModelParams& params);

/// AI skill of the deterministic simplified/general system that reproduces
/// this variant's delegation field exactly, when one exists: theta_a itself
/// for Simplified/General, the effective skill for JaggedAI, and
/// 1 - sqrt(expected penalised loss) for DetectionPenalty.
std::optional<double> reduced_theta_a(const ModelParams& params);

/// Params of the Simplified/General system equivalent to `params`, or
/// DegenerateParams if the variant has no such reduction.
ModelParams reduce_to_base(const ModelParams& params);

}  // namespace skilldyn
