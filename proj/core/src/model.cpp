#include "skilldyn/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "skilldyn/errors.hpp"

namespace skilldyn {

double SkillDistribution::expected_squared_error() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const double miss = 1.0 - support[i];
    acc += weights[i] * miss * miss;
  }
  return acc;
}

double SkillDistribution::mean() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) acc += weights[i] * support[i];
  return acc;
}

JaggedAI::JaggedAI(SkillDistribution dist)
    : distribution(std::move(dist)),
      expected_loss(distribution.expected_squared_error()) {}

std::string_view variant_tag(const ModelVariant& v) {
  struct Visitor {
    std::string_view operator()(const Simplified&) const { return "simplified"; }
    std::string_view operator()(const General&) const { return "general"; }
    std::string_view operator()(const NoAI&) const { return "no_ai"; }
    std::string_view operator()(const JaggedAI&) const { return "jagged_ai"; }
    std::string_view operator()(const MisperceivedAI&) const { return "misperceived_ai"; }
    std::string_view operator()(const Asymmetric&) const { return "asymmetric"; }
    std::string_view operator()(const DetectionPenalty&) const { return "detection_penalty"; }
  };
  return std::visit(Visitor{}, v);
}

std::string_view to_string(IssueKind k) {
  switch (k) {
    case IssueKind::Range: return "range";
    case IssueKind::BoundaryDegenerate: return "boundary-degenerate";
    case IssueKind::Regime: return "regime";
  }
  return "unknown";
}

bool ValidationReport::simulable() const { return !has(IssueKind::Range); }

bool ValidationReport::has(IssueKind k) const {
  for (const auto& i : issues)
    if (i.kind == k) return true;
  return false;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << to_string(issues[i].kind) << " " << issues[i].field << ": " << issues[i].message;
  }
  return os.str();
}

namespace {

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void check_unit(ValidationReport& r, const char* field, double v) {
  if (!in_unit(v)) r.issues.push_back({IssueKind::Range, field, "must lie in [0,1]"});
}

void check_nonneg(ValidationReport& r, const char* field, double v) {
  if (!std::isfinite(v) || v < 0.0)
    r.issues.push_back({IssueKind::Range, field, "must be finite and >= 0"});
}

void check_distribution(ValidationReport& r, const SkillDistribution& d) {
  if (d.support.empty() || d.support.size() != d.weights.size()) {
    r.issues.push_back({IssueKind::Range, "distribution",
                        "support and weights must be non-empty and of equal length"});
    return;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    if (!in_unit(d.support[i]))
      r.issues.push_back({IssueKind::Range, "distribution.support", "values must lie in [0,1]"});
    if (!std::isfinite(d.weights[i]) || d.weights[i] < 0.0)
      r.issues.push_back({IssueKind::Range, "distribution.weights", "weights must be >= 0"});
    total += d.weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    r.issues.push_back({IssueKind::Range, "distribution.weights", "weights must sum to 1"});
}

}  // namespace

ValidationReport validate_params(const ModelParams& params) {
  ValidationReport r;
  check_unit(r, "theta_a", params.theta_a);
  check_nonneg(r, "kappa", params.kappa);
  check_nonneg(r, "delta", params.delta);
  check_unit(r, "theta_d", params.theta_d);

  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, JaggedAI>) {
          check_distribution(r, v.distribution);
        } else if constexpr (std::is_same_v<T, MisperceivedAI>) {
          check_unit(r, "theta_tilde_a", v.theta_tilde_a);
        } else if constexpr (std::is_same_v<T, Asymmetric>) {
          check_nonneg(r, "alpha", v.alpha);
        } else if constexpr (std::is_same_v<T, DetectionPenalty>) {
          check_unit(r, "q", v.q);
        }
      },
      params.variant);

  if (!r.simulable()) return r;

  if (std::holds_alternative<Simplified>(params.variant) && params.theta_d != 0.0)
    r.issues.push_back({IssueKind::Regime, "theta_d",
                        "simplified variant normalises theta_d = 0; use the general variant"});

  const auto ta = reduced_theta_a(params).value_or(params.theta_a);
  if (ta <= 0.0 || ta >= 1.0)
    r.issues.push_back({IssueKind::BoundaryDegenerate, "theta_a",
                        "AI skill on the boundary {0,1}: interior saddle undefined"});
  else if (params.theta_d >= ta)
    r.issues.push_back({IssueKind::Regime, "theta_d",
                        "interior analysis requires theta_d < theta_a"});
  return r;
}

void require_simulable(const ModelParams& params) {
  auto report = validate_params(params);
  if (!report.simulable()) throw DomainError("invalid parameters: " + report.summary());
}

std::optional<double> reduced_theta_a(const ModelParams& params) {
  return std::visit(
      [&](const auto& v) -> std::optional<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Simplified> || std::is_same_v<T, General>) {
          return params.theta_a;
        } else if constexpr (std::is_same_v<T, JaggedAI>) {
          return 1.0 - std::sqrt(v.expected_loss);
        } else if constexpr (std::is_same_v<T, DetectionPenalty>) {
          const double miss = 1.0 - params.theta_a;
          return 1.0 - std::sqrt((1.0 - v.q) * miss * miss + v.q * std::abs(miss));
        } else if constexpr (std::is_same_v<T, Asymmetric>) {
          if (v.alpha == 1.0) return params.theta_a;
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, MisperceivedAI>) {
          if (v.theta_tilde_a == params.theta_a) return params.theta_a;
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      params.variant);
}

ModelParams reduce_to_base(const ModelParams& params) {
  auto ta = reduced_theta_a(params);
  if (!ta)
    throw DegenerateParams(std::string("variant '") + std::string(variant_tag(params.variant)) +
                           "' has no equivalent deterministic system for phase analysis");
  ModelParams base = params;
  base.theta_a = *ta;
  if (params.theta_d != 0.0 || std::holds_alternative<General>(params.variant))
    base.variant = General{};
  else
    base.variant = Simplified{};
  return base;
}

}  // namespace skilldyn
