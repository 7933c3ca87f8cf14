#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skilldyn/model.hpp"
#include "skilldyn/separatrix.hpp"
#include "skilldyn/simulate.hpp"

namespace skilldyn {

/// One observed session. `ell` (learner loss) is present iff x == 0.
/// `theta` is an optional directly assessed skill for manual sessions; when
/// given it replaces the inversion 1 - sqrt(ell).
struct SessionRecord {
  long t = 0;
  int x = 0;
  std::optional<double> ell;
  std::optional<double> theta;
  double ell_a = 0.0;
  double p = 0.0;
  std::string decision;  // free text, e.g. "Manual" / "Delegate"
};

using SessionLog = std::vector<SessionRecord>;

/// Throws ParseError for malformed rows. Accepts `---` or an empty field for
/// an absent loss. An extra `theta` column is optional.
SessionLog read_sessions_csv(std::istream& in);
void write_sessions_csv(std::ostream& out, const SessionLog& log);

/// Rejects logs that violate the record invariants.
void validate_sessions(const SessionLog& log);

/// Skill of a manual session: the assessed `theta` if present, else 1 - sqrt(ell).
double session_skill(const SessionRecord& r);

/// How to turn AI losses into an AI skill.
enum class AiSkillFormula {
  MeanLoss,         // 1 - sqrt(mean ell_a); matches the effective-skill definition
  MeanComplement,   // 1 - sqrt(mean (1 - ell_a)^2); opt-in literal variant
};

double estimate_theta_a(const SessionLog& log, AiSkillFormula formula = AiSkillFormula::MeanLoss);

/// Per-quantity bookkeeping of which steps were used.
struct EstimateDetail {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  std::vector<long> steps;  // session indices contributing
};

/// Learning rate from consecutive manual sessions. Note the estimator's rate
/// is the per-session skill gain coefficient, i.e. twice the `eta` of the
/// per-round simulator.
EstimateDetail estimate_eta(const SessionLog& log, double exclusion = 1e-9);
EstimateDetail estimate_kappa(const SessionLog& log, double eta, double exclusion = 1e-9);
EstimateDetail estimate_delta(const SessionLog& log, double eta, double exclusion = 1e-9);

struct EstimatedParams {
  double theta_a = 0.0;
  double eta = 0.0;
  double kappa = 0.0;
  double delta = 0.0;
  std::size_t ai_samples = 0;
  EstimateDetail eta_detail, kappa_detail, delta_detail;
  std::vector<long> manual_sessions;       // A
  std::vector<long> consecutive_sessions;  // B

  ModelParams model() const { return ModelParams::simplified(theta_a, kappa, delta); }
};

EstimatedParams estimate_all(const SessionLog& log,
                             AiSkillFormula formula = AiSkillFormula::MeanLoss,
                             double exclusion = 1e-9);

struct Prediction {
  Basin label = Basin::Boundary;
  double threshold = 0.0;
  double margin = 0.0;
  PhaseState state;
};

/// Compares the current delegation level with the closed-form boundary
/// approximation at the current skill.
Prediction predict_outcome(const EstimatedParams& est, PhaseState current);

/// Session log of a simulated learner: one record per discrete round.
SessionLog sessions_from_trajectory(const ModelParams& params, const Trajectory& traj);

}  // namespace skilldyn
