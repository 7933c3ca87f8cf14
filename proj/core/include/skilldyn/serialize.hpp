#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "skilldyn/equilibria.hpp"
#include "skilldyn/estimation.hpp"
#include "skilldyn/model.hpp"
#include "skilldyn/performance.hpp"
#include "skilldyn/separatrix.hpp"
#include "skilldyn/simulate.hpp"

namespace skilldyn {

using Json = nlohmann::json;

// JSON conversions. Doubles are written in shortest round-trip form, so
// from_json(to_json(x)) == x bit for bit.
void to_json(Json& j, const SkillDistribution& d);
void from_json(const Json& j, SkillDistribution& d);
void to_json(Json& j, const ModelVariant& v);
void from_json(const Json& j, ModelVariant& v);
void to_json(Json& j, const ModelParams& m);
void from_json(const Json& j, ModelParams& m);
void to_json(Json& j, const PhaseState& s);
void from_json(const Json& j, PhaseState& s);
void to_json(Json& j, const Velocity& v);
void from_json(const Json& j, Velocity& v);
void to_json(Json& j, const ValidationReport& r);
void to_json(Json& j, const Trajectory& t);
void from_json(const Json& j, Trajectory& t);
void to_json(Json& j, const Equilibrium& e);
void to_json(Json& j, const Separatrix& s);
void to_json(Json& j, const PiecewiseSeparatrix& s);
void from_json(const Json& j, PiecewiseSeparatrix& s);
void to_json(Json& j, const BasinMethod& m);
void to_json(Json& j, const CrossingResult& c);
void to_json(Json& j, const SweepTable& t);
void to_json(Json& j, const EstimateDetail& d);
void to_json(Json& j, const EstimatedParams& e);
void to_json(Json& j, const Prediction& p);

/// Flat `key = value` config: one pair per line, `#` starts a comment.
/// Throws ParseError on malformed lines.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);

/// Builds params from the model keys (theta_a, kappa, delta, theta_d,
/// variant and the variant's own keys); other keys are ignored. Missing keys
/// take the defaults.
ModelParams params_from_key_values(const KeyValues& kv);
KeyValues params_to_key_values(const ModelParams& params);

ModelVariant parse_variant(const std::string& tag, const KeyValues& kv);

// Plot-data writers. Numbers use 12 significant digits.
std::string format_number(double v);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Json trajectory_report(const Trajectory& traj, const Json& config);
void write_separatrix_csv(std::ostream& out, const Separatrix& sep);
/// Rows are p values, columns theta values; entries are labels (High/Low/
/// Boundary) or HighSkill probabilities for the sde method.
void write_basin_csv(std::ostream& out, const BasinGrid& grid);
Json basin_sidecar(const BasinGrid& grid);
void write_gap_csv(std::ostream& out, const GapSeries& gap);
Json equilibria_report(const std::vector<Equilibrium>& eqs);
Json estimation_report(const EstimatedParams& est, const std::optional<Prediction>& prediction);

}  // namespace skilldyn
