#include "skilldyn/serialize.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "skilldyn/errors.hpp"

namespace skilldyn {

namespace {

LimitLabel parse_limit_label(const std::string& s) {
  for (auto l : {LimitLabel::HighSkill, LimitLabel::LowSkill, LimitLabel::SaddleNeighborhood,
                 LimitLabel::Unresolved})
    if (to_string(l) == s) return l;
  throw ParseError("unknown limit label '" + s + "'");
}

std::string lower_alnum(const std::string& s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': not a number: '" + v + "'");
  }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(to_double(key, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string exact(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void to_json(Json& j, const SkillDistribution& d) {
  j = Json{{"support", d.support}, {"weights", d.weights}};
}

void from_json(const Json& j, SkillDistribution& d) {
  j.at("support").get_to(d.support);
  j.at("weights").get_to(d.weights);
}

void to_json(Json& j, const ModelVariant& v) {
  j = Json{{"tag", std::string(variant_tag(v))}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, JaggedAI>) j["distribution"] = x.distribution;
        if constexpr (std::is_same_v<T, MisperceivedAI>) j["theta_tilde_a"] = x.theta_tilde_a;
        if constexpr (std::is_same_v<T, Asymmetric>) j["alpha"] = x.alpha;
        if constexpr (std::is_same_v<T, DetectionPenalty>) j["q"] = x.q;
      },
      v);
}

void from_json(const Json& j, ModelVariant& v) {
  const auto tag = lower_alnum(j.at("tag").get<std::string>());
  if (tag == "simplified") {
    v = Simplified{};
  } else if (tag == "general") {
    v = General{};
  } else if (tag == "noai") {
    v = NoAI{};
  } else if (tag == "jaggedai") {
    v = JaggedAI(j.at("distribution").get<SkillDistribution>());
  } else if (tag == "misperceivedai") {
    v = MisperceivedAI{j.at("theta_tilde_a").get<double>()};
  } else if (tag == "asymmetric") {
    v = Asymmetric{j.at("alpha").get<double>()};
  } else if (tag == "detectionpenalty") {
    v = DetectionPenalty{j.at("q").get<double>()};
  } else {
    throw ParseError("unknown variant '" + j.at("tag").get<std::string>() + "'");
  }
}

void to_json(Json& j, const ModelParams& m) {
  j = Json{{"theta_a", m.theta_a}, {"kappa", m.kappa},     {"delta", m.delta},
           {"theta_d", m.theta_d}, {"variant", m.variant}};
}

void from_json(const Json& j, ModelParams& m) {
  m = ModelParams{};
  j.at("theta_a").get_to(m.theta_a);
  j.at("kappa").get_to(m.kappa);
  j.at("delta").get_to(m.delta);
  if (j.contains("theta_d")) j.at("theta_d").get_to(m.theta_d);
  if (j.contains("variant")) m.variant = j.at("variant").get<ModelVariant>();
}

void to_json(Json& j, const PhaseState& s) { j = Json{{"theta", s.theta}, {"p", s.p}}; }
void from_json(const Json& j, PhaseState& s) {
  j.at("theta").get_to(s.theta);
  j.at("p").get_to(s.p);
}

void to_json(Json& j, const Velocity& v) { j = Json{{"d_theta", v.d_theta}, {"d_p", v.d_p}}; }
void from_json(const Json& j, Velocity& v) {
  j.at("d_theta").get_to(v.d_theta);
  j.at("d_p").get_to(v.d_p);
}

void to_json(Json& j, const ValidationReport& r) {
  j = Json{{"ok", r.ok()}, {"issues", Json::array()}};
  for (const auto& i : r.issues)
    j["issues"].push_back({{"kind", std::string(to_string(i.kind))}, {"field", i.field},
                           {"message", i.message}});
}

void to_json(Json& j, const Trajectory& t) {
  std::vector<double> theta, p;
  theta.reserve(t.size());
  p.reserve(t.size());
  for (const auto& s : t.states) {
    theta.push_back(s.theta);
    p.push_back(s.p);
  }
  j = Json{{"times", t.times}, {"theta", theta}, {"p", p},
           {"terminal", std::string(to_string(t.terminal))}};
  if (!t.decisions.empty()) j["decisions"] = t.decisions;
}

void from_json(const Json& j, Trajectory& t) {
  t = Trajectory{};
  j.at("times").get_to(t.times);
  const auto theta = j.at("theta").get<std::vector<double>>();
  const auto p = j.at("p").get<std::vector<double>>();
  if (theta.size() != p.size() || theta.size() != t.times.size())
    throw ParseError("trajectory arrays differ in length");
  for (std::size_t i = 0; i < theta.size(); ++i) t.states.push_back({theta[i], p[i]});
  t.terminal = parse_limit_label(j.at("terminal").get<std::string>());
  if (j.contains("decisions")) j.at("decisions").get_to(t.decisions);
}

void to_json(Json& j, const Equilibrium& e) {
  Json values = Json::array();
  for (const auto& v : e.eigen.values) values.push_back({v.real() + 0.0, v.imag() + 0.0});
  Json vectors = nullptr;
  if (e.eigen.vectors) {
    vectors = Json::array();
    for (const auto& v : *e.eigen.vectors) vectors.push_back({v.x + 0.0, v.y + 0.0});
  }
  j = Json{{"theta", e.state.theta},
           {"p", e.state.p},
           {"kind", std::string(to_string(e.kind))},
           {"eigenvalues", values},
           {"eigenvectors", vectors}};
}

void to_json(Json& j, const Separatrix& s) {
  std::vector<double> theta, p;
  for (const auto& n : s.nodes) {
    theta.push_back(n.theta);
    p.push_back(n.p);
  }
  j = Json{{"saddle", s.saddle}, {"theta", theta}, {"p", p}, {"params", s.params}};
}

void to_json(Json& j, const PiecewiseSeparatrix& s) {
  j = Json{{"theta_dagger", s.theta_dagger}, {"p_dagger", s.p_dagger}, {"m_dagger", s.m_dagger},
           {"beta_l", s.beta_l},             {"beta_r", s.beta_r},     {"theta_l", s.theta_l},
           {"theta_r", s.theta_r},           {"warnings", s.warnings}};
}

void from_json(const Json& j, PiecewiseSeparatrix& s) {
  j.at("theta_dagger").get_to(s.theta_dagger);
  j.at("p_dagger").get_to(s.p_dagger);
  j.at("m_dagger").get_to(s.m_dagger);
  j.at("beta_l").get_to(s.beta_l);
  j.at("beta_r").get_to(s.beta_r);
  j.at("theta_l").get_to(s.theta_l);
  j.at("theta_r").get_to(s.theta_r);
  s.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(Json& j, const BasinMethod& m) {
  if (const auto* sde = std::get_if<SdeMethod>(&m))
    j = Json{{"type", "sde"}, {"sigma", sde->sigma}, {"n_samples", sde->n_samples},
             {"seed", sde->seed}};
  else
    j = Json{{"type", "deterministic"}};
}

void to_json(Json& j, const CrossingResult& c) {
  j = Json{{"t_c", c.t_c},
           {"t_star", c.t_star},
           {"sign_changes", c.sign_changes},
           {"bracket", {c.bracket_lo, c.bracket_hi}}};
}

void to_json(Json& j, const SweepTable& t) {
  j = Json{{"vary", std::string(to_string(t.vary))},
           {"values", t.values},
           {"probes", t.probes},
           {"psi", t.psi}};
}

void to_json(Json& j, const EstimateDetail& d) {
  j = Json{{"value", d.value}, {"used", d.used}, {"excluded", d.excluded}, {"steps", d.steps}};
}

void to_json(Json& j, const EstimatedParams& e) {
  j = Json{{"theta_a", e.theta_a},
           {"eta", e.eta},
           {"kappa", e.kappa},
           {"delta", e.delta},
           {"ai_samples", e.ai_samples},
           {"eta_detail", e.eta_detail},
           {"kappa_detail", e.kappa_detail},
           {"delta_detail", e.delta_detail},
           {"A", e.manual_sessions},
           {"B", e.consecutive_sessions}};
}

void to_json(Json& j, const Prediction& p) {
  j = Json{{"label", std::string(to_string(p.label))},
           {"threshold", p.threshold},
           {"margin", p.margin},
           {"state", p.state}};
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  auto strip = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    auto key = strip(line.substr(0, eq));
    if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = strip(line.substr(eq + 1));
  }
  return kv;
}

ModelVariant parse_variant(const std::string& tag, const KeyValues& kv) {
  auto need = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("variant '" + tag + "' needs key '" + key + "'");
    return it->second;
  };
  const auto t = lower_alnum(tag);
  if (t == "simplified") return Simplified{};
  if (t == "general") return General{};
  if (t == "noai") return NoAI{};
  if (t == "jaggedai") {
    SkillDistribution d{to_list("support", need("support")), to_list("weights", need("weights"))};
    return JaggedAI(std::move(d));
  }
  if (t == "misperceivedai") return MisperceivedAI{to_double("theta_tilde_a", need("theta_tilde_a"))};
  if (t == "asymmetric") return Asymmetric{to_double("alpha", need("alpha"))};
  if (t == "detectionpenalty") return DetectionPenalty{to_double("q", need("q"))};
  throw ParseError("unknown variant '" + tag + "'");
}

ModelParams params_from_key_values(const KeyValues& kv) {
  ModelParams m;
  auto read = [&](const char* key, double& field) {
    if (auto it = kv.find(key); it != kv.end()) field = to_double(key, it->second);
  };
  read("theta_a", m.theta_a);
  read("kappa", m.kappa);
  read("delta", m.delta);
  read("theta_d", m.theta_d);
  if (auto it = kv.find("variant"); it != kv.end()) m.variant = parse_variant(it->second, kv);
  return m;
}

KeyValues params_to_key_values(const ModelParams& params) {
  KeyValues kv{{"theta_a", exact(params.theta_a)},
               {"kappa", exact(params.kappa)},
               {"delta", exact(params.delta)},
               {"theta_d", exact(params.theta_d)},
               {"variant", std::string(variant_tag(params.variant))}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, JaggedAI>) {
          kv["support"] = join(x.distribution.support);
          kv["weights"] = join(x.distribution.weights);
        }
        if constexpr (std::is_same_v<T, MisperceivedAI>) kv["theta_tilde_a"] = exact(x.theta_tilde_a);
        if constexpr (std::is_same_v<T, Asymmetric>) kv["alpha"] = exact(x.alpha);
        if constexpr (std::is_same_v<T, DetectionPenalty>) kv["q"] = exact(x.q);
      },
      params.variant);
  return kv;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  std::string buf = "t,theta,p\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    buf += format_number(traj.times[i]);
    buf += ',';
    buf += format_number(traj.states[i].theta);
    buf += ',';
    buf += format_number(traj.states[i].p);
    buf += '\n';
  }
  out << buf;
}

Json trajectory_report(const Trajectory& traj, const Json& config) {
  return Json{{"terminal", std::string(to_string(traj.terminal))},
              {"final", traj.back()},
              {"n_points", traj.size()},
              {"t_end", traj.times.back()},
              {"config", config}};
}

void write_separatrix_csv(std::ostream& out, const Separatrix& sep) {
  std::string buf = "theta,p\n";
  for (const auto& n : sep.nodes) buf += format_number(n.theta) + ',' + format_number(n.p) + '\n';
  out << buf;
}

void write_basin_csv(std::ostream& out, const BasinGrid& grid) {
  const bool sde = std::holds_alternative<SdeMethod>(grid.method);
  std::string buf = "p\\theta";
  for (double t : grid.theta) buf += ',' + format_number(t);
  buf += '\n';
  for (std::size_t ip = 0; ip < grid.p.size(); ++ip) {
    buf += format_number(grid.p[ip]);
    for (std::size_t it = 0; it < grid.theta.size(); ++it) {
      buf += ',';
      const auto k = grid.index(ip, it);
      buf += sde ? format_number(grid.probability[k]) : std::string(to_string(grid.labels[k]));
    }
    buf += '\n';
  }
  out << buf;
}

Json basin_sidecar(const BasinGrid& grid) {
  return Json{{"theta_axis", grid.theta},
              {"p_axis", grid.p},
              {"method", grid.method},
              {"layout", "rows are p, columns are theta"}};
}

void write_gap_csv(std::ostream& out, const GapSeries& gap) {
  std::string buf = "t,gap\n";
  for (std::size_t i = 0; i < gap.times.size(); ++i)
    buf += format_number(gap.times[i]) + ',' + format_number(gap.gap[i]) + '\n';
  out << buf;
}

Json equilibria_report(const std::vector<Equilibrium>& eqs) {
  Json out = Json::array();
  for (const auto& e : eqs) out.push_back(e);
  return out;
}

Json estimation_report(const EstimatedParams& est, const std::optional<Prediction>& prediction) {
  Json report;
  report["estimates"] = {{"theta_a", est.theta_a},
                         {"eta", est.eta},
                         {"kappa", est.kappa},
                         {"delta", est.delta}};
  report["sample_counts"] = {{"theta_a", est.ai_samples},
                             {"eta", est.eta_detail.used},
                             {"kappa", est.kappa_detail.used},
                             {"delta", est.delta_detail.used}};
  report["excluded_steps"] = {{"eta", est.eta_detail.excluded},
                              {"kappa", est.kappa_detail.excluded},
                              {"delta", est.delta_detail.excluded}};
  report["sets"] = {{"A", est.manual_sessions}, {"B", est.consecutive_sessions}};
  report["prediction"] = prediction ? Json(*prediction) : Json(nullptr);
  return report;
}

}  // namespace skilldyn
