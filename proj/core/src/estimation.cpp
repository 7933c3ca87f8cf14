#include "skilldyn/estimation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "skilldyn/dynamics.hpp"
#include "skilldyn/errors.hpp"

namespace skilldyn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, const char* what, std::size_t line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty())
    throw ParseError("line " + std::to_string(line) + ": bad " + what + " '" + std::string(field) + "'");
  return v;
}

long parse_long(std::string_view field, const char* what, std::size_t line) {
  long v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty())
    throw ParseError("line " + std::to_string(line) + ": bad " + what + " '" + std::string(field) + "'");
  return v;
}

bool absent(std::string_view field) { return field.empty() || field == "---" || field == "-"; }

std::set<long> manual_set(const SessionLog& log) {
  std::set<long> a;
  for (const auto& r : log)
    if (r.x == 0) a.insert(r.t);
  return a;
}

std::vector<long> consecutive_set(const std::set<long>& a) {
  std::vector<long> b;
  for (long t : a)
    if (a.count(t + 1)) b.push_back(t);
  return b;
}

const SessionRecord& at(const SessionLog& log, long t) {
  auto it = std::lower_bound(log.begin(), log.end(), t,
                             [](const SessionRecord& r, long v) { return r.t < v; });
  return *it;
}

double finish(EstimateDetail& d, double sum, const char* name, bool degenerate_when_all_excluded) {
  if (d.used == 0) {
    const std::string msg = std::string("every step for ") + name + " was excluded";
    if (degenerate_when_all_excluded) throw Degenerate(msg);
    throw EmptyData(msg);
  }
  d.value = sum / static_cast<double>(d.used);
  return d.value;
}

void require_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be > 0");
}

}  // namespace

double session_skill(const SessionRecord& r) {
  if (r.theta) return *r.theta;
  if (!r.ell) throw DomainError("session t=" + std::to_string(r.t) + " has no learner loss");
  return 1.0 - std::sqrt(*r.ell);
}

SessionLog read_sessions_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) break;
  }
  for (auto f : split(line)) header.emplace_back(f);
  auto column = [&](const char* name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(std::string("missing column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_t = column("t"), c_x = column("x"), c_ell = column("ell"), c_ella = column("ell_a"),
             c_p = column("p");
  const auto it_dec = std::find(header.begin(), header.end(), "decision");
  const bool has_decision = it_dec != header.end();
  const auto c_dec = static_cast<std::size_t>(it_dec - header.begin());
  const auto it_theta = std::find(header.begin(), header.end(), "theta");
  const bool has_theta = it_theta != header.end();
  const auto c_theta = static_cast<std::size_t>(it_theta - header.begin());

  SessionLog log;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    SessionRecord r;
    r.t = parse_long(fields[c_t], "t", lineno);
    r.x = static_cast<int>(parse_long(fields[c_x], "x", lineno));
    if (!absent(fields[c_ell])) r.ell = parse_double(fields[c_ell], "ell", lineno);
    r.ell_a = parse_double(fields[c_ella], "ell_a", lineno);
    r.p = parse_double(fields[c_p], "p", lineno);
    if (has_decision) r.decision = std::string(fields[c_dec]);
    if (has_theta && !absent(fields[c_theta])) r.theta = parse_double(fields[c_theta], "theta", lineno);
    log.push_back(std::move(r));
  }
  validate_sessions(log);
  return log;
}

void write_sessions_csv(std::ostream& out, const SessionLog& log) {
  std::ostringstream buf;
  buf.precision(17);
  const bool with_theta =
      std::any_of(log.begin(), log.end(), [](const SessionRecord& r) { return r.theta.has_value(); });
  buf << "t,decision,x,ell,ell_a,p" << (with_theta ? ",theta" : "") << '\n';
  for (const auto& r : log) {
    buf << r.t << ',' << r.decision << ',' << r.x << ',';
    if (r.ell)
      buf << *r.ell;
    else
      buf << "---";
    buf << ',' << r.ell_a << ',' << r.p;
    if (with_theta) {
      buf << ',';
      if (r.theta)
        buf << *r.theta;
      else
        buf << "---";
    }
    buf << '\n';
  }
  out << buf.str();
}

void validate_sessions(const SessionLog& log) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    const std::string where = "session t=" + std::to_string(r.t);
    if (i > 0 && r.t <= log[i - 1].t) throw DomainError(where + ": t must strictly increase");
    if (r.x != 0 && r.x != 1) throw DomainError(where + ": x must be 0 or 1");
    if (r.x == 0 && !r.ell) throw DomainError(where + ": manual session needs ell");
    if (r.x == 1 && r.ell) throw DomainError(where + ": delegated session must not carry ell");
    if (r.ell && !unit(*r.ell)) throw DomainError(where + ": ell outside [0,1]");
    if (r.theta && r.x == 1) throw DomainError(where + ": delegated session must not carry theta");
    if (r.theta && !unit(*r.theta)) throw DomainError(where + ": theta outside [0,1]");
    if (!unit(r.ell_a)) throw DomainError(where + ": ell_a outside [0,1]");
    if (!unit(r.p)) throw DomainError(where + ": p outside [0,1]");
  }
}

double estimate_theta_a(const SessionLog& log, AiSkillFormula formula) {
  if (log.empty()) throw EmptyData("no AI losses to estimate theta_a");
  double sum = 0.0;
  for (const auto& r : log) {
    if (formula == AiSkillFormula::MeanLoss)
      sum += r.ell_a;
    else
      sum += (1.0 - r.ell_a) * (1.0 - r.ell_a);
  }
  return 1.0 - std::sqrt(sum / static_cast<double>(log.size()));
}

EstimateDetail estimate_eta(const SessionLog& log, double exclusion) {
  validate_sessions(log);
  const auto b = consecutive_set(manual_set(log));
  if (b.empty()) throw EmptyData("no consecutive manual sessions");
  EstimateDetail d;
  double sum = 0.0;
  for (long t : b) {
    const double th = session_skill(at(log, t));
    const double th_next = session_skill(at(log, t + 1));
    const double denom = th * (1.0 - th) * (1.0 - th);
    if (std::abs(denom) < exclusion) {
      ++d.excluded;
      continue;
    }
    sum += (th_next - th) / denom;
    ++d.used;
    d.steps.push_back(t);
  }
  finish(d, sum, "eta", true);
  return d;
}

EstimateDetail estimate_kappa(const SessionLog& log, double eta, double exclusion) {
  validate_sessions(log);
  require_eta(eta);
  const auto b = consecutive_set(manual_set(log));
  if (b.empty()) throw EmptyData("no consecutive manual sessions");
  EstimateDetail d;
  double sum = 0.0;
  for (long t : b) {
    const auto& r = at(log, t);
    const double gap = *r.ell - r.ell_a;
    const double spread = r.p * (1.0 - r.p);
    if (std::abs(gap) < exclusion || spread < exclusion) {
      ++d.excluded;
      continue;
    }
    sum += (at(log, t + 1).p - r.p) / (eta * spread * gap);
    ++d.used;
    d.steps.push_back(t);
  }
  finish(d, sum, "kappa", false);
  return d;
}

EstimateDetail estimate_delta(const SessionLog& log, double eta, double exclusion) {
  validate_sessions(log);
  require_eta(eta);
  const auto a = manual_set(log);
  EstimateDetail d;
  double sum = 0.0;
  bool any = false;
  for (auto it = a.begin(); it != a.end(); ++it) {
    const auto next = std::next(it);
    if (next == a.end() || *next == *it + 1) continue;
    any = true;
    const double th = session_skill(at(log, *it));
    const double th_next = session_skill(at(log, *next));
    const double k = static_cast<double>(*next - *it - 1);
    const double denom = eta * th * (1.0 - th) * k * th;
    if (std::abs(denom) < exclusion) {
      ++d.excluded;
      continue;
    }
    sum += (eta * th * (1.0 - th) * (1.0 - th) - (th_next - th)) / denom;
    ++d.used;
    d.steps.push_back(*it);
  }
  if (!any) throw EmptyData("no manual sessions separated by delegation");
  finish(d, sum, "delta", true);
  return d;
}

EstimatedParams estimate_all(const SessionLog& log, AiSkillFormula formula, double exclusion) {
  validate_sessions(log);
  EstimatedParams est;
  est.theta_a = estimate_theta_a(log, formula);
  est.ai_samples = log.size();
  const auto a = manual_set(log);
  est.manual_sessions.assign(a.begin(), a.end());
  est.consecutive_sessions = consecutive_set(a);
  est.eta_detail = estimate_eta(log, exclusion);
  est.eta = est.eta_detail.value;
  est.kappa_detail = estimate_kappa(log, est.eta, exclusion);
  est.kappa = est.kappa_detail.value;
  est.delta_detail = estimate_delta(log, est.eta, exclusion);
  est.delta = est.delta_detail.value;
  return est;
}

Prediction predict_outcome(const EstimatedParams& est, PhaseState current) {
  if (!(current.theta >= 0.0 && current.theta <= 1.0 && current.p >= 0.0 && current.p <= 1.0))
    throw DomainError("state must lie in [0,1]^2");
  const auto approx = psi_approx(est.model());
  Prediction out;
  out.state = current;
  out.threshold = approx(current.theta);
  out.margin = current.p - out.threshold;
  out.label = out.margin > 0.0 ? Basin::Low : (out.margin < 0.0 ? Basin::High : Basin::Boundary);
  return out;
}

SessionLog sessions_from_trajectory(const ModelParams& params, const Trajectory& traj) {
  if (traj.decisions.empty() || traj.decisions.size() + 1 != traj.states.size())
    throw DomainError("trajectory carries no per-round decisions");
  const double ell_a = ai_output_loss(params);
  SessionLog log;
  log.reserve(traj.decisions.size());
  for (std::size_t k = 0; k < traj.decisions.size(); ++k) {
    const auto& s = traj.states[k];
    SessionRecord r;
    r.t = static_cast<long>(k) + 1;
    r.x = traj.decisions[k];
    if (r.x == 0) r.ell = (1.0 - s.theta) * (1.0 - s.theta);
    r.ell_a = ell_a;
    r.p = s.p;
    r.decision = r.x ? "Delegate" : "Manual";
    log.push_back(std::move(r));
  }
  return log;
}

}  // namespace skilldyn
