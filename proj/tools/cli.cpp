#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "skilldyn/equilibria.hpp"
#include "skilldyn/errors.hpp"
#include "skilldyn/estimation.hpp"
#include "skilldyn/parallel.hpp"
#include "skilldyn/performance.hpp"
#include "skilldyn/separatrix.hpp"
#include "skilldyn/serialize.hpp"
#include "skilldyn/simulate.hpp"

namespace skilldyn::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutEnv = "SKILLDYN_OUT_DIR";
constexpr const char* kJobsEnv = "SKILLDYN_JOBS";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Key {
  const char* name;
  const char* fallback;  // nullptr: optional, absent unless given
  const char* help;
};

const std::vector<Key> kModelKeys = {
    {"theta_a", "0.5", "AI skill"},
    {"kappa", "3", "delegation rate"},
    {"delta", "2", "skill decay rate"},
    {"theta_d", "0", "default skill"},
    {"variant", "simplified",
     "simplified|general|no_ai|jagged_ai|misperceived_ai|asymmetric|detection_penalty"},
    {"theta_tilde_a", nullptr, "perceived AI skill (misperceived_ai)"},
    {"alpha", nullptr, "loss-aversion weight (asymmetric)"},
    {"q", nullptr, "detection probability (detection_penalty)"},
    {"support", nullptr, "comma-separated AI skill values (jagged_ai)"},
    {"weights", nullptr, "comma-separated probabilities (jagged_ai)"},
};

const std::vector<Key> kRunKeys = {
    {"out", ".", "output directory"},
    {"jobs", "0", "worker threads (0 = all cores)"},
};

const std::map<std::string, std::vector<Key>> kCommandKeys = {
    {"simulate",
     {{"method", "ode", "ode|discrete|sde"},
      {"theta0", "0.4", "initial skill"},
      {"p0", "0.3", "initial delegation level"},
      {"t_end", "10", "model-time horizon"},
      {"step", "0.001", "RK4 step (ode)"},
      {"eta", "0.001", "per-round learning rate (discrete)"},
      {"sigma", "0.1", "delegation noise (sde)"},
      {"sde_step", "0.01", "Euler-Maruyama step (sde)"},
      {"seed", "0", "random seed (discrete, sde)"},
      {"stride", "1", "write every n-th point"}}},
    {"equilibria", {}},
    {"separatrix", {{"resolution", "512", "polyline nodes"}}},
    {"basin",
     {{"method", "deterministic", "deterministic|sde"},
      {"theta_n", "21", "grid points along theta"},
      {"p_n", "21", "grid points along p"},
      {"theta_min", "0", "grid range"},
      {"theta_max", "1", "grid range"},
      {"p_min", "0", "grid range"},
      {"p_max", "1", "grid range"},
      {"sigma", "0.1", "delegation noise (sde)"},
      {"samples", "200", "paths per cell (sde)"},
      {"seed", "0", "random seed (sde)"}}},
    {"gap",
     {{"theta0", "0.4", "initial skill"},
      {"p0", "0.3", "initial delegation level"},
      {"t_end", "10", "horizon"},
      {"step", "0.001", "RK4 step"}}},
    {"crossing",
     {{"theta0", "0.4", "initial skill"},
      {"p0", "0.3", "initial delegation level"},
      {"t_max", "10000", "search limit"}}},
    {"crossing-curve",
     {{"theta0", "0.4", "initial skill"},
      {"p0", "0.3", "initial delegation level"},
      {"t_max", "10000", "search limit"},
      {"theta_a_values", "0.4:0.9:0.01", "list a,b,c or range lo:hi:step"}}},
    {"estimate",
     {{"input", "", "session CSV"},
      {"formula", "mean_loss", "mean_loss|mean_complement"},
      {"theta_now", nullptr, "current skill (default: last manual session)"},
      {"p_now", nullptr, "current delegation level (default: last session)"}}},
    {"sweep",
     {{"op", "separatrix", "operation run at each point"},
      {"vary", "theta_a", "key varied across points"},
      {"values", "", "list a,b,c or range lo:hi:step"}}},
};

std::string key_to_flag(const std::string& key) {
  std::string f = "--" + key;
  for (auto& c : f)
    if (c == '_') c = '-';
  return f;
}

std::string exact(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<double> parse_values(const std::string& key, const std::string& text) {
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError(key + ": not a number: '" + s + "'");
    }
  };
  std::vector<double> out;
  if (text.find_first_not_of(" \t") == std::string::npos) return out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw UsageError(key + ": range must be lo:hi:step");
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || hi < lo) throw UsageError(key + ": need step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(number(item.substr(b, e - b + 1)));
  }
  return out;
}

class Settings {
 public:
  KeyValues kv;

  bool has(const std::string& k) const { return kv.count(k) > 0; }

  const std::string& str(const std::string& k) const {
    auto it = kv.find(k);
    if (it == kv.end()) throw UsageError("missing setting '" + k + "'");
    return it->second;
  }

  double num(const std::string& k) const {
    const auto& s = str(k);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError(k + ": not a number: '" + s + "'");
    }
  }

  std::uint64_t count(const std::string& k) const {
    const auto& s = str(k);
    try {
      std::size_t used = 0;
      if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
      const auto v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError(k + ": not a non-negative integer: '" + s + "'");
    }
  }

  ModelParams params() const {
    try {
      return params_from_key_values(kv);
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
  }

  PhaseState init() const { return {num("theta0"), num("p0")}; }
};

struct Context {
  Settings settings;
  fs::path out_dir;
  std::size_t jobs = 0;
  std::vector<std::string> outputs;  // paths relative to the top-level out dir
  fs::path prefix;                   // sub-directory of this run inside out dir
};

struct Result {
  Json doc;
  std::optional<double> headline;
};

void write_file(Context& ctx, const std::string& name, const std::string& content) {
  const fs::path dir = ctx.out_dir / ctx.prefix;
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  f << content;
  ctx.outputs.push_back((ctx.prefix / name).generic_string());
}

void write_json(Context& ctx, const std::string& name, const Json& j) {
  write_file(ctx, name, j.dump(2) + "\n");
}

Json config_json(const Settings& s) {
  Json j = Json::object();
  for (const auto& [k, v] : s.kv) j[k] = v;
  return j;
}

Trajectory thin(const Trajectory& traj, std::size_t stride) {
  if (stride <= 1) return traj;
  Trajectory out;
  out.terminal = traj.terminal;
  for (std::size_t i = 0; i < traj.size(); i += stride) {
    out.times.push_back(traj.times[i]);
    out.states.push_back(traj.states[i]);
  }
  if ((traj.size() - 1) % stride != 0) {
    out.times.push_back(traj.times.back());
    out.states.push_back(traj.states.back());
  }
  return out;
}

Result cmd_simulate(Context& ctx) {
  const auto& s = ctx.settings;
  const auto params = s.params();
  const auto init = s.init();
  const auto& method = s.str("method");
  const double t_end = s.num("t_end");
  Trajectory traj;
  if (method == "ode") {
    traj = integrate_ode(params, init, t_end, s.num("step"));
  } else if (method == "discrete") {
    traj = simulate_discrete(params, init,
                             DiscreteSimConfig::for_horizon(s.num("eta"), t_end, s.count("seed")));
  } else if (method == "sde") {
    SdeConfig cfg;
    cfg.sigma = s.num("sigma");
    cfg.step = s.num("sde_step");
    cfg.seed = s.count("seed");
    cfg.t_end = t_end;
    traj = simulate_sde(params, init, cfg);
  } else {
    throw UsageError("unknown simulate method '" + method + "'");
  }
  const auto stride = s.count("stride");
  if (stride == 0) throw UsageError("stride must be >= 1");
  const auto shown = thin(traj, stride);
  std::ostringstream csv;
  write_trajectory_csv(csv, shown);
  write_file(ctx, "trajectory.csv", csv.str());
  auto report = trajectory_report(traj, config_json(s));
  write_json(ctx, "trajectory.json", report);
  return {report, traj.back().theta};
}

Result cmd_equilibria(Context& ctx) {
  const auto params = ctx.settings.params();
  const auto eqs = all_equilibria(params);
  Json doc{{"params", params}, {"equilibria", equilibria_report(eqs)}};
  write_json(ctx, "equilibria.json", doc);
  std::optional<double> saddle_p;
  for (const auto& e : eqs)
    if (e.kind == EquilibriumKind::Saddle && e.state.theta > 0.0 && e.state.theta < 1.0)
      saddle_p = e.state.p;
  return {doc, saddle_p};
}

Result cmd_separatrix(Context& ctx) {
  const auto params = ctx.settings.params();
  const auto sep = compute_separatrix(params, ctx.settings.count("resolution"));
  std::ostringstream csv;
  write_separatrix_csv(csv, sep);
  write_file(ctx, "separatrix.csv", csv.str());
  Json doc{{"params", params}, {"saddle", sep.saddle}, {"nodes", sep.nodes.size()}};
  try {
    const auto approx = psi_approx(params);
    write_json(ctx, "psi_approx.json", approx);
    doc["psi_approx"] = approx;
  } catch (const SingularPasting& e) {
    doc["psi_approx"] = nullptr;
    doc["psi_approx_error"] = e.what();
  }
  return {doc, sep.saddle.p};
}

Result cmd_basin(Context& ctx) {
  const auto& s = ctx.settings;
  const auto params = s.params();
  const auto theta = linspace(s.num("theta_min"), s.num("theta_max"), s.count("theta_n"));
  const auto p = linspace(s.num("p_min"), s.num("p_max"), s.count("p_n"));
  BasinMethod method;
  if (s.str("method") == "deterministic") {
    method = DeterministicMethod{};
  } else if (s.str("method") == "sde") {
    method = SdeMethod{s.num("sigma"), s.count("samples"), s.count("seed")};
  } else {
    throw UsageError("unknown basin method '" + s.str("method") + "'");
  }
  const auto grid = basin_grid(params, theta, p, method, ctx.jobs);
  std::ostringstream csv;
  write_basin_csv(csv, grid);
  write_file(ctx, "basin.csv", csv.str());
  auto sidecar = basin_sidecar(grid);
  sidecar["params"] = params;
  write_json(ctx, "basin.json", sidecar);

  double high = 0.0;
  const std::size_t cells = theta.size() * p.size();
  if (std::holds_alternative<SdeMethod>(method)) {
    for (double v : grid.probability) high += v;
  } else {
    for (auto b : grid.labels) high += b == Basin::High ? 1.0 : 0.0;
  }
  const double share = cells ? high / static_cast<double>(cells) : 0.0;
  Json doc{{"cells", cells}, {"high_share", share}, {"sidecar", sidecar}};
  return {doc, share};
}

Result cmd_gap(Context& ctx) {
  const auto& s = ctx.settings;
  const auto series = performance_gap(s.params(), s.init(), s.num("t_end"), s.num("step"));
  std::ostringstream csv;
  write_gap_csv(csv, series);
  write_file(ctx, "gap.csv", csv.str());
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < series.gap.size(); ++i)
    if (series.gap[i] < series.gap[argmin]) argmin = i;
  Json doc{{"points", series.times.size()},
           {"final_gap", series.gap.back()},
           {"min_gap", series.gap[argmin]},
           {"t_min_gap", series.times[argmin]}};
  return {doc, series.gap.back()};
}

Result cmd_crossing(Context& ctx) {
  const auto& s = ctx.settings;
  const auto c = crossing_time(s.params(), s.init(), s.num("t_max"));
  Json doc = c;
  write_json(ctx, "crossing.json", doc);
  return {doc, c.t_c};
}

Result cmd_crossing_curve(Context& ctx) {
  const auto& s = ctx.settings;
  const auto params = s.params();
  const auto init = s.init();
  const double t_max = s.num("t_max");
  const auto values = parse_values("theta_a_values", s.str("theta_a_values"));

  struct Row {
    std::optional<CrossingResult> result;
    std::string error;
  };
  std::vector<Row> rows(values.size());
  parallel_for(values.size(), ctx.jobs, [&](std::size_t i) {
    try {
      rows[i].result = crossing_time(params.with_theta_a(values[i]), init, t_max);
    } catch (const Error& e) {
      rows[i].error = e.code();
    }
  });

  std::string csv = "theta_a,t_c,t_star,sign_changes,status\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv += format_number(values[i]) + ',';
    if (const auto& r = rows[i].result) {
      csv += format_number(r->t_c) + ',' + format_number(r->t_star) + ',' +
             std::to_string(r->sign_changes) + ",ok\n";
    } else {
      ++failed;
      csv += ",,," + rows[i].error + "\n";
    }
  }
  write_file(ctx, "crossing_curve.csv", csv);
  if (failed) throw Unresolved(std::to_string(failed) + " crossing-curve point(s) failed");
  return {Json{{"points", values.size()}, {"failed", failed}}, std::nullopt};
}

PhaseState current_state(const Settings& s, const SessionLog& log) {
  std::optional<double> theta, p;
  if (s.has("theta_now")) theta = s.num("theta_now");
  if (s.has("p_now")) p = s.num("p_now");
  if (!p && !log.empty()) p = log.back().p;
  if (!theta)
    for (auto it = log.rbegin(); it != log.rend(); ++it)
      if (it->x == 0) {
        theta = session_skill(*it);
        break;
      }
  if (!theta || !p) throw EmptyData("cannot infer the current state from the log");
  return {*theta, *p};
}

Result cmd_estimate(Context& ctx) {
  const auto& s = ctx.settings;
  const auto& path = s.str("input");
  if (path.empty()) throw UsageError("estimate needs --input");
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  SessionLog log;
  try {
    log = read_sessions_csv(in);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  AiSkillFormula formula;
  if (s.str("formula") == "mean_loss")
    formula = AiSkillFormula::MeanLoss;
  else if (s.str("formula") == "mean_complement")
    formula = AiSkillFormula::MeanComplement;
  else
    throw UsageError("unknown formula '" + s.str("formula") + "'");

  const auto est = estimate_all(log, formula);
  std::optional<Prediction> prediction;
  std::string prediction_error;
  try {
    prediction = predict_outcome(est, current_state(s, log));
  } catch (const Error& e) {
    prediction_error = e.what();
  }
  auto report = estimation_report(est, prediction);
  if (!prediction_error.empty()) report["prediction_error"] = prediction_error;
  write_json(ctx, "estimate.json", report);
  return {report, est.theta_a};
}

using Command = Result (*)(Context&);

const std::map<std::string, Command> kCommands = {
    {"simulate", cmd_simulate},   {"equilibria", cmd_equilibria},
    {"separatrix", cmd_separatrix}, {"basin", cmd_basin},
    {"gap", cmd_gap},             {"crossing", cmd_crossing},
    {"crossing-curve", cmd_crossing_curve}, {"estimate", cmd_estimate},
};

std::vector<Key> keys_for(const std::string& command) {
  std::vector<Key> keys = kModelKeys;
  const auto& own = kCommandKeys.at(command);
  keys.insert(keys.end(), own.begin(), own.end());
  return keys;
}

Settings resolve(const std::string& command, const KeyValues& file, const KeyValues& flags) {
  Settings s;
  for (const auto& k : keys_for(command)) {
    const std::string name = k.name;
    if (auto it = flags.find(name); it != flags.end())
      s.kv[name] = it->second;
    else if (auto jt = file.find(name); jt != file.end())
      s.kv[name] = jt->second;
    else if (k.fallback)
      s.kv[name] = k.fallback;
  }
  return s;
}

std::string csv_safe(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

Result cmd_sweep(Context& ctx, const KeyValues& file, const KeyValues& flags) {
  const auto& s = ctx.settings;
  const auto op = s.str("op");
  const auto found = kCommands.find(op);
  if (found == kCommands.end() || op == "estimate")
    throw UsageError("sweep cannot run operation '" + op + "'");
  const auto vary = s.str("vary");
  bool known = false;
  for (const auto& k : keys_for(op)) known = known || vary == k.name;
  if (!known) throw UsageError("operation '" + op + "' has no setting '" + vary + "'");
  const auto values = parse_values("values", s.str("values"));

  // Resolved settings for the operation, echoed into the manifest.
  const auto base = resolve(op, file, flags);
  for (const auto& [k, v] : base.kv) ctx.settings.kv.emplace(k, v);

  struct Point {
    std::string status = "ok";
    std::optional<double> headline;
    std::string error;
    std::vector<std::string> outputs;
  };
  std::vector<Point> points(values.size());
  const std::size_t inner_jobs = values.size() > 1 ? 1 : ctx.jobs;
  std::mutex io;
  parallel_for(values.size(), ctx.jobs, [&](std::size_t i) {
    Context sub;
    sub.settings = base;
    sub.settings.kv[vary] = exact(values[i]);
    sub.out_dir = ctx.out_dir;
    sub.jobs = inner_jobs;
    char dir[32];
    std::snprintf(dir, sizeof dir, "point_%04zu", i);
    sub.prefix = ctx.prefix / dir;
    try {
      auto r = found->second(sub);
      points[i].headline = r.headline;
    } catch (const Error& e) {
      points[i].status = "error";
      points[i].error = e.code() + ": " + e.what();
    } catch (const UsageError& e) {
      points[i].status = "error";
      points[i].error = std::string("usage: ") + e.what();
    }
    points[i].outputs = std::move(sub.outputs);
  });

  std::string index = "index," + vary + ",status,headline,outputs,error\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& pt = points[i];
    if (pt.status != "ok") ++failed;
    std::string outs;
    for (const auto& o : pt.outputs) outs += (outs.empty() ? "" : ";") + o;
    index += std::to_string(i) + ',' + format_number(values[i]) + ',' + pt.status + ',' +
             (pt.headline ? format_number(*pt.headline) : "") + ',' + outs + ',' +
             csv_safe(pt.error) + '\n';
    ctx.outputs.insert(ctx.outputs.end(), pt.outputs.begin(), pt.outputs.end());
  }
  write_file(ctx, "index.csv", index);
  Json doc{{"op", op}, {"vary", vary}, {"points", values.size()}, {"failed", failed}};
  if (failed) doc["exit"] = static_cast<int>(kNumericError);
  return {doc, std::nullopt};
}

KeyValues load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    // A run manifest: replay its resolved config.
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      throw UsageError(std::string("bad manifest: ") + e.what());
    }
    KeyValues kv;
    for (const auto& [k, v] : j.at("config").items())
      kv[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return kv;
  }
  try {
    return parse_key_values(buf);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
}

void report_error(std::ostream& err, bool as_json, const std::string& code,
                  const std::string& message, int exit) {
  if (as_json)
    err << Json{{"error", {{"code", code}, {"message", message}, {"exit", exit}}}}.dump() << "\n";
  else
    err << "error: " << message << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skill/delegation dynamics toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  bool error_json = false;

  struct Sub {
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Sub> subs;

  std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "integrate one trajectory (ode, discrete or sde)"},
      {"equilibria", "fixed points and their stability"},
      {"separatrix", "stable manifold of the saddle and its closed-form approximation"},
      {"basin", "basin-of-attraction grid"},
      {"gap", "performance gap against the no-AI learner"},
      {"crossing", "end of the short-run advantage"},
      {"crossing-curve", "crossing time over a list of AI skills"},
      {"estimate", "fit parameters to a session log and predict the basin"},
      {"sweep", "run one operation over a list of parameter values"},
  };

  for (const auto& [name, help] : commands) {
    auto& sub = subs[name];
    sub.app = app.add_subcommand(name, help);
    sub.app->add_option("--config", config_path, "flat key=value file or run manifest");
    sub.app->add_flag("--error-json", error_json, "print errors as JSON on stderr");
    std::vector<Key> keys = kModelKeys;
    keys.insert(keys.end(), kRunKeys.begin(), kRunKeys.end());
    if (name == "sweep") {
      std::set<std::string> seen;
      for (const auto& k : keys) seen.insert(k.name);
      for (const auto& [cmd, own] : kCommandKeys)
        for (const auto& k : own)
          if (seen.insert(k.name).second) keys.push_back(k);
    } else {
      const auto& own = kCommandKeys.at(name);
      keys.insert(keys.end(), own.begin(), own.end());
    }
    for (const auto& k : keys) {
      std::string desc = k.help;
      if (k.fallback && *k.fallback) desc += " [" + std::string(k.fallback) + "]";
      sub.options[k.name] = sub.app->add_option(key_to_flag(k.name), sub.values[k.name], desc);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, error_json, "UsageError", e.what(), kUsageError);
    return kUsageError;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub.app->parsed()) command = name;
  auto& sub = subs.at(command);

  const auto started = std::chrono::steady_clock::now();
  try {
    KeyValues flags;
    for (const auto& [k, opt] : sub.options)
      if (opt->count() > 0) flags[k] = sub.values[k];
    KeyValues file;
    if (!config_path.empty()) file = load_config(config_path);

    Context ctx;
    ctx.settings = resolve(command, file, flags);

    // Run plumbing: flags beat the environment, which beats the config file.
    KeyValues run_kv{{"out", "."}, {"jobs", "0"}};
    for (const auto& k : {"out", "jobs"})
      if (auto it = file.find(k); it != file.end()) run_kv[k] = it->second;
    if (const char* env = std::getenv(kOutEnv); env && *env) run_kv["out"] = env;
    if (const char* env = std::getenv(kJobsEnv); env && *env) run_kv["jobs"] = env;
    for (const auto& k : {"out", "jobs"})
      if (auto it = flags.find(k); it != flags.end()) run_kv[k] = it->second;
    Settings run_settings;
    run_settings.kv = run_kv;
    ctx.out_dir = run_settings.str("out");
    ctx.jobs = run_settings.count("jobs");

    Result result;
    if (command == "sweep")
      result = cmd_sweep(ctx, file, flags);
    else
      result = kCommands.at(command)(ctx);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json seeds = Json::array();
    if (ctx.settings.has("seed")) seeds.push_back(ctx.settings.count("seed"));
    Json manifest{{"command", command},
                  {"tool_version", kToolVersion},
                  {"config", config_json(ctx.settings)},
                  {"seeds", seeds},
                  {"outputs", ctx.outputs},
                  {"wall_time_s", wall}};
    manifest["outputs"].push_back("manifest.json");
    fs::create_directories(ctx.out_dir);
    std::ofstream(ctx.out_dir / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";

    out << result.doc.dump(2) << "\n";
    if (result.doc.contains("exit")) {
      report_error(err, error_json, "PointFailed",
                   std::to_string(result.doc["failed"].get<std::size_t>()) + " sweep point(s) failed",
                   kNumericError);
      return kNumericError;
    }
    return kOk;
  } catch (const UsageError& e) {
    report_error(err, error_json, "UsageError", e.what(), kUsageError);
    return kUsageError;
  } catch (const Error& e) {
    report_error(err, error_json, e.code(), e.what(), kNumericError);
    return kNumericError;
  } catch (const std::exception& e) {
    report_error(err, error_json, "InternalError", e.what(), kNumericError);
    return kNumericError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace skilldyn::cli
