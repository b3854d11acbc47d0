#include "kinopt/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/version.hpp>
#include <json.hpp>

#include "kinopt/binary.hpp"
#include "kinopt/dsmc.hpp"
#include "kinopt/error.hpp"
#include "kinopt/fokker_planck.hpp"
#include "kinopt/micro.hpp"
#include "kinopt/rng.hpp"

#ifndef KINOPT_PRESET_DIR
#define KINOPT_PRESET_DIR "presets"
#endif

namespace kinopt {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Parsing helpers

std::size_t line_at_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Dotted path plus the sequence of keys used to locate it in the source.
struct Path {
  std::string dotted;
  std::vector<std::string> keys;

  Path child(const std::string& key) const {
    Path p{dotted.empty() ? key : dotted + "." + key, keys};
    p.keys.push_back(key);
    return p;
  }
  Path index(std::size_t i) const {
    Path p{dotted + "[" + std::to_string(i) + "]", keys};
    p.keys.push_back("#" + std::to_string(i));
    return p;
  }
};

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  // Best effort: finds each key in turn after the previous one; array
  // indices skip ahead over that many '{' characters.
  std::size_t line_of(const Path& path) const {
    std::size_t pos = 0;
    for (const auto& key : path.keys) {
      if (!key.empty() && key[0] == '#') {
        std::size_t n = std::stoul(key.substr(1)) + 1;
        for (; n > 0; --n) {
          const auto found = text_.find('{', pos + 1);
          if (found == std::string::npos) break;
          pos = found;
        }
        continue;
      }
      const auto found = text_.find("\"" + key + "\"", pos);
      if (found == std::string::npos) return pos == 0 ? 0 : line_at_offset(text_, pos);
      pos = found;
    }
    return path.keys.empty() ? 0 : line_at_offset(text_, pos);
  }

  [[noreturn]] void fail(const Path& path, const std::string& message) const {
    throw ConfigError(path.dotted, line_of(path), message);
  }

  void expect_object(const json& node, const Path& path) const {
    if (!node.is_object()) fail(path, "expected an object");
  }

  void check_keys(const json& node, const Path& path, std::initializer_list<const char*> allowed) const {
    expect_object(node, path);
    for (auto it = node.begin(); it != node.end(); ++it) {
      const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
      if (!known) fail(path.child(it.key()), "unknown key");
    }
  }

  double number(const json& node, const Path& path) const {
    if (!node.is_number()) fail(path, "expected a number");
    return node.get<double>();
  }

  // Number or the string "inf".
  double extended(const json& node, const Path& path) const {
    if (node.is_string() && node.get<std::string>() == "inf") return kInfinity;
    if (node.is_string() && node.get<std::string>() == "-inf") return -kInfinity;
    if (!node.is_number()) fail(path, "expected a number or \"inf\"");
    return node.get<double>();
  }

  std::uint64_t unsigned_integer(const json& node, const Path& path) const {
    if (!node.is_number_integer() || (node.is_number_integer() && !node.is_number_unsigned() && node.get<std::int64_t>() < 0)) {
      fail(path, "expected a nonnegative integer");
    }
    return node.get<std::uint64_t>();
  }

  std::string string(const json& node, const Path& path) const {
    if (!node.is_string()) fail(path, "expected a string");
    return node.get<std::string>();
  }

  std::string choice(const json& node, const Path& path, std::initializer_list<const char*> options) const {
    const auto s = string(node, path);
    if (std::none_of(options.begin(), options.end(), [&](const char* o) { return s == o; })) {
      std::string list;
      for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
      fail(path, "unknown value \"" + s + "\" (expected one of: " + list + ")");
    }
    return s;
  }

 private:
  const std::string& text_;
};

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", line_at_offset(text, e.byte == 0 ? 0 : e.byte - 1), std::string("malformed document: ") + e.what());
  }
}

ScenarioConfig parse_scenario(const json& root, const Reader& r, const Path& base) {
  ScenarioConfig c;
  r.check_keys(root, base, {"model", "control", "scaling", "run", "output"});

  if (root.contains("model")) {
    const Path p = base.child("model");
    const auto& m = root["model"];
    r.check_keys(m, p, {"P", "D", "Q", "noise", "rule"});
    if (m.contains("P")) {
      const Path pp = p.child("P");
      const auto& P = m["P"];
      if (P.is_string()) {
        c.model.P.kind = r.choice(P, pp, {"constant", "sznajd", "bounded_confidence"});
      } else {
        r.check_keys(P, pp, {"kind", "gamma", "delta"});
        if (!P.contains("kind")) r.fail(pp.child("kind"), "missing required key");
        c.model.P.kind = r.choice(P["kind"], pp.child("kind"), {"constant", "sznajd", "bounded_confidence"});
        if (P.contains("gamma")) c.model.P.gamma = r.number(P["gamma"], pp.child("gamma"));
        if (P.contains("delta")) c.model.P.delta = r.number(P["delta"], pp.child("delta"));
      }
    }
    if (m.contains("D")) c.model.D = r.choice(m["D"], p.child("D"), {"none", "quadratic"});
    if (m.contains("Q")) {
      const Path qp = p.child("Q");
      const auto& Q = m["Q"];
      if (Q.is_string()) {
        c.model.Q.kind = r.choice(Q, qp, {"uniform", "quadratic_floor"});
      } else {
        r.check_keys(Q, qp, {"kind", "floor"});
        if (!Q.contains("kind")) r.fail(qp.child("kind"), "missing required key");
        c.model.Q.kind = r.choice(Q["kind"], qp.child("kind"), {"uniform", "quadratic_floor"});
        if (Q.contains("floor")) c.model.Q.floor = r.number(Q["floor"], qp.child("floor"));
      }
    }
    if (m.contains("noise")) {
      const Path np = p.child("noise");
      const auto& N = m["noise"];
      r.check_keys(N, np, {"kind", "half_width"});
      if (N.contains("kind")) c.model.noise.kind = r.choice(N["kind"], np.child("kind"), {"scaled", "none", "uniform"});
      if (N.contains("half_width")) c.model.noise.half_width = r.number(N["half_width"], np.child("half_width"));
    }
    if (m.contains("rule")) {
      c.model.rule = r.choice(m["rule"], p.child("rule"), {"base", "noise_coupled", "mean_control", "agent_weighted"});
    }
  }

  if (root.contains("control")) {
    const Path p = base.child("control");
    const auto& m = root["control"];
    r.check_keys(m, p, {"w_d", "nu", "kappa", "clamp"});
    if (m.contains("w_d")) c.control.w_d = r.number(m["w_d"], p.child("w_d"));
    if (m.contains("nu")) c.control.nu = r.number(m["nu"], p.child("nu"));
    if (m.contains("kappa")) c.control.kappa = r.extended(m["kappa"], p.child("kappa"));
    if (m.contains("clamp")) {
      const auto& cl = m["clamp"];
      if (!cl.is_array() || cl.size() != 2) r.fail(p.child("clamp"), "expected [u_L, u_R]");
      c.control.clamp = ControlClamp{r.extended(cl[0], p.child("clamp")), r.extended(cl[1], p.child("clamp"))};
    }
  }

  if (root.contains("scaling")) {
    const Path p = base.child("scaling");
    const auto& m = root["scaling"];
    r.check_keys(m, p, {"epsilon", "varsigma"});
    if (m.contains("epsilon")) c.scaling.epsilon = r.number(m["epsilon"], p.child("epsilon"));
    if (m.contains("varsigma")) c.scaling.varsigma = r.number(m["varsigma"], p.child("varsigma"));
  }

  const Path rp = base.child("run");
  if (!root.contains("run")) r.fail(rp, "missing required section");
  {
    const auto& m = root["run"];
    r.check_keys(m, rp, {"mode", "samples", "agents", "t_final", "record_dt", "dt", "seed", "repetitions",
                         "collision_probability", "initial"});
    if (!m.contains("mode")) r.fail(rp.child("mode"), "missing required key");
    c.run.mode = r.choice(m["mode"], rp.child("mode"), {"micro", "dsmc", "steady", "moments"});
    if (m.contains("samples") && m.contains("agents")) r.fail(rp.child("agents"), "give only one of samples/agents");
    if (m.contains("samples")) c.run.samples = r.unsigned_integer(m["samples"], rp.child("samples"));
    if (m.contains("agents")) c.run.samples = r.unsigned_integer(m["agents"], rp.child("agents"));
    if (m.contains("t_final")) c.run.t_final = r.number(m["t_final"], rp.child("t_final"));
    if (m.contains("record_dt")) c.run.record_dt = r.number(m["record_dt"], rp.child("record_dt"));
    if (m.contains("dt")) c.run.dt = r.number(m["dt"], rp.child("dt"));
    if (m.contains("seed")) c.run.seed = r.unsigned_integer(m["seed"], rp.child("seed"));
    if (m.contains("repetitions")) c.run.repetitions = r.unsigned_integer(m["repetitions"], rp.child("repetitions"));
    if (m.contains("collision_probability")) {
      c.run.collision_probability = r.number(m["collision_probability"], rp.child("collision_probability"));
    }
    if (m.contains("initial")) {
      const Path ip = rp.child("initial");
      const auto& I = m["initial"];
      r.check_keys(I, ip, {"kind", "lo", "hi"});
      if (I.contains("kind")) c.run.initial.kind = r.choice(I["kind"], ip.child("kind"), {"uniform", "grid"});
      if (I.contains("lo")) c.run.initial.lo = r.number(I["lo"], ip.child("lo"));
      if (I.contains("hi")) c.run.initial.hi = r.number(I["hi"], ip.child("hi"));
    }
  }

  if (root.contains("output")) {
    const Path p = base.child("output");
    const auto& m = root["output"];
    r.check_keys(m, p, {"path", "format", "bins"});
    if (m.contains("path")) c.output.path = r.string(m["path"], p.child("path"));
    if (m.contains("format")) c.output.format = r.choice(m["format"], p.child("format"), {"csv", "json"});
    if (m.contains("bins")) c.output.bins = r.unsigned_integer(m["bins"], p.child("bins"));
  }
  return c;
}

double step_of(const ScenarioConfig& c) {
  if (c.run.mode == "micro") return c.run.dt;
  if (c.run.mode == "dsmc") return c.run.collision_probability * c.scaling.epsilon;
  return 0.0;
}

bool is_multiple(double span, double step) {
  const double ratio = span / step;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

void validate_scenario(const ScenarioConfig& c, const Reader& r, const Path& base) {
  const Path cp = base.child("control");
  const Path rp = base.child("run");
  const auto& mode = c.run.mode;
  const bool micro = mode == "micro";

  if (c.control.nu.has_value() == c.control.kappa.has_value()) {
    r.fail(c.control.nu ? cp.child("nu") : cp, "exactly one of nu/kappa must be set");
  }
  if (micro && !c.control.nu) r.fail(cp.child("kappa"), "exactly one of nu/kappa: micro mode takes nu");
  if (!micro && !c.control.kappa) r.fail(cp.child("nu"), "exactly one of nu/kappa: " + mode + " mode takes kappa");
  if (c.control.nu && !(*c.control.nu > 0.0)) r.fail(cp.child("nu"), "nu must be positive");
  if (c.control.kappa && !(*c.control.kappa > 0.0)) r.fail(cp.child("kappa"), "kappa must be positive");
  if (!in_opinion_range(c.control.w_d)) r.fail(cp.child("w_d"), "w_d must lie in [-1, 1]");
  if (c.control.clamp && !(c.control.clamp->lower < c.control.clamp->upper)) {
    r.fail(cp.child("clamp"), "clamp needs u_L < u_R");
  }
  if (c.control.clamp && !micro) r.fail(cp.child("clamp"), "clamp is honored only in micro mode");

  const Path mp = base.child("model");
  if (c.model.P.kind == "bounded_confidence" && !(c.model.P.delta > 0.0 && c.model.P.delta <= 2.0)) {
    r.fail(mp.child("P").child("delta"), "delta must lie in (0, 2]");
  }
  if (c.model.Q.kind == "quadratic_floor" && !(c.model.Q.floor > 0.0 && c.model.Q.floor <= 1.0)) {
    r.fail(mp.child("Q").child("floor"), "floor must lie in (0, 1]");
  }
  if (c.model.noise.kind == "uniform" && !(c.model.noise.half_width > 0.0)) {
    r.fail(mp.child("noise").child("half_width"), "uniform noise needs a positive half_width");
  }

  const Path sp = base.child("scaling");
  if (!(c.scaling.epsilon > 0.0)) r.fail(sp.child("epsilon"), "epsilon must be positive");
  if (!(c.scaling.varsigma >= 0.0)) r.fail(sp.child("varsigma"), "varsigma must be nonnegative");

  if (!(c.run.t_final >= 0.0)) r.fail(rp.child("t_final"), "t_final must be nonnegative");
  if (!(c.run.record_dt >= 0.0)) r.fail(rp.child("record_dt"), "record_dt must be nonnegative");
  if (c.run.repetitions < 1) r.fail(rp.child("repetitions"), "repetitions must be at least 1");
  if (!(c.run.initial.lo >= -1.0 && c.run.initial.lo < c.run.initial.hi && c.run.initial.hi <= 1.0)) {
    r.fail(rp.child("initial"), "initial data needs -1 <= lo < hi <= 1");
  }
  if (c.output.bins < 2) r.fail(base.child("output").child("bins"), "bins must be at least 2");

  if (micro) {
    if (!(c.run.dt > 0.0)) r.fail(rp.child("dt"), "dt must be positive");
    if (c.run.samples < 1) r.fail(rp.child("agents"), "micro mode needs at least one agent");
  }
  if (mode == "dsmc") {
    if (c.run.samples < 2 || c.run.samples % 2 != 0) {
      r.fail(rp.child("samples"), "dsmc needs an even sample count of at least 2");
    }
    if (!(c.run.collision_probability > 0.0 && c.run.collision_probability <= 1.0)) {
      r.fail(rp.child("collision_probability"), "collision_probability must lie in (0, 1]");
    }
    if (c.model.rule != "agent_weighted" && c.model.Q.kind != "uniform") {
      r.fail(mp.child("Q"), "a control weight needs rule agent_weighted");
    }
  }
  if (micro || mode == "dsmc") {
    const double step = step_of(c);
    if (!is_multiple(c.run.t_final, step)) r.fail(rp.child("t_final"), "t_final must be a multiple of the time step");
    if (c.run.record_dt > 0.0 && !is_multiple(c.run.record_dt, step)) {
      r.fail(rp.child("record_dt"), "record_dt must be a multiple of the time step");
    }
  }
  if (mode == "steady" || mode == "moments") {
    if (c.model.D != "quadratic" && mode == "steady") r.fail(mp.child("D"), "steady mode needs D = quadratic");
    if (mode == "steady") {
      const bool constant = c.model.P.kind == "constant";
      const bool sznajd1 = c.model.P.kind == "sznajd" && c.model.P.gamma == 1.0;
      if (!constant && !sznajd1) r.fail(mp.child("P"), "steady mode needs P constant or sznajd with gamma = 1");
      if (!(c.scaling.varsigma > 0.0)) r.fail(sp.child("varsigma"), "steady mode needs varsigma > 0");
      if (!(std::abs(c.control.w_d) < 1.0)) r.fail(cp.child("w_d"), "steady mode needs |w_d| < 1");
    }
    if (mode == "moments" && c.model.P.kind != "constant") {
      r.fail(mp.child("P"), "moment equations are closed only for constant P");
    }
    if (mode == "moments" && c.run.initial.kind == "grid" && c.run.samples < 1) {
      r.fail(rp.child("samples"), "grid initial data needs a sample count");
    }
  }

  // Cross-module invariants.
  ModelSpec spec;
  spec.P = make_compromise(c);
  spec.noise = c.model.noise.kind == "uniform" ? NoiseModel::uniform(c.model.noise.half_width) : NoiseModel::none();
  spec.control.w_d = c.control.w_d;
  spec.control.nu = micro ? *c.control.nu : c.scaling.epsilon * *c.control.kappa;
  spec.control.clamp = c.control.clamp;
  if (!micro) spec.scaling = ScalingParams{c.scaling.epsilon, *c.control.kappa, c.scaling.varsigma};
  const auto report = validate_spec(spec);
  if (!report.ok()) {
    for (const auto& check : report.checks) {
      if (check.severity == ValidationCheck::Severity::Error) r.fail(base, check.name + ": " + check.message);
    }
  }
}

json scenario_to_json(const ScenarioConfig& c) {
  auto ext = [](double x) -> json { return std::isinf(x) ? json(x > 0 ? "inf" : "-inf") : json(x); };
  json j;
  j["model"] = {{"P", {{"kind", c.model.P.kind}, {"gamma", c.model.P.gamma}, {"delta", c.model.P.delta}}},
                {"D", c.model.D},
                {"Q", {{"kind", c.model.Q.kind}, {"floor", c.model.Q.floor}}},
                {"noise", {{"kind", c.model.noise.kind}, {"half_width", c.model.noise.half_width}}},
                {"rule", c.model.rule}};
  json control = {{"w_d", c.control.w_d}};
  if (c.control.nu) control["nu"] = *c.control.nu;
  if (c.control.kappa) control["kappa"] = ext(*c.control.kappa);
  if (c.control.clamp) control["clamp"] = json::array({ext(c.control.clamp->lower), ext(c.control.clamp->upper)});
  j["control"] = control;
  j["scaling"] = {{"epsilon", c.scaling.epsilon}, {"varsigma", c.scaling.varsigma}};
  j["run"] = {{"mode", c.run.mode},
              {"samples", c.run.samples},
              {"t_final", c.run.t_final},
              {"record_dt", c.run.record_dt},
              {"dt", c.run.dt},
              {"seed", c.run.seed},
              {"repetitions", c.run.repetitions},
              {"collision_probability", c.run.collision_probability},
              {"initial", {{"kind", c.run.initial.kind}, {"lo", c.run.initial.lo}, {"hi", c.run.initial.hi}}}};
  j["output"] = {{"path", c.output.path}, {"format", c.output.format}, {"bins", c.output.bins}};
  return j;
}

// ---------------------------------------------------------------------------
// Output

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_file(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + file.string());
  out << content;
  if (!out) throw InvalidArgument("failed writing " + file.string());
}

// Writes `stem`.csv or `stem`.json; returns the file name.
std::string write_table(const std::filesystem::path& dir, const std::string& stem, const Table& t,
                        const std::string& format) {
  if (format == "json") {
    json j;
    j["columns"] = t.columns;
    j["rows"] = t.rows;
    write_file(dir / (stem + ".json"), j.dump(2) + "\n");
    return stem + ".json";
  }
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ",";
      s += fmt(row[i]);
    }
    s += "\n";
  }
  write_file(dir / (stem + ".csv"), s);
  return stem + ".csv";
}

Table trace_table(const MomentTrace& trace) {
  Table t;
  t.columns = {"t", "m", "E", "dist_wd", "u_or_rejrate"};
  const bool err = !trace.m_stderr.empty();
  if (err) t.columns.push_back("m_stderr");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::vector<double> row{trace.t[i], trace.m[i], trace.E[i], trace.dist_wd(i), trace.aux[i]};
    if (err) row.push_back(trace.m_stderr[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table histogram_table(const Histogram& h) {
  Table t;
  t.columns = {"bin_left", "bin_right", "density"};
  for (std::size_t k = 0; k < h.bins(); ++k) t.rows.push_back({h.edges[k], h.edges[k + 1], h.density[k]});
  return t;
}

Table analytic_table(const SteadyDensity& f) {
  Table t;
  t.columns = {"w", "f_steady"};
  constexpr int kPoints = 401;
  for (int i = 0; i < kPoints; ++i) {
    const double w = i == kPoints - 1 ? 1.0 : -1.0 + 2.0 * i / (kPoints - 1);
    t.rows.push_back({w, f(w)});
  }
  return t;
}

RuleKind rule_kind(const std::string& s) {
  if (s == "noise_coupled") return RuleKind::NoiseCoupled;
  if (s == "mean_control") return RuleKind::MeanControl;
  if (s == "agent_weighted") return RuleKind::AgentWeighted;
  return RuleKind::Base;
}

OpinionEnsemble initial_ensemble(const ScenarioConfig& c, std::uint64_t seed) {
  if (c.run.initial.kind == "grid") return OpinionEnsemble::grid(c.run.samples, c.run.initial.lo, c.run.initial.hi);
  return OpinionEnsemble::uniform(c.run.samples, c.run.initial.lo, c.run.initial.hi, seed);
}

// Exact moments of the initial law (the moment ODE starts from these).
std::pair<double, double> initial_moments(const ScenarioConfig& c) {
  if (c.run.initial.kind == "grid") {
    const auto e = OpinionEnsemble::grid(c.run.samples, c.run.initial.lo, c.run.initial.hi);
    return {e.mean(), e.second_moment()};
  }
  const double a = c.run.initial.lo;
  const double b = c.run.initial.hi;
  return {0.5 * (a + b), (a * a + a * b + b * b) / 3.0};
}

// Stationary profile to overlay, when the configured model has one.
std::optional<SteadyDensity> analytic_for(const ScenarioConfig& c) {
  if (c.model.D != "quadratic" || !(c.scaling.varsigma > 0.0) || !c.control.kappa) return std::nullopt;
  if (c.run.mode == "dsmc" && (c.model.noise.kind != "scaled" || c.model.rule != "base")) return std::nullopt;
  if (!(std::abs(c.control.w_d) < 1.0)) return std::nullopt;
  SteadyParams p;
  p.w_d = c.control.w_d;
  p.varsigma = c.scaling.varsigma;
  p.kappa = *c.control.kappa;
  if (c.model.P.kind == "constant") {
    p.family = SteadyFamily::ConstantP;
    // Without control the mean is conserved, so the profile is centred on it.
    if (std::isinf(p.kappa) && c.run.mode != "steady") p.mean = initial_moments(c).first;
  } else if (c.model.P.kind == "sznajd" && c.model.P.gamma == 1.0) {
    p.family = SteadyFamily::SznajdP;
  } else {
    return std::nullopt;
  }
  try {
    return SteadyDensity(p);
  } catch (const QuadratureFailure&) {
    if (c.run.mode == "steady") throw;
    return std::nullopt;
  }
}

MomentTrace average(const std::vector<MomentTrace>& traces) {
  if (traces.size() == 1) return traces.front();
  MomentTrace out;
  out.w_d = traces.front().w_d;
  const std::size_t n = traces.front().size();
  const double R = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0, E = 0.0, var = 0.0, aux = 0.0;
    for (const auto& t : traces) {
      m += t.m[i];
      E += t.E[i];
      var += t.var[i];
      aux += t.aux[i];
    }
    m /= R;
    double spread = 0.0;
    for (const auto& t : traces) spread += (t.m[i] - m) * (t.m[i] - m);
    out.t.push_back(traces.front().t[i]);
    out.m.push_back(m);
    out.E.push_back(E / R);
    out.var.push_back(var / R);
    out.aux.push_back(aux / R);
    out.m_stderr.push_back(std::sqrt(spread / (R - 1.0) / R));
  }
  return out;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  const json root = parse_json(text);
  Reader r(text);
  const Path base{};
  auto c = parse_scenario(root, r, base);
  validate_scenario(c, r, base);
  return c;
}

std::string to_json(const ScenarioConfig& config) { return scenario_to_json(config).dump(2); }

CompromiseFunction make_compromise(const ScenarioConfig& c) {
  if (c.model.P.kind == "sznajd") return CompromiseFunction::sznajd(c.model.P.gamma);
  if (c.model.P.kind == "bounded_confidence") {
    if (!(c.model.P.delta > 0.0 && c.model.P.delta <= 2.0)) {
      throw ConfigError("model.P.delta", 0, "delta must lie in (0, 2]");
    }
    return CompromiseFunction::bounded_confidence(c.model.P.delta);
  }
  return CompromiseFunction::constant();
}

DiffusionFunction make_diffusion(const ScenarioConfig& c) {
  return c.model.D == "quadratic" ? DiffusionFunction::quadratic() : DiffusionFunction::none();
}

ControlWeight make_weight(const ScenarioConfig& c) {
  if (c.model.Q.kind == "quadratic_floor") {
    const double floor = c.model.Q.floor;
    return ControlWeight::custom([floor](double w) { return std::max(floor, (1.0 - w) * (1.0 + w)); },
                                 "quadratic_floor");
  }
  return ControlWeight::uniform();
}

ScenarioOutcome run_scenario(ScenarioConfig config, const RunOverrides& overrides) {
  const auto start = std::chrono::steady_clock::now();
  if (overrides.seed) config.run.seed = *overrides.seed;
  if (overrides.out) config.output.path = overrides.out->string();
  {
    // Re-validate after overrides and for configs built in code.
    const std::string text = to_json(config);
    Reader r(text);
    validate_scenario(config, r, Path{});
  }

  ScenarioOutcome outcome;
  outcome.config = config;
  outcome.directory = config.output.path;
  std::filesystem::create_directories(outcome.directory);
  const auto& c = config;
  const auto& fmt_kind = c.output.format;

  std::vector<MomentTrace> traces;
  std::vector<double> pooled;
  const bool simulate = c.run.mode == "micro" || c.run.mode == "dsmc";
  for (std::size_t rep = 0; rep < (simulate ? c.run.repetitions : 1); ++rep) {
    const std::uint64_t rep_seed =
        rep == 0 ? c.run.seed : derive_seed(c.run.seed, "repetition/" + std::to_string(rep));
    if (c.run.mode == "micro") {
      MicroState state{initial_ensemble(c, rep_seed), 0.0, c.run.dt};
      ControlParams ctrl{c.control.w_d, *c.control.nu, c.control.clamp};
      MicroRunOptions opt;
      opt.horizon = c.run.t_final;
      opt.record_dt = c.run.record_dt;
      opt.workers = overrides.workers;
      if (c.model.Q.kind != "uniform") opt.Q = make_weight(c);
      auto run = run_micro(state, make_compromise(c), ctrl, opt);
      traces.push_back(std::move(run.trace));
      const auto v = run.final_state.ensemble.values();
      pooled.insert(pooled.end(), v.begin(), v.end());
    } else if (c.run.mode == "dsmc") {
      const ScalingParams scaling{c.scaling.epsilon, *c.control.kappa, c.scaling.varsigma};
      auto rule = BinaryRule::scaled(rule_kind(c.model.rule), scaling, make_compromise(c), make_diffusion(c),
                                     c.control.w_d);
      rule.Q = make_weight(c);
      if (c.model.noise.kind == "none") rule.noise = NoiseModel::none();
      if (c.model.noise.kind == "uniform") rule.noise = NoiseModel::uniform(c.model.noise.half_width);
      DsmcOptions opt;
      opt.collision_probability = c.run.collision_probability;
      opt.seed = derive_seed(rep_seed, "dsmc");
      opt.workers = overrides.workers;
      auto run = run_dsmc(initial_ensemble(c, rep_seed), rule, scaling, c.run.t_final, c.run.record_dt, opt);
      traces.push_back(std::move(run.trace));
      const auto v = run.final_ensemble.values();
      pooled.insert(pooled.end(), v.begin(), v.end());
    } else if (c.run.mode == "moments") {
      const auto [m0, E0] = initial_moments(c);
      MomentOdeOptions opt;
      opt.w_d = c.control.w_d;
      opt.record_dt = c.run.record_dt;
      traces.push_back(moment_ode_solve(m0, E0, c.run.t_final, *c.control.kappa, c.scaling.varsigma,
                                        make_diffusion(c), opt));
    }
  }

  if (!traces.empty()) {
    outcome.trace = average(traces);
    outcome.files.push_back(write_table(outcome.directory, "trace", trace_table(outcome.trace), fmt_kind));
  }
  if (!pooled.empty() && pooled.size() >= 2) {
    outcome.histogram = histogram(pooled, c.output.bins);
    outcome.files.push_back(write_table(outcome.directory, "hist_final", histogram_table(*outcome.histogram), fmt_kind));
  }
  if (c.run.mode != "moments") {
    if (const auto f = analytic_for(c)) {
      outcome.files.push_back(write_table(outcome.directory, "analytic", analytic_table(*f), fmt_kind));
    }
  }

  outcome.final_opinions = std::move(pooled);
  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json meta;
  meta["config"] = scenario_to_json(c);
  meta["seed"] = c.run.seed;
  meta["workers"] = overrides.workers;
  meta["versions"] = {{"kinopt", kVersion}, {"boost", BOOST_LIB_VERSION}, {"compiler", __VERSION__}};
  meta["wall_time_seconds"] = outcome.wall_seconds;
  meta["files"] = outcome.files;
  write_file(outcome.directory / "meta.json", meta.dump(2) + "\n");
  outcome.files.push_back("meta.json");
  return outcome;
}

namespace {

struct Sweep {
  ScenarioConfig base;
  std::vector<double> kappa;
  std::vector<double> w_d;
  std::string table = "table1";
};

struct NamedRun {
  std::string name;
  ScenarioConfig config;
};

struct Document {
  std::optional<ScenarioConfig> single;
  std::vector<NamedRun> runs;
  std::optional<Sweep> sweep;
};

std::string number_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

Document parse_document(const std::string& text) {
  const json root = parse_json(text);
  Reader r(text);
  Document doc;
  if (!root.is_object()) r.fail(Path{}, "expected an object");
  if (root.contains("runs")) {
    const Path p = Path{}.child("runs");
    r.check_keys(root, Path{}, {"runs", "description"});
    if (!root["runs"].is_array() || root["runs"].empty()) r.fail(p, "expected a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < root["runs"].size(); ++i) {
      const Path ip = p.index(i);
      const auto& item = root["runs"][i];
      r.check_keys(item, ip, {"name", "config"});
      if (!item.contains("name")) r.fail(ip.child("name"), "missing required key");
      if (!item.contains("config")) r.fail(ip.child("config"), "missing required key");
      NamedRun run{r.string(item["name"], ip.child("name")), {}};
      if (run.name.empty() || run.name.find('/') != std::string::npos || !names.insert(run.name).second) {
        r.fail(ip.child("name"), "run names must be unique, non-empty and contain no '/'");
      }
      run.config = parse_scenario(item["config"], r, ip.child("config"));
      validate_scenario(run.config, r, ip.child("config"));
      doc.runs.push_back(std::move(run));
    }
    return doc;
  }
  if (root.contains("sweep")) {
    r.check_keys(root, Path{}, {"sweep", "description"});
    const Path p = Path{}.child("sweep");
    const auto& s = root["sweep"];
    r.check_keys(s, p, {"base", "kappa", "w_d", "table"});
    for (const char* key : {"base", "kappa", "w_d"}) {
      if (!s.contains(key)) r.fail(p.child(key), "missing required key");
    }
    Sweep sweep;
    sweep.base = parse_scenario(s["base"], r, p.child("base"));
    for (const char* key : {"kappa", "w_d"}) {
      const auto& arr = s[key];
      if (!arr.is_array() || arr.empty()) r.fail(p.child(key), "expected a non-empty array");
      auto& target = std::string(key) == "kappa" ? sweep.kappa : sweep.w_d;
      for (std::size_t i = 0; i < arr.size(); ++i) target.push_back(r.extended(arr[i], p.child(key)));
    }
    if (s.contains("table")) sweep.table = r.string(s["table"], p.child("table"));
    for (double k : sweep.kappa) {
      for (double w : sweep.w_d) {
        auto cell = sweep.base;
        cell.control.kappa = k;
        cell.control.nu.reset();
        cell.control.w_d = w;
        validate_scenario(cell, r, p.child("base"));
      }
    }
    doc.sweep = std::move(sweep);
    return doc;
  }
  doc.single = parse_scenario(root, r, Path{});
  validate_scenario(*doc.single, r, Path{});
  return doc;
}

}  // namespace

std::vector<ScenarioConfig> validate_document(const std::string& text) {
  const auto doc = parse_document(text);
  std::vector<ScenarioConfig> out;
  if (doc.single) out.push_back(*doc.single);
  for (const auto& run : doc.runs) out.push_back(run.config);
  if (doc.sweep) {
    for (double k : doc.sweep->kappa) {
      for (double w : doc.sweep->w_d) {
        auto cell = doc.sweep->base;
        cell.control.kappa = k;
        cell.control.w_d = w;
        out.push_back(cell);
      }
    }
  }
  return out;
}

DocumentOutcome run_document(const std::string& text, const RunOverrides& overrides) {
  const auto doc = parse_document(text);
  DocumentOutcome out;
  if (doc.single) {
    out.runs.push_back(run_scenario(*doc.single, overrides));
    return out;
  }
  if (!doc.runs.empty()) {
    for (const auto& run : doc.runs) {
      RunOverrides o = overrides;
      if (overrides.out) o.out = *overrides.out / run.name;
      out.runs.push_back(run_scenario(run.config, o));
    }
    return out;
  }

  const auto& sweep = *doc.sweep;
  const std::filesystem::path root = overrides.out ? *overrides.out : std::filesystem::path(sweep.base.output.path);
  Table table;
  table.columns.push_back("kappa");
  for (double w : sweep.w_d) table.columns.push_back("w_d=" + number_label(w));
  for (double k : sweep.kappa) {
    std::vector<double> row{k};
    for (double w : sweep.w_d) {
      auto cell = sweep.base;
      cell.control.kappa = k;
      cell.control.w_d = w;
      RunOverrides o = overrides;
      o.out = root / ("kappa_" + number_label(k) + "_wd_" + number_label(w));
      auto result = run_scenario(cell, o);
      row.push_back(mean_error_l2(result.trace, w, cell.run.t_final));
      out.runs.push_back(std::move(result));
    }
    table.rows.push_back(std::move(row));
  }
  std::filesystem::create_directories(root);
  out.files.push_back(write_table(root, sweep.table, table, sweep.base.output.format));
  return out;
}

std::filesystem::path preset_directory() {
  if (const char* env = std::getenv("KINOPT_PRESET_DIR"); env && *env) return env;
  if (std::filesystem::is_directory(KINOPT_PRESET_DIR)) return KINOPT_PRESET_DIR;
  return "presets";
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  const auto dir = preset_directory();
  if (!std::filesystem::is_directory(dir)) return names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string load_preset(const std::string& name) {
  const auto file = preset_directory() / (name + ".json");
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown preset '" + name + "' (available: " + known + ")");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace kinopt
