#include "preytaxis/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "preytaxis/errors.hpp"
#include "preytaxis/scalar_solvers.hpp"

namespace preytaxis {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw config_error("parse", where + ": " + what);
}

double parse_double(const std::string& v, const std::string& where) {
  const std::string t = trim(v);
  if (t.empty()) bad(where, "empty number");
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) bad(where, "malformed number '" + t + "'");
  if (!std::isfinite(x)) bad(where, "non-finite number '" + t + "'");
  return x;
}

int parse_int(const std::string& v, const std::string& where) {
  const double x = parse_double(v, where);
  const int k = static_cast<int>(x);
  if (static_cast<double>(k) != x) bad(where, "expected an integer, got '" + trim(v) + "'");
  return k;
}

bool parse_bool(const std::string& v, const std::string& where) {
  const std::string t = trim(v);
  if (t == "true") return true;
  if (t == "false") return false;
  bad(where, "expected true or false, got '" + t + "'");
}

std::vector<double> parse_csv(const std::string& v, const std::string& where) {
  std::vector<double> out;
  const std::string t = trim(v);
  if (t.empty()) return out;
  size_t start = 0;
  while (true) {
    const size_t comma = t.find(',', start);
    const std::string item = t.substr(start, comma == std::string::npos ? comma : comma - start);
    out.push_back(parse_double(item, where));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::pair<std::string, std::vector<double>> parse_tagged(const std::string& v,
                                                         const std::string& where) {
  const std::string t = trim(v);
  const size_t colon = t.find(':');
  if (colon == std::string::npos) bad(where, "expected kind:args, got '" + t + "'");
  return {trim(t.substr(0, colon)), parse_csv(t.substr(colon + 1), where)};
}

InitSpec parse_init(const std::string& v, const std::string& where) {
  auto [kind, args] = parse_tagged(v, where);
  InitSpec s{kind, args};
  if (kind == "constant" || kind == "omega" || kind == "theta") {
    if (args.size() != 1) bad(where, kind + " takes exactly one argument");
  } else if (kind == "sine") {
    if (args.size() != 3) bad(where, "sine takes a,b,k");
  } else if (kind == "predictor") {
    if (!args.empty()) bad(where, "predictor takes no arguments");
  } else {
    bad(where, "unknown field kind '" + kind + "' (constant|sine|omega|theta|predictor)");
  }
  return s;
}

MotilityChoice parse_motility(const std::string& v, const std::string& where) {
  auto [kind, args] = parse_tagged(v, where);
  MotilityChoice m{kind, args};
  if (kind == "constant") {
    if (args.size() != 1) bad(where, "constant takes exactly one argument");
  } else if (kind == "rational") {
    if (args.size() != 2) bad(where, "rational takes a,b");
  } else {
    bad(where, "unknown motility kind '" + kind + "' (constant|rational)");
  }
  return m;
}

double parse_constant_tagged(const std::string& v, const std::string& where) {
  auto [kind, args] = parse_tagged(v, where);
  if (kind != "constant" || args.size() != 1) bad(where, "expected constant:c");
  return args[0];
}

Ladder parse_ladder(const std::string& v, const std::string& where) {
  auto [kind, args] = parse_tagged(v, where);
  Ladder l{kind, args};
  if (kind == "list") {
    // any length, including empty
  } else if (kind == "linspace") {
    if (args.size() != 3) bad(where, "linspace takes lo,hi,k");
    if (args[2] < 1 || args[2] != std::floor(args[2]))
      bad(where, "linspace count must be a positive integer");
  } else {
    bad(where, "unknown ladder kind '" + kind + "' (list|linspace)");
  }
  return l;
}

void assign(RunConfig& c, const std::string& key, const std::string& value,
            const std::string& where) {
  if (key == "run.command") c.command = trim(value);
  else if (key == "model.lambda") c.lambda = parse_double(value, where);
  else if (key == "model.mu") c.mu = parse_double(value, where);
  else if (key == "model.gamma") c.gamma = parse_double(value, where);
  else if (key == "model.D") c.D = parse_double(value, where);
  else if (key == "model.F") c.response_label = trim(value);
  else if (key == "model.zeta") c.zeta = parse_double(value, where);
  else if (key == "model.d") c.d_choice = parse_motility(value, where);
  else if (key == "model.chi") c.chi0 = parse_constant_tagged(value, where);
  else if (key == "grid.L") c.L = parse_double(value, where);
  else if (key == "grid.n") c.n = parse_int(value, where);
  else if (key == "solver.newton_tol") c.newton_tol = parse_double(value, where);
  else if (key == "solver.newton_max_iter") c.newton_max_iter = parse_int(value, where);
  else if (key == "solver.class_threshold") c.class_threshold = parse_double(value, where);
  else if (key == "branch.initial_step") c.branch.initial_step = parse_double(value, where);
  else if (key == "branch.min_step") c.branch.min_step = parse_double(value, where);
  else if (key == "branch.max_step") c.branch.max_step = parse_double(value, where);
  else if (key == "branch.grow_factor") c.branch.grow_factor = parse_double(value, where);
  else if (key == "branch.grow_after") c.branch.grow_after = parse_int(value, where);
  else if (key == "branch.max_steps") c.branch.max_steps = parse_int(value, where);
  else if (key == "branch.corrector_tol") c.branch.corrector_tol = parse_double(value, where);
  else if (key == "branch.max_corrector_iterations")
    c.branch.max_corrector_iterations = parse_int(value, where);
  else if (key == "branch.max_first_step_halvings")
    c.branch.max_first_step_halvings = parse_int(value, where);
  else if (key == "branch.lambda_cap") c.branch.thresholds.lambda_cap = parse_double(value, where);
  else if (key == "branch.semitrivial_sup")
    c.branch.thresholds.semitrivial_sup = parse_double(value, where);
  else if (key == "branch.semitrivial_distance")
    c.branch.thresholds.semitrivial_distance = parse_double(value, where);
  else if (key == "sim.dt") c.dt = parse_double(value, where);
  else if (key == "sim.T") c.T = parse_double(value, where);
  else if (key == "sim.snapshot_stride") c.snapshot_stride = parse_int(value, where);
  else if (key == "sim.regime_threshold") c.regime_threshold = parse_double(value, where);
  else if (key == "sim.auto_dt") c.auto_dt = parse_bool(value, where);
  else if (key == "sim.reaction_on") c.reaction_on = parse_bool(value, where);
  else if (key == "sim.max_dt_halvings") c.max_dt_halvings = parse_int(value, where);
  else if (key == "sim.u0") c.u0 = parse_init(value, where);
  else if (key == "sim.v0") c.v0 = parse_init(value, where);
  else if (key == "eig.p") c.eig_p = parse_double(value, where);
  else if (key == "eig.q") c.eig_q = parse_double(value, where);
  else if (key == "eig.r") c.eig_r = parse_double(value, where);
  else if (key == "logistic.p") c.logistic_p = parse_double(value, where);
  else if (key == "logistic.a") c.logistic_a = parse_double(value, where);
  else if (key == "logistic.b") c.logistic_b = parse_double(value, where);
  else if (key == "steady.u0") c.steady_u0 = parse_init(value, where);
  else if (key == "steady.v0") c.steady_v0 = parse_init(value, where);
  else if (key == "sweep.lambda") c.sweep_lambda = parse_ladder(value, where);
  else if (key == "sweep.command") c.sweep_command = trim(value);
  else if (key == "thresholds.lambda") c.thresholds_lambda = parse_ladder(value, where);
  else if (key == "output.dir") c.out_dir = trim(value);
  else bad(where, "unknown key '" + key + "'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_csv(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

const char* known_commands[] = {"eig",      "logistic", "thresholds",
                                "steady",   "branch",   "simulate",
                                "sweep",    "figure2",  "figure4"};

} // namespace

std::vector<double> Ladder::values() const {
  if (kind == "list") return args;
  const double lo = args[0], hi = args[1];
  const int k = static_cast<int>(args[2]);
  std::vector<double> out(k);
  if (k == 1) {
    out[0] = lo;
  } else {
    for (int i = 0; i < k; ++i) out[i] = lo + (hi - lo) * i / (k - 1);
  }
  return out;
}

void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw config_error("validate", what); };

  bool cmd_ok = false;
  for (const char* k : known_commands) cmd_ok = cmd_ok || c.command == k;
  if (!cmd_ok) fail("unknown command '" + c.command + "'");
  if (c.sweep_command != "thresholds" && c.sweep_command != "steady" &&
      c.sweep_command != "simulate")
    fail("sweep.command must be thresholds, steady or simulate");

  if (!(c.L > 0)) fail("grid.L must be positive");
  if (c.n < 3) fail("grid.n must be at least 3");
  if (!(c.zeta > 0)) fail("model.zeta must be positive");
  if (c.d_choice.kind == "constant") {
    if (!(c.d_choice.args[0] > 0)) fail("model.d constant must be positive");
  } else {
    if (c.d_choice.args[0] < 0 || c.d_choice.args[1] < 0)
      fail("model.d rational needs a, b >= 0");
  }
  if (c.chi0 < 0) fail("model.chi must be nonnegative");

  ModelParams params;
  try {
    params = make_params(c);
    validate_params(params);
  } catch (const Error& e) {
    fail(e.what());
  }
  const HypothesisReport rep = validate_hypotheses(params, 1.25 * std::max(c.mu, 1.0));
  if (!rep.ok)
    fail("hypothesis violation (" + rep.violations[0].hypothesis +
         "): " + rep.violations[0].detail);

  if (!(c.newton_tol > 0)) fail("solver.newton_tol must be positive");
  if (c.newton_max_iter < 1) fail("solver.newton_max_iter must be at least 1");
  if (!(c.class_threshold > 0)) fail("solver.class_threshold must be positive");

  const ContinuationControls& b = c.branch;
  if (!(b.min_step > 0) || !(b.initial_step >= b.min_step) || !(b.max_step >= b.initial_step))
    fail("branch steps must satisfy 0 < min_step <= initial_step <= max_step");
  if (!(b.grow_factor >= 1)) fail("branch.grow_factor must be at least 1");
  if (b.grow_after < 1 || b.max_steps < 1 || b.max_corrector_iterations < 1 ||
      b.max_first_step_halvings < 0)
    fail("branch iteration counts out of range");
  if (!(b.corrector_tol > 0)) fail("branch.corrector_tol must be positive");
  if (!(b.thresholds.semitrivial_sup > 0) || !(b.thresholds.semitrivial_distance > 0))
    fail("branch endpoint thresholds must be positive");
  if (!std::isfinite(b.thresholds.lambda_cap)) fail("branch.lambda_cap must be finite");

  if (c.u0.kind == "predictor" || c.v0.kind == "predictor")
    fail("sim.u0 and sim.v0 do not accept the predictor start");
  if ((c.steady_u0.kind == "predictor") != (c.steady_v0.kind == "predictor"))
    fail("the predictor start must be set for both steady.u0 and steady.v0");
  if (!(c.dt > 0)) fail("sim.dt must be positive");
  if (!(c.T >= c.dt)) fail("sim.T must be at least sim.dt");
  if (c.snapshot_stride < 0) fail("sim.snapshot_stride must be nonnegative");
  if (!(c.regime_threshold > 0)) fail("sim.regime_threshold must be positive");
  if (c.max_dt_halvings < 0) fail("sim.max_dt_halvings must be nonnegative");

  if (!(c.eig_p > 0) || !(c.eig_r > 0)) fail("eig.p and eig.r must be positive");
  if (!(c.logistic_p > 0)) fail("logistic.p must be positive");
  if (!(c.logistic_b > 0)) fail("logistic.b must be positive");
  if (c.out_dir.empty()) fail("output.dir must not be empty");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    const size_t eq = t.find('=');
    if (eq == std::string::npos) bad(where, "expected 'section.key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = t.substr(eq + 1);
    if (key.empty()) bad(where, "empty key");
    assign(cfg, key, value, where);
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("io", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    bad("override '" + assignment + "'", "expected section.key=value");
  const std::string key = trim(assignment.substr(0, eq));
  assign(cfg, key, assignment.substr(eq + 1), "override '" + assignment + "'");
}

std::string serialize(const RunConfig& c) {
  std::ostringstream o;
  o << "run.command = " << c.command << "\n";
  o << "model.lambda = " << fmt(c.lambda) << "\n";
  o << "model.mu = " << fmt(c.mu) << "\n";
  o << "model.gamma = " << fmt(c.gamma) << "\n";
  o << "model.D = " << fmt(c.D) << "\n";
  o << "model.F = " << c.response_label << "\n";
  o << "model.zeta = " << fmt(c.zeta) << "\n";
  o << "model.d = " << c.d_choice.kind << ":" << fmt_csv(c.d_choice.args) << "\n";
  o << "model.chi = constant:" << fmt(c.chi0) << "\n";
  o << "grid.L = " << fmt(c.L) << "\n";
  o << "grid.n = " << c.n << "\n";
  o << "solver.newton_tol = " << fmt(c.newton_tol) << "\n";
  o << "solver.newton_max_iter = " << c.newton_max_iter << "\n";
  o << "solver.class_threshold = " << fmt(c.class_threshold) << "\n";
  o << "branch.initial_step = " << fmt(c.branch.initial_step) << "\n";
  o << "branch.min_step = " << fmt(c.branch.min_step) << "\n";
  o << "branch.max_step = " << fmt(c.branch.max_step) << "\n";
  o << "branch.grow_factor = " << fmt(c.branch.grow_factor) << "\n";
  o << "branch.grow_after = " << c.branch.grow_after << "\n";
  o << "branch.max_steps = " << c.branch.max_steps << "\n";
  o << "branch.corrector_tol = " << fmt(c.branch.corrector_tol) << "\n";
  o << "branch.max_corrector_iterations = " << c.branch.max_corrector_iterations << "\n";
  o << "branch.max_first_step_halvings = " << c.branch.max_first_step_halvings << "\n";
  o << "branch.lambda_cap = " << fmt(c.branch.thresholds.lambda_cap) << "\n";
  o << "branch.semitrivial_sup = " << fmt(c.branch.thresholds.semitrivial_sup) << "\n";
  o << "branch.semitrivial_distance = " << fmt(c.branch.thresholds.semitrivial_distance)
    << "\n";
  o << "sim.dt = " << fmt(c.dt) << "\n";
  o << "sim.T = " << fmt(c.T) << "\n";
  o << "sim.snapshot_stride = " << c.snapshot_stride << "\n";
  o << "sim.regime_threshold = " << fmt(c.regime_threshold) << "\n";
  o << "sim.auto_dt = " << (c.auto_dt ? "true" : "false") << "\n";
  o << "sim.reaction_on = " << (c.reaction_on ? "true" : "false") << "\n";
  o << "sim.max_dt_halvings = " << c.max_dt_halvings << "\n";
  o << "sim.u0 = " << c.u0.kind << ":" << fmt_csv(c.u0.args) << "\n";
  o << "sim.v0 = " << c.v0.kind << ":" << fmt_csv(c.v0.args) << "\n";
  o << "eig.p = " << fmt(c.eig_p) << "\n";
  o << "eig.q = " << fmt(c.eig_q) << "\n";
  o << "eig.r = " << fmt(c.eig_r) << "\n";
  o << "logistic.p = " << fmt(c.logistic_p) << "\n";
  o << "logistic.a = " << fmt(c.logistic_a) << "\n";
  o << "logistic.b = " << fmt(c.logistic_b) << "\n";
  o << "steady.u0 = " << c.steady_u0.kind << ":" << fmt_csv(c.steady_u0.args) << "\n";
  o << "steady.v0 = " << c.steady_v0.kind << ":" << fmt_csv(c.steady_v0.args) << "\n";
  o << "sweep.lambda = " << c.sweep_lambda.kind << ":" << fmt_csv(c.sweep_lambda.args)
    << "\n";
  o << "sweep.command = " << c.sweep_command << "\n";
  o << "thresholds.lambda = " << c.thresholds_lambda.kind << ":"
    << fmt_csv(c.thresholds_lambda.args) << "\n";
  o << "output.dir = " << c.out_dir << "\n";
  return o.str();
}

ModelParams make_params(const RunConfig& c) {
  ModelParams p;
  p.lambda = c.lambda;
  p.mu = c.mu;
  p.gamma = c.gamma;
  p.D = c.D;
  p.motility = c.d_choice.kind == "constant"
                   ? constant_motility(c.d_choice.args[0], c.chi0)
                   : rational_motility(c.d_choice.args[0], c.d_choice.args[1], c.chi0);
  p.response = make_response(c.response_label, c.zeta);
  return p;
}

Grid make_grid(const RunConfig& c) { return build_grid(c.L, c.n); }

Field make_initial_field(const InitSpec& spec, const ModelParams& params,
                         const Grid& grid) {
  if (spec.kind == "predictor")
    throw config_error("the predictor start is only available for steady.u0 and steady.v0");
  if (spec.kind == "constant") return Field(grid, spec.args[0]);
  if (spec.kind == "sine") {
    const double a = spec.args[0], b = spec.args[1], k = spec.args[2];
    return map_field(grid, [=](double x) { return a + b * std::sin(k * x); });
  }
  if (spec.kind == "omega") {
    auto w = solve_logistic(Coefficient(params.D), params.mu, Coefficient(1.0), grid);
    if (!w)
      throw precondition_error("prey-state-missing",
                               "omega initial data needs mu > D sigma_1");
    return spec.args[0] * w->theta;
  }
  auto th = solve_logistic(Coefficient(params.motility.d(0.0)), params.lambda,
                           Coefficient(1.0), grid);
  if (!th)
    throw precondition_error("predator-state-missing",
                             "theta initial data needs lambda > d(0) sigma_1");
  return spec.args[0] * th->theta;
}

SimulationConfig make_sim_config(const RunConfig& c) {
  SimulationConfig s;
  s.params = make_params(c);
  s.grid = make_grid(c);
  s.dt = c.dt;
  s.T = c.T;
  s.u0 = make_initial_field(c.u0, s.params, s.grid);
  s.v0 = make_initial_field(c.v0, s.params, s.grid);
  s.snapshot_stride = c.snapshot_stride;
  s.regime_threshold = c.regime_threshold;
  s.auto_dt = c.auto_dt;
  s.reaction_on = c.reaction_on;
  s.max_dt_halvings = c.max_dt_halvings;
  return s;
}

} // namespace preytaxis
