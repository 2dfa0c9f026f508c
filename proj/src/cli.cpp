// SPDX-License-Identifier: Apache-2.0
#include "mindriven/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mindriven/coupling.hpp"
#include "mindriven/hydro.hpp"
#include "mindriven/io.hpp"
#include "mindriven/kernel.hpp"
#include "mindriven/lifespan.hpp"
#include "mindriven/model.hpp"
#include "mindriven/ode.hpp"
#include "mindriven/parallel.hpp"
#include "mindriven/rng.hpp"
#include "mindriven/ssa.hpp"
#include "mindriven/text.hpp"

namespace mindriven::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::InvalidArgument:
      return kValidation;
    case ErrorKind::TruncationOverflow:
    case ErrorKind::ClampViolation:
    case ErrorKind::MassDrift:
    case ErrorKind::NoCrossing:
    case ErrorKind::StepUnderflow:
      return kNumerical;
    default:
      return kPrecondition;
  }
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "command",  "kernel",       "x0",        "y0",       "N",          "n",
      "i",        "replicas",     "t",         "stop",     "seed",       "out",
      "tol-event", "tol-mass",    "tol-overflow", "truncation", "max-min-size",
      "dense-dt", "sparse",       "lyapunov",  "grid",     "mode",       "cutoff",
      "series-cutoff", "threads", "partner-sampling"};
  return keys;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const json& v, const std::string& why) {
  fail(ErrorKind::Parse, "config key '" + key + "': " + why + " (got " + v.dump() + ")");
}

std::string as_string(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  bad_value(key, v, "expected a string");
}

double as_double(const std::string& key, const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    if (const auto d = try_parse_double(trim(v.get<std::string>()))) return *d;
  }
  bad_value(key, v, "expected a number");
}

std::uint64_t as_uint(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_string()) {
    if (const auto u = try_parse_uint(trim(v.get<std::string>()))) return *u;
  }
  bad_value(key, v, "expected a nonnegative integer");
}

bool as_bool(const std::string& key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
  }
  bad_value(key, v, "expected a boolean");
}

std::vector<Count> as_uint_list(const std::string& key, const json& v) {
  std::vector<Count> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(as_uint(key, e));
  } else if (v.is_string()) {
    for (const auto& tok : split(v.get<std::string>(), ',')) out.push_back(as_uint(key, json(tok)));
  } else {
    out.push_back(as_uint(key, v));
  }
  return out;
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) fail(ErrorKind::InvalidArgument, key + " must be positive");
}

std::vector<Count> default_ladder() {
  std::vector<Count> out;
  for (int e = 4; e <= 12; ++e) out.push_back(Count{1} << e);
  return out;
}

StopRule parse_stop(const std::string& s) {
  if (s == "singleton") return StopRule::until_singleton();
  const auto parts = split(s, ':');
  if (parts.size() == 2 && parts[0] == "time") {
    const auto t = try_parse_double(parts[1]);
    if (!t || !(*t >= 0.0)) fail(ErrorKind::Parse, "bad stop time '" + parts[1] + "'");
    return StopRule::until_time(*t);
  }
  if (parts.size() == 2 && parts[0] == "min") {
    const auto i = try_parse_uint(parts[1]);
    if (!i || *i == 0) fail(ErrorKind::Parse, "bad stop size '" + parts[1] + "'");
    return StopRule::until_min_size_at_least(*i);
  }
  fail(ErrorKind::Parse, "stop must be singleton, time:<t> or min:<i>, got '" + s + "'");
}

Phi require_phi(const Kernel& k) {
  if (!k.is_min_form())
    fail(ErrorKind::RepresentationMismatch, "kernel " + k.name() + " is not of min form");
  return *k.phi();
}

OdeControls ode_controls(const RunConfig& c) {
  OdeControls o;
  o.truncation = c.truncation;
  o.tol_event = c.tol_event;
  o.tol_mass = c.tol_mass;
  o.tol_overflow = c.tol_overflow;
  o.dense_dt = c.dense_dt;
  return o;
}

class Artifacts {
 public:
  explicit Artifacts(const std::string& dir) : dir_(dir) {}
  void write(const std::string& name, const std::string& content) {
    io::write_file((fs::path(dir_) / name).string(), content);
    names_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::string dir_;
  std::vector<std::string> names_;
};

int run_simulate(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const Kernel k = parse_kernel(c.kernel);
  const auto spec = io::parse_initial(c.x0);
  const ParticleState x0 =
      io::stochastic_initial(spec, c.N.empty() ? std::nullopt : std::optional<Count>(c.N.front()));
  const StopRule stop = parse_stop(c.stop);
  PartnerSampling mode = PartnerSampling::Automatic;
  if (c.partner_sampling == "menu")
    mode = PartnerSampling::Menu;
  else if (c.partner_sampling != "auto")
    fail(ErrorKind::Parse, "partner-sampling must be auto or menu");
  std::vector<Trajectory> runs(c.replicas);
  parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    RandomStream rng(c.seed, r, StreamRole::Simulation);
    runs[r] = simulate(x0, k, stop, rng, mode);
  });
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::ostringstream os;
    io::write_trajectory_jsonl(os, runs[r], c.seed);
    const std::string name =
        c.replicas == 1 ? "trajectory.jsonl" : "trajectory_" + std::to_string(r) + ".jsonl";
    out.write(name, os.str());
    log << name << ": " << runs[r].events.size() << " events";
    if (runs[r].last_coalescence) log << ", last coalescence at t=" << *runs[r].last_coalescence;
    log << '\n';
  }
  return kSuccess;
}

int run_integrate(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const Kernel k = parse_kernel(c.kernel);
  const Sequence x0 = io::deterministic_initial(io::parse_initial(c.x0));
  if (!c.max_min_size && !c.horizon)
    fail(ErrorKind::InvalidArgument, "integrate needs --max-min-size or --t");
  const PiecewiseSolution sol =
      integrate_piecewise(x0, k, PiecewiseStop{c.max_min_size, c.horizon}, ode_controls(c));
  std::ostringstream dense, switches;
  if (c.sparse) {
    io::write_dense_sparse_csv(dense, sol);
    out.write("dense_sparse.csv", dense.str());
  } else {
    io::write_dense_csv(dense, sol);
    out.write("dense.csv", dense.str());
  }
  io::write_switch_csv(switches, sol);
  out.write("switch_times.csv", switches.str());
  out.write_json("solution.json", io::solution_summary(sol));
  int code = kSuccess;
  if (c.lyapunov) {
    const LyapunovReport rep = lyapunov_report(sol, k);
    out.write_json("lyapunov.json", io::lyapunov_json(rep));
    if (!rep.passed()) code = kValidation;
  }
  for (std::size_t q = 0; q < sol.switch_times.size(); ++q)
    log << "t_" << q + 1 << " = " << format_number(sol.switch_times[q]) << '\n';
  return code;
}

int run_converge(const RunConfig& c, Artifacts& out, std::ostream& log) {
  if (!c.horizon) fail(ErrorKind::InvalidArgument, "converge needs --t");
  const Kernel k = parse_kernel(c.kernel);
  const Sequence x0 = io::deterministic_initial(io::parse_initial(c.x0));
  const std::vector<Count> Ns = c.N.empty() ? std::vector<Count>{100, 1000, 10000} : c.N;
  ConvergenceOptions opt;
  opt.grid = c.grid;
  opt.threads = c.threads;
  opt.ode = ode_controls(c);
  const ConvergenceRun run =
      convergence_experiment(x0, k, *c.horizon, Ns, c.replicas, c.seed, opt);
  std::ostringstream all, summary;
  io::write_convergence_csv(all, run);
  io::write_convergence_summary_csv(summary, run);
  out.write("convergence.csv", all.str());
  out.write("convergence_summary.csv", summary.str());
  out.write_json("convergence.json", io::convergence_json(run));
  for (const auto& s : run.summary)
    log << "N=" << s.N << " median sup error " << format_number(s.median_error) << '\n';
  log << "fitted slope " << format_number(run.fitted_slope) << '\n';
  return kSuccess;
}

int run_lifespan(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const Kernel k = parse_kernel(c.kernel);
  const std::string mode = c.mode.empty() ? "dichotomy" : c.mode;
  if (mode == "dichotomy") {
    const Phi phi = require_phi(k);
    const auto ladder = c.n.empty() ? default_ladder() : c.n;
    const DichotomyReport rep =
        dichotomy_scan(c.kernel, phi, ladder, c.replicas, c.seed, c.threads, c.series_cutoff);
    std::ostringstream csv;
    io::write_dichotomy_csv(csv, rep);
    out.write_json("lifespan.json", io::dichotomy_json(rep));
    out.write("lifespan.csv", csv.str());
    log << "classification " << to_string(rep.series.classification) << '\n';
    for (const auto& r : rep.rows)
      log << "n=" << r.n << " E[T]=" << format_number(r.estimate.mean) << " +- "
          << format_number(r.estimate.stderr_mean) << '\n';
    return kSuccess;
  }
  if (mode == "blowup") {
    const Sequence x0 = io::deterministic_initial(io::parse_initial(c.x0));
    OdeControls o = ode_controls(c);
    const BlowupReport rep = blowup_classify(k, x0, c.max_min_size.value_or(8), o);
    out.write_json("lifespan.json", io::blowup_json(rep));
    log << to_string(rep.evidence) << (rep.all_hold() ? " (all checks hold)" : " (checks FAILED)")
        << '\n';
    return rep.all_hold() ? kSuccess : kValidation;
  }
  fail(ErrorKind::Parse, "lifespan mode must be dichotomy or blowup, got '" + mode + "'");
}

int run_couple(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const Kernel k = parse_kernel(c.kernel);
  const Phi phi = require_phi(k);
  std::ostringstream csv;
  if (c.mode == "scaling") {
    const Count n = c.n.empty() ? 100 : c.n.front();
    csv << "replica,scaled_T_i,T_1\n";
    std::vector<ScalingPair> pairs(c.replicas);
    parallel_for(c.replicas, c.threads, [&](std::size_t r) {
      RandomStream rng(c.seed, r, StreamRole::Scaling);
      pairs[r] = scaling_coupling(n, c.i, phi, rng);
    });
    const double ratio = phi(static_cast<double>(c.i)) / phi(1.0);
    double worst = 0.0;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      const double scaled = pairs[r].t_i_from_nei * ratio;
      worst = std::max(worst, std::abs(scaled - pairs[r].t_1_from_ne1) / pairs[r].t_1_from_ne1);
      csv << r << ',' << format_number(scaled) << ',' << format_number(pairs[r].t_1_from_ne1)
          << '\n';
    }
    out.write("scaling.csv", csv.str());
    log << "largest relative scaling mismatch " << format_number(worst) << '\n';
    return kSuccess;
  }
  if (!c.mode.empty() && c.mode != "dominance")
    fail(ErrorKind::Parse, "couple mode must be dominance or scaling");
  if (c.y0.empty()) fail(ErrorKind::InvalidArgument, "couple needs --y0");
  const std::optional<Count> N = c.N.empty() ? std::nullopt : std::optional<Count>(c.N.front());
  const ParticleState x0 = io::stochastic_initial(io::parse_initial(c.x0), N);
  const ParticleState y0 = io::stochastic_initial(io::parse_initial(c.y0), N);
  std::vector<CoupledRun> runs(c.replicas);
  parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    RandomStream rng(c.seed, r, StreamRole::Coupling);
    runs[r] = coupled_simulate(x0, y0, phi, rng);
  });
  csv << "replica,T_x,T_y,events,ordered\n";
  std::size_t ordered = 0;
  const Size top = std::max(x0.max_size(), y0.max_size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    bool ok = *run.x.last_coalescence <= *run.y.last_coalescence;
    for (Size i = 1; i <= top && ok; ++i) {
      const auto tx = run.x.exhaustion_time(i), ty = run.y.exhaustion_time(i);
      if (tx && ty && *tx > *ty) ok = false;
    }
    ordered += ok;
    csv << r << ',' << format_number(*run.x.last_coalescence) << ','
        << format_number(*run.y.last_coalescence) << ',' << run.x.events.size() << ','
        << (ok ? 1 : 0) << '\n';
  }
  out.write("coupling.csv", csv.str());
  log << ordered << " of " << runs.size() << " coupled runs ordered\n";
  return ordered == runs.size() ? kSuccess : kValidation;
}

int run_validate(const RunConfig& c, Artifacts& out, std::ostream& log) {
  const Kernel k = parse_kernel(c.kernel);
  const ValidationReport rep = validate_kernel(k, c.cutoff);
  out.write_json("validation.json", io::validation_json(rep));
  log << k.name() << ": " << (rep.consistent() ? "consistent" : "violations found") << " up to "
      << c.cutoff << '\n';
  for (const auto& v : rep.violations) log << "  " << to_string(v.property) << ": " << v.detail << '\n';
  return rep.consistent() ? kSuccess : kValidation;
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::Parse, "config must be a JSON object");
  const auto& keys = known_keys();
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      fail(ErrorKind::Parse, "unknown config key '" + key + "'");
    if (key == "command") c.command = as_string(key, v);
    else if (key == "kernel") c.kernel = as_string(key, v);
    else if (key == "x0") c.x0 = as_string(key, v);
    else if (key == "y0") c.y0 = as_string(key, v);
    else if (key == "N") c.N = as_uint_list(key, v);
    else if (key == "n") c.n = as_uint_list(key, v);
    else if (key == "i") c.i = as_uint(key, v);
    else if (key == "replicas") c.replicas = as_uint(key, v);
    else if (key == "t") c.horizon = as_double(key, v);
    else if (key == "stop") c.stop = as_string(key, v);
    else if (key == "seed") c.seed = as_uint(key, v);
    else if (key == "out") c.output_dir = as_string(key, v);
    else if (key == "tol-event") c.tol_event = as_double(key, v);
    else if (key == "tol-mass") c.tol_mass = as_double(key, v);
    else if (key == "tol-overflow") c.tol_overflow = as_double(key, v);
    else if (key == "truncation") c.truncation = as_uint(key, v);
    else if (key == "max-min-size") c.max_min_size = as_uint(key, v);
    else if (key == "dense-dt") c.dense_dt = as_double(key, v);
    else if (key == "sparse") c.sparse = as_bool(key, v);
    else if (key == "lyapunov") c.lyapunov = as_bool(key, v);
    else if (key == "grid") c.grid = as_uint(key, v);
    else if (key == "mode") c.mode = as_string(key, v);
    else if (key == "cutoff") c.cutoff = as_uint(key, v);
    else if (key == "series-cutoff") c.series_cutoff = as_uint(key, v);
    else if (key == "threads") c.threads = static_cast<unsigned>(as_uint(key, v));
    else if (key == "partner-sampling") c.partner_sampling = as_string(key, v);
  }
  if (c.replicas == 0) fail(ErrorKind::InvalidArgument, "replicas must be positive");
  if (c.i == 0) fail(ErrorKind::InvalidArgument, "i must be positive");
  if (c.horizon) require_positive("t", *c.horizon);
  require_positive("tol-event", c.tol_event);
  require_positive("tol-mass", c.tol_mass);
  require_positive("tol-overflow", c.tol_overflow);
  if (c.dense_dt < 0.0) fail(ErrorKind::InvalidArgument, "dense-dt must be nonnegative");
  if (c.truncation < 2) fail(ErrorKind::InvalidArgument, "truncation must be at least 2");
  if (c.max_min_size && *c.max_min_size == 0)
    fail(ErrorKind::InvalidArgument, "max-min-size must be positive");
  if (c.grid == 0) fail(ErrorKind::InvalidArgument, "grid must be positive");
  for (Count v : c.N)
    if (v < 2) fail(ErrorKind::InvalidArgument, "N values must be at least 2");
  for (Count v : c.n)
    if (v < 2) fail(ErrorKind::InvalidArgument, "n values must be at least 2");
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {{"command", c.command},
            {"kernel", c.kernel},
            {"x0", c.x0},
            {"replicas", c.replicas},
            {"stop", c.stop},
            {"seed", c.seed},
            {"out", c.output_dir},
            {"tol-event", c.tol_event},
            {"tol-mass", c.tol_mass},
            {"tol-overflow", c.tol_overflow},
            {"truncation", c.truncation},
            {"dense-dt", c.dense_dt},
            {"sparse", c.sparse},
            {"lyapunov", c.lyapunov},
            {"grid", c.grid},
            {"mode", c.mode},
            {"i", c.i},
            {"cutoff", c.cutoff},
            {"series-cutoff", c.series_cutoff},
            {"partner-sampling", c.partner_sampling}};
  if (!c.y0.empty()) j["y0"] = c.y0;
  if (!c.N.empty()) j["N"] = c.N;
  if (!c.n.empty()) j["n"] = c.n;
  if (c.horizon) j["t"] = *c.horizon;
  if (c.max_min_size) j["max-min-size"] = *c.max_min_size;
  return j;
}

int run(const RunConfig& c, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) fail(ErrorKind::InvalidArgument, "cannot create '" + c.output_dir + "': " + ec.message());
  Artifacts out(c.output_dir);
  int code = kSuccess;
  if (c.command == "simulate") code = run_simulate(c, out, log);
  else if (c.command == "integrate") code = run_integrate(c, out, log);
  else if (c.command == "converge") code = run_converge(c, out, log);
  else if (c.command == "lifespan") code = run_lifespan(c, out, log);
  else if (c.command == "couple") code = run_couple(c, out, log);
  else if (c.command == "validate-kernel") code = run_validate(c, out, log);
  else fail(ErrorKind::Parse, "unknown command '" + c.command + "'");

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"command", c.command},
                   {"version", kVersion},
                   {"seed", c.seed},
                   {"threads", c.threads == 0 ? default_threads() : c.threads},
                   {"config", config_to_json(c)},
                   {"artifacts", out.names()},
                   {"exit_code", code},
                   {"wall_clock_seconds", seconds}};
  io::write_file((fs::path(c.output_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto diagnose = [&](const std::string& kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
    return code;
  };

  CLI::App app{"Min-driven coalescence: stochastic simulation, hydrodynamic ODE, lifespans"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_path;
  std::map<std::string, CLI::Option*> options;

  const auto value = [&](CLI::App* sub, const std::string& key, const std::string& help) {
    options[sub->get_name() + "/" + key] = sub->add_option("--" + key, values[key], help);
  };
  const auto flag = [&](CLI::App* sub, const std::string& key, const std::string& help) {
    options[sub->get_name() + "/" + key] = sub->add_flag("--" + key, flags[key], help);
  };
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    value(sub, "kernel", "kernel preset: const:c, min-pow:a, min-log:A0, min-logpow:a0,alpha, min-table:<csv>");
    value(sub, "seed", "random seed");
    value(sub, "out", "output directory");
    value(sub, "threads", "worker threads (default: MINDRIVEN_THREADS or all cores)");
  };
  const auto ode = [&](CLI::App* sub) {
    value(sub, "truncation", "largest tracked size M");
    value(sub, "tol-event", "event localization tolerance");
    value(sub, "tol-mass", "first-moment conservation tolerance");
    value(sub, "tol-overflow", "largest mass allowed past the truncation");
    value(sub, "dense-dt", "extra dense samples every dense-dt (0: steps only)");
  };

  auto* sim = app.add_subcommand("simulate", "exact stochastic simulation");
  common(sim);
  value(sim, "x0", "initial state: mono:<size>x<count>, e1, 1:0.5,2:0.25 or CSV path");
  value(sim, "N", "total mass used to discretize a non-integer x0");
  value(sim, "stop", "singleton, time:<t> or min:<i>");
  value(sim, "replicas", "number of independent trajectories");
  value(sim, "partner-sampling", "auto or menu");

  auto* integ = app.add_subcommand("integrate", "piecewise deterministic solve");
  common(integ);
  ode(integ);
  value(integ, "x0", "initial concentrations");
  value(integ, "max-min-size", "stop after the vanishing time of this size");
  value(integ, "t", "stop at this time");
  flag(integ, "sparse", "sparse dense-output CSV");
  flag(integ, "lyapunov", "write the segment slope report");

  auto* conv = app.add_subcommand("converge", "stochastic vs deterministic convergence study");
  common(conv);
  ode(conv);
  value(conv, "x0", "initial concentrations");
  value(conv, "t", "horizon");
  value(conv, "N", "comma-separated N ladder");
  value(conv, "replicas", "replicas per N");
  value(conv, "grid", "uniform grid intervals for the sup distance");

  auto* life = app.add_subcommand("lifespan", "last-coalescence and vanishing-time analytics");
  common(life);
  ode(life);
  value(life, "mode", "dichotomy or blowup");
  value(life, "x0", "initial concentrations (blowup)");
  value(life, "n", "comma-separated particle-number ladder (dichotomy)");
  value(life, "replicas", "Monte Carlo replicas per n");
  value(life, "max-min-size", "largest vanishing size to compute (blowup)");
  value(life, "series-cutoff", "terms of the series test");

  auto* couple = app.add_subcommand("couple", "shared-randomness coupling runs");
  common(couple);
  value(couple, "mode", "dominance or scaling");
  value(couple, "x0", "dominating initial state");
  value(couple, "y0", "dominated initial state");
  value(couple, "N", "mass for discretizing non-integer states");
  value(couple, "n", "particle number (scaling)");
  value(couple, "i", "size of the scaled copy (scaling)");
  value(couple, "replicas", "number of coupled runs");

  auto* val = app.add_subcommand("validate-kernel", "check kernel hypotheses on a size range");
  common(val);
  value(val, "cutoff", "largest size checked");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return diagnose("parse", e.what(), kValidation);
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    json merged = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) fail(ErrorKind::Parse, "cannot read config file '" + config_path + "'");
      try {
        merged = json::parse(in);
      } catch (const json::exception& e) {
        fail(ErrorKind::Parse, "config file '" + config_path + "': " + e.what());
      }
      if (!merged.is_object()) fail(ErrorKind::Parse, "config file must hold a JSON object");
      if (merged.contains("command") && merged["command"] != sub->get_name())
        fail(ErrorKind::Parse, "config command does not match '" + sub->get_name() + "'");
    }
    merged["command"] = sub->get_name();
    for (const auto& [name, opt] : options) {
      const auto slash = name.find('/');
      if (name.substr(0, slash) != sub->get_name() || opt->count() == 0) continue;
      const std::string key = name.substr(slash + 1);
      if (flags.count(key)) merged[key] = flags[key];
      else merged[key] = values[key];
    }
    RunConfig config = config_from_json(merged);
    return run(config, out);
  } catch (const Error& e) {
    return diagnose(std::string(to_string(e.kind())), e.what(), exit_code_for(e.kind()));
  } catch (const json::exception& e) {
    return diagnose("parse", e.what(), kValidation);
  } catch (const std::exception& e) {
    return diagnose("internal", e.what(), kPrecondition);
  }
}

}  // namespace mindriven::cli
