// SPDX-License-Identifier: Apache-2.0
#include "mindriven/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mindriven/error.hpp"
#include "mindriven/text.hpp"

namespace mindriven::io {

namespace {

Size parse_size(std::string_view token, std::string_view what) {
  const auto v = try_parse_uint(token);
  if (!v || *v == 0)
    fail(ErrorKind::Parse, std::string(what) + ": bad size '" + std::string(token) + "'");
  return *v;
}

double parse_value(std::string_view token, std::string_view what) {
  const auto v = try_parse_double(token);
  if (!v) fail(ErrorKind::Parse, std::string(what) + ": bad value '" + std::string(token) + "'");
  return *v;
}

void put(Sequence& seq, Size size, double value) {
  if (seq.size() < size) seq.resize(size, 0.0);
  seq[size - 1] += value;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

InitialSpec parse_initial(const std::string& raw) {
  const std::string spec = trim(raw);
  InitialSpec out;
  if (spec.empty()) fail(ErrorKind::Parse, "empty initial condition");
  if (spec == "e1") {
    out.sequence = {1.0};
    return out;
  }
  if (spec.rfind("mono:", 0) == 0) {
    const std::string body = spec.substr(5);
    const auto x = body.find('x');
    if (x == std::string::npos) fail(ErrorKind::Parse, "mono: expects <size>x<count>");
    const Size size = parse_size(body.substr(0, x), "mono");
    const auto count = try_parse_uint(body.substr(x + 1));
    if (!count) fail(ErrorKind::Parse, "mono: bad count '" + body.substr(x + 1) + "'");
    if (*count == 0) fail(ErrorKind::ZeroMass, "mono: count must be positive");
    out.exact = ParticleState::monodisperse(size, *count);
    put(out.sequence, size, static_cast<double>(*count));
    return out;
  }
  if (spec.find(':') != std::string::npos) {
    for (const std::string& item : split(spec, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) fail(ErrorKind::Parse, "expected size:value, got '" + item + "'");
      const double v = parse_value(parts[1], "initial");
      if (v < 0.0) fail(ErrorKind::Parse, "negative concentration in '" + item + "'");
      put(out.sequence, parse_size(parts[0], "initial"), v);
    }
  } else {
    std::ifstream in(spec);
    if (!in) fail(ErrorKind::Parse, "cannot read initial condition file '" + spec + "'");
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto parts = split(t, ',');
      if (parts.size() != 2) fail(ErrorKind::Parse, "expected size,value, got '" + t + "'");
      if (first && !try_parse_uint(parts[0])) {
        first = false;
        continue;
      }
      first = false;
      const double v = parse_value(parts[1], spec);
      if (v < 0.0) fail(ErrorKind::Parse, "negative concentration in '" + t + "'");
      put(out.sequence, parse_size(parts[0], spec), v);
    }
  }
  double mass = 0.0;
  for (std::size_t q = 0; q < out.sequence.size(); ++q)
    mass += static_cast<double>(q + 1) * out.sequence[q];
  if (!(mass > 0.0)) fail(ErrorKind::ZeroMass, "initial condition has zero mass");
  return out;
}

Sequence deterministic_initial(const InitialSpec& spec) {
  return normalize_initial(spec.sequence).x0;
}

ParticleState stochastic_initial(const InitialSpec& spec, std::optional<Count> N) {
  if (spec.exact) return *spec.exact;
  if (!N) fail(ErrorKind::InvalidArgument, "a total mass N is needed to discretize x0");
  Sequence x = spec.sequence;
  const double m = first_moment(x);
  if (!(m > 0.0)) fail(ErrorKind::ZeroMass, "initial condition has zero mass");
  for (double& v : x) v /= m;
  return discretize_initial(x, *N).state;
}

json state_json(const ParticleState& state) {
  json obj = json::object();
  for (const auto& [size, count] : state.counts()) obj[std::to_string(size)] = count;
  return obj;
}

void write_trajectory_jsonl(std::ostream& os, const Trajectory& traj, std::uint64_t seed) {
  json header = {{"initial", state_json(traj.initial)}, {"seed", seed}, {"kernel", traj.kernel}};
  os << header.dump() << '\n';
  for (const Event& ev : traj.events) {
    os << "{\"t\":" << format_number(ev.t) << ",\"l\":" << ev.min_size
       << ",\"j\":" << ev.partner << "}\n";
  }
}

Trajectory read_trajectory_jsonl(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::Parse, "empty trajectory stream");
  Trajectory traj;
  try {
    const json header = json::parse(line);
    std::map<Size, Count> counts;
    for (const auto& [k, v] : header.at("initial").items())
      counts[parse_size(k, "initial")] = v.get<Count>();
    traj.initial = ParticleState(counts);
    traj.kernel = header.value("kernel", "");
    ParticleState state = traj.initial;
    Size current = state.empty() ? 0 : state.min_size();
    while (std::getline(is, line)) {
      if (trim(line).empty()) continue;
      const json ev = json::parse(line);
      Event e;
      e.t = ev.at("t").get<double>();
      e.min_size = ev.at("l").get<Size>();
      e.partner = ev.at("j").get<Size>();
      state.merge(e.min_size, e.partner);
      traj.events.push_back(e);
      const Size m = state.min_size();
      if (m > current) {
        traj.min_size_jumps.emplace_back(m, e.t);
        current = m;
      }
    }
    traj.has_exponentials = false;
    traj.final_state = state;
    if (state.total_count() <= 1)
      traj.last_coalescence = traj.events.empty() ? 0.0 : traj.events.back().t;
    else
      traj.end_time = traj.events.empty() ? 0.0 : traj.events.back().t;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("trajectory stream: ") + e.what());
  }
  return traj;
}

void write_dense_csv(std::ostream& os, const PiecewiseSolution& sol) {
  const std::size_t cap = sol.dense.empty() ? 0 : sol.dense.front().x.size();
  os << "t,ell";
  for (std::size_t j = 1; j <= cap; ++j) os << ",x_" << j;
  os << '\n';
  for (const DenseSample& s : sol.dense) {
    os << format_number(s.t) << ',' << s.ell;
    for (double v : s.x) os << ',' << format_number(v);
    os << '\n';
  }
}

void write_dense_sparse_csv(std::ostream& os, const PiecewiseSolution& sol) {
  os << "t,ell,x\n";
  for (const DenseSample& s : sol.dense) {
    std::ostringstream obj;
    obj << '{';
    bool first = true;
    for (std::size_t q = 0; q < s.x.size(); ++q) {
      if (s.x[q] == 0.0) continue;
      obj << (first ? "" : ",") << "\"\"" << q + 1 << "\"\":" << format_number(s.x[q]);
      first = false;
    }
    obj << '}';
    os << format_number(s.t) << ',' << s.ell << ",\"" << obj.str() << "\"\n";
  }
}

void write_switch_csv(std::ostream& os, const PiecewiseSolution& sol) {
  os << "i,t_i,s_i\n";
  for (std::size_t q = 0; q < sol.switch_times.size(); ++q) {
    os << q + 1 << ',' << format_number(sol.switch_times[q]) << ','
       << format_number(sol.durations[q]) << '\n';
  }
}

json solution_summary(const PiecewiseSolution& sol) {
  const TInfEstimate est = sol.t_inf_estimate();
  json out = {{"switches", sol.switch_times.size()},
              {"t_inf_partial", est.partial_sum},
              {"t_inf_extrapolated", optional_number(est.extrapolated)},
              {"t_inf_note", est.note},
              {"skipped_sizes", sol.skipped},
              {"initial_first_moment", sol.initial_first_moment},
              {"max_mass_error", sol.max_mass_error},
              {"overflow_mass", sol.final_state.overflow_mass},
              {"clamps", sol.clamps},
              {"max_clamp", sol.max_clamp},
              {"end_time", sol.end_time},
              {"root_slopes", sol.root_slopes}};
  return out;
}

json lyapunov_json(const LyapunovReport& rep) {
  json segs = json::array();
  for (const auto& s : rep.segments) {
    segs.push_back({{"i", s.i},
                    {"delta", s.delta},
                    {"bound", s.bound},
                    {"max_slope", s.samples ? json(s.max_slope) : json(nullptr)},
                    {"samples", s.samples},
                    {"passed", s.passed}});
  }
  return {{"tol_slope", rep.tol_slope}, {"passed", rep.passed()}, {"segments", segs}};
}

void write_convergence_csv(std::ostream& os, const ConvergenceRun& run) {
  os << "N,replica,sup_error\n";
  for (std::size_t a = 0; a < run.N_values.size(); ++a)
    for (std::size_t r = 0; r < run.replicas; ++r)
      os << run.N_values[a] << ',' << r << ',' << format_number(run.sup_errors[a][r]) << '\n';
}

void write_convergence_summary_csv(std::ostream& os, const ConvergenceRun& run) {
  os << "N,median_error,q25,q75\n";
  for (const auto& s : run.summary) {
    os << s.N << ',' << format_number(s.median_error) << ',' << format_number(s.q25) << ','
       << format_number(s.q75) << '\n';
  }
}

json convergence_json(const ConvergenceRun& run) {
  json table = json::array();
  for (const auto& d : run.deviation_table) {
    table.push_back({{"N", d.N},
                     {"i", d.i},
                     {"t_i", d.t_i},
                     {"median", d.median},
                     {"q25", d.q25},
                     {"q75", d.q75},
                     {"max", d.max}});
  }
  json summary = json::array();
  for (const auto& s : run.summary)
    summary.push_back({{"N", s.N}, {"median_error", s.median_error}, {"q25", s.q25}, {"q75", s.q75}});
  return {{"N_values", run.N_values},     {"replicas", run.replicas},
          {"horizon", run.horizon},       {"seed", run.seed},
          {"fitted_slope", run.fitted_slope},
          {"fitted_slope_stderr", run.fitted_slope_stderr},
          {"switch_times", run.switch_times},
          {"summary", summary},           {"switch_deviations", table}};
}

json dichotomy_json(const DichotomyReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"n", r.n},
                    {"mean", r.estimate.mean},
                    {"stderr", r.estimate.stderr_mean},
                    {"replicas", r.estimate.replicas},
                    {"exact", optional_number(r.estimate.exact)},
                    {"lower_bound", r.lower_bound}});
  }
  const auto& ps = rep.series.partial_sums;
  json sampled = json::array();
  for (std::size_t k = 1; k <= ps.size(); k *= 10) sampled.push_back({{"i", k}, {"sum", ps[k - 1]}});
  if (!ps.empty()) sampled.push_back({{"i", ps.size()}, {"sum", ps.back()}});
  return {{"phi", rep.phi_name},
          {"classification", to_string(rep.series.classification)},
          {"series_partial_sums", sampled},
          {"ET_by_n", rows},
          {"plateau", {{"slope", rep.plateau_slope},
                       {"slope_stderr", rep.plateau_slope_stderr},
                       {"points", rep.plateau_points},
                       {"flat", rep.plateau}}},
          {"increasing", rep.increasing}};
}

void write_dichotomy_csv(std::ostream& os, const DichotomyReport& rep) {
  os << "n,mean,stderr,exact,lower_bound\n";
  for (const auto& r : rep.rows) {
    os << r.n << ',' << format_number(r.estimate.mean) << ','
       << format_number(r.estimate.stderr_mean) << ','
       << (r.estimate.exact ? format_number(*r.estimate.exact) : "") << ','
       << format_number(r.lower_bound) << '\n';
  }
}

json blowup_json(const BlowupReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"i", r.i},
                    {"t_i", r.t_i},
                    {"s_i", r.s_i},
                    {"bound", r.bound},
                    {"ratio_term", r.ratio_term},
                    {"holds", r.holds}});
  }
  json viol = json::array();
  for (const auto& v : rep.weight_violations)
    viol.push_back({{"i", v.i}, {"j", v.j}, {"detail", v.detail}});
  return {{"evidence", to_string(rep.evidence)},
          {"all_hold", rep.all_hold()},
          {"m0_initial", rep.m0_initial},
          {"mpsi_initial", rep.mpsi_initial},
          {"epsilon", rep.epsilon},
          {"t_inf_partial", rep.t_inf.partial_sum},
          {"t_inf_extrapolated", optional_number(rep.t_inf.extrapolated)},
          {"t_inf_note", rep.t_inf.note},
          {"weight_violations", viol},
          {"rows", rows}};
}

json validation_json(const ValidationReport& rep) {
  json viol = json::array();
  for (const auto& v : rep.violations) {
    viol.push_back({{"property", to_string(v.property)}, {"i", v.i}, {"j", v.j}, {"detail", v.detail}});
  }
  return {{"kernel", rep.kernel}, {"cutoff", rep.cutoff}, {"consistent", rep.consistent()},
          {"violations", viol}};
}

json generator_json(const GeneratorReport& rep) {
  json comps = json::array();
  for (const auto& c : rep.components) {
    comps.push_back({{"size", c.size},
                     {"mean_increment", c.mean_increment},
                     {"predicted", c.predicted},
                     {"stderr", c.stderr_mean},
                     {"z", c.z}});
  }
  return {{"h", rep.h}, {"replicas", rep.replicas}, {"expected_events", rep.expected_events},
          {"max_abs_z", rep.max_abs_z()}, {"components", comps}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail(ErrorKind::InvalidArgument, "failed writing '" + path + "'");
}

}  // namespace mindriven::io
