#include "ehcoop/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ehcoop/phy.hpp"
#include "ehcoop/sim.hpp"

namespace fs = std::filesystem;

namespace ehcoop {
namespace {

const std::set<std::string>& direct_link_keys() {
  static const std::set<std::string> keys = {
      "p_out_ps_pd", "p_out_ps_ss", "p_out_ss_sd", "p_out_ss_pd"};
  return keys;
}

const std::set<std::string>& geometry_keys() {
  static const std::set<std::string> keys = {
      "packet_bits",  "slot_seconds", "sensing_seconds", "energy_per_packet",
      "noise_power",  "bandwidth_hz", "primary_power",   "gain_ps_pd",
      "gain_ps_ss",   "gain_ss_sd",   "gain_ss_pd"};
  return keys;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = {
        "mode",        "out_dir",       "lambda_p",        "lambda_s",
        "lambda_e",    "f",             "beta",            "energy_model",
        "f_step",      "f_fixed",       "lambda_p_points", "lambda_e_grid",
        "r_min",       "r_max",         "r_points",        "horizon",
        "burn_in",     "seed",          "replications",    "dummy_packets",
        "trace_slots"};
    k.insert(direct_link_keys().begin(), direct_link_keys().end());
    k.insert(geometry_keys().begin(), geometry_keys().end());
    return k;
  }();
  return keys;
}

// Keys each mode consumes; anything else present is a configuration
// mistake and is rejected up front.
std::set<std::string> allowed_keys(const std::string& mode) {
  std::set<std::string> keys = {"mode", "out_dir"};
  auto add = [&keys](const std::set<std::string>& more) {
    keys.insert(more.begin(), more.end());
  };
  const std::set<std::string> point = {"lambda_p", "lambda_s",    "lambda_e",
                                       "f",        "beta",        "energy_model"};
  const std::set<std::string> sim = {"horizon",      "burn_in",
                                     "seed",         "replications",
                                     "dummy_packets", "trace_slots"};
  const std::set<std::string> grid = {"f_step", "f_fixed", "lambda_p_points"};
  if (mode == "bounds") {
    add(direct_link_keys());
    add(geometry_keys());
    add(point);
  } else if (mode == "inner-envelope" || mode == "outer-envelope") {
    add(direct_link_keys());
    add(geometry_keys());
    add({"lambda_e", "energy_model"});
    add(grid);
  } else if (mode == "simulate") {
    add(direct_link_keys());
    add(geometry_keys());
    add(point);
    add(sim);
  } else if (mode == "validate") {
    add(direct_link_keys());
    add(geometry_keys());
    add({"lambda_e", "energy_model"});
    add({"f_step", "lambda_p_points"});
    add({"horizon", "burn_in", "seed", "dummy_packets"});
  } else if (mode == "fig1") {
    add(grid);
  } else if (mode == "fig2" || mode == "fig3") {
    add(grid);
    add({"lambda_e_grid"});
  } else if (mode == "fig4") {
    add({"f_step", "r_min", "r_max", "r_points"});
  } else {
    throw ConfigError("unknown mode: " + mode +
                      " (expected bounds, inner-envelope, outer-envelope, "
                      "simulate, validate, fig1, fig2, fig3 or fig4)");
  }
  return keys;
}

double parse_double(const std::string& key, const std::string& raw) {
  double v = 0.0;
  const char* first = raw.data();
  const char* last = first + raw.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("bad number for " + key + ": '" + raw + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& raw) {
  std::uint64_t v = 0;
  const char* first = raw.data();
  const char* last = first + raw.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("bad count for " + key + ": '" + raw + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  if (raw == "1" || raw == "true") return true;
  if (raw == "0" || raw == "false") return false;
  throw ConfigError("bad flag for " + key + ": '" + raw +
                    "' (expected 0, 1, true or false)");
}

using Meta = std::map<std::string, std::string>;

// Typed lookups that record the resolved value, so the .meta sidecar
// shows defaults as well as explicit settings.
double number_of(const ExperimentConfig& cfg, const std::string& key,
                 double fallback, Meta& meta) {
  auto it = cfg.values.find(key);
  double v = it == cfg.values.end() ? fallback : parse_double(key, it->second);
  meta[key] = format_number(v);
  return v;
}

std::uint64_t count_of(const ExperimentConfig& cfg, const std::string& key,
                       std::uint64_t fallback, Meta& meta) {
  auto it = cfg.values.find(key);
  std::uint64_t v = it == cfg.values.end() ? fallback : parse_u64(key, it->second);
  meta[key] = std::to_string(v);
  return v;
}

bool flag_of(const ExperimentConfig& cfg, const std::string& key, bool fallback,
             Meta& meta) {
  auto it = cfg.values.find(key);
  bool v = it == cfg.values.end() ? fallback : parse_bool(key, it->second);
  meta[key] = v ? "1" : "0";
  return v;
}

double required_number(const ExperimentConfig& cfg, const std::string& key,
                       Meta& meta) {
  auto it = cfg.values.find(key);
  if (it == cfg.values.end()) throw ConfigError("missing required key: " + key);
  double v = parse_double(key, it->second);
  meta[key] = format_number(v);
  return v;
}

std::optional<double> optional_number(const ExperimentConfig& cfg,
                                      const std::string& key, Meta& meta) {
  auto it = cfg.values.find(key);
  if (it == cfg.values.end()) return {};
  double v = parse_double(key, it->second);
  meta[key] = format_number(v);
  return v;
}

std::vector<double> grid_of(const ExperimentConfig& cfg, const std::string& key,
                            const std::vector<double>& fallback, Meta& meta) {
  std::vector<double> grid;
  auto it = cfg.values.find(key);
  if (it == cfg.values.end()) {
    grid = fallback;
  } else {
    const std::string& raw = it->second;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
      std::size_t comma = raw.find(',', pos);
      if (comma == std::string::npos) comma = raw.size();
      grid.push_back(parse_double(key, raw.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    if (grid.empty()) throw ConfigError(key + " must list at least one value");
  }
  std::string echo;
  for (double v : grid) {
    if (!echo.empty()) echo += ',';
    echo += format_number(v);
  }
  meta[key] = echo;
  return grid;
}

// Builds the scenario either from the four link outages or from the full
// slot geometry. with_point additionally resolves the operating point
// (arrival rates and MAC controls); sweep modes only take lambda_e.
ScenarioParams resolve_scenario(const ExperimentConfig& cfg, bool with_point,
                                Meta& meta) {
  bool any_direct = false;
  bool any_geom = false;
  for (const auto& key : direct_link_keys()) {
    any_direct = any_direct || cfg.values.count(key) > 0;
  }
  for (const auto& key : geometry_keys()) {
    any_geom = any_geom || cfg.values.count(key) > 0;
  }
  if (any_direct && any_geom) {
    throw ConfigError("give link outages or link geometry, not both");
  }
  if (!any_direct && !any_geom) {
    throw ConfigError(
        "scenario needs the four p_out_* keys or the geometry keys");
  }

  ScenarioParams params;
  if (any_direct) {
    params.p_out_ps_pd = required_number(cfg, "p_out_ps_pd", meta);
    params.p_out_ps_ss = required_number(cfg, "p_out_ps_ss", meta);
    params.p_out_ss_sd = required_number(cfg, "p_out_ss_sd", meta);
    params.p_out_ss_pd = required_number(cfg, "p_out_ss_pd", meta);
  } else {
    Meta raw;
    SlotGeometry geom;
    geom.packet_bits = required_number(cfg, "packet_bits", raw);
    geom.slot_seconds = required_number(cfg, "slot_seconds", raw);
    geom.sensing_seconds = required_number(cfg, "sensing_seconds", raw);
    geom.energy_per_packet = required_number(cfg, "energy_per_packet", raw);
    geom.noise_power = required_number(cfg, "noise_power", raw);
    geom.bandwidth_hz = required_number(cfg, "bandwidth_hz", raw);
    LinkGains gains;
    gains.ps_pd = required_number(cfg, "gain_ps_pd", raw);
    gains.ps_ss = required_number(cfg, "gain_ps_ss", raw);
    gains.ss_sd = required_number(cfg, "gain_ss_sd", raw);
    gains.ss_pd = required_number(cfg, "gain_ss_pd", raw);
    double power = required_number(cfg, "primary_power", raw);
    meta.insert(raw.begin(), raw.end());
    LinkOutages links;
    try {
      links = scenario_links(geom, gains, power);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
    params.p_out_ps_pd = links.ps_pd;
    params.p_out_ps_ss = links.ps_ss;
    params.p_out_ss_sd = links.ss_sd;
    params.p_out_ss_pd = links.ss_pd;
    meta["p_out_ps_pd"] = format_number(links.ps_pd);
    meta["p_out_ps_ss"] = format_number(links.ps_ss);
    meta["p_out_ss_sd"] = format_number(links.ss_sd);
    meta["p_out_ss_pd"] = format_number(links.ss_pd);
  }

  params.lambda_e = number_of(cfg, "lambda_e", 0.0, meta);
  if (with_point) {
    params.lambda_p = number_of(cfg, "lambda_p", 0.0, meta);
    params.lambda_s = number_of(cfg, "lambda_s", 0.0, meta);
    params.f = number_of(cfg, "f", 1.0, meta);
    params.beta = number_of(cfg, "beta", 1.0, meta);
  } else {
    params.f = 1.0;
  }

  auto it = cfg.values.find("energy_model");
  std::string model = it == cfg.values.end() ? "coupled" : it->second;
  if (model == "coupled") {
    params.energy_model = EnergyModel::coupled;
  } else if (model == "md1_unity") {
    params.energy_model = EnergyModel::md1_unity;
  } else {
    throw ConfigError("bad energy_model: '" + model +
                      "' (expected coupled or md1_unity)");
  }
  meta["energy_model"] = model;

  try {
    params.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
  return params;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw ConfigError("cannot write " + path.string());
}

std::string meta_text(const Meta& meta) {
  std::string text;
  for (const auto& [key, value] : meta) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  return text;
}

const char* side_name(BoundSide side) {
  return side == BoundSide::inner ? "inner" : "outer";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    default: return "inconclusive";
  }
}

const char* action_name(SlotAction a) {
  switch (a) {
    case SlotAction::none: return "none";
    case SlotAction::primary: return "primary";
    case SlotAction::primary_decode: return "primary_decode";
    case SlotAction::own: return "own";
    case SlotAction::relay: return "relay";
    default: return "dummy";
  }
}

const char* outcome_name(SlotOutcome o) {
  switch (o) {
    case SlotOutcome::none: return "none";
    case SlotOutcome::delivered: return "delivered";
    case SlotOutcome::failed: return "failed";
    default: return "relayed";
  }
}

void append_envelope_rows(std::string& csv, const EnvelopeSweep& sweep,
                          const std::string& row_prefix) {
  for (const auto& pt : sweep.points) {
    csv += row_prefix;
    csv += format_number(pt.lambda_p);
    csv += ',';
    csv += format_number(pt.lambda_s_max);
    csv += ',';
    csv += format_number(pt.f_opt);
    csv += ',';
    csv += pt.beta_opt ? format_number(*pt.beta_opt) : "nan";
    csv += ',';
    csv += pt.feasible ? '1' : '0';
    csv += '\n';
  }
}

struct GridSettings {
  int lambda_p_points = 200;
  double f_step = 1e-3;
  std::optional<double> f_fixed;
};

GridSettings resolve_grid(const ExperimentConfig& cfg, Meta& meta) {
  GridSettings g;
  g.lambda_p_points =
      static_cast<int>(count_of(cfg, "lambda_p_points", 200, meta));
  g.f_step = number_of(cfg, "f_step", 1e-3, meta);
  g.f_fixed = optional_number(cfg, "f_fixed", meta);
  return g;
}

int run_bounds(const ExperimentConfig& cfg, const fs::path& out_dir) {
  Meta meta;
  meta["mode"] = "bounds";
  ScenarioParams params = resolve_scenario(cfg, true, meta);
  std::string csv =
      "feasible,mu_p_inner,mu_p_outer,mu_s_inner,mu_s_outer,mu_ps_inner,"
      "mu_ps_outer,mu_e_inner,mu_e_outer,lambda_ps_inner,lambda_ps_outer\n";
  try {
    RateBounds b = bound_rates(params);
    csv += '1';
    for (const Bound* bound :
         {&b.mu_p, &b.mu_s, &b.mu_ps, &b.mu_e, &b.lambda_ps}) {
      csv += ',';
      csv += format_number(bound->inner);
      csv += ',';
      csv += format_number(bound->outer);
    }
    csv += '\n';
    meta["feasible"] = "1";
  } catch (const InfeasiblePrimaryError&) {
    csv += "0,0,0,0,0,0,0,0,0,0,0\n";
    meta["feasible"] = "0";
  }
  write_file(out_dir / "bounds.csv", csv);
  write_file(out_dir / "bounds.meta", meta_text(meta));
  return 0;
}

int run_envelope(const ExperimentConfig& cfg, const fs::path& out_dir,
                 BoundSide side) {
  Meta meta;
  const std::string mode = std::string(side_name(side)) + "-envelope";
  meta["mode"] = mode;
  ScenarioParams base = resolve_scenario(cfg, false, meta);
  GridSettings grid = resolve_grid(cfg, meta);
  EnvelopeSweep sweep = sweep_envelope(base, side, grid.lambda_p_points,
                                       grid.f_step, grid.f_fixed);
  std::string csv = "lambda_p,lambda_s_max,f_opt,beta_opt,feasible\n";
  append_envelope_rows(csv, sweep, "");
  meta["max_feasible_lambda_p"] = format_number(sweep.max_feasible_lambda_p);
  write_file(out_dir / (mode + ".csv"), csv);
  write_file(out_dir / (mode + ".meta"), meta_text(meta));
  return 0;
}

void append_estimate(std::string& csv, const RateEstimate& est) {
  csv += format_number(est.value);
  csv += ',';
  csv += format_number(est.se);
}

int run_simulate(const ExperimentConfig& cfg, const fs::path& out_dir) {
  Meta meta;
  meta["mode"] = "simulate";
  ScenarioParams params = resolve_scenario(cfg, true, meta);
  RunConfig rc;
  rc.horizon = count_of(cfg, "horizon", 1'000'000, meta);
  rc.burn_in = count_of(cfg, "burn_in", 100'000, meta);
  rc.seed = count_of(cfg, "seed", 1, meta);
  rc.dummy_packets = flag_of(cfg, "dummy_packets", false, meta);
  rc.trace_slots = count_of(cfg, "trace_slots", 0, meta);
  std::uint64_t reps = count_of(cfg, "replications", 1, meta);
  if (reps == 0) throw ConfigError("replications must be at least 1");
  if (rc.horizon <= rc.burn_in) {
    throw ConfigError("horizon must exceed burn_in");
  }

  std::vector<TraceRecord> trace;
  std::vector<SimReport> reports;
  reports.reserve(reps);
  std::uint64_t master = rc.seed;
  for (std::uint64_t r = 0; r < reps; ++r) {
    RunConfig rep_rc = rc;
    rep_rc.seed = master + r;
    reports.push_back(run(params, rep_rc,
                          r == 0 && rc.trace_slots > 0 ? &trace : nullptr));
  }
  SimReport report = reps == 1 ? reports.front() : merge_reports(reports);

  std::string csv =
      "mu_p,mu_p_se,mu_s,mu_s_se,mu_ps,mu_ps_se,mu_e,mu_e_se,lambda_ps,"
      "lambda_ps_se,occ_p,occ_p_se,occ_s,occ_s_se,occ_ps,occ_ps_se,occ_e,"
      "occ_e_se,mean_len_p,mean_len_s,mean_len_ps,mean_len_e,verdict_p,"
      "verdict_s,verdict_ps,verdict_e,slots\n";
  for (const RateEstimate* est :
       {&report.mu_p, &report.mu_s, &report.mu_ps, &report.mu_e,
        &report.lambda_ps, &report.occ_p, &report.occ_s, &report.occ_ps,
        &report.occ_e}) {
    append_estimate(csv, *est);
    csv += ',';
  }
  csv += format_number(report.mean_len_p);
  csv += ',';
  csv += format_number(report.mean_len_s);
  csv += ',';
  csv += format_number(report.mean_len_ps);
  csv += ',';
  csv += format_number(report.mean_len_e);
  csv += ',';
  csv += verdict_name(report.verdict_p);
  csv += ',';
  csv += verdict_name(report.verdict_s);
  csv += ',';
  csv += verdict_name(report.verdict_ps);
  csv += ',';
  csv += verdict_name(report.verdict_e);
  csv += ',';
  csv += std::to_string(report.slots_run);
  csv += '\n';
  write_file(out_dir / "simulate.csv", csv);

  if (rc.trace_slots > 0) {
    std::string trace_csv = "slot,q_p,q_s,q_ps,q_e,action,outcome\n";
    for (const auto& rec : trace) {
      trace_csv += std::to_string(rec.slot);
      trace_csv += ',';
      trace_csv += std::to_string(rec.q_p);
      trace_csv += ',';
      trace_csv += std::to_string(rec.q_s);
      trace_csv += ',';
      trace_csv += std::to_string(rec.q_ps);
      trace_csv += ',';
      trace_csv += std::to_string(rec.q_e);
      trace_csv += ',';
      trace_csv += action_name(rec.action);
      trace_csv += ',';
      trace_csv += outcome_name(rec.outcome);
      trace_csv += '\n';
    }
    write_file(out_dir / "trace.csv", trace_csv);
  }
  write_file(out_dir / "simulate.meta", meta_text(meta));
  return 0;
}

struct Probe {
  bool expect_stable = false;
  ScenarioParams params;
  std::uint64_t burn_in = 0;
};

const EnvelopePoint* nearest_feasible(const EnvelopeSweep& sweep,
                                      double target) {
  const EnvelopePoint* best = nullptr;
  double best_dist = 0.0;
  for (const auto& pt : sweep.points) {
    if (!pt.feasible) continue;
    double dist = std::abs(pt.lambda_p - target);
    if (best == nullptr || dist < best_dist) {
      best = &pt;
      best_dist = dist;
    }
  }
  return best;
}

bool data_queues_stable(const SimReport& r) {
  return r.verdict_p == Verdict::stable && r.verdict_s == Verdict::stable &&
         r.verdict_ps == Verdict::stable;
}

bool any_data_queue_unstable(const SimReport& r) {
  return r.verdict_p == Verdict::unstable || r.verdict_s == Verdict::unstable ||
         r.verdict_ps == Verdict::unstable;
}

bool any_data_queue_inconclusive(const SimReport& r) {
  return r.verdict_p == Verdict::inconclusive ||
         r.verdict_s == Verdict::inconclusive ||
         r.verdict_ps == Verdict::inconclusive;
}

// Probes the region boundary from both sides: points safely inside the
// inner bound must simulate stable, points above the outer bound must
// show at least one growing queue. Inconclusive verdicts get one retry
// at four times the horizon.
int run_validate(const ExperimentConfig& cfg, const fs::path& out_dir) {
  Meta meta;
  meta["mode"] = "validate";
  ScenarioParams base = resolve_scenario(cfg, false, meta);
  GridSettings grid;
  grid.lambda_p_points =
      static_cast<int>(count_of(cfg, "lambda_p_points", 200, meta));
  grid.f_step = number_of(cfg, "f_step", 1e-3, meta);
  std::uint64_t horizon = count_of(cfg, "horizon", 1'000'000, meta);
  std::uint64_t burn_in = count_of(cfg, "burn_in", 100'000, meta);
  std::uint64_t seed = count_of(cfg, "seed", 1, meta);
  bool dummy_packets = flag_of(cfg, "dummy_packets", false, meta);
  if (horizon <= burn_in) throw ConfigError("horizon must exceed burn_in");

  EnvelopeSweep inner =
      sweep_envelope(base, BoundSide::inner, grid.lambda_p_points, grid.f_step);
  EnvelopeSweep outer =
      sweep_envelope(base, BoundSide::outer, grid.lambda_p_points, grid.f_step);

  std::vector<Probe> probes;
  const double stations[3] = {0.25, 0.5, 0.75};
  for (double frac : stations) {
    const EnvelopePoint* pt =
        nearest_feasible(inner, frac * inner.max_feasible_lambda_p);
    if (pt == nullptr) continue;
    Probe probe;
    probe.expect_stable = true;
    probe.params = base;
    probe.params.lambda_p = pt->lambda_p;
    probe.params.lambda_s = 0.8 * pt->lambda_s_max;
    probe.params.f = pt->f_opt;
    probe.params.beta = pt->beta_opt.value_or(1.0);
    probe.burn_in = burn_in;
    probes.push_back(probe);
  }
  for (double frac : stations) {
    const EnvelopePoint* pt =
        nearest_feasible(outer, frac * outer.max_feasible_lambda_p);
    if (pt == nullptr) continue;
    Probe probe;
    probe.expect_stable = false;
    probe.params = base;
    probe.params.lambda_p = pt->lambda_p;
    // Push the own-data arrivals visibly past the outer service bound.
    probe.params.lambda_s = std::min(
        std::max(1.1 * pt->lambda_s_max, pt->lambda_s_max + 0.05), 0.99);
    probe.params.f = pt->f_opt;
    probe.params.beta = 1.0;
    // Growth detection wants the full trajectory from the empty start.
    probe.burn_in = 0;
    probes.push_back(probe);
  }

  std::string csv =
      "kind,lambda_p,lambda_s,f,beta,verdict_p,verdict_s,verdict_ps,verdict_e,"
      "reruns,pass\n";
  int failures = 0;
  int reruns = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Probe& probe = probes[i];
    RunConfig rc;
    rc.horizon = horizon;
    rc.burn_in = probe.burn_in;
    rc.seed = seed + i;
    rc.dummy_packets = dummy_packets;
    SimReport report = run(probe.params, rc);
    int probe_reruns = 0;
    bool pass = probe.expect_stable ? data_queues_stable(report)
                                    : any_data_queue_unstable(report);
    if (!pass && any_data_queue_inconclusive(report)) {
      rc.horizon = horizon * 4;
      report = run(probe.params, rc);
      probe_reruns = 1;
      ++reruns;
      pass = probe.expect_stable ? data_queues_stable(report)
                                 : any_data_queue_unstable(report);
    }
    if (!pass) ++failures;
    csv += probe.expect_stable ? "stable" : "unstable";
    csv += ',';
    csv += format_number(probe.params.lambda_p);
    csv += ',';
    csv += format_number(probe.params.lambda_s);
    csv += ',';
    csv += format_number(probe.params.f);
    csv += ',';
    csv += format_number(probe.params.beta);
    csv += ',';
    csv += verdict_name(report.verdict_p);
    csv += ',';
    csv += verdict_name(report.verdict_s);
    csv += ',';
    csv += verdict_name(report.verdict_ps);
    csv += ',';
    csv += verdict_name(report.verdict_e);
    csv += ',';
    csv += std::to_string(probe_reruns);
    csv += ',';
    csv += pass ? '1' : '0';
    csv += '\n';
  }
  meta["probes"] = std::to_string(probes.size());
  meta["failures"] = std::to_string(failures);
  meta["reruns"] = std::to_string(reruns);
  write_file(out_dir / "validate.csv", csv);
  write_file(out_dir / "validate.meta", meta_text(meta));
  std::cout << "validate: " << (probes.size() - failures) << "/"
            << probes.size() << " probes passed\n";
  return failures == 0 ? 0 : 2;
}

int run_fig1(const ExperimentConfig& cfg, const fs::path& out_dir) {
  Meta meta;
  meta["mode"] = "fig1";
  GridSettings grid = resolve_grid(cfg, meta);
  ScenarioParams coupled = fig1_scenario();
  ScenarioParams md1 = coupled;
  md1.energy_model = EnergyModel::md1_unity;

  std::string csv = "model,side,lambda_p,lambda_s_max,f_opt,beta_opt,feasible\n";
  EnvelopeSweep coupled_inner;
  EnvelopeSweep md1_outer;
  const std::pair<const char*, const ScenarioParams*> models[] = {
      {"coupled", &coupled}, {"md1_unity", &md1}};
  for (const auto& [model, params] : models) {
    for (BoundSide side : {BoundSide::inner, BoundSide::outer}) {
      EnvelopeSweep sweep = sweep_envelope(
          *params, side, grid.lambda_p_points, grid.f_step, grid.f_fixed);
      append_envelope_rows(csv, sweep,
                           std::string(model) + ',' + side_name(side) + ',');
      if (params == &coupled && side == BoundSide::inner) {
        coupled_inner = sweep;
      }
      if (params == &md1 && side == BoundSide::outer) {
        md1_outer = sweep;
      }
    }
  }

  // The two models share the lambda_p grid, so the largest pointwise
  // spread between the decoupled outer and coupled inner boundaries
  // says how much the energy interaction can matter at all.
  double max_gap = 0.0;
  double max_gap_at = 0.0;
  for (std::size_t i = 0;
       i < coupled_inner.points.size() && i < md1_outer.points.size(); ++i) {
    double gap = std::abs(md1_outer.points[i].lambda_s_max -
                          coupled_inner.points[i].lambda_s_max);
    if (gap > max_gap) {
      max_gap = gap;
      max_gap_at = md1_outer.points[i].lambda_p;
    }
  }
  meta["max_envelope_gap"] = format_number(max_gap);
  meta["max_envelope_gap_lambda_p"] = format_number(max_gap_at);
  write_file(out_dir / "fig1.csv", csv);
  write_file(out_dir / "fig1.meta", meta_text(meta));
  return 0;
}

int run_fig2(const ExperimentConfig& cfg, const fs::path& out_dir) {
  Meta meta;
  meta["mode"] = "fig2";
  GridSettings grid = resolve_grid(cfg, meta);
  std::vector<double> energies =
      grid_of(cfg, "lambda_e_grid", {0.2, 0.4, 0.6, 0.8, 1.0}, meta);
  std::string csv = "lambda_e,lambda_p,lambda_s_max,f_opt,beta_opt,feasible\n";
  for (double lambda_e : energies) {
    EnvelopeSweep sweep =
        sweep_envelope(fig2_scenario(lambda_e), BoundSide::inner,
                       grid.lambda_p_points, grid.f_step, grid.f_fixed);
    append_envelope_rows(csv, sweep, format_number(lambda_e) + ',');
  }
  write_file(out_dir / "fig2.csv", csv);
  write_file(out_dir / "fig2.meta", meta_text(meta));
  return 0;
}

int run_fig3(const ExperimentConfig& cfg, const fs::path& out_dir) {
  Meta meta;
  meta["mode"] = "fig3";
  GridSettings grid = resolve_grid(cfg, meta);
  std::vector<double> energies = grid_of(
      cfg, "lambda_e_grid", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
      meta);
  std::string csv =
      "side,lambda_e,lambda_p,lambda_s_max,f_opt,beta_opt,feasible\n";
  for (BoundSide side : {BoundSide::inner, BoundSide::outer}) {
    for (double lambda_e : energies) {
      EnvelopeSweep sweep =
          sweep_envelope(fig3_scenario(lambda_e), side, grid.lambda_p_points,
                         grid.f_step, grid.f_fixed);
      append_envelope_rows(
          csv, sweep,
          std::string(side_name(side)) + ',' + format_number(lambda_e) + ',');
    }
  }
  write_file(out_dir / "fig3.csv", csv);
  write_file(out_dir / "fig3.meta", meta_text(meta));
  return 0;
}

int run_fig4(const ExperimentConfig& cfg, const fs::path& out_dir) {
  Meta meta;
  meta["mode"] = "fig4";
  double f_step = number_of(cfg, "f_step", 1e-3, meta);
  double r_min = number_of(cfg, "r_min", 0.01, meta);
  double r_max = number_of(cfg, "r_max", 6.0, meta);
  std::uint64_t r_points = count_of(cfg, "r_points", 80, meta);
  if (r_points == 0) throw ConfigError("r_points must be at least 1");
  if (!(r_min > 0.0) || r_max < r_min) {
    throw ConfigError("need 0 < r_min <= r_max");
  }
  std::vector<double> r_grid;
  r_grid.reserve(r_points);
  for (std::uint64_t i = 0; i < r_points; ++i) {
    r_grid.push_back(r_points == 1 ? r_min
                                   : r_min + (r_max - r_min) *
                                                 static_cast<double>(i) /
                                                 static_cast<double>(r_points - 1));
  }

  std::string csv =
      "snr_ps_pd,spectral_efficiency,mu_p_outer,mu_p_inner,mu_p_noncoop\n";
  for (double snr_pd : {0.2, 2.0}) {
    std::vector<PrimaryRatePoint> points =
        max_primary_rate(fig4_family(snr_pd), r_grid, f_step);
    for (const auto& pt : points) {
      csv += format_number(snr_pd);
      csv += ',';
      csv += format_number(pt.spectral_efficiency);
      csv += ',';
      csv += format_number(pt.mu_p_outer);
      csv += ',';
      csv += format_number(pt.mu_p_inner);
      csv += ',';
      csv += format_number(pt.mu_p_noncoop);
      csv += '\n';
    }
  }
  write_file(out_dir / "fig4.csv", csv);
  write_file(out_dir / "fig4.meta", meta_text(meta));
  return 0;
}

std::string trimmed(const std::string& raw) {
  std::size_t first = raw.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  std::size_t last = raw.find_last_not_of(" \t\r");
  return raw.substr(first, last - first + 1);
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (known_keys().count(key) == 0) {
    throw ConfigError("unknown config key: " + key);
  }
  values[key] = value;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string entry = trimmed(line);
    if (entry.empty()) continue;
    std::size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    std::string key = trimmed(entry.substr(0, eq));
    std::string value = trimmed(entry.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    if (cfg.values.count(key)) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key " + key);
    }
    try {
      cfg.set(key, value);
    } catch (const ConfigError& err) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " +
                        err.what());
    }
  }
  return cfg;
}

int run_experiment(const ExperimentConfig& cfg) {
  auto it = cfg.values.find("mode");
  if (it == cfg.values.end()) throw ConfigError("mode is required");
  const std::string mode = it->second;
  const std::set<std::string> allowed = allowed_keys(mode);
  for (const auto& [key, value] : cfg.values) {
    if (allowed.count(key) == 0) {
      throw ConfigError("key " + key + " is not used by mode " + mode);
    }
  }

  fs::path out_dir = ".";
  if (auto dir = cfg.values.find("out_dir"); dir != cfg.values.end()) {
    out_dir = dir->second;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + out_dir.string() +
                      ": " + ec.message());
  }

  if (mode == "bounds") return run_bounds(cfg, out_dir);
  if (mode == "inner-envelope")
    return run_envelope(cfg, out_dir, BoundSide::inner);
  if (mode == "outer-envelope")
    return run_envelope(cfg, out_dir, BoundSide::outer);
  if (mode == "simulate") return run_simulate(cfg, out_dir);
  if (mode == "validate") return run_validate(cfg, out_dir);
  if (mode == "fig1") return run_fig1(cfg, out_dir);
  if (mode == "fig2") return run_fig2(cfg, out_dir);
  if (mode == "fig3") return run_fig3(cfg, out_dir);
  return run_fig4(cfg, out_dir);
}

ScenarioParams fig1_scenario() {
  ScenarioParams p;
  p.p_out_ps_pd = 0.2;
  p.p_out_ps_ss = 0.1;
  p.p_out_ss_sd = 0.2;
  p.p_out_ss_pd = 0.1;
  p.lambda_e = 0.8;
  p.f = 1.0;
  return p;
}

ScenarioParams fig2_scenario(double lambda_e) {
  ScenarioParams p;
  p.p_out_ps_pd = 0.4;
  p.p_out_ps_ss = 0.1;
  p.p_out_ss_sd = 0.2;
  p.p_out_ss_pd = 0.1;
  p.lambda_e = lambda_e;
  p.f = 1.0;
  return p;
}

ScenarioParams fig3_scenario(double lambda_e) {
  ScenarioParams p;
  p.p_out_ps_pd = 1.0;
  p.p_out_ps_ss = 0.3;
  p.p_out_ss_sd = 0.1;
  p.p_out_ss_pd = 0.2;
  p.lambda_e = lambda_e;
  p.f = 1.0;
  return p;
}

PrimaryRateFamily fig4_family(double snr_ps_pd) {
  PrimaryRateFamily family;
  family.snr_ps_pd = snr_ps_pd;
  family.snr_ps_ss = 8.0;
  family.snr_ss_sd = 8.0;
  family.snr_ss_pd = 8.0;
  family.tau_over_t = 0.1;
  family.lambda_p = 0.1;
  family.lambda_e = 0.7;
  return family;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace ehcoop
