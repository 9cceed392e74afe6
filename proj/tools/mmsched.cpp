/*
 * Copyright (C) 2026 The mmsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
*/

// mmsched: run, batch, sweep, value-surface and oracle subcommands.

#include <mmsched/io.hpp>
#include <mmsched/presets.hpp>
#include <mmsched/simulation.hpp>
#include <mmsched/validation.hpp>
#include <mmsched/valuation.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mmsched;

namespace {

enum ExitCode
{
  kOk = 0,
  kChecksFailed = 1,
  kConfigFailure = 2,
  kSafetyFailure = 3,
  kTimeoutFailure = 4,
};

constexpr const char* kCsvVersion = "# mmsched-csv v1";
constexpr const char* kOutDirEnv = "MMSCHED_OUT_DIR";

std::string num(double x)
{
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// JSON has no infinity; spell it out.
json jnum(double x)
{
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  return x;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

//==============================================================================
// Options shared by the subcommands.

struct Common
{
  std::string out_dir;
  std::string name;
  int jobs = 0;
  std::string scenario_file;
  std::string preset;
  std::vector<std::string> policies;
  std::optional<int> grid_nv;
  std::optional<int> grid_np;
  std::optional<int> refine;
  std::optional<std::uint64_t> seed;
  std::string command_line;
};

int resolved_jobs(const Common& c)
{
  if (c.jobs > 0)
    return c.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void add_output_options(CLI::App* app, Common& c)
{
  app->add_option("--out", c.out_dir,
    std::string("Output directory (default: $") + kOutDirEnv + " or .)");
  app->add_option("--name", c.name, "Stem of the output file names");
}

void add_scenario_options(CLI::App* app, Common& c)
{
  app->add_option("scenario", c.scenario_file, "Scenario JSON file");
  app->add_option("--preset", c.preset, "Built-in setup: fig5 .. fig12");
  app->add_option("--policy", c.policies,
    "minimax, queueing:<d> or following:<d>")->take_all();
  app->add_option("--grid-nv", c.grid_nv, "Minimax grid, velocity points");
  app->add_option("--grid-np", c.grid_np, "Minimax grid, position points");
  app->add_option("--refine", c.refine, "Minimax grid refinement radius");
}

void add_jobs_option(CLI::App* app, Common& c)
{
  app->add_option("--jobs", c.jobs, "Worker threads (default: all cores)");
}

// Loaded scenario file or preset, before flag overrides.
struct Loaded
{
  ScenarioConfig cfg;
  json file;  // the raw file, null for presets
  std::string label;
};

json read_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "cannot open scenario file '" + path + "'");
  try
  {
    return json::parse(in);
  }
  catch (const json::parse_error& e)
  {
    throw ConfigError("", "'" + path + "' is not valid JSON: " + e.what());
  }
}

// Keys a scenario file may carry for other subcommands.
const char* const kExtraKeys[] = {"sampler"};

Loaded load_scenario(const Common& c)
{
  if (c.scenario_file.empty() == c.preset.empty())
    throw ConfigError("", "give exactly one of a scenario file or --preset");
  Loaded l;
  if (!c.preset.empty())
  {
    try
    {
      l.cfg = scenario_preset(c.preset);
    }
    catch (const std::invalid_argument& e)
    {
      throw ConfigError("preset", e.what());
    }
    l.label = c.preset;
    return l;
  }
  l.file = read_json_file(c.scenario_file);
  if (!l.file.is_object())
    throw ConfigError("", "a scenario file holds a JSON object");
  json body = l.file;
  for (const char* k : kExtraKeys)
    body.erase(k);
  l.cfg = scenario_from_json(body);
  l.label = fs::path(c.scenario_file).stem().string();
  return l;
}

PolicySpec parse_policy(const std::string& text)
{
  try
  {
    return PolicySpec::parse(text);
  }
  catch (const std::invalid_argument& e)
  {
    throw ConfigError("policy", e.what());
  }
}

void apply_grid_flags(const Common& c, ScenarioConfig& cfg)
{
  if (c.grid_nv)
    cfg.grid.nv = *c.grid_nv;
  if (c.grid_np)
    cfg.grid.np = *c.grid_np;
  if (c.refine)
    cfg.grid.refine = *c.refine;
  if (cfg.grid.nv < 1)
    throw ConfigError("grid-nv", "must be at least 1");
  if (cfg.grid.np < 1)
    throw ConfigError("grid-np", "must be at least 1");
  if (cfg.grid.refine < 0)
    throw ConfigError("refine", "must be non-negative");
}

//==============================================================================
// Output files. Every file names the manifest written next to it.

class Outputs
{
public:
  Outputs(const Common& c, std::string subcommand, const std::string& label)
    : subcommand_(std::move(subcommand))
  {
    std::string dir = c.out_dir;
    if (dir.empty())
    {
      const char* env = std::getenv(kOutDirEnv);
      dir = env && *env ? env : ".";
    }
    dir_ = dir;
    stem_ = c.name.empty() ? label + "_" + subcommand_ : c.name;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
      throw ConfigError("out", "cannot create '" + dir_.string() + "': " + ec.message());
  }

  std::string manifest_name() const { return stem_ + ".manifest.json"; }

  std::ofstream csv(const std::string& suffix, const std::string& kind,
                    const std::vector<std::string>& columns)
  {
    const auto path = open_path(suffix + ".csv");
    std::ofstream out(path);
    if (!out)
      throw std::runtime_error("cannot write " + path.string());
    out << kCsvVersion << " " << kind << " manifest=" << manifest_name() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << (i ? "," : "") << columns[i];
    out << "\n";
    return out;
  }

  void write_json(const std::string& suffix, json j)
  {
    const auto path = open_path(suffix + ".json");
    j["manifest"] = manifest_name();
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    if (!out)
      throw std::runtime_error("cannot write " + path.string());
  }

  void write_manifest(const Common& c, json config, std::optional<std::uint64_t> seed,
                      json timings)
  {
    json m = {
      {"subcommand", subcommand_},
      {"version", MMSCHED_VERSION},
      {"command", c.command_line},
      {"config", std::move(config)},
      {"seed", seed ? json(*seed) : json(nullptr)},
      {"outputs", outputs_},
      {"timings", std::move(timings)},
    };
    std::ofstream out(dir_/manifest_name());
    out << m.dump(2) << "\n";
    std::cerr << "wrote " << (dir_/manifest_name()).string() << "\n";
  }

private:
  fs::path open_path(const std::string& suffix)
  {
    const auto name = stem_ + suffix;
    outputs_.push_back(name);
    std::cerr << "wrote " << (dir_/name).string() << "\n";
    return dir_/name;
  }

  std::string subcommand_;
  fs::path dir_;
  std::string stem_;
  std::vector<std::string> outputs_;
};

json window_json(const OccupationWindow& w)
{
  return {{"t_in", jnum(w.t_in)}, {"t_out", jnum(w.t_out)}, {"v_in", w.v_in}};
}

//==============================================================================
// run

struct RunOptions
{
  double sample_dt = 0.05;
};

int cmd_run(const Common& c, const RunOptions& o)
{
  const auto t0 = std::chrono::steady_clock::now();
  auto l = load_scenario(c);
  auto& cfg = l.cfg;
  if (c.policies.size() > 1)
    throw ConfigError("policy", "run takes a single policy");
  if (!c.policies.empty())
    cfg.policy = parse_policy(c.policies.front());
  apply_grid_flags(c, cfg);
  if (c.seed)
    cfg.rng_seed = *c.seed;
  if (!(o.sample_dt > 0.0))
    throw ConfigError("sample-dt", "must be positive");
  cfg.validate();

  const auto r = run_episode(cfg);

  Outputs out(c, "run", l.label);
  {
    // Sampled states plus one row at each entry and exit.
    double t_end = 0.0;
    for (double t : {r.w0.t_out, r.w1.t_out, r.traj0.end_time()})
      if (is_finite(t))
        t_end = std::max(t_end, t);
    t_end = r.timeout ? cfg.horizon : std::min(cfg.horizon, t_end + 1.0);

    std::vector<std::pair<double, std::string>> rows;
    const long n = static_cast<long>(std::ceil(t_end/o.sample_dt - 1e-9));
    for (long i = 0; i <= n; ++i)
      rows.push_back({std::min(t_end, i*o.sample_dt), ""});
    const std::pair<double, const char*> marks[] = {
      {r.w0.t_in, "in0"}, {r.w0.t_out, "out0"}, {r.w1.t_in, "in1"}, {r.w1.t_out, "out1"}};
    for (const auto& [t, m] : marks)
      if (is_finite(t))
        rows.push_back({t, m});
    std::stable_sort(rows.begin(), rows.end(),
      [](const auto& a, const auto& b) { return a.first < b.first; });

    auto csv = out.csv("_trajectory", "trajectory", {"t", "p0", "v0", "p1", "v1", "marker"});
    for (const auto& [t, m] : rows)
    {
      const State a = r.traj0.state_at(t);
      const State b = r.traj1.state_at(t);
      csv << num(t) << "," << num(a.p) << "," << num(a.v) << "," << num(b.p) << ","
          << num(b.v) << "," << m << "\n";
    }
  }

  json ep = {
    {"policy", cfg.policy.name()},
    {"cost", jnum(r.cost)},
    {"safety_ok", r.safety_ok},
    {"timeout", r.timeout},
    {"post_entry_acc", r.post_entry_acc},
    {"agent0", window_json(r.w0)},
    {"agent1", window_json(r.w1)},
    {"steps", r.steps},
    {"fallbacks", r.fallbacks},
    {"evaluations", r.evaluations},
    {"decel_onset", jnum(r.decel_onset)},
    {"accel_resume", jnum(r.accel_resume)},
    {"max_observation_lag", jnum(r.max_observation_lag)},
  };
  if (cfg.record_decisions)
  {
    auto d = json::array();
    for (const auto& rec : r.decisions)
      d.push_back({{"t", rec.time}, {"kind", to_string(rec.kind)},
                   {"p", rec.state.p}, {"v", rec.state.v},
                   {"target_p", rec.target.p}, {"target_v", rec.target.v},
                   {"objective", jnum(rec.objective)}, {"region", to_string(rec.region)},
                   {"certified", rec.certified},
                   {"observation_time", jnum(rec.observation_time)}});
    ep["decisions"] = d;
  }
  out.write_json("_episode", ep);
  out.write_manifest(c, to_json(cfg), cfg.rng_seed,
    {{"episode_seconds", r.wall_seconds}, {"total_seconds", seconds_since(t0)}});

  std::cout << cfg.policy.name() << ": cost " << num(r.cost) << ", entry at "
            << num(r.w0.t_in) << "\n";
  if (r.timeout)
  {
    std::cerr << "timeout: agent 0 did not enter before the horizon " << cfg.horizon << "\n";
    return kTimeoutFailure;
  }
  if (!r.safety_ok)
  {
    std::cerr << "safety violation: windows (" << num(r.w0.t_in) << ", " << num(r.w0.t_out)
              << ") and (" << num(r.w1.t_in) << ", " << num(r.w1.t_out) << ") overlap\n";
    return kSafetyFailure;
  }
  return kOk;
}

//==============================================================================
// batch

struct BatchOptions
{
  std::optional<std::size_t> n;
  bool keep_going = false;
  bool episodes = false;
};

int cmd_batch(const Common& c, const BatchOptions& o)
{
  const auto t0 = std::chrono::steady_clock::now();
  auto l = load_scenario(c);
  std::vector<PolicySpec> policies;
  Sampler sampler;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  if (!c.preset.empty())
  {
    const auto p = fig8_preset();
    policies = p.policies;
    sampler = p.sampler;
    n = p.n;
    seed = p.seed;
  }
  else
  {
    policies = {l.cfg.policy};
    if (l.file.contains("sampler"))
      sampler = sampler_from_json(l.file["sampler"]);
  }
  if (!c.policies.empty())
  {
    policies.clear();
    for (const auto& p : c.policies)
      policies.push_back(parse_policy(p));
  }
  if (o.n)
    n = *o.n;
  if (c.seed)
    seed = *c.seed;
  if (n == 0)
    throw ConfigError("n", "must be positive");
  apply_grid_flags(c, l.cfg);
  l.cfg.validate();
  const int jobs = resolved_jobs(c);

  std::vector<BatchResult> results;
  json timings = json::object();
  for (const auto& p : policies)
  {
    ScenarioConfig tmpl = l.cfg;
    tmpl.policy = p;
    try
    {
      results.push_back(run_batch(tmpl, n, sampler, seed, jobs, o.keep_going));
    }
    catch (const SafetyViolation& v)
    {
      std::cerr << "safety violation: policy " << p.name() << ", batch seed " << v.batch_seed
                << ", episode " << v.index << " (p1_init " << num(v.episode.p1_init)
                << ", v_f " << num(v.episode.v_f) << ")\n";
      return kSafetyFailure;
    }
    timings[p.name()] = results.back().wall_seconds;
    std::cerr << p.name() << ": " << n << " episodes in " << num(results.back().wall_seconds)
              << " s\n";
  }

  Outputs out(c, "batch", l.label);
  {
    auto csv = out.csv("_tail", "tail-curve", {"policy", "cost", "p_emp"});
    for (std::size_t i = 0; i < policies.size(); ++i)
      for (const auto& [cost, p] : results[i].tail_curve())
        csv << policies[i].name() << "," << num(cost) << "," << num(p) << "\n";
  }
  if (o.episodes)
  {
    auto csv = out.csv("_episodes", "episodes",
      {"policy", "index", "p1_init", "v_f", "cost", "t_in", "v_in", "safe", "timeout"});
    for (std::size_t i = 0; i < policies.size(); ++i)
    {
      const auto& eps = results[i].episodes;
      for (std::size_t k = 0; k < eps.size(); ++k)
        csv << policies[i].name() << "," << k << "," << num(eps[k].p1_init) << ","
            << num(eps[k].v_f) << "," << num(eps[k].cost) << "," << num(eps[k].t_in) << ","
            << num(eps[k].v_in) << "," << eps[k].safety_ok << "," << eps[k].timeout << "\n";
    }
  }

  json summary = {{"n", n}, {"seed", seed}, {"policies", json::array()}};
  bool unsafe = false, timed_out = false;
  for (std::size_t i = 0; i < policies.size(); ++i)
  {
    const auto& b = results[i];
    double sum = 0.0;
    std::size_t finite = 0;
    for (double x : b.sorted_costs)
      if (is_finite(x))
      {
        sum += x;
        ++finite;
      }
    json q = json::object();
    for (double p : {0.5, 0.9, 0.99, 0.999})
      q[num(p)] = jnum(b.quantile(p));
    json tail = json::object();
    for (double p : {1e-2, 1e-3, 1e-4})
      if (p*static_cast<double>(n) >= 1.0)
        tail[num(p)] = jnum(b.tail_cost(p));
    summary["policies"].push_back({
      {"policy", policies[i].name()},
      {"mean", finite ? jnum(sum/static_cast<double>(finite)) : json(nullptr)},
      {"quantiles", q},
      {"tail", tail},
      {"violations", b.violations},
      {"timeouts", b.timeouts},
    });
    unsafe = unsafe || !b.violations.empty();
    timed_out = timed_out || b.timeouts > 0;
  }
  out.write_json("_quantiles", summary);
  timings["total_seconds"] = seconds_since(t0);
  json config = {{"scenario", to_json(l.cfg)}, {"sampler", to_json(sampler)}, {"n", n},
                 {"jobs", jobs}, {"keep_going", o.keep_going}};
  for (const auto& p : policies)
    config["policies"].push_back(p.name());
  out.write_manifest(c, config, seed, timings);

  for (std::size_t i = 0; i < policies.size(); ++i)
  {
    std::cout << policies[i].name() << ":";
    for (const auto& [p, v] : summary["policies"][i]["tail"].items())
      std::cout << " tail(" << p << ")=" << (v.is_number() ? num(v.get<double>()) : "inf");
    std::cout << "\n";
  }
  if (unsafe)
  {
    for (std::size_t i = 0; i < policies.size(); ++i)
      for (auto k : results[i].violations)
        std::cerr << "safety violation: policy " << policies[i].name() << ", batch seed "
                  << seed << ", episode " << k << "\n";
    return kSafetyFailure;
  }
  return timed_out ? kTimeoutFailure : kOk;
}

//==============================================================================
// sweep

struct SweepOptions
{
  std::string axis;
  std::vector<double> values;
};

int cmd_sweep(const Common& c, const SweepOptions& o)
{
  const auto t0 = std::chrono::steady_clock::now();
  auto l = load_scenario(c);
  SweepPreset s;
  if (!c.preset.empty())
  {
    if (c.preset == "fig9")
      s = fig9_preset();
    else if (c.preset == "fig10")
      s = fig10_preset();
    else if (c.preset == "fig11")
      s = fig11_preset();
    else if (c.preset == "fig12")
      s = fig12_preset();
    else
      throw ConfigError("preset", "sweep presets are fig9, fig10, fig11 and fig12");
  }
  else
  {
    s.base = l.cfg;
    if (o.axis.empty())
      throw ConfigError("axis", "required with a scenario file");
    if (o.values.empty())
      throw ConfigError("values", "required with a scenario file");
  }
  if (!o.axis.empty())
  {
    try
    {
      s.axis = parse_sweep_axis(o.axis);
    }
    catch (const std::invalid_argument& e)
    {
      throw ConfigError("axis", e.what());
    }
  }
  if (!o.values.empty())
    s.values = o.values;
  if (c.policies.size() > 1)
    throw ConfigError("policy", "sweep takes a single policy");
  if (!c.policies.empty())
    s.base.policy = parse_policy(c.policies.front());
  apply_grid_flags(c, s.base);
  s.base.validate();
  for (double v : s.values)
  {
    try
    {
      with_axis(s.base, s.axis, v).validate();
    }
    catch (const std::invalid_argument& e)
    {
      throw ConfigError("values", std::string("value ") + num(v) + ": " + e.what());
    }
  }
  const int jobs = resolved_jobs(c);

  struct Curve
  {
    std::string label;
    std::vector<SweepPoint> points;
  };
  std::vector<Curve> curves;
  curves.push_back({"base", sweep(s.base, s.axis, s.values, jobs)});
  for (const auto& [axis, value] : s.curves)
    curves.push_back({std::string(to_string(axis)) + "=" + num(value),
                      sweep(with_axis(s.base, axis, value), s.axis, s.values, jobs)});

  Outputs out(c, "sweep", l.label);
  bool unsafe = false, timed_out = false;
  json summary = {{"axis", to_string(s.axis)}, {"curves", json::array()}};
  {
    auto csv = out.csv("_points", "sweep",
      {"curve", "axis", "value", "cost", "t_in", "v_in", "first", "safe", "timeout"});
    for (const auto& curve : curves)
    {
      json pts = json::array();
      for (const auto& p : curve.points)
      {
        csv << curve.label << "," << to_string(s.axis) << "," << num(p.value) << ","
            << num(p.summary.cost) << "," << num(p.summary.t_in) << ","
            << num(p.summary.v_in) << "," << p.first << "," << p.summary.safety_ok << ","
            << p.summary.timeout << "\n";
        pts.push_back({{"value", p.value}, {"cost", jnum(p.summary.cost)},
                       {"first", p.first}, {"safe", p.summary.safety_ok}});
        unsafe = unsafe || (!p.summary.safety_ok && !p.summary.timeout);
        timed_out = timed_out || p.summary.timeout;
      }
      summary["curves"].push_back({{"curve", curve.label}, {"points", pts}});
    }
  }
  out.write_json("_summary", summary);
  json config = {{"scenario", to_json(s.base)}, {"axis", to_string(s.axis)},
                 {"values", s.values}, {"jobs", jobs}};
  for (const auto& [axis, value] : s.curves)
    config["curves"].push_back({{"axis", to_string(axis)}, {"value", value}});
  out.write_manifest(c, config, std::nullopt, {{"total_seconds", seconds_since(t0)}});

  std::cout << curves.size() << " curve(s) x " << s.values.size() << " values over "
            << to_string(s.axis) << "\n";
  if (unsafe)
  {
    std::cerr << "safety violation in the sweep; see the safe column\n";
    return kSafetyFailure;
  }
  return timed_out ? kTimeoutFailure : kOk;
}

//==============================================================================
// value-surface

struct SurfaceOptions
{
  std::vector<double> u, o, p_tar, v_tar, x_tar, p1;
  std::optional<double> t_next, v1, dt;
};

Axis1D axis_flag(const std::vector<double>& flag, Axis1D fallback, const char* key)
{
  if (flag.empty())
    return fallback;
  if (flag.size() != 3 || flag[2] < 1.0 || flag[2] != std::floor(flag[2]))
    throw ConfigError(key, "expected lo,hi,n with integer n >= 1");
  return Axis1D{flag[0], flag[1], static_cast<int>(flag[2])};
}

void window_surface(const SurfaceOptions& o, Outputs& out, json& config)
{
  auto p = fig5_preset();
  p.u = axis_flag(o.u, p.u, "u");
  p.o = axis_flag(o.o, p.o, "o");
  if (!o.x_tar.empty())
  {
    if (o.x_tar.size() != 2)
      throw ConfigError("x-tar", "expected p,v");
    p.x_tar = {o.x_tar[0], o.x_tar[1]};
  }
  if (o.t_next)
    p.t_next = *o.t_next;

  auto csv = out.csv("_window", "window-surface", {"u", "o", "value", "region"});
  for (int i = 0; i < p.u.n; ++i)
    for (int j = 0; j < p.o.n; ++j)
    {
      const double u = p.u.at(i), ov = p.o.at(j);
      const double v = value_uo(p.x_tar, p.t_next, u, ov, p.params0);
      csv << num(u) << "," << num(ov) << "," << num(v) << ","
          << (u < ov ? to_string(window_region(p.x_tar, p.t_next, u, ov, p.params0)) : "none")
          << "\n";
    }
  config["window"] = {{"params0", to_json(p.params0)},
                      {"x_tar", {{"p", p.x_tar.p}, {"v", p.x_tar.v}}},
                      {"t_next", p.t_next},
                      {"u", {p.u.lo, p.u.hi, p.u.n}}, {"o", {p.o.lo, p.o.hi, p.o.n}}};
}

void target_surface(const SurfaceOptions& o, Outputs& out, json& config)
{
  auto p = fig6_preset();
  p.p_tar = axis_flag(o.p_tar, p.p_tar, "p-tar");
  p.v_tar = axis_flag(o.v_tar, p.v_tar, "v-tar");
  if (!o.p1.empty())
    p.p1_values = o.p1;
  if (o.v1)
    p.v1 = *o.v1;
  if (o.dt)
  {
    if (!(*o.dt > 0.0))
      throw ConfigError("dt", "must be positive");
    p.t_k1 = p.t_k + *o.dt;
  }
  if (!(p.v1 >= 0.0 && p.v1 <= p.params1.v_max))
    throw ConfigError("v1", "must lie in [0, v_max]");

  auto csv = out.csv("_target", "target-surface", {"p1", "p_tar", "v_tar", "value", "argmax"});
  for (double p1 : p.p1_values)
  {
    const auto I = from_observation({p1, p.v1}, p.t_k, p.t_k, p.params1, p.horizon);
    for (int i = 0; i < p.p_tar.n; ++i)
      for (int j = 0; j < p.v_tar.n; ++j)
      {
        const State x{p.p_tar.at(i), p.v_tar.at(j)};
        const auto r = v_max(x, p.t_k1, I, p.params0);
        csv << num(p1) << "," << num(x.p) << "," << num(x.v) << "," << num(r.value) << ","
            << to_string(r.argmax) << "\n";
      }
  }
  config["target"] = {{"params0", to_json(p.params0)}, {"params1", to_json(p.params1)},
                      {"t_k", p.t_k}, {"t_k1", p.t_k1}, {"v1", p.v1},
                      {"p1_values", p.p1_values}, {"horizon", p.horizon},
                      {"p_tar", {p.p_tar.lo, p.p_tar.hi, p.p_tar.n}},
                      {"v_tar", {p.v_tar.lo, p.v_tar.hi, p.v_tar.n}}};
}

int cmd_value_surface(const Common& c, const SurfaceOptions& o)
{
  const auto t0 = std::chrono::steady_clock::now();
  if (!c.preset.empty() && c.preset != "fig5" && c.preset != "fig6")
    throw ConfigError("preset", "value-surface presets are fig5 and fig6");
  const bool window = c.preset.empty() || c.preset == "fig5";
  const bool target = c.preset.empty() || c.preset == "fig6";
  Outputs out(c, "surface", c.preset.empty() ? "fig5_fig6" : c.preset);
  json config = json::object();
  if (window)
    window_surface(o, out, config);
  if (target)
    target_surface(o, out, config);
  out.write_manifest(c, config, std::nullopt, {{"total_seconds", seconds_since(t0)}});
  return kOk;
}

//==============================================================================
// oracle

struct OracleOptions
{
  int values = 200;
  int bounds = 50;
  int regions = 50;
  int clipped = 10;
};

int cmd_oracle(const Common& c, const OracleOptions& o)
{
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = c.seed.value_or(1);
  const int jobs = resolved_jobs(c);
  const AgentParams q;
  if (o.values < 0 || o.bounds < 0 || o.regions < 0 || o.clipped < 0)
    throw ConfigError("instances", "counts must be non-negative");

  const auto sv = check_state_values(o.values, seed, state_value_grid(), q, jobs);
  const auto bc = check_reachable_bounds(o.bounds, seed, q, 200, jobs);
  const auto rc = check_feasible_regions(o.regions, o.clipped, seed, q, jobs);

  json report = {
    {"state_value", {
      {"pass", sv.pass()}, {"instances", sv.instances}, {"finite", sv.finite},
      {"mismatched", sv.mismatched}, {"below", sv.below},
      {"min_gap", jnum(sv.min_gap)}, {"max_gap", jnum(sv.max_gap)}, {"bound", 0.5},
      {"seconds", sv.seconds}}},
    {"reachable_bounds", {
      {"pass", bc.pass()}, {"sets", bc.sets}, {"outside", bc.outside},
      {"max_relative_gap", bc.max_relative_gap}, {"tolerance", 1e-2},
      {"seconds", bc.seconds}}},
    {"feasible_region", {
      {"pass", rc.pass()}, {"instances", rc.instances},
      {"clipped_instances", rc.clipped_instances}, {"points", rc.points},
      {"violations", rc.violations}, {"max_fill_gap", rc.max_fill_gap},
      {"tolerance", 1e-3}, {"seconds", rc.seconds}}},
  };
  const bool pass = sv.pass() && bc.pass() && rc.pass();
  report["pass"] = pass;

  Outputs out(c, "oracle", "validation");
  out.write_json("_report", report);
  out.write_manifest(c, {{"params", to_json(q)}, {"state_value_instances", o.values},
                         {"bounds_sets", o.bounds}, {"region_instances", o.regions},
                         {"clipped_instances", o.clipped}, {"jobs", jobs}},
                     seed, {{"total_seconds", seconds_since(t0)}});

  std::printf("state value      %s  max gap %.3g, min gap %.3g, %d mismatched\n",
              sv.pass() ? "PASS" : "FAIL", sv.max_gap, sv.min_gap, sv.mismatched);
  std::printf("reachable bounds %s  %d outside, relative gap %.3g\n",
              bc.pass() ? "PASS" : "FAIL", bc.outside, bc.max_relative_gap);
  std::printf("feasible region  %s  %d violations, fill gap %.3g\n",
              rc.pass() ? "PASS" : "FAIL", rc.violations, rc.max_fill_gap);
  return pass ? kOk : kChecksFailed;
}

} // anonymous namespace

//==============================================================================
int main(int argc, char** argv)
{
  CLI::App app{"Minimax scheduling of two agents at a shared resource"};
  app.set_version_flag("--version", MMSCHED_VERSION);
  app.require_subcommand(1);

  Common common;
  for (int i = 0; i < argc; ++i)
    common.command_line += (i ? " " : "") + std::string(argv[i]);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "One episode: trajectory CSV and episode JSON");
  add_scenario_options(run, common);
  add_output_options(run, common);
  run->add_option("--seed", common.seed, "Episode RNG seed");
  run->add_option("--sample-dt", run_opts.sample_dt, "Trajectory sample spacing");

  BatchOptions batch_opts;
  auto* batch = app.add_subcommand("batch", "Sampled episodes: tail curve and quantiles");
  add_scenario_options(batch, common);
  add_output_options(batch, common);
  add_jobs_option(batch, common);
  batch->add_option("--n", batch_opts.n, "Episodes per policy");
  batch->add_option("--seed", common.seed, "Batch seed");
  batch->add_flag("--keep-going", batch_opts.keep_going,
    "List safety violations instead of stopping at the first");
  batch->add_flag("--episodes", batch_opts.episodes, "Also write per-episode rows");

  SweepOptions sweep_opts;
  auto* sweep_cmd = app.add_subcommand("sweep", "Episode cost along one parameter");
  add_scenario_options(sweep_cmd, common);
  add_output_options(sweep_cmd, common);
  add_jobs_option(sweep_cmd, common);
  sweep_cmd->add_option("--axis", sweep_opts.axis,
    "dec_period, obs_period, a0_dec, a0_acc, a1_dec, a1_acc or p1_init");
  sweep_cmd->add_option("--values", sweep_opts.values, "Comma-separated values")
    ->delimiter(',');

  SurfaceOptions surf_opts;
  auto* surface = app.add_subcommand("value-surface", "Value grids over windows and targets");
  surface->add_option("--preset", common.preset, "fig5 or fig6 (default: both)");
  add_output_options(surface, common);
  surface->add_option("--u", surf_opts.u, "Window entry axis lo,hi,n")->delimiter(',');
  surface->add_option("--o", surf_opts.o, "Window exit axis lo,hi,n")->delimiter(',');
  surface->add_option("--x-tar", surf_opts.x_tar, "Target state p,v")->delimiter(',');
  surface->add_option("--t-next", surf_opts.t_next, "Time of the target state");
  surface->add_option("--p-tar", surf_opts.p_tar, "Target position axis lo,hi,n")
    ->delimiter(',');
  surface->add_option("--v-tar", surf_opts.v_tar, "Target velocity axis lo,hi,n")
    ->delimiter(',');
  surface->add_option("--p1", surf_opts.p1, "Observed agent-1 positions")->delimiter(',');
  surface->add_option("--v1", surf_opts.v1, "Observed agent-1 velocity");
  surface->add_option("--dt", surf_opts.dt, "Decision period");

  OracleOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle", "Closed forms against brute-force oracles");
  add_output_options(oracle, common);
  add_jobs_option(oracle, common);
  oracle->add_option("--seed", common.seed, "Validation seed");
  oracle->add_option("--values", oracle_opts.values, "State value instances");
  oracle->add_option("--bounds", oracle_opts.bounds, "Reachable bound sets");
  oracle->add_option("--regions", oracle_opts.regions, "Feasible region instances");
  oracle->add_option("--clipped", oracle_opts.clipped, "Clipped region instances");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try
  {
    if (*run)
      return cmd_run(common, run_opts);
    if (*batch)
      return cmd_batch(common, batch_opts);
    if (*sweep_cmd)
      return cmd_sweep(common, sweep_opts);
    if (*surface)
      return cmd_value_surface(common, surf_opts);
    if (*oracle)
      return cmd_oracle(common, oracle_opts);
  }
  catch (const ConfigError& e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  }
  catch (const std::invalid_argument& e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kChecksFailed;
  }
  return kOk;
}
