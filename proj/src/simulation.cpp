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

#include <mmsched/simulation.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace mmsched {

namespace {

constexpr double kArrivalCruise = 15.0;

// Stream purposes.
constexpr std::uint64_t kAgent1Stream = 1;
constexpr std::uint64_t kDropStream = 2;
constexpr std::uint64_t kSamplerStream = 3;

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool observation_dropped(const ScenarioConfig& cfg, long m)
{
  if (cfg.drop_probability <= 0.0)
    return false;
  auto rng = make_stream(cfg.rng_seed, static_cast<std::uint64_t>(m), kDropStream);
  return std::bernoulli_distribution(cfg.drop_probability)(rng);
}

// Appends tail up to its entry into the resource, then Acc from there.
// Returns true once agent 0 has entered.
bool append_until_entry(Trajectory& traj0, const Trajectory& step, double t_end,
  const AgentParams& q)
{
  const double t_in = step.first_above(0.0);
  if (t_in > t_end)
  {
    if (step.end_time() == t_end)
      traj0.append(step);
    else
      traj0.append(step.prefix(t_end));
    return false;
  }
  traj0.append(step.prefix(t_in));
  traj0.append(acc_trajectory(step.state_at(t_in), t_in, q));
  return true;
}

bool audit_post_entry(const Trajectory& traj0, double t_in, const AgentParams& q)
{
  if (!is_finite(t_in))
    return false;
  double t = traj0.start_time();
  State x = traj0.start_state();
  for (const auto& s : traj0.segments())
  {
    const double t_next = t + s.duration;
    if (t_next > t_in)
    {
      const bool saturated = s.accel == 0.0 && x.v >= q.v_max - 1e-9;
      if (!(s.accel == q.a_acc || saturated))
        return false;
    }
    x.p += x.v*s.duration + 0.5*s.accel*s.duration*s.duration;
    x.v += s.accel*s.duration;
    t = t_next;
  }
  return traj0.end_state().v >= q.v_max - 1e-9;
}

// The deepest speed dip below the running peak before t_stop: the last
// instant at that peak, and the last instant at the bottom of the dip when
// the speed rises afterwards. Velocity is piecewise linear, so knots suffice.
std::pair<double, double> velocity_trend(const Trajectory& traj0, double t_stop)
{
  constexpr double kTol = 1e-6;
  std::vector<std::pair<double, double>> tv;
  const auto& segs = traj0.segments();
  double t = traj0.start_time();
  tv.emplace_back(t, traj0.start_state().v);
  for (const auto& s : segs)
  {
    t += s.duration;
    if (t >= t_stop)
      break;
    tv.emplace_back(t, traj0.state_at(t).v);
  }
  tv.emplace_back(t_stop, traj0.state_at(t_stop).v);

  std::size_t i_min = 0;
  double run_max = tv[0].second, depth = 0.0, peak = tv[0].second;
  for (std::size_t i = 1; i < tv.size(); ++i)
  {
    run_max = std::max(run_max, tv[i].second);
    const double drop = run_max - tv[i].second;
    if (drop >= depth - kTol)
    {
      if (drop > depth)
        depth = drop;
      i_min = i;
      peak = run_max;
    }
  }
  if (depth <= kTol)
    return {kNever, kNever};

  std::size_t i_peak = 0;
  for (std::size_t i = 0; i <= i_min; ++i)
    if (tv[i].second >= peak - kTol)
      i_peak = i;
  const bool rises = tv.back().second > tv[i_min].second + kTol;
  return {tv[i_peak].first, rises ? tv[i_min].first : kNever};
}

} // anonymous namespace

//==============================================================================
Agent1Profile Agent1Profile::arrival(double p1_init, double v_f)
{
  Agent1Profile a;
  a.kind = Kind::kArrival;
  a.p1_init = p1_init;
  a.v_f = v_f;
  return a;
}

Agent1Profile Agent1Profile::scripted(State start, std::vector<Segment> controls)
{
  Agent1Profile a;
  a.kind = Kind::kScripted;
  a.start = start;
  a.controls = std::move(controls);
  return a;
}

Agent1Profile Agent1Profile::randomized(std::uint64_t seed)
{
  Agent1Profile a;
  a.kind = Kind::kRandomized;
  a.seed = seed;
  return a;
}

const char* to_string(Agent1Profile::Kind k)
{
  switch (k)
  {
    case Agent1Profile::Kind::kArrival: return "arrival";
    case Agent1Profile::Kind::kScripted: return "scripted";
    case Agent1Profile::Kind::kRandomized: return "randomized";
  }
  return "?";
}

Trajectory agent1_trajectory(const Agent1Profile& profile, const AgentParams& q)
{
  switch (profile.kind)
  {
    case Agent1Profile::Kind::kArrival:
    {
      const double v_f = profile.v_f;
      const double a_f = v_f >= kArrivalCruise ? q.a_acc : -q.a_dec;
      const double p_switch = -(v_f*v_f - kArrivalCruise*kArrivalCruise)/(2.0*a_f);
      const State start{profile.p1_init, kArrivalCruise};
      std::vector<Segment> c;
      if (p_switch > start.p)
        c.push_back({(p_switch - start.p)/kArrivalCruise, 0.0});
      if (v_f != kArrivalCruise)
        c.push_back({std::abs(v_f - kArrivalCruise)/std::abs(a_f), a_f});
      return make_trajectory(0.0, start, c, q, TerminalRule::kHold);
    }
    case Agent1Profile::Kind::kScripted:
      return make_trajectory(0.0, profile.start, profile.controls, q, TerminalRule::kHold);
    case Agent1Profile::Kind::kRandomized:
    {
      auto rng = make_stream(profile.seed, 0, kAgent1Stream);
      const auto U = [&](double lo, double hi)
      { return std::uniform_real_distribution<double>(lo, hi)(rng); };
      const State start{U(-200.0, -40.0), U(0.0, q.v_max)};
      std::vector<Segment> c(std::uniform_int_distribution<int>(1, 6)(rng));
      for (auto& s : c)
        s = {U(0.2, 3.0), U(-q.a_dec, q.a_acc)};
      return make_trajectory(0.0, start, c, q, TerminalRule::kSaturateAcc);
    }
  }
  throw std::invalid_argument("unknown agent-1 profile");
}

//==============================================================================
PolicySpec PolicySpec::parse(const std::string& text)
{
  PolicySpec p;
  if (text == "minimax")
    return p;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (colon == std::string::npos || (head != "queueing" && head != "following"))
    throw std::invalid_argument("policy must be minimax, queueing:<d> or following:<d>, got '"
      + text + "'");
  p.kind = head == "queueing" ? Kind::kQueueing : Kind::kFollowing;
  std::size_t used = 0;
  const std::string tail = text.substr(colon + 1);
  try
  {
    p.d = std::stod(tail, &used);
  }
  catch (const std::exception&)
  {
    used = 0;
  }
  if (used == 0 || used != tail.size() || !(p.d >= 0.0))
    throw std::invalid_argument("policy distance must be a number >= 0, got '" + tail + "'");
  return p;
}

std::string PolicySpec::name() const
{
  if (kind == Kind::kMinimax)
    return "minimax";
  std::string num = std::to_string(d);
  num.erase(num.find_last_not_of('0') + 1);
  if (num.back() == '.')
    num.pop_back();
  return (kind == Kind::kQueueing ? "queueing:" : "following:") + num;
}

void ScenarioConfig::validate() const
{
  const auto need = [](bool ok, const char* field)
  {
    if (!ok)
      throw std::invalid_argument(std::string("invalid scenario field '") + field + "'");
  };
  params0.validate();
  params1.validate();
  if (assumed_params1)
    assumed_params1->validate();
  need(x0_init.p <= 0.0, "x0_init");
  need(x0_init.v >= 0.0 && x0_init.v <= params0.v_max, "x0_init");
  need(can_stop_before(x0_init, params0), "x0_init");
  need(decision_period > 0.0, "decision_period");
  need(observation_period > 0.0, "observation_period");
  need(observation_delay >= 0.0, "observation_delay");
  need(first_decision >= 0.0, "first_decision");
  need(horizon > first_decision, "horizon");
  need(priority_alpha >= 0.0, "priority_alpha");
  need(drop_probability >= 0.0 && drop_probability < 1.0, "drop_probability");
  need(envelope_knots == 0 || envelope_knots >= 2, "envelope_knots");
  need(grid.nv >= 1 && grid.np >= 1 && grid.refine >= 0, "grid");
  need(policy.d >= 0.0, "policy");
}

//==============================================================================
EpisodeResult run_episode(const ScenarioConfig& cfg)
{
  cfg.validate();
  const auto clock0 = std::chrono::steady_clock::now();
  const AgentParams& q0 = cfg.params0;
  AgentParams q1_info = cfg.assumed_params1.value_or(cfg.params1);
  q1_info.length += cfg.priority_alpha;

  EpisodeResult r;
  r.traj1 = agent1_trajectory(cfg.agent1, cfg.params1);
  r.traj0 = Trajectory(0.0, cfg.x0_init, {}).prefix(cfg.first_decision);

  State x = r.traj0.end_state();
  bool entered = false;
  for (long k = 0;; ++k)
  {
    const double t = cfg.first_decision + k*cfg.decision_period;
    const double t1 = t + cfg.decision_period;
    if (t >= cfg.horizon)
    {
      r.timeout = true;
      break;
    }

    // Latest delivered observation.
    std::optional<Observation> obs;
    long m = static_cast<long>(
      std::floor((t - cfg.observation_delay)/cfg.observation_period + 1e-9));
    while (m >= 0 && observation_dropped(cfg, m))
      --m;
    if (m >= 0)
    {
      // The index tolerance may overshoot by rounding; never read the future.
      const double t_obs = std::min(m*cfg.observation_period, t - cfg.observation_delay);
      State seen = r.traj1.state_at(t_obs);
      seen.p += cfg.priority_alpha;
      obs = Observation{t_obs, seen};
      r.max_observation_lag = std::max(r.max_observation_lag, t_obs - t);
    }

    BoundsSummary info;
    try
    {
      if (cfg.envelope_knots > 0)
      {
        const auto I = obs ? from_observation(obs->state, obs->time, t, q1_info,
                                              cfg.horizon, cfg.envelope_knots)
                           : unconstrained(t, cfg.horizon, q1_info);
        info = summarize_bounds(I, t);
      }
      else
        info = obs ? observation_bounds(obs->state, obs->time, t, q1_info, cfg.horizon)
                   : unconstrained_bounds(t, cfg.horizon, q1_info);
    }
    catch (const std::domain_error&)
    {
      r.timeout = true;
      break;
    }
    ++r.steps;

    // Once Acc is robustly safe it stays so, as information only shrinks;
    // every policy then accelerates for good.
    const Passage acc = acc_passage(x, t, q0);
    const TimeWindow W = occupied_window(info);
    if (!open_overlap(acc.t_in, acc.t_out, W.lo, W.hi))
    {
      r.traj0.append(acc_trajectory(x, t, q0));
      if (cfg.record_decisions)
      {
        DecisionRecord d;
        d.time = t;
        d.kind = DecisionKind::kCommit;
        d.state = x;
        d.target = clipped_step(x, q0.a_acc, cfg.decision_period, q0);
        d.observation_time = obs ? obs->time : -kNever;
        r.decisions.push_back(d);
      }
      entered = true;
      break;
    }

    Trajectory step;
    DecisionRecord rec;
    rec.time = t;
    rec.state = x;
    rec.observation_time = obs ? obs->time : -kNever;
    switch (cfg.policy.kind)
    {
      case PolicySpec::Kind::kMinimax:
      {
        auto d = decide(x, t, t1, info, q0, cfg.grid);
        r.evaluations += d.evaluations;
        rec.kind = d.kind;
        rec.target = d.target;
        rec.objective = d.objective;
        rec.region = d.region;
        rec.evaluations = d.evaluations;
        rec.certified = d.certified;
        if (d.kind == DecisionKind::kFallback)
          ++r.fallbacks;
        if (d.kind == DecisionKind::kCommit)
        {
          r.traj0.append(d.trajectory);
          entered = true;
        }
        else
          step = std::move(d.trajectory);
        break;
      }
      case PolicySpec::Kind::kQueueing:
        step = queueing_step(x, t, t1, info, q0, cfg.policy.d);
        break;
      case PolicySpec::Kind::kFollowing:
        step = following_step(x, t, t1, info, obs, q0, q1_info, cfg.policy.d);
        break;
    }
    if (cfg.record_decisions)
    {
      if (cfg.policy.kind != PolicySpec::Kind::kMinimax)
      {
        rec.kind = DecisionKind::kSteer;
        rec.target = step.state_at(t1);
      }
      r.decisions.push_back(rec);
    }
    if (entered)
      break;
    if (append_until_entry(r.traj0, step, t1, q0))
    {
      entered = true;
      break;
    }
    x = r.traj0.end_state();
  }

  r.w0 = entry_exit(r.traj0, q0.length);
  r.w1 = entry_exit(r.traj1, cfg.params1.length);
  r.safety_ok = !open_overlap(r.w0.t_in, r.w0.t_out, r.w1.t_in, r.w1.t_out);
  r.post_entry_acc = entered && audit_post_entry(r.traj0, r.w0.t_in, q0);
  r.cost = r.timeout ? kNever
                     : scheduling_cost(r.traj0, q0, r.w1.t_in, r.w1.t_out);

  const auto trend = velocity_trend(r.traj0, is_finite(r.w0.t_in) ? r.w0.t_in : r.traj0.end_time());
  r.decel_onset = trend.first;
  r.accel_resume = trend.second;

  r.wall_seconds = seconds_since(clock0);
  return r;
}

//==============================================================================
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t purpose)
{
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(index), hi(index), lo(purpose), hi(purpose)};
  return std::mt19937_64(seq);
}

ScenarioConfig sample_scenario(
  const ScenarioConfig& tmpl, const Sampler& s, std::uint64_t seed, std::uint64_t index)
{
  auto rng = make_stream(seed, index, kSamplerStream);
  ScenarioConfig cfg = tmpl;
  const double p1 = std::uniform_real_distribution<double>(s.p1_lo, s.p1_hi)(rng);
  const double v_f = std::uniform_real_distribution<double>(s.v_f_lo, s.v_f_hi)(rng);
  cfg.agent1 = Agent1Profile::arrival(p1, v_f);
  cfg.rng_seed = seed ^ (index*0x9E3779B97F4A7C15ull);
  cfg.record_decisions = false;
  return cfg;
}

namespace {

EpisodeSummary summarize(const ScenarioConfig& cfg, const EpisodeResult& r)
{
  EpisodeSummary s;
  s.p1_init = cfg.agent1.p1_init;
  s.v_f = cfg.agent1.v_f;
  s.cost = r.cost;
  s.safety_ok = r.safety_ok;
  s.timeout = r.timeout;
  s.t_in = r.w0.t_in;
  s.v_in = r.w0.v_in;
  return s;
}

// Runs body(i) for i in [0, n) on `jobs` threads with a fixed interleaving.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body body)
{
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
  if (workers == 1)
  {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
  {
    pool.emplace_back([&, w]
    {
      try
      {
        for (std::size_t i = w; i < n; i += workers)
          body(i);
      }
      catch (...)
      {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool)
    th.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // anonymous namespace

SafetyViolation::SafetyViolation(
  std::uint64_t batch_seed_, std::size_t index_, const EpisodeSummary& episode_)
: std::runtime_error("safety violation in episode " + std::to_string(index_)
    + " of batch seed " + std::to_string(batch_seed_) + " (p1_init "
    + std::to_string(episode_.p1_init) + ", v_f " + std::to_string(episode_.v_f) + ")"),
  batch_seed(batch_seed_),
  index(index_),
  episode(episode_)
{
}

BatchResult run_batch(
  const ScenarioConfig& tmpl, std::size_t n, const Sampler& sampler,
  std::uint64_t seed, int jobs, bool keep_going)
{
  if (n == 0)
    throw std::invalid_argument("batch needs n >= 1");
  const auto clock0 = std::chrono::steady_clock::now();
  BatchResult b;
  b.seed = seed;
  b.episodes.resize(n);
  parallel_for(n, jobs, [&](std::size_t i)
  {
    const ScenarioConfig cfg = sample_scenario(tmpl, sampler, seed, i);
    b.episodes[i] = summarize(cfg, run_episode(cfg));
  });

  b.sorted_costs.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto& e = b.episodes[i];
    b.sorted_costs.push_back(e.cost);
    if (!e.safety_ok)
      b.violations.push_back(i);
    if (e.timeout)
      ++b.timeouts;
  }
  if (!keep_going && !b.violations.empty())
    throw SafetyViolation(seed, b.violations.front(), b.episodes[b.violations.front()]);
  std::sort(b.sorted_costs.begin(), b.sorted_costs.end());
  b.wall_seconds = seconds_since(clock0);
  return b;
}

Cost BatchResult::tail_cost(double prob) const
{
  const std::size_t n = sorted_costs.size();
  const auto k = static_cast<std::size_t>(std::ceil(prob*n - 1e-9));
  return sorted_costs[n - std::clamp<std::size_t>(k, 1, n)];
}

Cost BatchResult::quantile(double q) const
{
  const std::size_t n = sorted_costs.size();
  const auto rank = static_cast<std::size_t>(std::ceil(std::clamp(q, 0.0, 1.0)*n));
  return sorted_costs[std::clamp<std::size_t>(rank, 1, n) - 1];
}

std::vector<std::pair<Cost, double>> BatchResult::tail_curve() const
{
  std::vector<std::pair<Cost, double>> out;
  const std::size_t n = sorted_costs.size();
  for (std::size_t i = n; i-- > 0;)
  {
    if (i > 0 && sorted_costs[i - 1] == sorted_costs[i])
      continue;
    out.emplace_back(sorted_costs[i], double(n - i)/n);
  }
  return out;
}

//==============================================================================
SweepAxis parse_sweep_axis(const std::string& text)
{
  for (auto a : {SweepAxis::kDecisionPeriod, SweepAxis::kObservationPeriod,
                 SweepAxis::kA0Dec, SweepAxis::kA0Acc, SweepAxis::kA1Dec,
                 SweepAxis::kA1Acc, SweepAxis::kP1Init})
    if (text == to_string(a))
      return a;
  throw std::invalid_argument("unknown sweep axis '" + text + "'");
}

const char* to_string(SweepAxis axis)
{
  switch (axis)
  {
    case SweepAxis::kDecisionPeriod: return "dec_period";
    case SweepAxis::kObservationPeriod: return "obs_period";
    case SweepAxis::kA0Dec: return "a0_dec";
    case SweepAxis::kA0Acc: return "a0_acc";
    case SweepAxis::kA1Dec: return "a1_dec";
    case SweepAxis::kA1Acc: return "a1_acc";
    case SweepAxis::kP1Init: return "p1_init";
  }
  return "?";
}

ScenarioConfig with_axis(ScenarioConfig cfg, SweepAxis axis, double value)
{
  switch (axis)
  {
    case SweepAxis::kDecisionPeriod: cfg.decision_period = value; break;
    case SweepAxis::kObservationPeriod: cfg.observation_period = value; break;
    case SweepAxis::kA0Dec: cfg.params0.a_dec = value; break;
    case SweepAxis::kA0Acc: cfg.params0.a_acc = value; break;
    case SweepAxis::kA1Dec: cfg.params1.a_dec = value; break;
    case SweepAxis::kA1Acc: cfg.params1.a_acc = value; break;
    case SweepAxis::kP1Init:
      if (cfg.agent1.kind != Agent1Profile::Kind::kArrival)
        throw std::invalid_argument("p1_init sweeps need the arrival agent-1 profile");
      cfg.agent1.p1_init = value;
      break;
  }
  return cfg;
}

std::vector<SweepPoint> sweep(
  const ScenarioConfig& tmpl, SweepAxis axis, const std::vector<double>& values, int jobs)
{
  if (values.empty())
    throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepPoint> out(values.size());
  parallel_for(values.size(), jobs, [&](std::size_t i)
  {
    const ScenarioConfig cfg = with_axis(tmpl, axis, values[i]);
    const EpisodeResult r = run_episode(cfg);
    out[i].value = values[i];
    out[i].summary = summarize(cfg, r);
    out[i].first = is_finite(r.w0.t_in) && r.w0.t_in < r.w1.t_in;
  });
  return out;
}

} // namespace mmsched
