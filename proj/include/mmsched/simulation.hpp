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

#ifndef MMSCHED__SIMULATION_HPP
#define MMSCHED__SIMULATION_HPP

#include <mmsched/kinematics.hpp>
#include <mmsched/policy.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmsched {

/// Motion of the other agent.
struct Agent1Profile
{
  enum class Kind { kArrival, kScripted, kRandomized };

  Kind kind = Kind::kArrival;

  /// kArrival: start at p1_init with velocity 15, cruise, then accelerate (or
  /// brake) to reach p = 0 at v_f, then hold v_f.
  double p1_init = -160.0;
  double v_f = 15.0;

  /// kScripted: explicit controls from `start`, held after the last one.
  State start{-160.0, 15.0};
  std::vector<Segment> controls;

  /// kRandomized: random start and controls drawn from this seed; the agent
  /// eventually accelerates to v_max, so it always passes.
  std::uint64_t seed = 0;

  static Agent1Profile arrival(double p1_init, double v_f);
  static Agent1Profile scripted(State start, std::vector<Segment> controls);
  static Agent1Profile randomized(std::uint64_t seed);
};

const char* to_string(Agent1Profile::Kind k);

/// The true trajectory of the other agent from time 0.
Trajectory agent1_trajectory(const Agent1Profile& profile, const AgentParams& params1);

struct PolicySpec
{
  enum class Kind { kMinimax, kQueueing, kFollowing };

  Kind kind = Kind::kMinimax;
  double d = 0.0;

  /// "minimax", "queueing:<d>" or "following:<d>". Throws
  /// std::invalid_argument otherwise.
  static PolicySpec parse(const std::string& text);
  std::string name() const;
};

struct ScenarioConfig
{
  AgentParams params0;
  AgentParams params1;
  State x0_init{-200.0, 15.0};
  double decision_period = 0.01;
  double observation_period = 0.01;
  double observation_delay = 0.0;
  /// Time of the first decision; decisions follow every decision_period.
  double first_decision = 0.0;
  double horizon = 200.0;
  Agent1Profile agent1;
  PolicySpec policy;
  // Coarse by default: the special candidates carry most decisions.
  GridSpec grid{3, 3, 1, true};
  std::uint64_t rng_seed = 0;
  /// Observed agent-1 position is shifted by alpha and its length inflated
  /// by alpha before the information set is built. 0 disables.
  double priority_alpha = 0.0;
  /// Independent loss probability of each observation.
  double drop_probability = 0.0;
  /// Agent-1 bounds the policy assumes, when they differ from the true
  /// params1. A mismatch voids the safety guarantee.
  std::optional<AgentParams> assumed_params1;
  /// 0 passes per-step information as end-point summaries. A positive count
  /// builds full sets with that many envelope knots instead; decisions are
  /// the same either way.
  int envelope_knots = 0;
  bool record_decisions = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct DecisionRecord
{
  double time = 0.0;
  DecisionKind kind = DecisionKind::kSteer;
  State state;
  State target;
  Cost objective = kNever;
  Region region = Region::kD1;
  int evaluations = 0;
  bool certified = false;
  /// Generation time of the observation behind the step; -inf if none.
  double observation_time = -kNever;
};

struct EpisodeResult
{
  Trajectory traj0;
  Trajectory traj1;
  OccupationWindow w0;
  OccupationWindow w1;
  Cost cost = kNever;
  bool safety_ok = false;
  bool timeout = false;
  /// Agent 0 entered on a committed or Acc trajectory and kept accelerating.
  bool post_entry_acc = false;
  int steps = 0;
  int fallbacks = 0;
  int evaluations = 0;
  /// Latest observation generation time used at any decision, minus that
  /// decision's time; never above -observation_delay.
  double max_observation_lag = -kNever;
  /// Before entry: the start of the final descent to the lowest speed, and
  /// the last instant at that speed if it rises again. kNever when absent.
  double decel_onset = kNever;
  double accel_resume = kNever;
  std::vector<DecisionRecord> decisions;
  double wall_seconds = 0.0;
};

EpisodeResult run_episode(const ScenarioConfig& cfg);

/// Random streams keyed by (seed, index, purpose).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t purpose);

struct Sampler
{
  double p1_lo = -200.0;
  double p1_hi = -100.0;
  double v_f_lo = 5.0;
  double v_f_hi = 20.0;
};

/// The scenario of episode `index`: the template with a sampled arrival profile.
ScenarioConfig sample_scenario(
  const ScenarioConfig& tmpl, const Sampler& sampler, std::uint64_t seed, std::uint64_t index);

struct EpisodeSummary
{
  double p1_init = 0.0;
  double v_f = 0.0;
  Cost cost = kNever;
  bool safety_ok = false;
  bool timeout = false;
  double t_in = kNever;
  double v_in = 0.0;
};

struct BatchResult
{
  std::uint64_t seed = 0;
  /// In episode-index order.
  std::vector<EpisodeSummary> episodes;
  /// Ascending; timeouts sort last as +inf.
  std::vector<Cost> sorted_costs;
  std::vector<std::size_t> violations;
  std::size_t timeouts = 0;
  double wall_seconds = 0.0;

  /// The cost c with P_emp(C >= c) = prob, i.e. the ceil(prob*n)-th largest.
  Cost tail_cost(double prob) const;
  /// Nearest-rank quantile, q in [0, 1].
  Cost quantile(double q) const;
  /// (c, P_emp(C >= c)) at every distinct cost, descending c.
  std::vector<std::pair<Cost, double>> tail_curve() const;
};

/// An unsafe episode in a batch; replay it with sample_scenario(tmpl,
/// sampler, batch_seed, index).
class SafetyViolation : public std::runtime_error
{
public:
  SafetyViolation(std::uint64_t batch_seed, std::size_t index, const EpisodeSummary& episode);

  std::uint64_t batch_seed;
  std::size_t index;
  EpisodeSummary episode;
};

/// n independent sampled episodes, run on `jobs` threads. The result does not
/// depend on jobs. Throws SafetyViolation for the lowest unsafe index unless
/// keep_going is set, in which case violations are only listed.
BatchResult run_batch(
  const ScenarioConfig& tmpl, std::size_t n, const Sampler& sampler,
  std::uint64_t seed, int jobs = 1, bool keep_going = false);

enum class SweepAxis
{
  kDecisionPeriod, kObservationPeriod, kA0Dec, kA0Acc, kA1Dec, kA1Acc, kP1Init
};

/// "dec_period", "obs_period", "a0_dec", "a0_acc", "a1_dec", "a1_acc",
/// "p1_init". Throws std::invalid_argument otherwise.
SweepAxis parse_sweep_axis(const std::string& text);
const char* to_string(SweepAxis axis);

ScenarioConfig with_axis(ScenarioConfig cfg, SweepAxis axis, double value);

struct SweepPoint
{
  double value = 0.0;
  EpisodeSummary summary;
  /// Agent 0 entered before agent 1.
  bool first = false;
};

std::vector<SweepPoint> sweep(
  const ScenarioConfig& tmpl, SweepAxis axis, const std::vector<double>& values,
  int jobs = 1);

} // namespace mmsched

#endif // MMSCHED__SIMULATION_HPP
