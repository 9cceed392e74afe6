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

#ifndef MMSCHED__POLICY_HPP
#define MMSCHED__POLICY_HPP

#include <mmsched/kinematics.hpp>
#include <mmsched/uncertainty.hpp>
#include <mmsched/valuation.hpp>

#include <optional>

namespace mmsched {

/// States reachable at t_to from x0 at t_from without entering the resource.
class FeasibleRegion
{
public:
  FeasibleRegion(State x0, double t_from, double t_to, const AgentParams& params0);

  double t_from() const { return t_from_; }
  double t_to() const { return t_to_; }
  State start() const { return x0_; }

  /// Velocity range of states with p <= 0. v_lo is the Dec end velocity.
  double v_lo() const { return v_lo_; }
  double v_hi() const { return v_hi_; }

  /// Smallest end position for end velocity v (Dec-Acc).
  double p_min(double v) const;

  /// Largest end position for end velocity v (Acc-Dec), capped at 0.
  double p_max(double v) const;

  bool contains(State x, double tol = 1e-9) const;

  /// True when even full braking enters the resource during the step.
  bool empty() const { return !(v_lo_ <= v_hi_); }

  /// End states of Acc and Dec over the step (Acc may lie beyond p = 0).
  State acc_end() const;
  State dec_end() const;

private:
  State x0_;
  double t_from_ = 0.0;
  double t_to_ = 0.0;
  AgentParams q_;
  double v_lo_ = 0.0;
  double v_hi_ = 0.0;
};

FeasibleRegion feasible_targets(
  State x0, double t_k, double t_k1, const AgentParams& params0);

/// Trajectory on [t_k, t_k1] ending exactly in x_tar, taken from the family
/// of velocity profiles clamp(u, v_DA(t), v_AD(t)). Throws
/// std::invalid_argument when x_tar is not reachable.
Trajectory steer_to(
  State x0, double t_k, double t_k1, State x_tar, const AgentParams& params0);

/// The value witness when it enters the resource by t_k1.
std::optional<Trajectory> can_commit(
  State x0, double t_k, double t_k1, const UncertaintySet& I_k,
  const AgentParams& params0);

/// Every decision below reads I_k only through summarize_bounds(I_k, t_k);
/// the overloads taking that summary skip building envelopes.
std::optional<Trajectory> can_commit(
  State x0, double t_k, double t_k1, const BoundsSummary& info_k,
  const AgentParams& params0);

struct GridSpec
{
  int nv = 64;
  int np = 64;
  int refine = 8;
  /// Try end-point candidates that provably attain the minimum first.
  bool certificates = true;
};

enum class DecisionKind { kCommit, kSteer, kFallback };

const char* to_string(DecisionKind k);

struct StepDecision
{
  DecisionKind kind = DecisionKind::kFallback;
  /// Covers [t_k, t_k1] at least; the committed witness runs to the end.
  Trajectory trajectory;
  State target;
  Cost objective = kNever;
  Region region = Region::kD1;
  int evaluations = 0;
  bool certified = false;
};

StepDecision decide(
  State x0, double t_k, double t_k1, const UncertaintySet& I_k,
  const AgentParams& params0, const GridSpec& grid = {});

StepDecision decide(
  State x0, double t_k, double t_k1, const BoundsSummary& info_k,
  const AgentParams& params0, const GridSpec& grid = {});

/// Constant-acceleration step, clipped to the velocity bounds.
Trajectory constant_step(State x0, double t_k, double t_k1, double accel,
  const AgentParams& params0);

/// Accelerate if Acc is robustly safe or the agent can still stop by -d
/// after an Acc step; otherwise brake.
Trajectory queueing_step(
  State x0, double t_k, double t_k1, const UncertaintySet& I_k,
  const AgentParams& params0, double d);

Trajectory queueing_step(
  State x0, double t_k, double t_k1, const BoundsSummary& info_k,
  const AgentParams& params0, double d);

struct Observation
{
  double time = 0.0;
  State state;
};

/// Accelerate if Acc is robustly safe or, after an Acc step, both agents
/// braking keep p0 < p1 - L1 - d forever; otherwise brake.
Trajectory following_step(
  State x0, double t_k, double t_k1, const UncertaintySet& I_k,
  const std::optional<Observation>& obs1, const AgentParams& params0,
  const AgentParams& params1, double d);

Trajectory following_step(
  State x0, double t_k, double t_k1, const BoundsSummary& info_k,
  const std::optional<Observation>& obs1, const AgentParams& params0,
  const AgentParams& params1, double d);

/// min over t >= t_from of (p1(t) - p0(t)) with both braking fully from
/// their given states and times.
double min_braking_gap(
  State x0, double t0, State x1, double t1, double t_from,
  const AgentParams& params0, const AgentParams& params1);

} // namespace mmsched

#endif // MMSCHED__POLICY_HPP
