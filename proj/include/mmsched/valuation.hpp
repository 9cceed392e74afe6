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

#ifndef MMSCHED__VALUATION_HPP
#define MMSCHED__VALUATION_HPP

#include <mmsched/kinematics.hpp>
#include <mmsched/uncertainty.hpp>

#include <optional>

namespace mmsched {

/// Costs are distances (time scaled by v_max); +inf marks infeasibility.
using Cost = double;

enum class Region { kD1, kD2, kD3 };

const char* to_string(Region r);

/// Windows that merely touch within this slack count as disjoint, so that
/// an entry solved to land exactly on a window end is not rejected.
inline constexpr double kTouchSlack = 1e-9;

/// True when the open intervals (a_lo, a_hi) and (b_lo, b_hi) intersect by
/// more than kTouchSlack.
bool open_overlap(double a_lo, double a_hi, double b_lo, double b_hi);

/// Time cost of entering at t_in plus the cost of the entry speed deficit.
Cost entry_cost(double t_in, double v_in, const AgentParams& params0);

Cost scheduling_cost(
  const Trajectory& traj0, const AgentParams& params0, double t1_in, double t1_out);

Cost manageable_cost(
  const Trajectory& traj0, double t_cur, const UncertaintySet& I,
  const AgentParams& params0);

struct StateValue
{
  Cost value = kNever;
  double t_switch = kNever;  // Dec-Acc switch time of the witness
  double t_in = kNever;
  double v_in = 0.0;
  std::optional<Trajectory> witness;

  bool finite() const { return is_finite(value); }
};

/// Minimal manageable cost from x at t_cur, with the Dec-Acc witness.
StateValue state_value(
  State x, double t_cur, const UncertaintySet& I, const AgentParams& params0);

/// Same, against a known occupied window; no trajectory is built.
StateValue window_value(
  State x, double t_cur, TimeWindow W, const AgentParams& params0);

/// Value at t_next when the other agent's window is (u, o).
Cost value_uo(State x_tar, double t_next, double u, double o, const AgentParams& params0);

/// Region of a non-empty window (u, o) relative to the Acc passage from
/// x_tar: D1 once Acc has left (u >= t_out^A), D2 when the window closes
/// before Acc arrives (o <= t_in^A), D3 otherwise.
Region window_region(State x_tar, double t_next, double u, double o, const AgentParams& params0);

struct VmaxResult
{
  Cost value = kNever;
  bool has[3] = {false, false, false};
  Cost region_value[3] = {-kNever, -kNever, -kNever};
  Region argmax = Region::kD1;
};

/// Worst-case value over the windows reachable from I_k at t_next.
VmaxResult v_max(
  State x_tar, double t_next, const UncertaintySet& I_k, const AgentParams& params0);

/// Same, from the end-point summary of B(advance(I_k, t_next)).
VmaxResult v_max(
  State x_tar, double t_next, const BoundsSummary& b, const AgentParams& params0);

} // namespace mmsched

#endif // MMSCHED__VALUATION_HPP
