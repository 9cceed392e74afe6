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

#ifndef MMSCHED__KINEMATICS_HPP
#define MMSCHED__KINEMATICS_HPP

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace mmsched {

/// Sentinel for "never". Only compare against it; min/max propagate it.
inline constexpr double kNever = std::numeric_limits<double>::infinity();

inline bool is_finite(double t) { return t < kNever; }

struct AgentParams
{
  double v_max = 20.0;
  double a_dec = 4.0;   // magnitude
  double a_acc = 3.0;
  double length = 5.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct State
{
  double p = 0.0;
  double v = 0.0;
};

struct Segment
{
  double duration = 0.0;
  double accel = 0.0;
};

/// What happens after the last explicit control. Constructors expand the
/// saturating rules into explicit segments, so a stored trajectory always
/// holds its final velocity.
enum class TerminalRule { kHold, kSaturateAcc, kSaturateDec };

struct OccupationWindow
{
  double t_in = kNever;
  double t_out = kNever;
  double v_in = 0.0;   // velocity at t_in, 0 when t_in is never
};

/// Piecewise-constant acceleration motion. Segments carry exact constant
/// accelerations; velocity clipping has already been resolved into extra
/// segments. After the last segment the final velocity is held.
class Trajectory
{
public:
  Trajectory() = default;
  Trajectory(double start_time, State start, std::vector<Segment> segments);

  double start_time() const { return times_.front(); }
  State start_state() const { return knots_.front(); }
  const std::vector<Segment>& segments() const { return segments_; }

  /// End of the explicit segments.
  double end_time() const { return times_.back(); }
  State end_state() const { return knots_.back(); }

  /// Throws std::domain_error for t < start_time.
  State state_at(double t) const;
  double accel_at(double t) const;

  /// inf{t : p(t) > level}; kNever if the level is never passed.
  double first_above(double level) const;

  /// inf{t : p(t) >= level}; equals sup{t : p(t) < level} since p is
  /// non-decreasing.
  double first_reach(double level) const;

  /// Explicit segments covering [start, t_end] (holding where needed).
  Trajectory prefix(double t_end) const;

  /// Concatenate. The tail must start at end_time() in end_state().
  void append(const Trajectory& tail);

private:
  std::vector<Segment> segments_;
  std::vector<double> times_{0.0};
  std::vector<State> knots_{State{}};
};

/// Build a trajectory from raw controls, clipping velocity to [0, v_max] by
/// splitting segments at the clip instants.
Trajectory make_trajectory(
  double t0, State x, std::span<const Segment> controls,
  const AgentParams& params, TerminalRule rule = TerminalRule::kHold);

Trajectory acc_trajectory(State x, double t0, const AgentParams& params);
Trajectory dec_trajectory(State x, double t0, const AgentParams& params);

/// Decelerate on [t0, t_switch], accelerate afterwards.
Trajectory dec_acc_trajectory(
  State x, double t0, double t_switch, const AgentParams& params);

/// Accelerate on [t0, t_switch], decelerate afterwards. t_switch may be kNever.
Trajectory acc_dec_trajectory(
  State x, double t0, double t_switch, const AgentParams& params);

OccupationWindow entry_exit(const Trajectory& traj, double length);

bool can_stop_before(State x, const AgentParams& params);

/// Dec-Acc trajectory entering at target_t_in with the smallest switch time.
std::optional<Trajectory> dec_acc_for_entry(
  State x, double t0, double target_t_in, const AgentParams& params);

/// Acc-Dec trajectory entering at target_t_in with the smallest switch time
/// (so it brakes immediately after entry at the latest).
std::optional<Trajectory> acc_dec_for_entry(
  State x, double t0, double target_t_in, const AgentParams& params);

//==============================================================================
// Closed-form passage times used on hot paths. All times are absolute.

struct Passage
{
  double t_in = kNever;
  double t_out = kNever;
  double v_in = 0.0;
};

/// Entry/exit of the Acc trajectory from x at t0. Requires x.p <= 0.
Passage acc_passage(State x, double t0, const AgentParams& params);

/// Entry/exit of the Dec trajectory from x at t0.
Passage dec_passage(State x, double t0, const AgentParams& params);

struct DecAccEntry
{
  double t_switch = 0.0;
  double v_in = 0.0;
};

/// Smallest switch time of a Dec-Acc trajectory from x at t0 entering at
/// target_t_in, with its entry velocity. Closed form, verified by forward
/// evaluation with a bisection fallback. Requires x.p <= 0.
std::optional<DecAccEntry> dec_acc_entry(
  State x, double t0, double target_t_in, const AgentParams& params);

/// Same for Acc-Dec (smallest switch, i.e. latest full braking).
std::optional<double> acc_dec_switch_for_entry(
  State x, double t0, double target_t_in, const AgentParams& params);

/// State after dt under constant acceleration with velocity clipping.
State clipped_step(State x, double accel, double dt, const AgentParams& params);

namespace detail {

/// Up to four explicit phases followed by a hold; no allocation.
struct PhasePlan
{
  Segment items[4];
  int size = 0;

  void push(double duration, double accel)
  {
    if (duration > 0.0)
      items[size++] = Segment{duration, accel};
  }
};

PhasePlan dec_acc_plan(State x, double switch_after, const AgentParams& params);
PhasePlan acc_dec_plan(State x, double switch_after, const AgentParams& params);

/// Relative time of inf{p > level} (strict) or inf{p >= level}.
double plan_crossing(State x, const PhasePlan& plan, double level, bool strict);

State plan_state(State x, const PhasePlan& plan, double dt);

double dec_acc_entry_bisect(
  State x, double target_rel, double s_hi, const AgentParams& params);

} // namespace detail

} // namespace mmsched

#endif // MMSCHED__KINEMATICS_HPP
