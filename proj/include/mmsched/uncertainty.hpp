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

#ifndef MMSCHED__UNCERTAINTY_HPP
#define MMSCHED__UNCERTAINTY_HPP

#include <mmsched/kinematics.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace mmsched {

struct Knot
{
  double t_in = 0.0;
  double t_out = 0.0;
};

/// Non-decreasing polyline over entry times. Consecutive knots may share an
/// abscissa, which encodes a vertical step; the lower side of a step is its
/// first knot and the upper side its last.
class Envelope
{
public:
  Envelope() = default;
  explicit Envelope(std::vector<Knot> knots);

  /// Value at t. At a step, `upper_side` picks the last knot. Outside the
  /// knot range the nearest end value is returned.
  double at(double t, bool upper_side) const;

  const std::vector<Knot>& knots() const { return knots_; }

private:
  std::vector<Knot> knots_;
};

/// Open time interval (lo, hi); empty when lo >= hi.
struct TimeWindow
{
  double lo = 0.0;
  double hi = 0.0;

  bool empty() const { return !(lo < hi); }
};

/// Set of possible clamped (entry, exit) pairs of the other agent:
/// { (u, o) : tin_lo <= u <= tin_hi, lower(u) <= o <= upper(u) }.
class UncertaintySet
{
public:
  UncertaintySet() = default;
  UncertaintySet(double t_cur, double horizon, Envelope lower, Envelope upper);

  double t_cur() const { return t_cur_; }
  double horizon() const { return horizon_; }
  double tin_lo() const { return lower_.knots().front().t_in; }
  double tin_hi() const { return lower_.knots().back().t_in; }

  /// Smallest exit time possible for entry u.
  double lower(double u) const { return lower_.at(u, false); }

  /// Largest exit time possible for entry u.
  double upper(double u) const { return upper_.at(u, true); }

  const Envelope& lower_envelope() const { return lower_; }
  const Envelope& upper_envelope() const { return upper_; }

  bool singleton_entry() const { return tin_hi() <= tin_lo(); }
  bool contains(double u, double o, double tol = 1e-9) const;

  /// Throws std::logic_error describing the first violated invariant.
  void check_invariants(double tol = 1e-9) const;

private:
  double t_cur_ = 0.0;
  double horizon_ = 0.0;
  Envelope lower_;
  Envelope upper_;
};

/// B(I): achievable (earliest entry, latest exit) combinations. The slice at
/// u is [lower(u), o_max].
struct ReachableBounds
{
  double t_cur = 0.0;
  double tin_lo = 0.0;
  double tin_hi = 0.0;
  Envelope lower;
  double o_max = 0.0;

  double lower_at(double u) const { return lower.at(u, false); }
  bool contains(double u, double o, double tol = 1e-9) const;
};

/// The four numbers of B(I) that the worst-case evaluation reads.
struct BoundsSummary
{
  double u_lo = 0.0;   // earliest possible entry
  double u_hi = 0.0;   // latest possible entry
  double o_lo = 0.0;   // earliest exit paired with u_lo
  double o_max = 0.0;  // latest possible exit
};

UncertaintySet unconstrained(double t_cur, double horizon, const AgentParams& params1);

/// Default number of swept knots per envelope.
inline constexpr int kDefaultEnvelopeKnots = 128;

/// Information from an exact observation of the other agent at t_obs,
/// expressed at t_cur >= t_obs. `knots` below 3 keeps only the analytic
/// end points, which is all the decision logic reads.
UncertaintySet from_observation(
  State x_obs, double t_obs, double t_cur, const AgentParams& params1,
  double horizon, int knots = kDefaultEnvelopeKnots);

/// Smallest envelope-form superset of a point cloud.
UncertaintySet rectify(
  const std::vector<Knot>& points, double t_cur, double horizon,
  double length_over_vmax);

TimeWindow occupied_window(const UncertaintySet& I);

/// Clamp both coordinates of every member at t_new.
UncertaintySet advance(const UncertaintySet& I, double t_new);

ReachableBounds reachable_bounds(const UncertaintySet& I);

/// Endpoint data of B(advance(I, t_new)) without building the envelopes.
BoundsSummary summarize_bounds(const UncertaintySet& I, double t_new);

/// The same for a summary taken earlier: advancing clamps every corner.
BoundsSummary summarize_bounds(const BoundsSummary& b, double t_new);

/// W of the set a summary was taken from, at the summary's own time.
TimeWindow occupied_window(const BoundsSummary& b);

/// summarize_bounds(from_observation(...), t_cur) without building envelopes.
/// Matches the envelope path for any knot count.
BoundsSummary observation_bounds(
  State x_obs, double t_obs, double t_cur, const AgentParams& params1, double horizon);

/// summarize_bounds(unconstrained(...), t_cur).
BoundsSummary unconstrained_bounds(double t_cur, double horizon, const AgentParams& params1);

/// Intersection of two information sets, rectified. Empty -> nullopt.
std::optional<UncertaintySet> fuse(const UncertaintySet& a, const UncertaintySet& b);

} // namespace mmsched

#endif // MMSCHED__UNCERTAINTY_HPP
