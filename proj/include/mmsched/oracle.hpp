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

#ifndef MMSCHED__ORACLE_HPP
#define MMSCHED__ORACLE_HPP

// Brute-force references for the closed forms. They are built only from
// trajectory integration and the raw cost and window definitions, and are
// meant for tests and validation runs, not for speed.

#include <mmsched/kinematics.hpp>
#include <mmsched/uncertainty.hpp>

#include <cstdint>
#include <vector>

namespace mmsched {

struct ControlGrid
{
  /// Hold period of each control and number of held controls.
  double dt = 0.1;
  int depth = 1;
  /// Acceleration samples in [-a_dec, a_acc], always including both ends
  /// and zero.
  int levels = 3;

  /// Switch-time samples of the dense Dec-Acc sweep in brute_value, and
  /// random control sequences added to it.
  int sweep_points = 20000;
  int random_sequences = 2000;
  std::uint64_t seed = 0;

  /// `depth` holds of `duration / depth`.
  static ControlGrid spanning(double duration, int levels, int depth);

  std::vector<double> accelerations(const AgentParams& params) const;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Best manageable cost found from x at t_cur over: Dec then Acc (with a
/// hold at standstill) swept densely, Dec then cruise then Acc on a coarse
/// grid, and random sequences on the control grid followed by Acc. An upper
/// bound on the state value; +inf when nothing found is robustly safe.
double brute_value(
  State x, double t_cur, const UncertaintySet& I, const AgentParams& params0,
  const ControlGrid& grid);

/// Every pairwise combination <min(t_in), max(t_out)> of the samples,
/// including each sample with itself; exact duplicates removed.
std::vector<Knot> brute_reachable_bounds(const std::vector<Knot>& samples);

/// States at t_k1 of every control sequence on the grid (levels^depth of
/// them) that has not entered the resource. grid.dt * grid.depth must equal
/// t_k1 - t_k.
std::vector<State> brute_reachable_states(
  State x0, double t_k, double t_k1, const AgentParams& params0, const ControlGrid& grid);

/// Convex hull of a point cloud in the (p, v) plane, counter-clockwise,
/// collinear points dropped.
std::vector<State> convex_hull(std::vector<State> points);

/// Euclidean distance in the (p, v) plane from x to the boundary of a polygon.
double boundary_distance(const std::vector<State>& polygon, State x);

} // namespace mmsched

#endif // MMSCHED__ORACLE_HPP
