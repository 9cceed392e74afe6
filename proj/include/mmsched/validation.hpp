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

#ifndef MMSCHED__VALIDATION_HPP
#define MMSCHED__VALIDATION_HPP

// Seeded comparisons of the closed forms against the brute-force oracles.

#include <mmsched/oracle.hpp>

#include <cstdint>

namespace mmsched {

/// brute_value against state_value on random (x, I) instances.
struct StateValueCheck
{
  int instances = 0;
  int finite = 0;
  /// Instances where exactly one side is infinite.
  int mismatched = 0;
  /// Instances with brute_value < state_value - 1e-6.
  int below = 0;
  double min_gap = kNever;
  double max_gap = -kNever;
  double seconds = 0.0;

  bool pass(double bound = 0.5) const
  {
    return mismatched == 0 && below == 0 && max_gap <= bound;
  }
};

/// Instances: x in [-120, -1] x [0, v_max] at t_cur in [0, 5], I from an
/// observation of agent 1 at most 1 s old. The grid's seed is replaced per
/// instance.
StateValueCheck check_state_values(
  int n, std::uint64_t seed, ControlGrid grid, const AgentParams& params, int jobs = 1);

/// Default oracle grid for check_state_values.
ControlGrid state_value_grid();

/// reachable_bounds against pairwise enumeration of samples of I.
struct BoundsCheck
{
  int sets = 0;
  /// Enumerated pairs outside B(I).
  int outside = 0;
  /// Largest distance from a boundary point of B(I) to the enumerated pairs,
  /// over (horizon - t_cur).
  double max_relative_gap = 0.0;
  double seconds = 0.0;

  bool pass(double tol = 1e-2) const { return outside == 0 && max_relative_gap < tol; }
};

/// Sets from observations, horizons 20 to 100 s ahead. Each set contributes
/// `samples` members evenly spaced along its boundary.
BoundsCheck check_reachable_bounds(
  int n, std::uint64_t seed, const AgentParams& params, int samples = 200, int jobs = 1);

/// Brute reachable-state clouds against the feasible region.
struct RegionCheck
{
  int instances = 0;
  /// Extra instances near the resource, checked for soundness only.
  int clipped_instances = 0;
  std::size_t points = 0;
  /// Cloud points outside the region, or past p = 0.
  int violations = 0;
  /// Largest distance from the region boundary to the cloud's convex hull,
  /// over the unclipped instances.
  double max_fill_gap = 0.0;
  double seconds = 0.0;

  bool pass(double tol = 1e-3) const { return violations == 0 && max_fill_gap <= tol; }
};

/// Starts p in [-200, -5], v in [0, v_max]; step length in [0.01, 0.1];
/// 9 acceleration levels held 5 times. Clipped instances start within 2 of
/// the resource.
RegionCheck check_feasible_regions(
  int n, int clipped, std::uint64_t seed, const AgentParams& params, int jobs = 1);

/// Distance from the boundary of the region at t_k1 to the hull of a cloud.
double region_fill_gap(State x0, double t_k, double t_k1, const AgentParams& params,
  const std::vector<State>& cloud, int samples = 400);

} // namespace mmsched

#endif // MMSCHED__VALIDATION_HPP
