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

#include <mmsched/validation.hpp>

#include <mmsched/policy.hpp>
#include <mmsched/simulation.hpp>
#include <mmsched/valuation.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace mmsched {

namespace {

constexpr std::uint64_t kStateValueStream = 11;
constexpr std::uint64_t kBoundsStream = 12;
constexpr std::uint64_t kRegionStream = 13;

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs body(i) for i in [0, n); results land in per-index slots, so the
// outcome does not depend on jobs.
template <typename Body>
void for_each_index(int n, int jobs, Body body)
{
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1)
  {
    for (int i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] { for (int i = w; i < n; i += workers) body(i); });
  for (auto& t : pool)
    t.join();
}

double uniform(std::mt19937_64& rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // anonymous namespace

//==============================================================================
ControlGrid state_value_grid()
{
  ControlGrid g;
  g.dt = 0.25;
  g.depth = 40;
  g.levels = 9;
  return g;
}

StateValueCheck check_state_values(
  int n, std::uint64_t seed, ControlGrid grid, const AgentParams& q, int jobs)
{
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<double, double>> results(static_cast<std::size_t>(n));
  for_each_index(n, jobs, [&](int k)
  {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(k), kStateValueStream);
    const double t_cur = uniform(rng, 0.0, 5.0);
    const State x{uniform(rng, -120.0, -1.0), uniform(rng, 0.0, q.v_max)};
    const State x1{uniform(rng, -150.0, 20.0), uniform(rng, 0.0, q.v_max)};
    const double t_obs = t_cur - uniform(rng, 0.0, 1.0);
    const auto I = from_observation(x1, t_obs, t_cur, q, 1000.0);
    ControlGrid g = grid;
    g.seed = rng();
    results[static_cast<std::size_t>(k)] =
      {brute_value(x, t_cur, I, q, g), state_value(x, t_cur, I, q).value};
  });

  StateValueCheck c;
  c.instances = n;
  for (const auto& [brute, closed] : results)
  {
    if (is_finite(brute) != is_finite(closed))
    {
      ++c.mismatched;
      continue;
    }
    if (!is_finite(brute))
      continue;
    ++c.finite;
    const double gap = brute - closed;
    if (gap < -1e-6)
      ++c.below;
    c.min_gap = std::min(c.min_gap, gap);
    c.max_gap = std::max(c.max_gap, gap);
  }
  c.seconds = seconds_since(t0);
  return c;
}

//==============================================================================
BoundsCheck check_reachable_bounds(
  int n, std::uint64_t seed, const AgentParams& q, int samples, int jobs)
{
  const auto t0 = std::chrono::steady_clock::now();
  struct Result { int outside = 0; double gap = 0.0; };
  std::vector<Result> results(static_cast<std::size_t>(n));
  for_each_index(n, jobs, [&](int k)
  {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(k), kBoundsStream);
    const double t_cur = uniform(rng, 0.0, 5.0);
    const State x1{uniform(rng, -150.0, 4.0), uniform(rng, 0.0, q.v_max)};
    const double t_obs = t_cur - uniform(rng, 0.0, 1.0);
    const double horizon = t_cur + uniform(rng, 20.0, 100.0);
    const auto I = from_observation(x1, t_obs, t_cur, q, horizon);

    // Members evenly spaced by arc length along the boundary of I: lower
    // envelope, end slice at tin_hi, upper envelope back, slice at tin_lo.
    std::vector<Knot> outline;
    const int dense = 2000;
    const auto u_at = [&](int i) { return I.tin_lo() + (I.tin_hi() - I.tin_lo())*i/dense; };
    for (int i = 0; i <= dense; ++i)
      outline.push_back({u_at(i), I.lower(u_at(i))});
    for (int i = dense; i >= 0; --i)
      outline.push_back({u_at(i), I.upper(u_at(i))});
    outline.push_back(outline.front());
    std::vector<double> arc{0.0};
    for (std::size_t i = 1; i < outline.size(); ++i)
      arc.push_back(arc.back() + std::hypot(outline[i].t_in - outline[i - 1].t_in,
                                            outline[i].t_out - outline[i - 1].t_out));
    std::vector<Knot> members;
    for (int i = 0; i < samples; ++i)
    {
      const double s = arc.back()*i/samples;
      const std::size_t j = std::min<std::size_t>(
        std::upper_bound(arc.begin(), arc.end(), s) - arc.begin(), arc.size() - 1);
      const double len = arc[j] - arc[j - 1];
      const double f = len > 0.0 ? (s - arc[j - 1])/len : 0.0;
      // Chords across envelope steps leave I; clamp back into the slice.
      const double u = outline[j - 1].t_in + f*(outline[j].t_in - outline[j - 1].t_in);
      const double o = outline[j - 1].t_out + f*(outline[j].t_out - outline[j - 1].t_out);
      members.push_back({u, std::clamp(o, I.lower(u), I.upper(u))});
    }

    const auto pairs = brute_reachable_bounds(members);
    const auto B = reachable_bounds(I);
    Result r;
    for (const auto& c : pairs)
      if (!B.contains(c.t_in, c.t_out))
        ++r.outside;

    const auto nearest = [&](double u, double o)
    {
      double d = kNever;
      for (const auto& c : pairs)
        d = std::min(d, std::hypot(c.t_in - u, c.t_out - o));
      return d;
    };
    double gap = 0.0;
    const int m = 200;
    for (int i = 0; i <= m; ++i)
    {
      const double u = B.tin_lo + (B.tin_hi - B.tin_lo)*i/m;
      gap = std::max({gap, nearest(u, B.lower_at(u)), nearest(u, B.o_max)});
    }
    for (double u : {B.tin_lo, B.tin_hi})
      for (int i = 0; i <= 50; ++i)
        gap = std::max(gap, nearest(u, B.lower_at(u) + (B.o_max - B.lower_at(u))*i/50.0));
    r.gap = gap/std::max(1e-9, horizon - t_cur);
    results[static_cast<std::size_t>(k)] = r;
  });

  BoundsCheck c;
  c.sets = n;
  for (const auto& r : results)
  {
    c.outside += r.outside;
    c.max_relative_gap = std::max(c.max_relative_gap, r.gap);
  }
  c.seconds = seconds_since(t0);
  return c;
}

//==============================================================================
double region_fill_gap(State x0, double t_k, double t_k1, const AgentParams& q,
  const std::vector<State>& cloud, int samples)
{
  const FeasibleRegion F(x0, t_k, t_k1, q);
  if (F.empty())
    return cloud.empty() ? 0.0 : kNever;
  const auto hull = convex_hull(cloud);
  double gap = 0.0;
  for (int i = 0; i <= samples; ++i)
  {
    const double v = F.v_lo() + (F.v_hi() - F.v_lo())*i/samples;
    gap = std::max(gap, boundary_distance(hull, {F.p_min(v), v}));
    gap = std::max(gap, boundary_distance(hull, {F.p_max(v), v}));
  }
  return gap;
}

RegionCheck check_feasible_regions(
  int n, int clipped, std::uint64_t seed, const AgentParams& q, int jobs)
{
  const auto t0 = std::chrono::steady_clock::now();
  struct Result { std::size_t points = 0; int violations = 0; double gap = 0.0; };
  std::vector<Result> results(static_cast<std::size_t>(n + clipped));
  for_each_index(n + clipped, jobs, [&](int k)
  {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(k), kRegionStream);
    const bool near = k >= n;
    const double dt = uniform(rng, 0.01, 0.1);
    State x0{uniform(rng, -200.0, -5.0), uniform(rng, 0.0, q.v_max)};
    FeasibleRegion F(x0, 0.0, dt, q);
    if (near)
    {
      // Redraw until some step stays outside the resource.
      do
      {
        x0 = {uniform(rng, -2.0, -0.01), uniform(rng, 0.0, q.v_max)};
        F = FeasibleRegion(x0, 0.0, dt, q);
      } while (F.empty());
    }
    const auto cloud = brute_reachable_states(x0, 0.0, dt, q, ControlGrid::spanning(dt, 9, 5));
    Result r;
    r.points = cloud.size();
    for (const auto& s : cloud)
      if (s.p > 0.0 || !F.contains(s))
        ++r.violations;
    if (!near)
      r.gap = region_fill_gap(x0, 0.0, dt, q, cloud);
    results[static_cast<std::size_t>(k)] = r;
  });

  RegionCheck c;
  c.instances = n;
  c.clipped_instances = clipped;
  for (const auto& r : results)
  {
    c.points += r.points;
    c.violations += r.violations;
    c.max_fill_gap = std::max(c.max_fill_gap, r.gap);
  }
  c.seconds = seconds_since(t0);
  return c;
}

} // namespace mmsched
