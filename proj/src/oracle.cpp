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

#include <mmsched/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mmsched {

namespace {

constexpr double kSlack = 1e-9;
constexpr double kMaxSequences = 2e7;

// Manageable cost of following `controls` from x, then accelerating.
double sequence_cost(State x, double t_cur, const std::vector<Segment>& controls,
  TimeWindow W, const AgentParams& q)
{
  const auto traj = make_trajectory(t_cur, x, controls, q, TerminalRule::kSaturateAcc);
  const auto w = entry_exit(traj, q.length);
  if (!is_finite(w.t_in))
    return kNever;
  if (!W.empty() && std::min(w.t_out, W.hi) - std::max(w.t_in, W.lo) > kSlack)
    return kNever;
  double waited = 0.0;
  if (!W.empty())
    waited = std::max(0.0, std::min(w.t_in, W.hi) - std::max(t_cur, W.lo));
  const double elapsed = std::max(0.0, w.t_in - t_cur) - waited;
  const double d = q.v_max - w.v_in;
  return q.v_max*elapsed + d*d/(2.0*q.a_acc);
}

double cross(State o, State a, State b)
{
  return (a.p - o.p)*(b.v - o.v) - (a.v - o.v)*(b.p - o.p);
}

double segment_distance(State a, State b, State x)
{
  const double dp = b.p - a.p, dv = b.v - a.v;
  const double len2 = dp*dp + dv*dv;
  double t = len2 > 0.0 ? ((x.p - a.p)*dp + (x.v - a.v)*dv)/len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(a.p + t*dp - x.p, a.v + t*dv - x.v);
}

} // anonymous namespace

ControlGrid ControlGrid::spanning(double duration, int levels, int depth)
{
  ControlGrid g;
  g.depth = depth;
  g.levels = levels;
  g.dt = depth > 0 ? duration/depth : 0.0;
  return g;
}

std::vector<double> ControlGrid::accelerations(const AgentParams& q) const
{
  const int neg = (levels - 1)/2;
  const int pos = levels - 1 - neg;
  std::vector<double> a;
  for (int i = neg; i >= 1; --i)
    a.push_back(-q.a_dec*i/neg);
  a.push_back(0.0);
  for (int i = 1; i <= pos; ++i)
    a.push_back(q.a_acc*i/pos);
  return a;
}

void ControlGrid::validate() const
{
  if (!(dt > 0.0) || depth < 1)
    throw std::invalid_argument("control grid needs dt > 0 and depth >= 1");
  if (levels < 3)
    throw std::invalid_argument("control grid needs at least 3 levels");
  if (sweep_points < 2 || random_sequences < 0)
    throw std::invalid_argument("control grid needs sweep_points >= 2");
}

//==============================================================================
double brute_value(
  State x, double t_cur, const UncertaintySet& I, const AgentParams& q,
  const ControlGrid& grid)
{
  grid.validate();
  const TimeWindow W = occupied_window(I);
  double best = sequence_cost(x, t_cur, {}, W, q);

  // Waiting longer than until the window closes (plus the time to get going)
  // never helps.
  const double t_stop = x.v/q.a_dec;
  const double wait = W.empty() ? 0.0 : std::max(0.0, W.hi - t_cur);
  const double s_max = t_stop + wait + q.v_max/q.a_acc;
  const auto dec_then_acc = [&](double s)
  {
    std::vector<Segment> c;
    c.push_back({std::min(s, t_stop), -q.a_dec});
    if (s > t_stop)
      c.push_back({s - t_stop, 0.0});
    return sequence_cost(x, t_cur, c, W, q);
  };

  // Dense sweep, then a second sweep around the best switch.
  const int n = grid.sweep_points;
  double best_s = 0.0;
  for (int i = 0; i < n; ++i)
  {
    const double s = s_max*i/(n - 1);
    const double c = dec_then_acc(s);
    if (c < best)
    {
      best = c;
      best_s = s;
    }
  }
  const double h = s_max/(n - 1);
  for (int i = 0; i < n; ++i)
    best = std::min(best, dec_then_acc(std::max(0.0, best_s - h + 2.0*h*i/(n - 1))));

  // Dec, then cruise, then Acc.
  const int m = 64;
  for (int i = 0; i < m; ++i)
  {
    const double d = t_stop*i/(m - 1);
    for (int j = 1; j < m; ++j)
    {
      const std::vector<Segment> c{{d, -q.a_dec}, {(wait + 1.0)*j/(m - 1), 0.0}};
      best = std::min(best, sequence_cost(x, t_cur, c, W, q));
    }
  }

  // Random sequences on the control grid.
  const auto levels = grid.accelerations(q);
  std::mt19937_64 rng(grid.seed);
  std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
  std::vector<Segment> c(static_cast<std::size_t>(grid.depth));
  for (int k = 0; k < grid.random_sequences; ++k)
  {
    for (auto& seg : c)
      seg = {grid.dt, levels[pick(rng)]};
    best = std::min(best, sequence_cost(x, t_cur, c, W, q));
  }
  return best;
}

std::vector<Knot> brute_reachable_bounds(const std::vector<Knot>& samples)
{
  std::vector<Knot> out;
  out.reserve(samples.size()*(samples.size() + 1)/2);
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i; j < samples.size(); ++j)
      out.push_back({std::min(samples[i].t_in, samples[j].t_in),
                     std::max(samples[i].t_out, samples[j].t_out)});
  const auto key = [](const Knot& a, const Knot& b)
  { return a.t_in < b.t_in || (a.t_in == b.t_in && a.t_out < b.t_out); };
  std::sort(out.begin(), out.end(), key);
  out.erase(std::unique(out.begin(), out.end(),
    [](const Knot& a, const Knot& b) { return a.t_in == b.t_in && a.t_out == b.t_out; }),
    out.end());
  return out;
}

std::vector<State> brute_reachable_states(
  State x0, double t_k, double t_k1, const AgentParams& q, const ControlGrid& grid)
{
  grid.validate();
  const double span = t_k1 - t_k;
  if (std::abs(grid.dt*grid.depth - span) > 1e-9*std::max(1.0, span))
    throw std::invalid_argument("control grid must span the step exactly");
  const auto levels = grid.accelerations(q);
  if (std::pow(double(levels.size()), grid.depth) > kMaxSequences)
    throw std::invalid_argument("control grid enumerates too many sequences");

  std::vector<State> out;
  std::vector<std::size_t> digit(static_cast<std::size_t>(grid.depth), 0);
  std::vector<Segment> c(digit.size());
  while (true)
  {
    for (std::size_t i = 0; i < c.size(); ++i)
      c[i] = {grid.dt, levels[digit[i]]};
    const auto traj = make_trajectory(t_k, x0, c, q, TerminalRule::kHold);
    const State end = traj.state_at(t_k1);
    if (end.p <= 0.0)
      out.push_back(end);

    std::size_t i = 0;
    while (i < digit.size() && ++digit[i] == levels.size())
      digit[i++] = 0;
    if (i == digit.size())
      break;
  }
  return out;
}

std::vector<State> convex_hull(std::vector<State> pts)
{
  const auto less = [](State a, State b) { return a.p < b.p || (a.p == b.p && a.v < b.v); };
  std::sort(pts.begin(), pts.end(), less);
  pts.erase(std::unique(pts.begin(), pts.end(),
    [](State a, State b) { return a.p == b.p && a.v == b.v; }), pts.end());
  if (pts.size() < 3)
    return pts;

  // Andrew's monotone chain.
  std::vector<State> h(2*pts.size());
  std::size_t k = 0;
  for (const State& x : pts)
  {
    while (k >= 2 && cross(h[k - 2], h[k - 1], x) <= 0.0)
      --k;
    h[k++] = x;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i > 0; --i)
  {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0.0)
      --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

double boundary_distance(const std::vector<State>& polygon, State x)
{
  if (polygon.empty())
    return kNever;
  if (polygon.size() == 1)
    return std::hypot(polygon[0].p - x.p, polygon[0].v - x.v);
  double d = kNever;
  for (std::size_t i = 0; i < polygon.size(); ++i)
    d = std::min(d, segment_distance(polygon[i], polygon[(i + 1) % polygon.size()], x));
  return d;
}

} // namespace mmsched
