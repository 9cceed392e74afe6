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

#include <mmsched/valuation.hpp>

#include <algorithm>

namespace mmsched {

namespace {

double velocity_term(double v_in, const AgentParams& q)
{
  const double d = q.v_max - v_in;
  return d*d/(2.0*q.a_acc);
}

// Measure of (t_cur, t_in) outside the window.
double uncovered(double t_cur, double t_in, TimeWindow W)
{
  const double span = std::max(0.0, t_in - t_cur);
  if (W.empty())
    return span;
  const double lo = std::max(t_cur, W.lo);
  const double hi = std::min(t_in, W.hi);
  return span - std::max(0.0, hi - lo);
}

} // anonymous namespace

const char* to_string(Region r)
{
  switch (r)
  {
    case Region::kD1: return "D1";
    case Region::kD2: return "D2";
    case Region::kD3: return "D3";
  }
  return "?";
}

bool open_overlap(double a_lo, double a_hi, double b_lo, double b_hi)
{
  if (!(a_lo < a_hi) || !(b_lo < b_hi))
    return false;
  return a_lo < b_hi - kTouchSlack && b_lo < a_hi - kTouchSlack;
}

Cost entry_cost(double t_in, double v_in, const AgentParams& q)
{
  if (!is_finite(t_in))
    return kNever;
  return q.v_max*t_in + velocity_term(v_in, q);
}

Cost scheduling_cost(
  const Trajectory& traj0, const AgentParams& q, double t1_in, double t1_out)
{
  const auto w = entry_exit(traj0, q.length);
  if (!is_finite(w.t_in) || open_overlap(w.t_in, w.t_out, t1_in, t1_out))
    return kNever;
  return entry_cost(w.t_in, w.v_in, q);
}

Cost manageable_cost(
  const Trajectory& traj0, double t_cur, const UncertaintySet& I, const AgentParams& q)
{
  const auto w = entry_exit(traj0, q.length);
  const auto W = occupied_window(I);
  if (!is_finite(w.t_in) || open_overlap(w.t_in, w.t_out, W.lo, W.hi))
    return kNever;
  return q.v_max*uncovered(t_cur, w.t_in, W) + velocity_term(w.v_in, q);
}

StateValue window_value(State x, double t_cur, TimeWindow W, const AgentParams& q)
{
  StateValue out;
  const Passage acc = acc_passage(x, t_cur, q);
  if (!open_overlap(acc.t_in, acc.t_out, W.lo, W.hi))
  {
    out.t_switch = t_cur;
    out.t_in = acc.t_in;
    out.v_in = acc.v_in;
  }
  else
  {
    // Acc exits first among Dec-Acc trajectories, so the earliest safe
    // switch is the one that enters exactly when the window closes.
    const auto e = dec_acc_entry(x, t_cur, W.hi, q);
    if (!e)
      return out;
    out.t_switch = e->t_switch;
    out.t_in = W.hi;
    out.v_in = e->v_in;
  }
  out.value = q.v_max*uncovered(t_cur, out.t_in, W) + velocity_term(out.v_in, q);
  return out;
}

StateValue state_value(
  State x, double t_cur, const UncertaintySet& I, const AgentParams& q)
{
  auto out = window_value(x, t_cur, occupied_window(I), q);
  if (out.finite())
    out.witness = dec_acc_trajectory(x, t_cur, out.t_switch, q);
  return out;
}

Cost value_uo(State x_tar, double t_next, double u, double o, const AgentParams& q)
{
  return window_value(x_tar, t_next, TimeWindow{u, std::max(u, o)}, q).value;
}

Region window_region(State x_tar, double t_next, double u, double o, const AgentParams& q)
{
  const Passage acc = acc_passage(x_tar, t_next, q);
  if (u >= acc.t_out)
    return Region::kD1;
  if (o <= acc.t_in)
    return Region::kD2;
  return Region::kD3;
}

VmaxResult v_max(
  State x_tar, double t_next, const UncertaintySet& I_k, const AgentParams& q)
{
  return v_max(x_tar, t_next, summarize_bounds(I_k, t_next), q);
}

VmaxResult v_max(
  State x_tar, double t_next, const BoundsSummary& b, const AgentParams& q)
{
  VmaxResult r;
  const Passage acc = acc_passage(x_tar, t_next, q);
  const double c_acc = q.v_max*(acc.t_in - t_next) + velocity_term(acc.v_in, q);

  // B = {(u, o) : u_lo <= u <= u_hi, lower(u) <= o <= o_max} with a
  // non-decreasing gap lower(u) - u, so each region's extreme point is one
  // of the corners below.
  const int d1 = 0, d2 = 1, d3 = 2;
  r.has[d1] = b.u_hi >= acc.t_out;
  r.has[d2] = b.o_lo <= acc.t_in;
  r.has[d3] = b.u_lo <= acc.t_out && b.o_max >= acc.t_in;

  if (r.has[d1])
    r.region_value[d1] = c_acc;

  if (r.has[d2] && !(r.has[d1] && r.has[d3]))
    r.region_value[d2] = c_acc - q.v_max*(b.o_lo - b.u_lo);

  if (r.has[d3])
  {
    const double u = std::min(b.u_hi, acc.t_out);
    if (b.u_lo < acc.t_out && u < b.o_max)
    {
      // Supremum over the closed region; at u = t_out^A itself Acc would
      // slip through, but every point just left of it forces Dec-Acc.
      const auto e = dec_acc_entry(x_tar, t_next, b.o_max, q);
      r.region_value[d3] = e
        ? q.v_max*(u - t_next) + velocity_term(e->v_in, q) : kNever;
    }
    else
      r.region_value[d3] = value_uo(x_tar, t_next, u, b.o_max, q);
  }

  r.value = -kNever;
  for (int i : {d1, d2, d3})
  {
    if (r.region_value[i] > r.value)
    {
      r.value = r.region_value[i];
      r.argmax = static_cast<Region>(i);
    }
  }
  return r;
}

} // namespace mmsched
