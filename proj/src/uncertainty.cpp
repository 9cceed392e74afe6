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

#include <mmsched/uncertainty.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace mmsched {

namespace {

double lerp(const Knot& a, const Knot& b, double t)
{
  if (b.t_in <= a.t_in)
    return b.t_out;
  const double w = (t - a.t_in)/(b.t_in - a.t_in);
  return a.t_out + w*(b.t_out - a.t_out);
}

// Exit time of the Dec-Acc trajectory entering at t_star.
double da_exit(State x, double t0, double t_star, const AgentParams& q)
{
  const auto e = dec_acc_entry(x, t0, t_star, q);
  if (!e)
    return kNever;
  const auto plan = detail::dec_acc_plan(x, e->t_switch - t0, q);
  return t0 + detail::plan_crossing(x, plan, q.length, false);
}

// Exit time of the Acc-Dec trajectory entering at t_star. Entry times beyond
// the Acc-Dec family can be reached at vanishing speed, so the agent may stop
// inside and never leave.
double ad_exit(State x, double t0, double t_star, const AgentParams& q)
{
  const auto s = acc_dec_switch_for_entry(x, t0, t_star, q);
  if (!s)
    return kNever;
  const auto plan = detail::acc_dec_plan(x, *s - t0, q);
  return t0 + detail::plan_crossing(x, plan, q.length, false);
}

// Largest t in [lo, hi] with pred(t) true, assuming pred is true at lo and
// monotone (true then false).
template<typename Pred>
double last_true(double lo, double hi, Pred pred)
{
  for (int i = 0; i < 200 && hi - lo > 1e-12*std::max(1.0, hi); ++i)
  {
    const double mid = 0.5*(lo + hi);
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

UncertaintySet singleton(double t_cur, double horizon, double u, double o_lo, double o_hi)
{
  return UncertaintySet(
    t_cur, horizon, Envelope({{u, o_lo}}), Envelope({{u, o_hi}}));
}

} // anonymous namespace

//==============================================================================
Envelope::Envelope(std::vector<Knot> knots)
: knots_(std::move(knots))
{
  if (knots_.empty())
    throw std::invalid_argument("envelope needs at least one knot");
  for (std::size_t i = 1; i < knots_.size(); ++i)
  {
    if (knots_[i].t_in < knots_[i - 1].t_in)
      throw std::invalid_argument("envelope knots must be ordered by entry time");
  }
}

double Envelope::at(double t, bool upper_side) const
{
  if (upper_side)
  {
    // First knot strictly right of t; its predecessor is the last with t_in <= t.
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
        [](double v, const Knot& k) { return v < k.t_in; });
    if (it == knots_.begin())
      return it->t_out;
    const Knot& a = it[-1];
    if (it == knots_.end() || a.t_in == t)
      return a.t_out;
    return lerp(a, *it, t);
  }

  // First knot with t_in >= t.
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
      [](const Knot& k, double v) { return k.t_in < v; });
  if (it == knots_.end())
    return knots_.back().t_out;
  if (it == knots_.begin() || it->t_in == t)
    return it->t_out;
  return lerp(it[-1], *it, t);
}

//==============================================================================
UncertaintySet::UncertaintySet(
  double t_cur, double horizon, Envelope lower, Envelope upper)
: t_cur_(t_cur),
  horizon_(horizon),
  lower_(std::move(lower)),
  upper_(std::move(upper))
{
  const auto& l = lower_.knots();
  const auto& u = upper_.knots();
  if (l.front().t_in != u.front().t_in || l.back().t_in != u.back().t_in)
    throw std::invalid_argument("envelopes must span the same entry range");
}

bool UncertaintySet::contains(double u, double o, double tol) const
{
  if (u < tin_lo() - tol || u > tin_hi() + tol)
    return false;
  const double uc = std::clamp(u, tin_lo(), tin_hi());
  return o >= lower(uc) - tol && o <= upper(uc) + tol;
}

void UncertaintySet::check_invariants(double tol) const
{
  const auto fail = [](const std::string& what) { throw std::logic_error(what); };
  if (tin_lo() < t_cur_ - tol)
    fail("entry range starts before the current time");
  if (tin_hi() < tin_lo())
    fail("empty entry range");

  for (const auto* env : {&lower_, &upper_})
  {
    double gap = -kNever;
    for (const auto& k : env->knots())
    {
      if (k.t_out > horizon_ + tol)
        fail("envelope exceeds the horizon");
      if (k.t_out < k.t_in - tol)
        fail("exit before entry");
      // Values pinned at the horizon are exempt from the gap ordering.
      const double g = k.t_out - k.t_in;
      if (g < gap - tol && k.t_out < horizon_ - tol)
        fail("envelope gap is decreasing");
      gap = std::max(gap, g);
    }
  }

  std::vector<double> ts;
  for (const auto* env : {&lower_, &upper_})
    for (const auto& k : env->knots())
      ts.push_back(k.t_in);
  for (double t : ts)
  {
    if (lower(t) > upper(t) + tol || lower_.at(t, true) > upper_.at(t, false) + tol)
      fail("lower envelope above upper envelope");
  }
}

bool ReachableBounds::contains(double u, double o, double tol) const
{
  if (u < tin_lo - tol || u > tin_hi + tol)
    return false;
  const double uc = std::clamp(u, tin_lo, tin_hi);
  return o >= lower_at(uc) - tol && o <= o_max + tol;
}

//==============================================================================
UncertaintySet unconstrained(double t_cur, double horizon, const AgentParams& q)
{
  const double span = q.length/q.v_max;
  if (!(horizon > t_cur + span))
    throw std::invalid_argument("horizon too small for the unconstrained set");
  const double hi = horizon - span;
  return UncertaintySet(t_cur, horizon,
    Envelope({{t_cur, t_cur + span}, {hi, horizon}}),
    Envelope({{t_cur, horizon}, {hi, horizon}}));
}

UncertaintySet from_observation(
  State x, double t_obs, double t_cur, const AgentParams& q, double horizon,
  int knots)
{
  if (t_obs > t_cur)
    throw std::invalid_argument("observation is newer than the current time");

  if (x.p >= q.length)
    return singleton(t_cur, horizon, t_cur, t_cur, t_cur);

  if (x.p > 0.0)
  {
    const double lo = std::min(acc_passage(x, t_obs, q).t_out, horizon);
    const double hi = std::min(dec_passage(x, t_obs, q).t_out, horizon);
    return singleton(t_cur, horizon, t_cur,
      std::max(t_cur, lo), std::max(t_cur, hi));
  }

  const Passage acc = acc_passage(x, t_obs, q);
  const double a1 = acc.t_in;
  const double d1 = dec_passage(x, t_obs, q).t_in;
  const double last_entry = horizon - q.length/q.v_max;
  if (a1 > last_entry)
    throw std::domain_error("horizon ends before the earliest possible entry");

  const auto lower = [&](double t) { return da_exit(x, t_obs, t, q); };
  const auto upper = [&](double t) { return ad_exit(x, t_obs, t, q); };

  const double hi = std::min(d1, last_entry);

  std::vector<double> ts{a1, hi};
  if (knots >= 3 && hi > a1)
  {
    // Past the wait regime of Dec-Acc and the point where Acc-Dec can stop
    // inside, both gaps are constant, so the sweep can stop there.
    double knee = hi;
    if (can_stop_before(x, q))
    {
      const double w = t_obs + detail::plan_crossing(
        x, detail::dec_acc_plan(x, x.v/q.a_dec, q), 0.0, true);
      const double ad_full = is_finite(upper(hi)) ? hi
        : last_true(a1, hi, [&](double t) { return is_finite(upper(t)); });
      knee = std::clamp(std::max(w, ad_full), a1, hi);
      ts.push_back(knee);
    }
    const int n = std::max(2, knots - static_cast<int>(ts.size()));
    for (int i = 1; i < n - 1; ++i)
      ts.push_back(a1 + (knee - a1)*i/(n - 1));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  // Gaps are non-decreasing, so between sampled entries u_i < u_j the true
  // envelopes satisfy t + g_lo(u_i) <= lower(t) and upper(t) <= t + g_hi(u_j).
  // Slope-one pieces with steps at the samples therefore bracket them.
  std::vector<double> g_lo(ts.size()), g_hi(ts.size());
  double run_lo = -kNever, run_hi = -kNever;
  for (std::size_t i = 0; i < ts.size(); ++i)
  {
    run_lo = std::max(run_lo, lower(ts[i]) - ts[i]);
    run_hi = std::max({run_hi, run_lo, upper(ts[i]) - ts[i]});
    g_lo[i] = run_lo;
    g_hi[i] = run_hi;
  }

  // Emits the slope-one piece t + g on [a, b], clipped at the horizon.
  const auto piece = [horizon](std::vector<Knot>& out, double a, double b, double g)
  {
    out.push_back({a, std::min(a + g, horizon)});
    if (a + g < horizon && b + g > horizon)
      out.push_back({horizon - g, horizon});
    out.push_back({b, std::min(b + g, horizon)});
  };
  const std::size_t n = ts.size();
  std::vector<Knot> lo_knots, hi_knots;
  piece(hi_knots, ts[0], ts[0], g_hi[0]);
  for (std::size_t i = 0; i + 1 < n; ++i)
  {
    piece(lo_knots, ts[i], ts[i + 1], g_lo[i]);
    piece(hi_knots, ts[i], ts[i + 1], g_hi[i + 1]);
  }
  piece(lo_knots, ts[n - 1], ts[n - 1], g_lo[n - 1]);
  const auto dedupe = [](std::vector<Knot>& v)
  {
    v.erase(std::unique(v.begin(), v.end(), [](const Knot& a, const Knot& b)
      { return a.t_in == b.t_in && a.t_out == b.t_out; }), v.end());
  };
  dedupe(lo_knots);
  dedupe(hi_knots);

  const UncertaintySet raw(t_obs, horizon,
    Envelope(std::move(lo_knots)), Envelope(std::move(hi_knots)));
  return advance(raw, t_cur);
}

UncertaintySet rectify(
  const std::vector<Knot>& points, double t_cur, double horizon,
  double length_over_vmax)
{
  (void)length_over_vmax;
  if (points.empty())
    throw std::invalid_argument("rectify needs at least one point");

  std::map<double, std::pair<double, double>> groups;
  for (const auto& k : points)
  {
    if (k.t_in < t_cur - 1e-9 || k.t_out < k.t_in - 1e-9 || k.t_out > horizon + 1e-9)
      throw std::invalid_argument("point violates t_cur <= t_in <= t_out <= horizon");
    auto [it, fresh] = groups.try_emplace(k.t_in, k.t_out, k.t_out);
    if (!fresh)
    {
      it->second.first = std::min(it->second.first, k.t_out);
      it->second.second = std::max(it->second.second, k.t_out);
    }
  }

  std::vector<Knot> lo, hi;
  for (const auto& [t, range] : groups)
  {
    lo.push_back({t, range.first});
    hi.push_back({t, range.second});
  }

  // Lower gaps: largest non-decreasing minorant (running min from the right).
  for (std::size_t i = lo.size() - 1; i-- > 0;)
  {
    const double g = std::min(lo[i].t_out - lo[i].t_in, lo[i + 1].t_out - lo[i + 1].t_in);
    lo[i].t_out = std::max(lo[i].t_in + g, t_cur);
  }
  // Upper gaps: smallest non-decreasing majorant (running max from the left).
  for (std::size_t i = 1; i < hi.size(); ++i)
  {
    const double g = std::max(hi[i].t_out - hi[i].t_in, hi[i - 1].t_out - hi[i - 1].t_in);
    hi[i].t_out = std::min(hi[i].t_in + g, horizon);
  }
  return UncertaintySet(t_cur, horizon, Envelope(std::move(lo)), Envelope(std::move(hi)));
}

TimeWindow occupied_window(const UncertaintySet& I)
{
  return TimeWindow{I.tin_lo(), std::max(I.tin_lo(), I.upper(I.tin_hi()))};
}

UncertaintySet advance(const UncertaintySet& I, double t_new)
{
  if (t_new < I.t_cur())
    throw std::invalid_argument("advance cannot move time backwards");
  if (t_new <= I.tin_lo())
    return UncertaintySet(t_new, I.horizon(), I.lower_envelope(), I.upper_envelope());

  const double lo_first = std::max(t_new, I.lower(I.tin_lo()));
  if (t_new >= I.tin_hi())
  {
    return singleton(t_new, I.horizon(), t_new, lo_first,
      std::max(t_new, I.upper(I.tin_hi())));
  }

  std::vector<Knot> lo{{t_new, lo_first}};
  const double right = I.lower_envelope().at(t_new, true);
  if (right > lo_first)
    lo.push_back({t_new, right});
  for (const auto& k : I.lower_envelope().knots())
    if (k.t_in > t_new)
      lo.push_back(k);

  std::vector<Knot> hi{{t_new, std::max(t_new, I.upper(t_new))}};
  for (const auto& k : I.upper_envelope().knots())
    if (k.t_in > t_new)
      hi.push_back(k);

  return UncertaintySet(t_new, I.horizon(), Envelope(std::move(lo)), Envelope(std::move(hi)));
}

ReachableBounds reachable_bounds(const UncertaintySet& I)
{
  return ReachableBounds{
    I.t_cur(), I.tin_lo(), I.tin_hi(), I.lower_envelope(), I.upper(I.tin_hi())};
}

BoundsSummary summarize_bounds(const UncertaintySet& I, double t_new)
{
  BoundsSummary b;
  b.u_lo = std::max(t_new, I.tin_lo());
  b.u_hi = std::max(t_new, I.tin_hi());
  b.o_lo = std::max(t_new, I.lower(I.tin_lo()));
  b.o_max = std::max(t_new, I.upper(I.tin_hi()));
  return b;
}

BoundsSummary summarize_bounds(const BoundsSummary& b, double t_new)
{
  return BoundsSummary{std::max(t_new, b.u_lo), std::max(t_new, b.u_hi),
    std::max(t_new, b.o_lo), std::max(t_new, b.o_max)};
}

TimeWindow occupied_window(const BoundsSummary& b)
{
  return TimeWindow{b.u_lo, std::max(b.u_lo, b.o_max)};
}

BoundsSummary observation_bounds(
  State x, double t_obs, double t_cur, const AgentParams& q, double horizon)
{
  if (t_obs > t_cur)
    throw std::invalid_argument("observation is newer than the current time");

  if (x.p >= q.length)
    return BoundsSummary{t_cur, t_cur, t_cur, t_cur};

  if (x.p > 0.0)
  {
    const double lo = std::min(acc_passage(x, t_obs, q).t_out, horizon);
    const double hi = std::min(dec_passage(x, t_obs, q).t_out, horizon);
    return summarize_bounds(BoundsSummary{t_cur, t_cur, lo, hi}, t_cur);
  }

  const Passage acc = acc_passage(x, t_obs, q);
  const double a1 = acc.t_in;
  const double d1 = dec_passage(x, t_obs, q).t_in;
  const double last_entry = horizon - q.length/q.v_max;
  if (a1 > last_entry)
    throw std::domain_error("horizon ends before the earliest possible entry");
  const double hi = std::min(d1, last_entry);

  // End knots of the staircase envelopes built by from_observation; the
  // upper gap is the running maximum, which monotone gaps put at hi. The
  // Dec-Acc entry at a1 is pure Acc.
  const double g_lo = acc.t_out - a1;
  const double g_hi = std::max({g_lo, da_exit(x, t_obs, hi, q) - hi,
    ad_exit(x, t_obs, a1, q) - a1, ad_exit(x, t_obs, hi, q) - hi});
  return summarize_bounds(BoundsSummary{a1, hi,
    std::min(a1 + g_lo, horizon), std::min(hi + g_hi, horizon)}, t_cur);
}

BoundsSummary unconstrained_bounds(double t_cur, double horizon, const AgentParams& q)
{
  return summarize_bounds(unconstrained(t_cur, horizon, q), t_cur);
}

std::optional<UncertaintySet> fuse(const UncertaintySet& a, const UncertaintySet& b)
{
  const double lo = std::max(a.tin_lo(), b.tin_lo());
  const double hi = std::min(a.tin_hi(), b.tin_hi());
  if (lo > hi)
    return std::nullopt;

  const std::pair<const Envelope*, const Envelope*> pairs[] = {
    {&a.lower_envelope(), &b.lower_envelope()},
    {&a.upper_envelope(), &b.upper_envelope()},
  };

  std::vector<double> ts{lo, hi};
  for (const auto& [ea, eb] : pairs)
    for (const auto* env : {ea, eb})
      for (const auto& k : env->knots())
        if (k.t_in > lo && k.t_in < hi)
          ts.push_back(k.t_in);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  // Both inputs are affine between consecutive abscissae; add the points
  // where they cross so that pointwise max/min stays piecewise linear.
  const std::size_t n = ts.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
  {
    for (const auto& [ea, eb] : pairs)
    {
      const double d0 = ea->at(ts[i], true) - eb->at(ts[i], true);
      const double d1 = ea->at(ts[i + 1], false) - eb->at(ts[i + 1], false);
      if (d0*d1 < 0.0)
        ts.push_back(ts[i] + (ts[i + 1] - ts[i])*d0/(d0 - d1));
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  std::vector<Knot> lo_knots, hi_knots, points;
  bool connected = true;
  for (double t : ts)
  {
    for (bool side : {false, true})
    {
      const double l = std::max(a.lower_envelope().at(t, side), b.lower_envelope().at(t, side));
      const double u = std::min(a.upper_envelope().at(t, side), b.upper_envelope().at(t, side));
      lo_knots.push_back({t, l});
      hi_knots.push_back({t, u});
      if (l <= u)
      {
        points.push_back({t, l});
        points.push_back({t, u});
      }
      else
        connected = false;
    }
  }
  if (points.empty())
    return std::nullopt;

  const double t_cur = std::max(a.t_cur(), b.t_cur());
  const double horizon = std::min(a.horizon(), b.horizon());
  if (!connected)
    return rectify(points, t_cur, horizon, 0.0);

  const auto dedupe = [](std::vector<Knot>& v)
  {
    v.erase(std::unique(v.begin(), v.end(), [](const Knot& x, const Knot& y)
      { return x.t_in == y.t_in && x.t_out == y.t_out; }), v.end());
  };
  dedupe(lo_knots);
  dedupe(hi_knots);
  return UncertaintySet(t_cur, horizon, Envelope(std::move(lo_knots)), Envelope(std::move(hi_knots)));
}

} // namespace mmsched
