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

#include <mmsched/policy.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mmsched {

namespace {

// Switch offset of the Dec-Acc step ending at velocity v.
double da_switch(State x, double dt, double v, const AgentParams& q)
{
  const double s = (x.v + q.a_acc*dt - v)/(q.a_acc + q.a_dec);
  if (s <= x.v/q.a_dec)
    return std::clamp(s, 0.0, dt);
  return std::clamp(dt - v/q.a_acc, 0.0, dt);
}

// Switch offset of the Acc-Dec step ending at velocity v.
double ad_switch(State x, double dt, double v, const AgentParams& q)
{
  const double s = (v - x.v + q.a_dec*dt)/(q.a_acc + q.a_dec);
  if (x.v + q.a_acc*s <= q.v_max)
    return std::clamp(s, 0.0, dt);
  return std::clamp(dt - (q.v_max - v)/q.a_dec, 0.0, dt);
}

// Velocity knots (relative time, velocity) of a plan on [0, dt].
struct Profile
{
  std::array<double, 6> t{};
  std::array<double, 6> v{};
  int n = 0;

  double at(double tau) const
  {
    for (int i = 1; i < n; ++i)
    {
      if (tau <= t[i])
      {
        const double w = t[i] > t[i - 1] ? (tau - t[i - 1])/(t[i] - t[i - 1]) : 1.0;
        return v[i - 1] + w*(v[i] - v[i - 1]);
      }
    }
    return v[n - 1];
  }
};

Profile profile(State x, const detail::PhasePlan& plan, double dt)
{
  Profile pr;
  pr.t[0] = 0.0;
  pr.v[0] = x.v;
  pr.n = 1;
  double t = 0.0, v = x.v;
  for (int i = 0; i < plan.size && t < dt; ++i)
  {
    const double d = std::min(plan.items[i].duration, dt - t);
    t += d;
    v += plan.items[i].accel*d;
    pr.t[pr.n] = t;
    pr.v[pr.n] = v;
    ++pr.n;
  }
  if (t < dt)
  {
    pr.t[pr.n] = dt;
    pr.v[pr.n] = v;
    ++pr.n;
  }
  return pr;
}

// Breakpoints of clamp(u, lo(t), hi(t)) on [0, dt] and its values there.
struct Clamped
{
  std::vector<double> t;
  std::vector<double> v;
};

Clamped clamp_profile(const Profile& hi, const Profile& lo, double u)
{
  std::vector<double> ts(hi.t.begin(), hi.t.begin() + hi.n);
  ts.insert(ts.end(), lo.t.begin(), lo.t.begin() + lo.n);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  std::vector<double> all = ts;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i)
  {
    for (const Profile* pr : {&hi, &lo})
    {
      const double a = pr->at(ts[i]) - u;
      const double b = pr->at(ts[i + 1]) - u;
      if (a*b < 0.0)
        all.push_back(ts[i] + (ts[i + 1] - ts[i])*a/(a - b));
    }
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  Clamped c;
  c.t = all;
  c.v.reserve(all.size());
  for (double t : all)
    c.v.push_back(std::max(std::min(u, hi.at(t)), lo.at(t)));
  return c;
}

// Distance covered by clamp(u, lo(t), hi(t)) over the profile span, and its
// derivative in u (the time spent strictly between lo and hi).
struct ClampDistance
{
  double dist = 0.0;
  double slope = 0.0;
};

ClampDistance clamp_distance(const Profile& hi, const Profile& lo, double u)
{
  std::array<double, 12> ts{};
  int n = 0;
  for (const Profile* pr : {&hi, &lo})
    for (int i = 0; i < pr->n; ++i)
      ts[n++] = pr->t[i];
  std::sort(ts.begin(), ts.begin() + n);

  ClampDistance out;
  const auto c = [&](double t) { return std::max(std::min(u, hi.at(t)), lo.at(t)); };
  for (int i = 0; i + 1 < n; ++i)
  {
    const double a = ts[i], b = ts[i + 1];
    if (b <= a)
      continue;
    std::array<double, 4> cut{a, b, a, a};
    int m = 2;
    for (const Profile* pr : {&hi, &lo})
    {
      const double fa = pr->at(a) - u, fb = pr->at(b) - u;
      if (fa*fb < 0.0)
        cut[m++] = a + (b - a)*fa/(fa - fb);
    }
    std::sort(cut.begin(), cut.begin() + m);
    for (int j = 0; j + 1 < m; ++j)
    {
      const double s = cut[j], e = cut[j + 1];
      out.dist += 0.5*(c(s) + c(e))*(e - s);
      const double mid = 0.5*(s + e);
      if (lo.at(mid) < u && u < hi.at(mid))
        out.slope += e - s;
    }
  }
  return out;
}

struct Candidate
{
  State x;
  VmaxResult r;
  bool valid = false;
};

// Lower objective wins; ties prefer larger p, then larger v.
bool better(const Candidate& a, const Candidate& b)
{
  if (!b.valid)
    return a.valid;
  if (!a.valid)
    return false;
  const double va = a.r.value, vb = b.r.value;
  if (is_finite(va) && is_finite(vb))
  {
    const double tol = 1e-9*std::max(1.0, std::abs(vb));
    if (va < vb - tol)
      return true;
    if (va > vb + tol)
      return false;
  }
  else if (va != vb)
    return va < vb;
  if (a.x.p != b.x.p)
    return a.x.p > b.x.p;
  return a.x.v > b.x.v;
}

// A special candidate is the end of a Dec-Acc step; reuse that step rather
// than searching the clamp family for it.
Trajectory steer_step(State x0, double t_k, double t_k1, State x_tar,
  const std::vector<State>& specials, const std::vector<double>& switches,
  const AgentParams& q)
{
  for (std::size_t i = 0; i < specials.size(); ++i)
    if (specials[i].p == x_tar.p && specials[i].v == x_tar.v)
      return dec_acc_trajectory(x0, t_k, switches[i], q).prefix(t_k1);
  return steer_to(x0, t_k, t_k1, x_tar, q);
}

double velocity_term(double v_in, const AgentParams& q)
{
  const double d = q.v_max - v_in;
  return d*d/(2.0*q.a_acc);
}

} // anonymous namespace

//==============================================================================
FeasibleRegion::FeasibleRegion(
  State x0, double t_from, double t_to, const AgentParams& q)
: x0_(x0), t_from_(t_from), t_to_(t_to), q_(q)
{
  if (t_to < t_from)
    throw std::invalid_argument("feasible region needs t_to >= t_from");
  const double dt = t_to - t_from;
  v_lo_ = std::max(0.0, x0.v - q.a_dec*dt);
  v_hi_ = std::min(q.v_max, x0.v + q.a_acc*dt);
  if (p_min(v_lo_) > 0.0)
  {
    v_hi_ = -1.0;
    return;
  }
  if (p_min(v_hi_) > 0.0)
  {
    // p_min is increasing in v; keep the part that stays outside.
    double lo = v_lo_, hi = v_hi_;
    for (int i = 0; i < 100 && hi - lo > 1e-13*std::max(1.0, hi); ++i)
    {
      const double mid = 0.5*(lo + hi);
      (p_min(mid) <= 0.0 ? lo : hi) = mid;
    }
    v_hi_ = lo;
  }
}

double FeasibleRegion::p_min(double v) const
{
  const double dt = t_to_ - t_from_;
  if (dt <= 0.0)
    return x0_.p;
  const auto plan = detail::dec_acc_plan(x0_, da_switch(x0_, dt, v, q_), q_);
  return detail::plan_state(x0_, plan, dt).p;
}

double FeasibleRegion::p_max(double v) const
{
  const double dt = t_to_ - t_from_;
  if (dt <= 0.0)
    return std::min(x0_.p, 0.0);
  const auto plan = detail::acc_dec_plan(x0_, ad_switch(x0_, dt, v, q_), q_);
  return std::min(detail::plan_state(x0_, plan, dt).p, 0.0);
}

bool FeasibleRegion::contains(State x, double tol) const
{
  if (empty() || x.p > tol || x.v < v_lo_ - tol || x.v > v_hi_ + tol)
    return false;
  const double v = std::clamp(x.v, v_lo_, v_hi_);
  return x.p >= p_min(v) - tol && x.p <= p_max(v) + tol;
}

State FeasibleRegion::acc_end() const
{
  return clipped_step(x0_, q_.a_acc, t_to_ - t_from_, q_);
}

State FeasibleRegion::dec_end() const
{
  return clipped_step(x0_, -q_.a_dec, t_to_ - t_from_, q_);
}

FeasibleRegion feasible_targets(State x0, double t_k, double t_k1, const AgentParams& q)
{
  return FeasibleRegion(x0, t_k, t_k1, q);
}

//==============================================================================
Trajectory steer_to(
  State x0, double t_k, double t_k1, State x_tar, const AgentParams& q)
{
  const FeasibleRegion F(x0, t_k, t_k1, q);
  const double tol = 1e-7;
  const auto fail = [&](const char* bound)
  {
    std::ostringstream os;
    os << "target <" << x_tar.p << ", " << x_tar.v << "> violates " << bound;
    throw std::invalid_argument(os.str());
  };
  if (F.empty())
    fail("the region (full braking enters the resource)");
  if (x_tar.p > tol)
    fail("p <= 0");
  if (x_tar.v < F.v_lo() - tol)
    fail("v >= v_lo");
  if (x_tar.v > F.v_hi() + tol)
    fail("v <= v_hi");
  const double v = std::clamp(x_tar.v, F.v_lo(), F.v_hi());
  if (x_tar.p < F.p_min(v) - tol)
    fail("p >= p_min(v)");
  if (x_tar.p > F.p_max(v) + tol)
    fail("p <= p_max(v)");

  const double dt = t_k1 - t_k;
  if (dt <= 0.0)
    return Trajectory(t_k, x0, {});

  const Profile hi = profile(x0, detail::acc_dec_plan(x0, ad_switch(x0, dt, v, q), q), dt);
  const Profile lo = profile(x0, detail::dec_acc_plan(x0, da_switch(x0, dt, v, q), q), dt);
  const double need = x_tar.p - x0.p;

  // Distance travelled is continuous, piecewise quadratic and non-decreasing
  // in u: Newton steps, bisecting whenever a step leaves the bracket.
  // Boundary targets sit where the distance is flat in u; settle them first.
  double u_lo = 0.0, u_hi = q.v_max;
  const double eps = 1e-13*std::max(1.0, std::abs(need));
  const ClampDistance d_min = clamp_distance(hi, lo, u_lo);
  const ClampDistance d_max = clamp_distance(hi, lo, u_hi);
  double u = 0.5*(u_lo + u_hi), best_u = u, best_err = kNever;
  if (need <= d_min.dist + eps)
    best_err = 0.0, best_u = u_lo;
  else if (need >= d_max.dist - eps)
    best_err = 0.0, best_u = u_hi;
  for (int i = 0; i < 200 && best_err > eps; ++i)
  {
    const ClampDistance d = clamp_distance(hi, lo, u);
    const double err = d.dist - need;
    if (std::abs(err) < best_err)
    {
      best_err = std::abs(err);
      best_u = u;
    }
    if (best_err <= eps || u_hi - u_lo <= 1e-14*q.v_max)
      break;
    (err < 0.0 ? u_lo : u_hi) = u;
    const double step = d.slope > 0.0 ? u - err/d.slope : -1.0;
    u = step > u_lo && step < u_hi ? step : 0.5*(u_lo + u_hi);
  }
  u = best_u;

  const Clamped c = clamp_profile(hi, lo, u);
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < c.t.size(); ++i)
  {
    const double d = c.t[i + 1] - c.t[i];
    if (d <= 0.0)
      continue;
    const double a = std::clamp((c.v[i + 1] - c.v[i])/d, -q.a_dec, q.a_acc);
    if (!segs.empty() && std::abs(segs.back().accel - a) < 1e-12)
      segs.back().duration += d;
    else
      segs.push_back({d, a});
  }
  return Trajectory(t_k, x0, std::move(segs));
}

std::optional<Trajectory> can_commit(
  State x0, double t_k, double t_k1, const UncertaintySet& I_k, const AgentParams& q)
{
  return can_commit(x0, t_k, t_k1, summarize_bounds(I_k, t_k), q);
}

std::optional<Trajectory> can_commit(
  State x0, double t_k, double t_k1, const BoundsSummary& info, const AgentParams& q)
{
  const auto v = window_value(x0, t_k, occupied_window(info), q);
  if (!v.finite() || v.t_in > t_k1)
    return std::nullopt;
  return dec_acc_trajectory(x0, t_k, v.t_switch, q);
}

const char* to_string(DecisionKind k)
{
  switch (k)
  {
    case DecisionKind::kCommit: return "commit";
    case DecisionKind::kSteer: return "steer";
    case DecisionKind::kFallback: return "fallback";
  }
  return "?";
}

StepDecision decide(
  State x0, double t_k, double t_k1, const UncertaintySet& I_k,
  const AgentParams& q, const GridSpec& grid)
{
  return decide(x0, t_k, t_k1, summarize_bounds(I_k, t_k), q, grid);
}

StepDecision decide(
  State x0, double t_k, double t_k1, const BoundsSummary& info,
  const AgentParams& q, const GridSpec& grid)
{
  StepDecision out;
  if (auto c = can_commit(x0, t_k, t_k1, info, q))
  {
    out.kind = DecisionKind::kCommit;
    out.trajectory = std::move(*c);
    out.target = out.trajectory.state_at(t_k1);
    return out;
  }

  const FeasibleRegion F(x0, t_k, t_k1, q);
  const BoundsSummary b = summarize_bounds(info, t_k1);
  const double dt = t_k1 - t_k;

  Candidate best;
  const auto eval = [&](State x)
  {
    Candidate c{x, v_max(x, t_k1, b, q), true};
    ++out.evaluations;
    if (better(c, best))
      best = c;
    return c;
  };

  std::vector<State> specials;
  std::vector<double> special_switch;
  if (!F.empty())
  {
    const State x_acc = F.acc_end();
    const State x_dec = F.dec_end();

    // The value witness from x0 and the Dec-Acc step entering at o_max, each
    // with the absolute switch time of the Dec-Acc step that reaches it.
    if (x_acc.p <= 0.0)
    {
      specials.push_back(x_acc);
      special_switch.push_back(t_k);
    }
    const auto da_omax = dec_acc_entry(x0, t_k, b.o_max, q);
    if (da_omax && b.o_max > t_k1)
    {
      const auto plan = detail::dec_acc_plan(x0, da_omax->t_switch - t_k, q);
      specials.push_back(detail::plan_state(x0, plan, dt));
      special_switch.push_back(da_omax->t_switch);
    }
    const auto witness = window_value(x0, t_k, occupied_window(info), q);
    if (witness.finite())
    {
      const auto plan = detail::dec_acc_plan(x0, witness.t_switch - t_k, q);
      specials.push_back(detail::plan_state(x0, plan, dt));
      special_switch.push_back(witness.t_switch);
    }
    specials.push_back(x_dec);
    special_switch.push_back(t_k1);

    if (grid.certificates)
    {
      // Lower bounds on the objective over all of F: the Acc trajectory from
      // x0 dominates every target, and Dec then Acc is dominated by all.
      const Passage a_min = acc_passage(x0, t_k, q);
      const Passage a_max = acc_passage(x_dec, t_k1, q);
      const double c_acc = q.v_max*(a_min.t_in - t_k1) + velocity_term(a_min.v_in, q);
      double lb = -kNever;
      if (b.u_hi >= a_max.t_out)
        lb = std::max(lb, c_acc);
      if (b.o_lo <= a_min.t_in)
        lb = std::max(lb, c_acc - q.v_max*(b.o_lo - b.u_lo));
      const double u3 = std::min(b.u_hi, a_min.t_out);
      if (b.u_lo < a_min.t_out && b.o_max >= a_max.t_in && da_omax
          && std::min(b.u_hi, a_max.t_out) < b.o_max)
        lb = std::max(lb, q.v_max*(u3 - t_k1) + velocity_term(da_omax->v_in, q));

      if (is_finite(lb))
      {
        for (const State& x : specials)
        {
          if (!F.contains(x, 1e-9))
            continue;
          const auto c = eval(x);
          if (c.r.value <= lb + 1e-9*std::max(1.0, std::abs(lb)))
          {
            out.certified = true;
            best = c;
            break;
          }
        }
      }
    }

    if (!out.certified)
    {
      for (const State& x : specials)
        if (F.contains(x, 1e-9))
          eval(x);

      const int nv = std::max(1, grid.nv);
      const int np = std::max(1, grid.np);
      const auto v_at = [&](double f) { return F.v_lo() + (F.v_hi() - F.v_lo())*f; };
      const auto p_range = [&](double v) { return std::pair{F.p_min(v), F.p_max(v)}; };
      const auto p_at = [](std::pair<double, double> r, double f)
      { return r.first + (r.second - r.first)*f; };
      const auto frac = [](int i, int n) { return n > 1 ? double(i)/(n - 1) : 1.0; };

      double best_fv = 1.0, best_fp = 1.0;
      bool on_grid = false;
      for (int i = 0; i < nv; ++i)
      {
        const double v = v_at(frac(i, nv));
        const auto range = p_range(v);
        for (int j = 0; j < np; ++j)
        {
          const Candidate before = best;
          eval({p_at(range, frac(j, np)), v});
          if (better(best, before) || !before.valid)
          {
            best_fv = frac(i, nv);
            best_fp = frac(j, np);
            on_grid = true;
          }
        }
      }
      if (!on_grid || best.x.v != v_at(best_fv))
      {
        // Incumbent is a special candidate; refine around its own position.
        const double span_v = F.v_hi() - F.v_lo();
        best_fv = span_v > 0.0 ? (best.x.v - F.v_lo())/span_v : 1.0;
        const double lo = F.p_min(best.x.v), hi = F.p_max(best.x.v);
        best_fp = hi > lo ? (best.x.p - lo)/(hi - lo) : 1.0;
      }

      if (grid.refine > 0 && is_finite(best.r.value))
      {
        const double hv = nv > 1 ? 1.0/(nv - 1) : 0.0;
        const double hp = np > 1 ? 1.0/(np - 1) : 0.0;
        const int r = grid.refine;
        for (int i = -r; i <= r; ++i)
        {
          const double fv = std::clamp(best_fv + hv*i/r, 0.0, 1.0);
          const double v = v_at(fv);
          const auto range = p_range(v);
          for (int j = -r; j <= r; ++j)
          {
            if (i == 0 && j == 0)
              continue;
            eval({p_at(range, std::clamp(best_fp + hp*j/r, 0.0, 1.0)), v});
          }
        }
      }
    }
  }

  if (!best.valid || !is_finite(best.r.value))
  {
    // Defensive: unreachable while the value of x0 stays finite.
    out.kind = DecisionKind::kFallback;
    out.trajectory = constant_step(x0, t_k, t_k1, -q.a_dec, q);
    out.target = out.trajectory.state_at(t_k1);
    return out;
  }

  out.kind = DecisionKind::kSteer;
  out.target = best.x;
  out.objective = best.r.value;
  out.region = best.r.argmax;
  out.trajectory = steer_step(x0, t_k, t_k1, best.x, specials, special_switch, q);
  return out;
}

//==============================================================================
Trajectory constant_step(
  State x0, double t_k, double t_k1, double accel, const AgentParams& q)
{
  const Segment s{t_k1 - t_k, accel};
  return make_trajectory(t_k, x0, std::span<const Segment>(&s, 1), q, TerminalRule::kHold);
}

namespace {

bool acc_robustly_safe(State x0, double t_k, const BoundsSummary& info, const AgentParams& q)
{
  const Passage acc = acc_passage(x0, t_k, q);
  const TimeWindow W = occupied_window(info);
  return !open_overlap(acc.t_in, acc.t_out, W.lo, W.hi);
}

} // anonymous namespace

Trajectory queueing_step(
  State x0, double t_k, double t_k1, const UncertaintySet& I_k,
  const AgentParams& q, double d)
{
  return queueing_step(x0, t_k, t_k1, summarize_bounds(I_k, t_k), q, d);
}

Trajectory queueing_step(
  State x0, double t_k, double t_k1, const BoundsSummary& info,
  const AgentParams& q, double d)
{
  if (acc_robustly_safe(x0, t_k, info, q))
    return constant_step(x0, t_k, t_k1, q.a_acc, q);
  const State next = clipped_step(x0, q.a_acc, t_k1 - t_k, q);
  const double stop = next.p + next.v*next.v/(2.0*q.a_dec);
  return constant_step(x0, t_k, t_k1, stop < -d ? q.a_acc : -q.a_dec, q);
}

double min_braking_gap(
  State x0, double t0, State x1, double t1, double t_from,
  const AgentParams& q0, const AgentParams& q1)
{
  const double T0 = t0 + x0.v/q0.a_dec;
  const double T1 = t1 + x1.v/q1.a_dec;
  const auto pos = [](State x, double ts, double a, double t_stop, double t)
  {
    const double tau = std::max(0.0, std::min(t, t_stop) - ts);
    return x.p + x.v*tau - 0.5*a*tau*tau;
  };
  const auto gap = [&](double t)
  {
    return pos(x1, t1, q1.a_dec, T1, t) - pos(x0, t0, q0.a_dec, T0, t);
  };

  // Stationary point while both are still braking.
  const double da = q0.a_dec - q1.a_dec;
  const double t_flat = da != 0.0 ? (x0.v - x1.v + q0.a_dec*t0 - q1.a_dec*t1)/da : t_from;
  double m = kNever;
  for (double t : {t_from, T0, T1, t_flat})
    m = std::min(m, gap(std::max(t, t_from)));
  return m;
}

Trajectory following_step(
  State x0, double t_k, double t_k1, const UncertaintySet& I_k,
  const std::optional<Observation>& obs1, const AgentParams& q0,
  const AgentParams& q1, double d)
{
  return following_step(x0, t_k, t_k1, summarize_bounds(I_k, t_k), obs1, q0, q1, d);
}

Trajectory following_step(
  State x0, double t_k, double t_k1, const BoundsSummary& info,
  const std::optional<Observation>& obs1, const AgentParams& q0,
  const AgentParams& q1, double d)
{
  if (acc_robustly_safe(x0, t_k, info, q0))
    return constant_step(x0, t_k, t_k1, q0.a_acc, q0);
  if (!obs1)
    return constant_step(x0, t_k, t_k1, -q0.a_dec, q0);
  const State next = clipped_step(x0, q0.a_acc, t_k1 - t_k, q0);
  const double g = min_braking_gap(
    next, t_k1, obs1->state, obs1->time, std::max(t_k1, obs1->time), q0, q1);
  return constant_step(x0, t_k, t_k1, g > q1.length + d ? q0.a_acc : -q0.a_dec, q0);
}

} // namespace mmsched
