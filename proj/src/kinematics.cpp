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

#include <mmsched/kinematics.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mmsched {

namespace {

constexpr int kMaxBisect = 200;
constexpr double kAccelSlack = 1e-12;

// Time within a constant-acceleration piece at which p first gets to level.
// The caller guarantees that the level is reached inside the piece.
double time_to_level(double p, double v, double a, double level)
{
  const double c = level - p;
  if (c <= 0.0)
    return 0.0;
  const double disc = std::max(0.0, v*v + 2.0*a*c);
  const double denom = v + std::sqrt(disc);
  if (denom <= 0.0)
    return kNever;
  return 2.0*c/denom;
}

State integrate(State x, double accel, double dt)
{
  return State{
    x.p + x.v*dt + 0.5*accel*dt*dt,
    std::max(0.0, x.v + accel*dt)};
}

template<typename It>
double crossing(State x, It begin, It end, double level, bool strict)
{
  const auto passed = [&](double p) { return strict ? p > level : p >= level; };
  if (passed(x.p))
    return 0.0;

  double t = 0.0;
  for (It it = begin; it != end; ++it)
  {
    const double d = it->duration;
    const double a = it->accel;
    const double p_end = x.p + x.v*d + 0.5*a*d*d;
    if (passed(p_end))
      return t + std::min(d, time_to_level(x.p, x.v, a, level));
    x = integrate(x, a, d);
    t += d;
  }

  if (x.v <= 0.0)
    return kNever;
  return t + (level - x.p)/x.v;
}

struct Reach
{
  double t;
  double v;
};

// Time and speed after covering dist >= 0 under full acceleration.
Reach acc_reach(double v, double dist, const AgentParams& q)
{
  const double d_sat = (q.v_max*q.v_max - v*v)/(2.0*q.a_acc);
  if (dist <= d_sat)
  {
    const double vv = std::sqrt(v*v + 2.0*q.a_acc*dist);
    const double s = v + vv;
    return Reach{s > 0.0 ? 2.0*dist/s : 0.0, vv};
  }
  return Reach{(q.v_max - v)/q.a_acc + (dist - d_sat)/q.v_max, q.v_max};
}

double dec_acc_entry_rel(State x, double s, const AgentParams& q)
{
  return detail::plan_crossing(x, detail::dec_acc_plan(x, s, q), 0.0, true);
}

double acc_dec_entry_rel(State x, double s, const AgentParams& q)
{
  return detail::plan_crossing(x, detail::acc_dec_plan(x, s, q), 0.0, true);
}

} // anonymous namespace

//==============================================================================
void AgentParams::validate() const
{
  const auto check = [](double value, const char* name)
  {
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument(
        std::string("agent parameter '") + name + "' must be positive");
  };
  check(v_max, "v_max");
  check(a_dec, "a_dec");
  check(a_acc, "a_acc");
  check(length, "length");
}

//==============================================================================
Trajectory::Trajectory(double start_time, State start, std::vector<Segment> segments)
: segments_(std::move(segments)),
  times_(),
  knots_()
{
  times_.reserve(segments_.size() + 1);
  knots_.reserve(segments_.size() + 1);
  times_.push_back(start_time);
  knots_.push_back(start);
  for (const auto& s : segments_)
  {
    if (!(s.duration >= 0.0))
      throw std::invalid_argument("segment duration must be non-negative");
    knots_.push_back(integrate(knots_.back(), s.accel, s.duration));
    times_.push_back(times_.back() + s.duration);
  }
}

State Trajectory::state_at(double t) const
{
  if (t < times_.front() - 1e-12)
    throw std::domain_error("trajectory queried before its start time");
  if (t >= times_.back())
  {
    const State& e = knots_.back();
    return State{e.p + e.v*(t - times_.back()), e.v};
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = std::max<std::ptrdiff_t>(0, it - times_.begin() - 1);
  return integrate(knots_[i], segments_[i].accel, std::max(0.0, t - times_[i]));
}

double Trajectory::accel_at(double t) const
{
  if (t < times_.front() || t >= times_.back())
    return 0.0;
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return segments_[static_cast<std::size_t>(it - times_.begin() - 1)].accel;
}

double Trajectory::first_above(double level) const
{
  return start_time() +
    crossing(start_state(), segments_.begin(), segments_.end(), level, true);
}

double Trajectory::first_reach(double level) const
{
  return start_time() +
    crossing(start_state(), segments_.begin(), segments_.end(), level, false);
}

Trajectory Trajectory::prefix(double t_end) const
{
  std::vector<Segment> out;
  double t = start_time();
  for (const auto& s : segments_)
  {
    if (t >= t_end)
      break;
    const double d = std::min(s.duration, t_end - t);
    out.push_back(Segment{d, s.accel});
    t += d;
  }
  if (t < t_end)
    out.push_back(Segment{t_end - t, 0.0});
  return Trajectory(start_time(), start_state(), std::move(out));
}

void Trajectory::append(const Trajectory& tail)
{
  const double gap = std::abs(tail.start_time() - end_time());
  const State a = end_state();
  const State b = tail.start_state();
  if (gap > 1e-9*std::max(1.0, std::abs(end_time())) ||
    std::abs(a.p - b.p) > 1e-6 || std::abs(a.v - b.v) > 1e-6)
    throw std::invalid_argument("appended trajectory is not continuous");

  for (const auto& s : tail.segments())
  {
    segments_.push_back(s);
    knots_.push_back(integrate(knots_.back(), s.accel, s.duration));
    times_.push_back(times_.back() + s.duration);
  }
}

//==============================================================================
Trajectory make_trajectory(
  double t0, State x, std::span<const Segment> controls,
  const AgentParams& q, TerminalRule rule)
{
  std::vector<Segment> out;
  out.reserve(controls.size() + 2);
  State s = x;
  const auto emit = [&](double d, double a)
  {
    if (d <= 0.0)
      return;
    out.push_back(Segment{d, a});
    s = integrate(s, a, d);
  };

  for (const auto& c : controls)
  {
    if (!(c.duration >= 0.0))
      throw std::invalid_argument("control duration must be non-negative");
    if (c.accel < -q.a_dec - kAccelSlack || c.accel > q.a_acc + kAccelSlack)
      throw std::invalid_argument("control acceleration outside bounds");

    if (c.accel > 0.0)
    {
      const double t_hit = std::max(0.0, (q.v_max - s.v)/c.accel);
      if (t_hit < c.duration)
      {
        emit(t_hit, c.accel);
        s.v = q.v_max;
        emit(c.duration - t_hit, 0.0);
        continue;
      }
    }
    else if (c.accel < 0.0)
    {
      const double t_hit = s.v/(-c.accel);
      if (t_hit < c.duration)
      {
        emit(t_hit, c.accel);
        s.v = 0.0;
        emit(c.duration - t_hit, 0.0);
        continue;
      }
    }
    emit(c.duration, c.accel);
  }

  if (rule == TerminalRule::kSaturateAcc && s.v < q.v_max)
    emit((q.v_max - s.v)/q.a_acc, q.a_acc);
  else if (rule == TerminalRule::kSaturateDec && s.v > 0.0)
    emit(s.v/q.a_dec, -q.a_dec);

  return Trajectory(t0, x, std::move(out));
}

Trajectory acc_trajectory(State x, double t0, const AgentParams& q)
{
  return make_trajectory(t0, x, {}, q, TerminalRule::kSaturateAcc);
}

Trajectory dec_trajectory(State x, double t0, const AgentParams& q)
{
  return make_trajectory(t0, x, {}, q, TerminalRule::kSaturateDec);
}

Trajectory dec_acc_trajectory(
  State x, double t0, double t_switch, const AgentParams& q)
{
  const Segment c{std::max(0.0, t_switch - t0), -q.a_dec};
  return make_trajectory(t0, x, {&c, 1}, q, TerminalRule::kSaturateAcc);
}

Trajectory acc_dec_trajectory(
  State x, double t0, double t_switch, const AgentParams& q)
{
  if (!is_finite(t_switch))
    return acc_trajectory(x, t0, q);
  const Segment c{std::max(0.0, t_switch - t0), q.a_acc};
  return make_trajectory(t0, x, {&c, 1}, q, TerminalRule::kSaturateDec);
}

OccupationWindow entry_exit(const Trajectory& traj, double length)
{
  OccupationWindow w;
  w.t_in = traj.first_above(0.0);
  w.t_out = traj.first_reach(length);
  if (is_finite(w.t_in))
    w.v_in = traj.state_at(w.t_in).v;
  return w;
}

bool can_stop_before(State x, const AgentParams& q)
{
  return x.p + x.v*x.v/(2.0*q.a_dec) <= 0.0;
}

State clipped_step(State x, double accel, double dt, const AgentParams& q)
{
  if (dt <= 0.0)
    return x;
  if (accel > 0.0)
  {
    const double t_hit = std::max(0.0, (q.v_max - x.v)/accel);
    if (t_hit < dt)
    {
      const State m = integrate(x, accel, t_hit);
      return State{m.p + q.v_max*(dt - t_hit), q.v_max};
    }
  }
  else if (accel < 0.0)
  {
    const double t_hit = x.v/(-accel);
    if (t_hit < dt)
      return State{x.p + x.v*t_hit + 0.5*accel*t_hit*t_hit, 0.0};
  }
  return integrate(x, accel, dt);
}

//==============================================================================
Passage acc_passage(State x, double t0, const AgentParams& q)
{
  Passage r;
  if (x.p > 0.0)
  {
    r.t_in = t0;
    r.v_in = x.v;
  }
  else
  {
    const Reach in = acc_reach(x.v, -x.p, q);
    r.t_in = t0 + in.t;
    r.v_in = in.v;
  }
  r.t_out = x.p >= q.length ? t0 : t0 + acc_reach(x.v, q.length - x.p, q).t;
  return r;
}

Passage dec_passage(State x, double t0, const AgentParams& q)
{
  Passage r;
  const double stop = x.p + x.v*x.v/(2.0*q.a_dec);
  if (x.p > 0.0)
  {
    r.t_in = t0;
    r.v_in = x.v;
  }
  else if (stop > 0.0)
  {
    const double c = -x.p;
    const double disc = std::max(0.0, x.v*x.v - 2.0*q.a_dec*c);
    r.t_in = t0 + (c > 0.0 ? 2.0*c/(x.v + std::sqrt(disc)) : 0.0);
    r.v_in = std::sqrt(disc);
  }

  if (x.p >= q.length)
    r.t_out = t0;
  else if (stop >= q.length)
  {
    const double c = q.length - x.p;
    const double disc = std::max(0.0, x.v*x.v - 2.0*q.a_dec*c);
    r.t_out = t0 + 2.0*c/(x.v + std::sqrt(disc));
  }
  return r;
}

//==============================================================================
namespace detail {

PhasePlan dec_acc_plan(State x, double s, const AgentParams& q)
{
  PhasePlan plan;
  const double t_stop = x.v/q.a_dec;
  const double td = std::min(s, t_stop);
  plan.push(td, -q.a_dec);
  const double v1 = td >= t_stop ? 0.0 : x.v - q.a_dec*td;
  plan.push(s - td, 0.0);
  plan.push((q.v_max - v1)/q.a_acc, q.a_acc);
  return plan;
}

PhasePlan acc_dec_plan(State x, double s, const AgentParams& q)
{
  PhasePlan plan;
  const double t_sat = (q.v_max - x.v)/q.a_acc;
  if (!is_finite(s))
  {
    plan.push(t_sat, q.a_acc);
    return plan;
  }
  const double ta = std::min(s, t_sat);
  plan.push(ta, q.a_acc);
  const double v1 = ta >= t_sat ? q.v_max : x.v + q.a_acc*ta;
  plan.push(s - ta, 0.0);
  plan.push(v1/q.a_dec, -q.a_dec);
  return plan;
}

double plan_crossing(State x, const PhasePlan& plan, double level, bool strict)
{
  return crossing(x, plan.items, plan.items + plan.size, level, strict);
}

State plan_state(State x, const PhasePlan& plan, double dt)
{
  for (int i = 0; i < plan.size && dt > 0.0; ++i)
  {
    const double d = std::min(dt, plan.items[i].duration);
    x = integrate(x, plan.items[i].accel, d);
    dt -= d;
  }
  if (dt > 0.0)
    x.p += x.v*dt;
  return x;
}

double dec_acc_entry_bisect(
  State x, double target_rel, double s_hi, const AgentParams& q)
{
  double lo = 0.0;
  double hi = s_hi;
  int i = 0;
  for (; i < kMaxBisect; ++i)
  {
    if (hi - lo <= 1e-14*std::max(1.0, hi))
      break;
    const double mid = 0.5*(lo + hi);
    if (dec_acc_entry_rel(x, mid, q) >= target_rel)
      hi = mid;
    else
      lo = mid;
  }
  if (i == kMaxBisect)
    throw std::logic_error("bisection cap reached: entry time not monotone");
  return hi;
}

} // namespace detail

//==============================================================================
std::optional<DecAccEntry> dec_acc_entry(
  State x, double t0, double target_t_in, const AgentParams& q)
{
  const double T = target_t_in - t0;
  const double tol = 1e-9*std::max(1.0, std::abs(T));
  const Passage acc = acc_passage(x, 0.0, q);
  if (T < acc.t_in - tol)
    return std::nullopt;
  if (T <= acc.t_in)
    return DecAccEntry{t0, acc.v_in};

  const Passage dec = dec_passage(x, 0.0, q);
  if (T > dec.t_in + tol)
    return std::nullopt;

  const double aa = q.a_acc;
  const double ad = q.a_dec;
  const double vm = q.v_max;
  const double t_stop = x.v/ad;
  const double stop = x.p + x.v*x.v/(2.0*ad);

  double best = kNever;
  double best_v = 0.0;
  const auto consider = [&](double s, double v_in)
  {
    if (!(s >= -tol) || s >= best)
      return;
    s = std::max(0.0, s);
    if (std::abs(dec_acc_entry_rel(x, s, q) - T) <= 1e-8*std::max(1.0, T))
    {
      best = s;
      best_v = v_in;
    }
  };

  // Still moving at the switch, entry before reaching v_max.
  {
    const double K = (2.0*x.v*T + aa*T*T + 2.0*x.p)/(aa + ad);
    const double disc = T*T - K;
    if (disc >= -tol)
    {
      const double root = std::sqrt(std::max(0.0, disc));
      const double s = T + root > 0.0 ? K/(T + root) : 0.0;
      if (s <= t_stop + tol)
      {
        const double sc = std::clamp(s, 0.0, t_stop);
        const double v1 = x.v - ad*sc;
        const double v_in = v1 + aa*(T - sc);
        if (v_in <= vm + 1e-9)
          consider(sc, std::min(v_in, vm));
      }
    }
  }

  // Still moving at the switch, v_max reached before entry.
  {
    const double w = vm - x.v;
    const double alpha = ad*(ad + aa)/(2.0*aa);
    const double beta = w*(1.0 + ad/aa);
    const double gamma = w*w/(2.0*aa) - x.p - vm*T;
    const double disc = beta*beta - 4.0*alpha*gamma;
    if (disc >= 0.0)
    {
      const double denom = beta + std::sqrt(disc);
      const double s = denom > 0.0 ? -2.0*gamma/denom : 0.0;
      if (s <= t_stop + tol)
      {
        const double sc = std::clamp(s, 0.0, t_stop);
        const double v1 = x.v - ad*sc;
        const double p1 = x.p + x.v*sc - 0.5*ad*sc*sc;
        if (-p1 >= (vm*vm - v1*v1)/(2.0*aa) - 1e-9)
          consider(sc, vm);
      }
    }
  }

  // Full stop, wait, then go.
  if (stop <= 0.0)
  {
    const Reach r = acc_reach(0.0, -stop, q);
    const double s = T - r.t;
    if (s >= t_stop - tol)
      consider(std::max(s, t_stop), r.v);
  }

  if (is_finite(best))
    return DecAccEntry{t0 + best, best_v};

  const double s_hi = is_finite(dec.t_in) ? dec.t_in : T;
  const double s = detail::dec_acc_entry_bisect(x, T, s_hi, q);
  const detail::PhasePlan plan = detail::dec_acc_plan(x, s, q);
  const double t_in = detail::plan_crossing(x, plan, 0.0, true);
  if (std::abs(t_in - T) > 1e-7*std::max(1.0, T))
    return std::nullopt;
  return DecAccEntry{t0 + s, detail::plan_state(x, plan, t_in).v};
}

std::optional<double> acc_dec_switch_for_entry(
  State x, double t0, double target_t_in, const AgentParams& q)
{
  const double T = target_t_in - t0;
  const double tol = 1e-9*std::max(1.0, std::abs(T));
  const Passage acc = acc_passage(x, 0.0, q);
  if (T < acc.t_in - tol)
    return std::nullopt;
  if (T <= acc.t_in)
    return t0 + acc.t_in;

  const Passage dec = dec_passage(x, 0.0, q);
  if (T > dec.t_in + tol)
  {
    if (is_finite(dec.t_in))
      return std::nullopt;
  }
  else if (T >= dec.t_in)
    return t0;

  // Entering at T after braking for tau solves a quadratic in tau, with or
  // without a hold at v_max before the switch. Only candidates that miss
  // their validity conditions narrowly are left to the bisection below.
  {
    const double a = q.a_acc, d = q.a_dec;
    double miss = kNever;
    const double r1 = 2.0*(x.p + x.v*T + 0.5*a*T*T)/(a + d);
    if (r1 >= 0.0)
    {
      const double tau = std::sqrt(r1);
      const double sw = T - tau;
      const double v_sw = x.v + a*sw;
      const double m = std::max({-sw, v_sw - q.v_max, tau*d - v_sw});
      if (m <= 0.0 && std::abs(acc_dec_entry_rel(x, sw, q) - T) <= tol)
        return t0 + sw;
      miss = std::min(miss, m);
    }
    const double s_a = (q.v_max - x.v)/a;
    const double p_a = x.p + x.v*s_a + 0.5*a*s_a*s_a;
    const double r2 = 2.0*(p_a + q.v_max*(T - s_a))/d;
    if (r2 >= 0.0)
    {
      const double tau = std::sqrt(r2);
      const double sw = T - tau;
      const double m = std::max(s_a - sw, tau*d - q.v_max);
      if (m <= 0.0 && std::abs(acc_dec_entry_rel(x, sw, q) - T) <= tol)
        return t0 + sw;
      miss = std::min(miss, m);
    }
    if (miss > 1e-6*std::max(1.0, T))
      return std::nullopt;
  }

  // Entry time is non-increasing in the switch; find the smallest switch
  // whose entry is no later than T.
  double lo = 0.0;
  double hi = acc.t_in;
  int i = 0;
  for (; i < kMaxBisect; ++i)
  {
    if (hi - lo <= 1e-14*std::max(1.0, hi))
      break;
    const double mid = 0.5*(lo + hi);
    if (acc_dec_entry_rel(x, mid, q) <= T)
      hi = mid;
    else
      lo = mid;
  }
  if (i == kMaxBisect)
    throw std::logic_error("bisection cap reached: entry time not monotone");

  if (std::abs(acc_dec_entry_rel(x, hi, q) - T) > 1e-7*std::max(1.0, T))
    return std::nullopt;
  return t0 + hi;
}

std::optional<Trajectory> dec_acc_for_entry(
  State x, double t0, double target_t_in, const AgentParams& q)
{
  const auto e = dec_acc_entry(x, t0, target_t_in, q);
  if (!e)
    return std::nullopt;
  return dec_acc_trajectory(x, t0, e->t_switch, q);
}

std::optional<Trajectory> acc_dec_for_entry(
  State x, double t0, double target_t_in, const AgentParams& q)
{
  const auto s = acc_dec_switch_for_entry(x, t0, target_t_in, q);
  if (!s)
    return std::nullopt;
  return acc_dec_trajectory(x, t0, *s, q);
}

} // namespace mmsched
