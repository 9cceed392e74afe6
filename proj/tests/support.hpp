// Shared helpers for the test binaries.

#ifndef MMSCHED__TESTS__SUPPORT_HPP
#define MMSCHED__TESTS__SUPPORT_HPP

#include <mmsched/kinematics.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace mmsched::test {

inline AgentParams nominal_params()
{
  return AgentParams{20.0, 4.0, 3.0, 5.0};
}

class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi)
  {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  int integer(int lo, int hi)
  {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

inline std::vector<Segment> random_controls(Rng& rng, const AgentParams& q,
  int max_segments = 6, double max_duration = 4.0)
{
  std::vector<Segment> c;
  const int n = rng.integer(1, max_segments);
  for (int i = 0; i < n; ++i)
    c.push_back({rng.uniform(0.05, max_duration), rng.uniform(-q.a_dec, q.a_acc)});
  return c;
}

/// Random bounded trajectory that eventually reaches v_max and passes.
inline Trajectory random_trajectory(Rng& rng, const AgentParams& q, State x,
  double t0 = 0.0)
{
  const auto c = random_controls(rng, q);
  return make_trajectory(t0, x, c, q, TerminalRule::kSaturateAcc);
}

/// Velocity as a piecewise-linear function sampled at the segment knots.
inline double velocity(const Trajectory& tr, double t)
{
  return tr.state_at(t).v;
}

/// Pointwise max of two velocity profiles from the same start state.
inline Trajectory pointwise_max(const Trajectory& a, const Trajectory& b)
{
  std::vector<double> ts{a.start_time()};
  for (const auto* tr : {&a, &b})
  {
    double t = tr->start_time();
    for (const auto& s : tr->segments())
      ts.push_back(t += s.duration);
  }
  ts.push_back(std::max(a.end_time(), b.end_time()) + 1.0);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  std::vector<double> knots{ts.front()};
  for (std::size_t i = 0; i + 1 < ts.size(); ++i)
  {
    const double t0 = ts[i], t1 = ts[i + 1];
    const double d0 = velocity(a, t0) - velocity(b, t0);
    const double d1 = velocity(a, t1) - velocity(b, t1);
    if (d0*d1 < 0.0)
      knots.push_back(t0 + (t1 - t0)*d0/(d0 - d1));
    knots.push_back(t1);
  }

  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
  {
    const double t0 = knots[i], t1 = knots[i + 1];
    if (t1 - t0 <= 1e-12)
      continue;
    const double v0 = std::max(velocity(a, t0), velocity(b, t0));
    const double v1 = std::max(velocity(a, t1), velocity(b, t1));
    segs.push_back({t1 - t0, (v1 - v0)/(t1 - t0)});
  }
  return Trajectory(a.start_time(), a.start_state(), segs);
}

/// Fine-step forward integration of raw controls with velocity clipping.
/// Independent of the closed-form crossing code: finds crossings by
/// stepping and then bisecting within the step.
struct NumericCrossing
{
  double t_in = kNever;
  double t_out = kNever;
};

inline NumericCrossing numeric_crossing(State x, double t0,
  const std::vector<Segment>& controls, const AgentParams& q, double length,
  double t_max)
{
  const auto accel_at = [&](double t) -> double
  {
    double s = t0;
    for (const auto& c : controls)
    {
      if (t < s + c.duration)
        return c.accel;
      s += c.duration;
    }
    return q.a_acc;
  };

  const auto next_boundary = [&](double t)
  {
    double s = t0;
    for (const auto& c : controls)
    {
      s += c.duration;
      if (s > t + 1e-15)
        return s;
    }
    return kNever;
  };

  const auto step = [&](State s, double t, double h)
  {
    const double end = t + h;
    while (t < end)
    {
      const double dt = std::min({1e-4, end - t, next_boundary(t) - t});
      const double a = accel_at(t + 0.5*dt);
      double v1 = s.v + a*dt;
      double dp;
      if (v1 > q.v_max)
      {
        const double th = (q.v_max - s.v)/a;
        dp = s.v*th + 0.5*a*th*th + q.v_max*(dt - th);
        v1 = q.v_max;
      }
      else if (v1 < 0.0)
      {
        const double th = s.v/(-a);
        dp = s.v*th + 0.5*a*th*th;
        v1 = 0.0;
      }
      else
        dp = s.v*dt + 0.5*a*dt*dt;
      s = State{s.p + dp, v1};
      t += dt;
    }
    return s;
  };

  const auto refine = [&](State s, double t, double h, auto passed)
  {
    double lo = 0.0, hi = h;
    for (int i = 0; i < 60; ++i)
    {
      const double mid = 0.5*(lo + hi);
      if (passed(step(s, t, mid).p))
        hi = mid;
      else
        lo = mid;
    }
    return t + hi;
  };

  NumericCrossing out;
  const double h = 1e-2;
  State s = x;
  double t = t0;
  const auto above0 = [](double p) { return p > 0.0; };
  const auto reachL = [&](double p) { return p >= length; };
  if (above0(s.p))
    out.t_in = t;
  if (reachL(s.p))
    out.t_out = t;
  while (t < t_max && !is_finite(out.t_out))
  {
    const State n = step(s, t, h);
    if (!is_finite(out.t_in) && above0(n.p))
      out.t_in = refine(s, t, h, above0);
    if (reachL(n.p))
      out.t_out = refine(s, t, h, reachL);
    s = n;
    t += h;
  }
  return out;
}

} // namespace mmsched::test

#endif
