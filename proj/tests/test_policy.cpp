#include <doctest.h>

#include <mmsched/policy.hpp>

#include "support.hpp"

#include <cmath>
#include <stdexcept>

using namespace mmsched;
using mmsched::test::nominal_params;
using mmsched::test::Rng;

namespace {

const double kHorizon = 200.0;

UncertaintySet window_set(double t_cur, double u, double o)
{
  return rectify({{u, o}}, t_cur, 1000.0, 0.25);
}

// End state of piecewise-constant controls, integrated with small steps.
State integrate(State x, const std::vector<Segment>& c, const AgentParams& q)
{
  const int sub = 200;
  for (const auto& s : c)
  {
    const double h = s.duration/sub;
    for (int i = 0; i < sub; ++i)
    {
      double a = s.accel;
      if (x.v + a*h > q.v_max)
        a = (q.v_max - x.v)/h;
      if (x.v + a*h < 0.0)
        a = -x.v/h;
      x.p += x.v*h + 0.5*a*h*h;
      x.v += a*h;
    }
  }
  return x;
}

struct Instance
{
  State x0;
  double t_k;
  double t_k1;
  UncertaintySet I;
};

// Random decision instance with a finite value at x0.
std::optional<Instance> random_instance(Rng& rng, const AgentParams& q, int knots)
{
  const State x0{rng.uniform(-150.0, -5.0), rng.uniform(0.0, 20.0)};
  const State x1{rng.uniform(-120.0, -1.0), rng.uniform(0.0, 20.0)};
  const double t_obs = rng.uniform(0.0, 1.0);
  const double t_k = t_obs + rng.uniform(0.0, 0.5);
  const double t_k1 = t_k + rng.uniform(0.01, 0.3);
  auto I = from_observation(x1, t_obs, t_k, q, kHorizon, knots);
  if (!window_value(x0, t_k, occupied_window(I), q).finite())
    return std::nullopt;
  return Instance{x0, t_k, t_k1, std::move(I)};
}

} // anonymous namespace

TEST_CASE("feasible region is a thin slab for a short step")
{
  const auto q = nominal_params();
  const FeasibleRegion F(State{-200.0, 15.0}, 0.0, 0.01, q);
  REQUIRE_FALSE(F.empty());
  CHECK(F.v_lo() == doctest::Approx(14.96).epsilon(1e-12));
  CHECK(F.v_hi() == doctest::Approx(15.03).epsilon(1e-12));
  CHECK(F.p_min(F.v_lo()) == doctest::Approx(-199.8502).epsilon(1e-12));
  CHECK(F.p_max(F.v_hi()) == doctest::Approx(-199.84985).epsilon(1e-12));
  for (int i = 0; i <= 20; ++i)
  {
    const double v = F.v_lo() + (F.v_hi() - F.v_lo())*i/20.0;
    CHECK(F.p_min(v) <= F.p_max(v) + 1e-12);
  }
}

TEST_CASE("feasible region degenerates for a zero step")
{
  const auto q = nominal_params();
  const State x0{-40.0, 12.0};
  const FeasibleRegion F(x0, 3.0, 3.0, q);
  CHECK(F.v_lo() == x0.v);
  CHECK(F.v_hi() == x0.v);
  CHECK(F.p_min(x0.v) == x0.p);
  CHECK(F.p_max(x0.v) == x0.p);
  CHECK(F.contains(x0));
  CHECK_FALSE(F.contains({x0.p + 1e-3, x0.v}));
}

TEST_CASE("feasible region near the resource is clipped at p = 0")
{
  const auto q = nominal_params();
  const FeasibleRegion F(State{-0.1, 10.0}, 0.0, 0.01, q);
  REQUIRE_FALSE(F.empty());
  CHECK(F.acc_end().p > 0.0);
  CHECK(F.v_hi() < F.acc_end().v);
  CHECK(F.p_min(F.v_hi()) == doctest::Approx(0.0).epsilon(1e-9));
  for (int i = 0; i <= 20; ++i)
  {
    const double v = F.v_lo() + (F.v_hi() - F.v_lo())*i/20.0;
    CHECK(F.p_max(v) <= 0.0);
  }

  // Too close: even braking enters during the step.
  CHECK(FeasibleRegion(State{-0.05, 10.0}, 0.0, 0.01, q).empty());
}

TEST_CASE("feasible region contains every sampled control outcome")
{
  const auto q = nominal_params();
  Rng rng(11);
  int inside = 0;
  for (int k = 0; k < 400; ++k)
  {
    const State x0{rng.uniform(-60.0, -1.0), rng.uniform(0.0, 20.0)};
    const double dt = rng.uniform(0.01, 1.5);
    const FeasibleRegion F(x0, 0.0, dt, q);
    std::vector<Segment> c;
    const int n = rng.integer(1, 4);
    for (int i = 0; i < n; ++i)
      c.push_back({dt/n, rng.uniform(-q.a_dec, q.a_acc)});
    const State x = integrate(x0, c, q);
    if (x.p > 0.0)
      continue;
    ++inside;
    CHECK(F.contains(x, 1e-6));
  }
  CHECK(inside > 200);
}

TEST_CASE("steer_to reaches random targets")
{
  const auto q = nominal_params();
  Rng rng(5);
  for (int k = 0; k < 1000; ++k)
  {
    const State x0{rng.uniform(-100.0, -1.0), rng.uniform(0.0, 20.0)};
    const double t_k = rng.uniform(0.0, 10.0);
    const double t_k1 = t_k + rng.uniform(0.01, 1.0);
    const FeasibleRegion F(x0, t_k, t_k1, q);
    if (F.empty())
      continue;
    const double v = rng.uniform(F.v_lo(), F.v_hi());
    const double p = rng.uniform(F.p_min(v), F.p_max(v));
    const auto tr = steer_to(x0, t_k, t_k1, {p, v}, q);
    const State end = tr.state_at(t_k1);
    CHECK(std::abs(end.p - p) < 1e-7);
    CHECK(std::abs(end.v - v) < 1e-7);
    for (const auto& s : tr.segments())
    {
      CHECK(s.accel >= -q.a_dec);
      CHECK(s.accel <= q.a_acc);
    }
  }
}

TEST_CASE("steer_to returns the family extremes on the boundary")
{
  const auto q = nominal_params();
  const State x0{-80.0, 10.0};
  const double dt = 2.0;
  const FeasibleRegion F(x0, 0.0, dt, q);
  const double v = 13.0;

  const auto check_same = [&](const detail::PhasePlan& plan, double p)
  {
    const auto tr = steer_to(x0, 0.0, dt, {p, v}, q);
    for (int i = 0; i <= 10; ++i)
    {
      const double t = dt*i/10.0;
      const State a = tr.state_at(t);
      const State b = detail::plan_state(x0, plan, t);
      CHECK(a.p == doctest::Approx(b.p).epsilon(1e-9));
      CHECK(a.v == doctest::Approx(b.v).epsilon(1e-9));
    }
  };

  // Switch offsets solved by hand for v = 13 over 2 s.
  check_same(detail::acc_dec_plan(x0, (v - x0.v + q.a_dec*dt)/(q.a_acc + q.a_dec), q), F.p_max(v));
  check_same(detail::dec_acc_plan(x0, (x0.v + q.a_acc*dt - v)/(q.a_acc + q.a_dec), q), F.p_min(v));
}

TEST_CASE("steer_to rejects unreachable targets")
{
  const auto q = nominal_params();
  const State x0{-80.0, 10.0};
  CHECK_THROWS_AS(steer_to(x0, 0.0, 1.0, {-80.0, 10.0}, q), std::invalid_argument);
  CHECK_THROWS_AS(steer_to(x0, 0.0, 1.0, {-70.0, 20.0}, q), std::invalid_argument);
  CHECK_THROWS_AS(steer_to(x0, 0.0, 1.0, {-70.0, 5.0}, q), std::invalid_argument);
}

TEST_CASE("can_commit examples")
{
  const auto q = nominal_params();

  // Window already closed: the Acc trajectory commits once it enters in time.
  const auto clear = window_set(0.0, 0.0, 0.0);
  REQUIRE(occupied_window(clear).empty());
  const auto acc = can_commit({-1.0, 15.0}, 0.0, 0.1, clear, q);
  REQUIRE(acc);
  CHECK(acc->segments().front().accel == doctest::Approx(q.a_acc));
  // 15 t + 1.5 t^2 = 1
  CHECK(entry_exit(*acc, q.length).t_in == doctest::Approx((-15.0 + std::sqrt(231.0))/3.0));

  CHECK_FALSE(can_commit({-200.0, 15.0}, 0.0, 0.1, clear, q));

  // The witness waits for the window and enters after t_k1.
  CHECK_FALSE(can_commit({-1.0, 20.0}, 0.0, 0.1, window_set(0.0, 0.0, 10.1), q));
}

TEST_CASE("committed witnesses avoid the window and enter by t_k1")
{
  const auto q = nominal_params();
  Rng rng(23);
  int commits = 0;
  for (int k = 0; k < 2000; ++k)
  {
    const State x0{rng.uniform(-30.0, -0.5), rng.uniform(0.0, 20.0)};
    const double t_k = rng.uniform(0.0, 2.0);
    const double t_k1 = t_k + rng.uniform(0.01, 3.0);
    const double u = t_k + rng.uniform(0.0, 3.0);
    const auto I = window_set(t_k, u, u + rng.uniform(0.0, 3.0));
    const auto c = can_commit(x0, t_k, t_k1, I, q);
    if (!c)
      continue;
    ++commits;
    const auto w = entry_exit(*c, q.length);
    const auto W = occupied_window(I);
    CHECK(w.t_in <= t_k1);
    CHECK_FALSE(open_overlap(w.t_in, w.t_out, W.lo, W.hi));
  }
  CHECK(commits > 100);
}

TEST_CASE("decide keeps the value finite and beats both extremes")
{
  const auto q = nominal_params();
  Rng rng(31);
  int steers = 0;
  for (int k = 0; k < 400; ++k)
  {
    const auto inst = random_instance(rng, q, 3);
    if (!inst)
      continue;
    const auto& [x0, t_k, t_k1, I] = *inst;
    const auto d = decide(x0, t_k, t_k1, I, q, GridSpec{16, 16, 4, true});
    REQUIRE(d.kind != DecisionKind::kFallback);
    if (d.kind == DecisionKind::kCommit)
      continue;
    ++steers;

    const State end = d.trajectory.state_at(t_k1);
    CHECK(std::abs(end.p - d.target.p) < 1e-7);
    CHECK(std::abs(end.v - d.target.v) < 1e-7);

    const auto next = advance(I, t_k1);
    CHECK(window_value(d.target, t_k1, occupied_window(next), q).finite());
    CHECK(d.objective == doctest::Approx(v_max(d.target, t_k1, I, q).value));

    const FeasibleRegion F(x0, t_k, t_k1, q);
    const double tol = 1e-9*std::max(1.0, std::abs(d.objective));
    if (F.acc_end().p <= 0.0)
      CHECK(d.objective <= v_max(F.acc_end(), t_k1, I, q).value + tol);
    CHECK(d.objective <= v_max(F.dec_end(), t_k1, I, q).value + tol);
  }
  CHECK(steers > 100);
}

TEST_CASE("certified decisions match the grid optimum")
{
  const auto q = nominal_params();
  Rng rng(41);
  int certified = 0;
  for (int k = 0; k < 300; ++k)
  {
    const auto inst = random_instance(rng, q, 3);
    if (!inst)
      continue;
    const auto& [x0, t_k, t_k1, I] = *inst;
    const auto fast = decide(x0, t_k, t_k1, I, q, GridSpec{32, 32, 4, true});
    if (!fast.certified)
      continue;
    ++certified;
    const auto grid = decide(x0, t_k, t_k1, I, q, GridSpec{32, 32, 4, false});
    CHECK(fast.objective <= grid.objective + 1e-9*std::max(1.0, std::abs(grid.objective)));
  }
  CHECK(certified > 50);
}

TEST_CASE("grid resolution barely moves the objective")
{
  const auto q = nominal_params();
  Rng rng(53);
  int n = 0;
  while (n < 50)
  {
    const auto inst = random_instance(rng, q, 3);
    if (!inst)
      continue;
    const auto& [x0, t_k, t_k1, I] = *inst;
    const auto a = decide(x0, t_k, t_k1, I, q, GridSpec{64, 64, 8, false});
    if (a.kind != DecisionKind::kSteer)
      continue;
    ++n;
    const auto b = decide(x0, t_k, t_k1, I, q, GridSpec{128, 128, 8, false});
    CHECK(std::abs(a.objective - b.objective) < 0.5);
  }
}

TEST_CASE("decide in the crossing scenario steers at the start")
{
  const auto q = nominal_params();
  const auto I = from_observation({-160.0, 15.0}, 0.0, 0.0, q, kHorizon);
  const auto d = decide({-200.0, 15.0}, 0.0, 0.01, I, q);
  CHECK(d.kind == DecisionKind::kSteer);
  CHECK(is_finite(d.objective));
}

TEST_CASE("decide commits on Acc without the other agent")
{
  const auto q = nominal_params();
  const auto clear = window_set(0.0, 0.0, 0.0);
  State x{-30.0, 15.0};
  double t = 0.0;
  for (int k = 0; k < 1000; ++k, t += 0.01)
  {
    const auto d = decide(x, t, t + 0.01, advance(clear, t), q, GridSpec{8, 8, 2, true});
    REQUIRE(d.kind != DecisionKind::kFallback);
    if (d.kind == DecisionKind::kCommit)
    {
      CHECK(acc_passage(x, t, q).t_in <= t + 0.01);
      CHECK(entry_exit(d.trajectory, q.length).t_in
            == doctest::Approx(acc_passage({-30.0, 15.0}, 0.0, q).t_in).epsilon(1e-9));
      return;
    }
    CHECK(d.target.v == doctest::Approx(std::min(q.v_max, x.v + q.a_acc*0.01)));
    x = d.target;
  }
  FAIL("never committed");
}

TEST_CASE("queueing step examples")
{
  const auto q = nominal_params();
  const auto I = from_observation({-20.0, 10.0}, 0.0, 0.0, q, kHorizon);

  const auto far = queueing_step({-150.0, 10.0}, 0.0, 0.01, I, q, 5.0);
  CHECK(far.segments().front().accel == doctest::Approx(q.a_acc));

  const State stopped{-5.0, 0.0};
  const auto hold = queueing_step(stopped, 0.0, 0.01, I, q, 5.0);
  CHECK(hold.state_at(0.01).p == stopped.p);
  CHECK(hold.state_at(0.01).v == 0.0);

  const auto clear = window_set(0.0, 0.0, 0.0);
  const auto go = queueing_step(stopped, 0.0, 0.01, clear, q, 5.0);
  CHECK(go.state_at(0.01).v > 0.0);
}

TEST_CASE("following step examples")
{
  const auto q = nominal_params();
  const Observation ahead{0.0, {-60.0, 20.0}};
  const auto I = from_observation(ahead.state, 0.0, 0.0, q, kHorizon);
  const auto go = following_step({-100.0, 20.0}, 0.0, 0.01, I, ahead, q, q, 10.0);
  CHECK(go.state_at(0.01).v == doctest::Approx(20.0));
  CHECK(go.state_at(0.01).p > -100.0 + 0.2 - 1e-9);

  // Stopped just far enough ahead: the Acc step would break the gap.
  const Observation stopped{0.0, {-30.0, 0.0}};
  const auto J = from_observation(stopped.state, 0.0, 0.0, q, kHorizon);
  const double d = 10.0;
  const State x0{-30.0 - q.length - d - 1e-3, 0.5};
  const auto brake = following_step(x0, 0.0, 0.01, J, stopped, q, q, d);
  CHECK(brake.segments().front().accel == doctest::Approx(-q.a_dec));

  const auto blind = following_step({-100.0, 20.0}, 0.0, 0.01, I, std::nullopt, q, q, 10.0);
  CHECK(blind.segments().front().accel == doctest::Approx(-q.a_dec));
}

TEST_CASE("min_braking_gap matches a sampled minimum")
{
  const auto q0 = nominal_params();
  auto q1 = nominal_params();
  Rng rng(61);
  for (int k = 0; k < 500; ++k)
  {
    q1.a_dec = rng.uniform(1.0, 8.0);
    const State x0{rng.uniform(-100.0, -10.0), rng.uniform(0.0, 20.0)};
    const State x1{rng.uniform(-50.0, 0.0), rng.uniform(0.0, 20.0)};
    const double t0 = rng.uniform(0.0, 1.0), t1 = rng.uniform(0.0, 1.0);
    const double t_from = std::max(t0, t1);

    const auto brake = [](State x, double ts, double a, double t)
    {
      const double tau = std::min(std::max(0.0, t - ts), x.v/a);
      return x.p + x.v*tau - 0.5*a*tau*tau;
    };
    double m = kNever;
    for (int i = 0; i <= 20000; ++i)
    {
      const double t = t_from + 15.0*i/20000.0;
      m = std::min(m, brake(x1, t1, q1.a_dec, t) - brake(x0, t0, q0.a_dec, t));
    }
    const double g = min_braking_gap(x0, t0, x1, t1, t_from, q0, q1);
    CHECK(g <= m + 1e-9);
    CHECK(g >= m - 1e-4);
  }
}
