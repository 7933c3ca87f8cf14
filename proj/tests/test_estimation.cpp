#include <doctest.h>

#include <cmath>
#include <sstream>

#include "skilldyn/errors.hpp"
#include "skilldyn/equilibria.hpp"
#include "skilldyn/estimation.hpp"
#include "skilldyn/simulate.hpp"

using namespace skilldyn;
using doctest::Approx;

namespace {

SessionRecord manual(long t, double ell, double p, std::optional<double> theta = std::nullopt) {
  return {t, 0, ell, theta, 0.04, p, "Manual"};
}
SessionRecord delegated(long t, double p) { return {t, 1, std::nullopt, std::nullopt, 0.04, p, "Delegate"}; }

SessionLog worked_log(bool with_theta) {
  auto th = [&](double v) { return with_theta ? std::optional<double>(v) : std::nullopt; };
  return {manual(1, 0.36, 0.20, th(0.40)), manual(2, 0.25, 0.25, th(0.50)), delegated(3, 0.35),
          delegated(4, 0.45), manual(5, 0.30, 0.40, th(0.45))};
}

const char* kWorkedCsv =
    "t,decision,x,ell,ell_a,p\n"
    "1,Manual,0,0.36,0.04,0.20\n"
    "2,Manual,0,0.25,0.04,0.25\n"
    "3,Delegate,1,---,0.04,0.35\n"
    "4,Delegate,1,---,0.04,0.45\n"
    "5,Manual,0,0.30,0.04,0.40\n";

}  // namespace

TEST_CASE("worked example with assessed skills") {
  const auto est = estimate_all(worked_log(true));
  CHECK(est.theta_a == Approx(0.8));
  CHECK(est.eta == Approx(0.1 / 0.144));
  CHECK(est.kappa == Approx(0.05 / (est.eta * 0.2 * 0.8 * 0.32)));
  CHECK(est.kappa == Approx(1.41).epsilon(0.01));
  const double growth = est.eta * 0.5 * 0.25;
  CHECK(est.delta == Approx((growth + 0.05) / (2 * est.eta * 0.25 * 0.5)));
  CHECK(est.delta == Approx(0.79).epsilon(0.01));
  CHECK(est.manual_sessions == std::vector<long>{1, 2, 5});
  CHECK(est.consecutive_sessions == std::vector<long>{1});
  CHECK(est.delta_detail.steps == std::vector<long>{2});

  const auto pred = predict_outcome(est, {0.45, 0.40});
  CHECK(pred.label == Basin::Low);
  CHECK(pred.threshold == Approx(0.1108).epsilon(2e-3));
  CHECK(pred.margin == Approx(0.40 - pred.threshold));
}

TEST_CASE("worked example from losses alone") {
  std::istringstream in(kWorkedCsv);
  const auto log = read_sessions_csv(in);
  REQUIRE(log.size() == 5);
  CHECK_FALSE(log[2].ell.has_value());
  CHECK(session_skill(log[4]) == Approx(1 - std::sqrt(0.3)));
  const auto est = estimate_all(log);
  CHECK(est.theta_a == Approx(0.8));
  CHECK(est.eta == Approx(0.694).epsilon(1e-3));
  CHECK(est.kappa == Approx(1.41).epsilon(0.01));
  // theta(5) = 1 - sqrt(0.3) is slightly above the rounded 0.45.
  const double th5 = 1 - std::sqrt(0.3);
  CHECK(est.delta == Approx((est.eta * 0.125 - (th5 - 0.5)) / (2 * est.eta * 0.125)));
  CHECK(predict_outcome(est, {th5, 0.40}).label == Basin::Low);
}

TEST_CASE("ai skill formulas") {
  SessionLog log{manual(1, 0.3, 0.2), delegated(2, 0.3)};
  log[0].ell_a = 0.0;
  log[1].ell_a = 0.16;
  CHECK(estimate_theta_a(log) == Approx(1 - std::sqrt(0.08)));
  CHECK(estimate_theta_a(log, AiSkillFormula::MeanComplement) ==
        Approx(1 - std::sqrt(0.5 * (1.0 + 0.84 * 0.84))));
  log[1].ell_a = 0.0;
  CHECK(estimate_theta_a(log) == 1.0);
  CHECK_THROWS_AS(estimate_theta_a({}), EmptyData);
}

TEST_CASE("flat data gives zero rates") {
  SessionLog flat{manual(1, 0.36, 0.3), manual(2, 0.36, 0.3), delegated(3, 0.3), manual(4, 0.36, 0.3)};
  CHECK(estimate_eta(flat).value == 0.0);
  CHECK(estimate_kappa(flat, 0.5).value == 0.0);
  // No growth and no decay across the gap: pure growth shortfall.
  const double th = 0.4;
  const double expect = (0.5 * th * (1 - th) * (1 - th)) / (0.5 * th * th * (1 - th));
  CHECK(estimate_delta(flat, 0.5).value == Approx(expect));

  auto no_decay = worked_log(true);
  no_decay[4].theta = 0.5 + 0.694 * 0.125;
  no_decay[4].ell = std::pow(1 - *no_decay[4].theta, 2);
  CHECK(estimate_delta(no_decay, 0.694).value == Approx(0.0).scale(1.0));
}

TEST_CASE("missing or degenerate data") {
  SessionLog single{manual(1, 0.36, 0.2), delegated(2, 0.3)};
  CHECK_THROWS_AS(estimate_eta(single), EmptyData);
  CHECK_THROWS_AS(estimate_kappa(single, 0.5), EmptyData);
  CHECK_THROWS_AS(estimate_delta(single, 0.5), EmptyData);
  SessionLog perfect{manual(1, 0.0, 0.2), manual(2, 0.0, 0.3)};
  CHECK_THROWS_AS(estimate_eta(perfect), Degenerate);
  SessionLog tie{manual(1, 0.04, 0.2), manual(2, 0.03, 0.3)};
  const auto k = [&] {
    try {
      return estimate_kappa(tie, 0.5);
    } catch (const EmptyData&) {
      return EstimateDetail{-1, 0, 1, {}};
    }
  }();
  CHECK(k.excluded == 1);
  CHECK_THROWS_AS(estimate_kappa(worked_log(true), 0.0), DomainError);
}

TEST_CASE("session validation") {
  auto log = worked_log(false);
  CHECK_NOTHROW(validate_sessions(log));
  auto bad = log;
  bad[1].t = 1;
  CHECK_THROWS_AS(validate_sessions(bad), DomainError);
  bad = log;
  bad[2].ell = 0.3;
  CHECK_THROWS_AS(validate_sessions(bad), DomainError);
  bad = log;
  bad[0].ell.reset();
  CHECK_THROWS_AS(validate_sessions(bad), DomainError);
  bad = log;
  bad[0].p = 1.5;
  CHECK_THROWS_AS(validate_sessions(bad), DomainError);
}

TEST_CASE("csv round trip and parse errors") {
  for (bool with_theta : {false, true}) {
    const auto log = worked_log(with_theta);
    std::ostringstream out;
    write_sessions_csv(out, log);
    std::istringstream in(out.str());
    const auto back = read_sessions_csv(in);
    REQUIRE(back.size() == log.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
      CHECK(back[i].t == log[i].t);
      CHECK(back[i].x == log[i].x);
      CHECK(back[i].ell == log[i].ell);
      CHECK(back[i].theta == log[i].theta);
      CHECK(back[i].ell_a == log[i].ell_a);
      CHECK(back[i].p == log[i].p);
      CHECK(back[i].decision == log[i].decision);
    }
  }
  std::istringstream missing("t,x,ell,p\n1,0,0.3,0.2\n");
  CHECK_THROWS_AS(read_sessions_csv(missing), ParseError);
  std::istringstream garbage("t,decision,x,ell,ell_a,p\n1,Manual,0,abc,0.04,0.2\n");
  CHECK_THROWS_AS(read_sessions_csv(garbage), ParseError);
  std::istringstream short_row("t,decision,x,ell,ell_a,p\n1,Manual,0\n");
  CHECK_THROWS_AS(read_sessions_csv(short_row), ParseError);
}

TEST_CASE("parameters are recovered from simulated learners") {
  const auto m = ModelParams::simplified(0.5, 3, 2);
  const double eta = 0.01;
  double eta_sum = 0, kappa_sum = 0, delta_sum = 0;
  const int runs = 5;
  for (int seed = 0; seed < runs; ++seed) {
    const auto traj = simulate_discrete(m, {0.3, 0.4}, {eta, 400, static_cast<std::uint64_t>(seed)});
    const auto est = estimate_all(sessions_from_trajectory(m, traj));
    CHECK(est.theta_a == Approx(0.5));
    eta_sum += est.eta;
    kappa_sum += est.kappa;
    delta_sum += est.delta;
  }
  // The per-session gain coefficient is twice the per-round rate.
  CHECK(eta_sum / runs == Approx(2 * eta).epsilon(0.10));
  CHECK(kappa_sum / runs == Approx(3.0).epsilon(0.15));
  CHECK(delta_sum / runs == Approx(2.0).epsilon(0.20));
}

TEST_CASE("sessions from a trajectory") {
  const auto m = ModelParams::defaults();
  const auto traj = simulate_discrete(m, {0.4, 0.3}, {0.01, 20, 1});
  const auto log = sessions_from_trajectory(m, traj);
  REQUIRE(log.size() == 20);
  CHECK_NOTHROW(validate_sessions(log));
  for (std::size_t k = 0; k < log.size(); ++k) {
    CHECK(log[k].t == static_cast<long>(k + 1));
    CHECK(log[k].x == traj.decisions[k]);
    CHECK(log[k].p == traj.states[k].p);
    if (log[k].x == 0) CHECK(*log[k].ell == Approx(std::pow(1 - traj.states[k].theta, 2)));
  }
  CHECK_THROWS_AS(sessions_from_trajectory(m, integrate_ode(m, {0.4, 0.3}, 1, 0.1)), DomainError);
}

TEST_CASE("prediction") {
  const auto est = estimate_all(worked_log(true));
  CHECK(predict_outcome(est, {0.45, 0.0}).label == Basin::High);
  const auto s = saddle_point(est.model());
  CHECK(std::abs(predict_outcome(est, s).margin) < 1e-12);
  CHECK_THROWS_AS(predict_outcome(est, {1.2, 0.3}), DomainError);
}
