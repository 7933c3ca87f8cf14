#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "skilldyn/dynamics.hpp"
#include "skilldyn/equilibria.hpp"

using namespace skilldyn;
using doctest::Approx;

namespace {

ModelParams random_params() {
  return ModelParams::simplified(oracle::uniform(0.02, 0.98), oracle::uniform(0.1, 6),
                                 oracle::uniform(0.1, 5));
}

PhaseState random_state() { return {oracle::uniform(0, 1), oracle::uniform(0, 1)}; }

}  // namespace

TEST_CASE("simplified drift matches the reference field") {
  for (int i = 0; i < 500; ++i) {
    const auto m = random_params();
    const auto s = random_state();
    const auto v = eval_drift(m, s);
    const auto o = oracle::drift({m.theta_a, m.kappa, m.delta, 0.0}, {s.theta, s.p});
    CHECK(v.d_theta == Approx(o.theta).epsilon(1e-12).scale(1.0));
    CHECK(v.d_p == Approx(o.p).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("general drift with a default skill") {
  for (int i = 0; i < 200; ++i) {
    auto m = random_params();
    m.variant = General{};
    m.theta_d = oracle::uniform(0, m.theta_a);
    const auto s = random_state();
    const auto v = eval_drift(m, s);
    const auto o = oracle::drift({m.theta_a, m.kappa, m.delta, m.theta_d}, {s.theta, s.p});
    CHECK(std::abs(v.d_theta - o.theta) < 1e-14);
    CHECK(std::abs(v.d_p - o.p) < 1e-14);
  }
}

TEST_CASE("worked drift values") {
  const auto m = ModelParams::defaults();
  const auto at_saddle = eval_drift(m, {0.5, 1.0 / 3.0});
  CHECK(std::abs(at_saddle.d_theta) < 1e-15);
  CHECK(at_saddle.d_p == 0.0);

  const auto v = eval_drift(m, {0.4, 0.0});
  CHECK(v.d_theta == Approx(0.144));
  CHECK(v.d_p == 0.0);

  for (PhaseState corner : {PhaseState{0, 0}, PhaseState{1, 1}, PhaseState{1, 0}, PhaseState{0, 1}})
    CHECK(eval_drift(m, corner) == Velocity{0.0, 0.0});

  auto a = m;
  a.variant = Asymmetric{2.0};
  const auto w = eval_drift(a, {0.9, 0.5});
  CHECK(w.d_p == Approx(-0.36));
}

TEST_CASE("drift is exactly zero at every equilibrium") {
  for (int i = 0; i < 300; ++i) {
    auto m = random_params();
    if (i % 2) {
      m.variant = General{};
      m.theta_d = oracle::uniform(0, 0.9 * m.theta_a);
    }
    for (const auto& e : all_equilibria(m)) {
      const auto v = eval_drift(m, e.state);
      CHECK(v.d_theta == 0.0);
      CHECK(v.d_p == 0.0);
    }
  }
}

TEST_CASE("no-AI field is the simplified field at p = 0") {
  auto none = ModelParams::defaults();
  none.variant = NoAI{};
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state();
    const auto v = eval_drift(none, s);
    CHECK(v.d_p == 0.0);
    CHECK(v.d_theta == eval_drift(ModelParams::defaults(), {s.theta, 0.0}).d_theta);
  }
}

TEST_CASE("variant equivalences") {
  for (int i = 0; i < 1000; ++i) {
    const auto base = random_params();
    const auto s = random_state();
    const auto ref = eval_drift(base, s);

    SkillDistribution dist{{oracle::uniform(0, 1), oracle::uniform(0, 1), oracle::uniform(0, 1)},
                           {0.2, 0.3, 0.5}};
    auto jag = base;
    jag.variant = JaggedAI(dist);
    const auto eff = base.with_theta_a(effective_skill(dist));
    const auto vj = eval_drift(jag, s);
    const auto ve = eval_drift(eff, s);
    CHECK(std::abs(vj.d_theta - ve.d_theta) <= 1e-12);
    CHECK(std::abs(vj.d_p - ve.d_p) <= 1e-12);

    auto asym = base;
    asym.variant = Asymmetric{1.0};
    CHECK(eval_drift(asym, s) == ref);

    auto det = base;
    det.variant = DetectionPenalty{0.0};
    CHECK(eval_drift(det, s) == ref);

    auto mis = base;
    mis.variant = MisperceivedAI{base.theta_a};
    const auto vm = eval_drift(mis, s);
    CHECK(vm.d_theta == ref.d_theta);
    CHECK(std::abs(vm.d_p - ref.d_p) <= 1e-15);
  }
}

TEST_CASE("misperceived field blends perceived and realised advantage") {
  auto m = ModelParams::defaults();
  m.variant = MisperceivedAI{0.8};
  const double th = 0.3, p = 0.4;
  const double own = 0.49;
  const double expect = 3 * p * (1 - p) * ((1 - p) * (own - 0.04) + p * (own - 0.25));
  CHECK(eval_drift(m, {th, p}).d_p == Approx(expect));
}

TEST_CASE("detection penalty raises the AI loss") {
  auto m = ModelParams::defaults();
  m.variant = DetectionPenalty{0.5};
  CHECK(ai_output_loss(m) == Approx(0.5 * 0.25 + 0.5 * 0.5));
  const auto v = eval_drift(m, {0.3, 0.4});
  CHECK(v.d_p == Approx(3 * 0.4 * 0.6 * (0.49 - 0.375)));
}

TEST_CASE("decay branch at full delegation") {
  const auto m = ModelParams::defaults();
  for (double th : {0.1, 0.4, 0.7, 0.95})
    CHECK(eval_drift(m, {th, 1.0}).d_theta == Approx(-2 * th * th * (1 - th)));
}

TEST_CASE("loss") {
  const auto m = ModelParams::defaults();
  CHECK(loss(0.4, 0.3, m) == Approx(0.327));
  CHECK(loss(0.4, 0.0, m) == Approx(0.36));
  for (double p : {0.0, 0.3, 1.0}) CHECK(loss(0.5, p, m) == Approx(0.25));
  // Affine in p: the better endpoint is full delegation iff the AI is at least as good.
  for (double th : {0.2, 0.5, 0.8}) {
    const bool prefer_ai = loss(th, 1, m) <= loss(th, 0, m);
    CHECK(prefer_ai == ((1 - th) * (1 - th) >= 0.25));
    CHECK(loss(th, 0.5, m) == Approx(0.5 * (loss(th, 0, m) + loss(th, 1, m))));
  }
  auto jag = m;
  jag.variant = JaggedAI(SkillDistribution{{0.0, 1.0}, {0.5, 0.5}});
  CHECK(loss(0.4, 1.0, jag) == Approx(0.5));
}

TEST_CASE("effective skill") {
  CHECK(effective_skill(SkillDistribution::point_mass(0.7)) == Approx(0.7));
  CHECK(effective_skill(SkillDistribution{{0.0, 1.0}, {0.5, 0.5}}) == Approx(1 - std::sqrt(0.5)));
  // Jensen: randomness never helps relative to the mean skill.
  SkillDistribution d{{0.2, 0.9}, {0.5, 0.5}};
  CHECK(effective_skill(d) <= d.mean());
}

TEST_CASE("skill nullcline") {
  const auto m = ModelParams::defaults();
  CHECK(skill_nullcline(m, 0.5) == Approx(1.0 / 3.0));
  for (double th : {0.1, 0.3, 0.7}) {
    const double n = skill_nullcline(m, th);
    CHECK(std::abs(skill_drift(m, th, n)) < 1e-15);
  }
}
