#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "skilldyn/equilibria.hpp"
#include "skilldyn/errors.hpp"
#include "skilldyn/separatrix.hpp"
#include "skilldyn/simulate.hpp"

using namespace skilldyn;
using doctest::Approx;

namespace {

const Separatrix& default_separatrix() {
  static const Separatrix sep = compute_separatrix(ModelParams::defaults());
  return sep;
}

}  // namespace

TEST_CASE("threshold at theta = 0.2 matches bisection on the flow") {
  const auto& sep = default_separatrix();
  const double expected = oracle::threshold_at({}, 0.2);
  CHECK(expected == Approx(0.07).epsilon(0.1));
  CHECK(std::abs(psi_eval(sep, 0.2) - expected) < 1e-3);
}

TEST_CASE("separatrix shape") {
  const auto& sep = default_separatrix();
  CHECK(sep.nodes.front() == PhaseState{0, 0});
  CHECK(sep.nodes.back() == PhaseState{1, 1});
  CHECK(sep.nodes.size() >= 512);
  for (std::size_t i = 1; i < sep.nodes.size(); ++i) {
    CHECK(sep.nodes[i].theta > sep.nodes[i - 1].theta);
    CHECK(sep.nodes[i].p > sep.nodes[i - 1].p);
  }
  for (std::size_t i = 0; i + 1 < sep.nodes.size(); ++i) CHECK(sep.nodes[i].p < 1.0);
  CHECK(psi_eval(sep, 0.0) == 0.0);
  CHECK(psi_eval(sep, 1.0) == 1.0);
  CHECK(psi_eval(sep, sep.saddle.theta) == sep.saddle.p);
  const auto& node = sep.nodes[100];
  CHECK(psi_eval(sep, node.theta) == node.p);
}

TEST_CASE("forward flow from a node follows the curve into the saddle") {
  const auto m = ModelParams::defaults();
  const auto& sep = default_separatrix();
  const auto saddle = sep.saddle;
  for (double theta : {0.2, 0.35, 0.65, 0.8}) {
    PhaseState s{theta, psi_eval(sep, theta)};
    double worst = 0;
    for (int k = 0; k < 20000; ++k) {
      s = rk4_step(m, s, 1e-3);
      worst = std::max(worst, std::abs(s.p - psi_eval(sep, s.theta)));
      if (std::max(std::abs(s.theta - saddle.theta), std::abs(s.p - saddle.p)) < 1e-2) break;
    }
    CHECK(worst < 0.05);
    CHECK(std::max(std::abs(s.theta - saddle.theta), std::abs(s.p - saddle.p)) < 1e-2);
  }
}

TEST_CASE("separatrix across other parameters") {
  for (auto m : {ModelParams::simplified(0.8, 3, 2), ModelParams::simplified(0.3, 1.5, 4),
                 ModelParams::simplified(0.8, 1.41, 0.79)}) {
    const auto sep = compute_separatrix(m, 256);
    const double th = 0.5 * m.theta_a;
    const double expected = oracle::threshold_at({m.theta_a, m.kappa, m.delta}, th, 1e-4);
    CHECK(std::abs(psi_eval(sep, th) - expected) < 2e-3);
  }
  auto g = ModelParams::defaults();
  g.variant = General{};
  g.theta_d = 0.1;
  const auto sep = compute_separatrix(g, 128);
  CHECK(psi_eval(sep, 0.5) == Approx(saddle_point(g).p));
}

TEST_CASE("separatrix input checks") {
  CHECK_THROWS_AS(compute_separatrix(ModelParams::simplified(1.0, 3, 2)), DegenerateParams);
  CHECK_THROWS_AS(compute_separatrix(ModelParams::defaults(), 2), DomainError);
}

TEST_CASE("closed-form approximation parameters") {
  const auto m = ModelParams::simplified(0.8, 1.41, 0.79);
  const auto a = psi_approx(m);
  const double pd = 0.2 / (0.2 + 0.79 * 0.8);
  CHECK(a.theta_dagger == 0.8);
  CHECK(a.p_dagger == Approx(pd));
  CHECK(a.beta_l == Approx(1.41 * (1 - 0.04)));
  CHECK(a.beta_r == Approx(1.41 * 0.04 / 0.79));
  CHECK(a.theta_l == 0.8);
  CHECK(a(0.45) == Approx(0.11).epsilon(0.1));
  CHECK(a(0.45) == Approx(pd * std::pow(0.45 / 0.8, a.beta_l)));
  // Tangent slope of the stable eigenvector, from the Jacobian entries.
  const double th = 0.8, j11 = -th * (1 - th) * (1 - pd + 0.79 * pd);
  const double j12 = -th * (1 - th) * (1 - th * (1 - 0.79));
  const double j21 = -2 * 1.41 * pd * (1 - pd) * (1 - th);
  const double m_ref = (-j11 - std::sqrt(j11 * j11 + 4 * j12 * j21)) / (2 * j12);
  CHECK(a.m_dagger == Approx(m_ref));
  const auto v = saddle_stable_direction(m);
  CHECK(a.m_dagger == Approx(v.y / v.x));
}

TEST_CASE("approximation is continuous and anchored at the saddle") {
  for (auto m : {ModelParams::defaults(), ModelParams::simplified(0.8, 3, 2),
                 ModelParams::simplified(0.3, 2.5, 1.2)}) {
    const auto a = psi_approx(m);
    CHECK(a(a.theta_dagger) == Approx(a.p_dagger));
    CHECK(a.theta_l <= a.theta_dagger);
    CHECK(a.theta_dagger <= a.theta_r);
    for (double b : {a.theta_l, a.theta_r}) {
      if (b <= 0 || b >= 1) continue;
      CHECK(std::abs(a(b) - a(std::nextafter(b, 0.0))) < 1e-12);
      CHECK(std::abs(a(b) - a(std::nextafter(b, 1.0))) < 1e-12);
    }
    if (a.theta_l > 0) CHECK(a(0.0) == 0.0);
  }
}

TEST_CASE("approximation tracks the manifold at the defaults") {
  const auto& sep = default_separatrix();
  const auto a = psi_approx(ModelParams::defaults());
  double worst = 0;
  for (double th = 0.05; th <= 0.95 + 1e-12; th += 0.005)
    worst = std::max(worst, std::abs(a(th) - psi_eval(sep, th)));
  CHECK(worst < 0.05);
}

TEST_CASE("pasting guards") {
  // beta_l = kappa (1 - (1 - theta_a)^2) = 1 exactly.
  CHECK_THROWS_AS(psi_approx(ModelParams::simplified(0.5, 4.0 / 3.0, 2)), SingularPasting);
  const auto low = psi_approx(ModelParams::simplified(0.5, 1.5, 2));
  CHECK(low.theta_l == 0.0);
  CHECK_FALSE(low.warnings.empty());
  CHECK(low(0.0) == Approx(low.middle(0.0)).scale(1.0));
}

TEST_CASE("basin classification") {
  const auto m = ModelParams::defaults();
  const auto& sep = default_separatrix();
  CHECK(classify_basin(m, {0.2, 0.1}, sep).basin == Basin::Low);
  CHECK(classify_basin(m, {0.2, 0.05}, sep).basin == Basin::High);
  const auto on = classify_basin(m, sep.saddle, sep);
  CHECK(on.basin == Basin::Boundary);
  REQUIRE(on.simulated.has_value());
  CHECK(*on.simulated == LimitLabel::SaddleNeighborhood);
}

TEST_CASE("deterministic basin grid") {
  const auto m = ModelParams::defaults();
  const auto grid = basin_grid(m, {0.05, 0.95}, {0.05, 0.95}, DeterministicMethod{}, 2);
  // The boundary at theta = 0.05 sits near p = 0.004, so only the
  // high-skill, low-delegation corner escapes.
  CHECK(grid.labels[grid.index(0, 0)] == Basin::Low);
  CHECK(grid.labels[grid.index(0, 1)] == Basin::High);
  CHECK(grid.labels[grid.index(1, 0)] == Basin::Low);
  CHECK(grid.labels[grid.index(1, 1)] == Basin::Low);
  for (double th : {0.05, 0.95})
    for (double p : {0.05, 0.95}) {
      const bool high = oracle::reaches_high({}, {th, p});
      CHECK((classify_limit(m, {th, p}, 1e4) == LimitLabel::HighSkill) == high);
      CHECK((classify_basin(m, {th, p}, default_separatrix()).basin == Basin::High) == high);
    }
}

TEST_CASE("noiseless sde grid reproduces the labels") {
  const auto m = ModelParams::defaults();
  const auto grid = basin_grid(m, {0.05, 0.95}, {0.05, 0.95}, SdeMethod{0.0, 3, 1}, 4);
  CHECK(grid.probability[grid.index(0, 0)] == 0.0);
  CHECK(grid.probability[grid.index(0, 1)] == 1.0);
  CHECK(grid.probability[grid.index(1, 0)] == 0.0);
  CHECK(grid.probability[grid.index(1, 1)] == 0.0);
}

TEST_CASE("sde grid is independent of the worker count") {
  const auto m = ModelParams::defaults();
  const auto axis = linspace(0.1, 0.9, 3);
  const auto a = basin_grid(m, axis, axis, SdeMethod{0.1, 8, 42}, 1);
  const auto b = basin_grid(m, axis, axis, SdeMethod{0.1, 8, 42}, 4);
  CHECK(a.probability == b.probability);
  for (double v : a.probability) CHECK((v >= 0 && v <= 1));
}

TEST_CASE("better AI lowers the threshold") {
  const auto t = separatrix_sweep(ModelParams::defaults(), SweepParameter::ThetaA, {0.3, 0.5, 0.7},
                                  {0.4}, 3);
  CHECK(t.psi[0][0] > t.psi[1][0]);
  CHECK(t.psi[1][0] > t.psi[2][0]);
}

TEST_CASE("faster decay lowers the threshold") {
  const auto t = separatrix_sweep(ModelParams::defaults(), SweepParameter::Delta, {1, 2, 4}, {0.4}, 3);
  CHECK(t.psi[0][0] > t.psi[1][0]);
  CHECK(t.psi[1][0] > t.psi[2][0]);
}

TEST_CASE("delegation rate effect flips sign at the AI skill") {
  const auto t = separatrix_sweep(ModelParams::defaults(), SweepParameter::Kappa, {1.5, 3, 6},
                                  {0.3, 0.7}, 3);
  CHECK(t.psi[0][0] > t.psi[1][0]);
  CHECK(t.psi[1][0] > t.psi[2][0]);
  CHECK(t.psi[0][1] < t.psi[1][1]);
  CHECK(t.psi[1][1] < t.psi[2][1]);
}

TEST_CASE("sweeping the AI skill moves the boundary across any state") {
  for (PhaseState s : {PhaseState{0.3, 0.2}, PhaseState{0.6, 0.5}, PhaseState{0.8, 0.1}}) {
    const auto t = separatrix_sweep(ModelParams::defaults(), SweepParameter::ThetaA, {0.05, 0.95},
                                    {s.theta}, 2);
    CHECK((s.p - t.psi[0][0]) * (s.p - t.psi[1][0]) < 0);
  }
}

TEST_CASE("sweep parameter names") {
  CHECK(parse_sweep_parameter("theta_a") == SweepParameter::ThetaA);
  CHECK(parse_sweep_parameter("kappa") == SweepParameter::Kappa);
  CHECK(parse_sweep_parameter("delta") == SweepParameter::Delta);
  CHECK(to_string(SweepParameter::Kappa) == "kappa");
  CHECK(linspace(0, 1, 5) == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
}
