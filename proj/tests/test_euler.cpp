#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dissflow/error.hpp"
#include "dissflow/euler.hpp"
#include "dissflow/pairing.hpp"
#include "dissflow/transport.hpp"

using namespace dissflow;

TEST_CASE("step count") {
  CHECK(step_count(1.0, 0.1) == 10);
  CHECK(step_count(1.0, 0.3) == 4);
  CHECK(step_count(1.0, 0.25) == 4);
  CHECK(step_count(std::numbers::pi / 2, 1e-3) == 1571);
  CHECK(step_count(0.05, 0.1) == 1);
}

TEST_CASE("constant field translates exactly") {
  const std::vector<double> b{0.3, -0.4};
  auto field = MpvfSpec::constant(DiscreteMeasure(2, b, {1.0}));
  auto traj = euler_run(field, DiscreteMeasure::dirac({0.0, 0.0}), 0.1, 1.0, 0.5 + 1.0);
  CHECK(traj.N == 10);
  CHECK(traj.M.size() == 11);
  CHECK(traj.phi.size() == 10);
  CHECK(same_law(traj.M.back(), DiscreteMeasure::dirac({0.3, -0.4}), 1e-12));
}

TEST_CASE("splitting particle is step-exact from a Dirac") {
  auto traj = euler_run(MpvfSpec::splitting_particle(), DiscreteMeasure::dirac({0.0}), 0.25, 1.0,
                        2.0);
  CHECK(traj.N == 4);
  CHECK(same_law(traj.M.back(), DiscreteMeasure(1, {1.0, -1.0}, {0.5, 0.5}), 1e-12));
  for (std::size_t n = 1; n <= traj.N; ++n) {
    const double t = 0.25 * double(n);
    CHECK(same_law(traj.M[n], DiscreteMeasure(1, {t, -t}, {0.5, 0.5}), 1e-12));
  }
}

TEST_CASE("rotation error at a quarter turn") {
  const double T = std::numbers::pi / 2;
  // Euler for a rotation grows the radius by (1 + tau^2)^{n/2}.
  auto traj = euler_run(MpvfSpec::rotation(), DiscreteMeasure::dirac({1.0, 0.0}), 1e-3, T, 1.01);
  auto end = interpolate(traj, T);
  CHECK(w2_distance(end, DiscreteMeasure::dirac({0.0, -1.0})) <= 5e-3);
  // Oracle bound e^T T tau / 2 |x|.
  CHECK(w2_distance(end, DiscreteMeasure::dirac({0.0, -1.0})) <= std::exp(T) * T * 1e-3 / 2);
}

TEST_CASE("trajectory invariants") {
  auto mu0 = uniform_interval(-1.0, 1.0, 7);
  auto traj = euler_run(MpvfSpec::potential("quartic_potential"), mu0, 0.05, 1.0, 1.0);
  REQUIRE(traj.M.size() == traj.N + 1);
  CHECK(same_law(traj.M[0], mu0, 0.0, 0.0));
  for (std::size_t n = 0; n < traj.N; ++n) {
    CHECK(velocity_norm(traj.phi[n]) <= traj.L);
    CHECK(same_law(x_marginal(traj.phi[n]), traj.M[n]));
    CHECK(same_law(push_exp(traj.phi[n], traj.tau), traj.M[n + 1], 0.0, 0.0));
  }
}

TEST_CASE("interpolation") {
  auto mu0 = DiscreteMeasure(1, {-0.5, 0.2, 0.9}, {0.2, 0.5, 0.3});
  auto traj = euler_run(MpvfSpec::splitting_particle(), mu0, 0.1, 1.0, 1.0);
  const double L = traj.L;
  for (std::size_t n = 0; n <= traj.N; ++n) {
    const double t = traj.tau * double(n);
    CHECK(same_law(interpolate(traj, t, InterpolationMode::Affine), traj.M[n], 1e-12));
    CHECK(same_law(interpolate(traj, t, InterpolationMode::Piecewise), traj.M[n], 1e-12));
  }
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(0.025 * k);
  for (double t : grid) {
    auto a = interpolate(traj, t, InterpolationMode::Affine);
    auto p = interpolate(traj, t, InterpolationMode::Piecewise);
    CHECK(w2_distance(a, p) <= L * traj.tau + 1e-12);
    CHECK(w2_distance(a, mu0) <= L * t + 1e-12);
    for (double s : grid) {
      if (s >= t) break;
      CHECK(w2_distance(a, interpolate(traj, s)) <= L * (t - s) + 1e-12);
    }
  }
  CHECK_THROWS_AS(interpolate(traj, -0.1), InvalidArgument);
  CHECK_THROWS_AS(interpolate(traj, 1.5), InvalidArgument);
}

TEST_CASE("global bounds") {
  auto mu0 = DiscreteMeasure::dirac({0.0});
  VelocityMeasure psi0(1, {0.0}, {1.0}, {1.0});
  auto id = [](double r) { return r; };
  auto g = global_bounds(mu0, psi0, 1.0, 0.0, id);
  const double R = 2.0 * std::sqrt(2.0) * std::exp(1.0);
  CHECK(g.R == doctest::Approx(R).epsilon(1e-14));
  CHECK(g.L == doctest::Approx(R).epsilon(1e-14));
  CHECK(g.tau_max == doctest::Approx(1.0 / (R * R)).epsilon(1e-14));

  auto neg = global_bounds(mu0, psi0, 1.0, -3.0, id);
  CHECK(neg.R == g.R);

  auto positive = global_bounds(mu0, psi0, 1.0, 0.5, id);
  CHECK(positive.R == doctest::Approx(2.0 * std::sqrt(2.0) * std::exp(2.0)).epsilon(1e-14));

  auto far = DiscreteMeasure::dirac({3.0, 4.0});
  auto tiny = global_bounds(far, zero_lift(far), 1e-12, 0.0, id);
  CHECK(std::abs(tiny.R - 5.0) <= 1e-5);
  CHECK(tiny.tau_max == 1e-12);

  auto capped = global_bounds(mu0, psi0, 1.0, 0.0, [](double) { return 0.5; },
                              [](double) { return 0.01; });
  CHECK(capped.tau_max == 0.01);
}

TEST_CASE("discrete EVI along Euler runs") {
  auto constant = MpvfSpec::constant(DiscreteMeasure::dirac({0.7}));
  auto c = euler_run(constant, DiscreteMeasure::dirac({-1.0}), 0.1, 2.0, 1.0);
  auto rc = ievi_check(c, DiscreteMeasure::dirac({0.0}));
  CHECK(rc.passed);
  // Translation: both sides are explicit, lhs = tau b (x_n - y) + tau^2 b^2 / 2.
  for (const auto& row : rc.rows) {
    const double xn = -1.0 + 0.7 * 0.1 * double(row.n);
    CHECK(std::abs(row.lhs - (0.1 * 0.7 * xn + 0.5 * 0.01 * 0.49)) <= 1e-12);
    CHECK(std::abs(row.rhs - (0.1 * 0.7 * xn + 0.5 * 0.01 * 1.0)) <= 1e-12);
  }

  auto split = euler_run(MpvfSpec::splitting_particle(), uniform_interval(-0.2, 0.6, 9), 0.05, 1.0,
                         1.0);
  CHECK(ievi_check(split, uniform_interval(0.0, 1.0, 100)).passed);
  CHECK(ievi_check(split, split.M[0]).passed);

  auto rot = euler_run(MpvfSpec::rotation(), DiscreteMeasure(2, {1.0, 0.0, 0.0, 0.5}, {0.5, 0.5}),
                       0.01, 1.0, 1.1);
  CHECK(ievi_check(rot, rot.M[0]).passed);
}

TEST_CASE("stability violation") {
  auto field = MpvfSpec::constant(DiscreteMeasure::dirac({2.0}));
  try {
    euler_run(field, DiscreteMeasure::dirac({0.0}), 0.1, 1.0, 1.0);
    FAIL("expected StabilityViolation");
  } catch (const StabilityViolation& e) {
    CHECK(e.step() == 0);
    CHECK(e.attempted_norm() == doctest::Approx(2.0));
    CHECK(e.bound() == 1.0);
  }
  // Rotation drifts outward; a bound without slack is hit mid-run.
  CHECK_THROWS_AS(euler_run(MpvfSpec::rotation(), DiscreteMeasure::dirac({1.0, 0.0}), 0.1, 5.0, 1.0),
                  StabilityViolation);
  CHECK_THROWS_AS(euler_run(field, DiscreteMeasure::dirac({0.0}), 0.0, 1.0, 3.0), InvalidArgument);
  CHECK_THROWS_AS(euler_run(field, DiscreteMeasure::dirac({0.0}), 0.1, -1.0, 3.0), InvalidArgument);
  CHECK_THROWS_AS(euler_run(field, DiscreteMeasure::dirac({0.0}), 0.1, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("selection order") {
  auto list = MpvfSpec::selection_list({MpvfSpec::constant(DiscreteMeasure::dirac({5.0})),
                                        MpvfSpec::constant(DiscreteMeasure::dirac({0.5}))});
  auto traj = euler_run(list, DiscreteMeasure::dirac({0.0}), 0.5, 1.0, 1.0);
  CHECK(traj.selection_index == std::vector<std::size_t>{1, 1});
  CHECK(same_law(traj.M.back(), DiscreteMeasure::dirac({0.5}), 1e-12));
}

TEST_CASE("determinism") {
  auto mu0 = DiscreteMeasure(1, {-0.3, 0.1, 0.4}, {0.3, 0.3, 0.4});
  auto field = MpvfSpec::composite_sum(
      {MpvfSpec::interaction("attractive_quartic"), MpvfSpec::splitting_particle()});
  auto a = euler_run(field, mu0, 0.05, 0.5, 3.0);
  auto b = euler_run(field, mu0, 0.05, 0.5, 3.0);
  REQUIRE(a.M.size() == b.M.size());
  for (std::size_t n = 0; n < a.M.size(); ++n) {
    CHECK(a.M[n].coords() == b.M[n].coords());
    CHECK(a.M[n].weights() == b.M[n].weights());
  }
  CHECK(trajectory_index_json(a) == trajectory_index_json(b));
}

TEST_CASE("atom budget") {
  auto field = MpvfSpec::constant(DiscreteMeasure(1, {1.0, -1.0, 0.25}, {0.25, 0.25, 0.5}));
  EulerOptions strict;
  strict.atom_budget = 50;
  CHECK_THROWS_AS(euler_run(field, DiscreteMeasure::dirac({0.0}), 0.013, 1.0, 2.0, strict),
                  AtomBudgetExceeded);

  EulerOptions thin = strict;
  thin.resample = true;
  auto traj = euler_run(field, DiscreteMeasure::dirac({0.0}), 0.013, 1.0, 2.0, thin);
  CHECK_FALSE(traj.resampled_steps.empty());
  for (const auto& m : traj.M) CHECK(m.size() <= 50);
  CHECK(trajectory_index_json(traj).find("resampled_steps") != std::string::npos);
}
