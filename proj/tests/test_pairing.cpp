#include <doctest.h>

#include <cmath>
#include <random>

#include "dissflow/error.hpp"
#include "dissflow/mpvf.hpp"
#include "dissflow/pairing.hpp"
#include "dissflow/properties.hpp"
#include "oracles.hpp"

using namespace dissflow;

namespace {

VelocityMeasure random_velocity(std::mt19937_64& rng, std::size_t dim, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xs(n * dim), vs(n * dim), w(n);
  for (auto& c : xs) c = u(rng);
  for (auto& c : vs) c = u(rng);
  double total = 0.0;
  for (auto& c : w) total += (c = 0.05 + std::abs(u(rng)));
  for (auto& c : w) c /= total;
  return VelocityMeasure(dim, xs, vs, w);
}

VelocityMeasure rhombus() {
  return VelocityMeasure(2, {1.0, 0.0, -1.0, 0.0}, {0.0, 1.0, 0.0, -1.0}, {0.5, 0.5});
}

DiscreteMeasure rhombus_nu() { return DiscreteMeasure(2, {0.0, 1.0, 0.0, -1.0}, {0.5, 0.5}); }

}  // namespace

TEST_CASE("pairings of a measure with itself vanish") {
  std::mt19937_64 rng(1);
  auto phi = random_velocity(rng, 2, 5);
  auto r = pairing_r(phi, phi);
  CHECK(std::abs(r.value) <= 1e-12);
  for (const auto& e : r.witness.entries()) CHECK(e.row == e.col);
  CHECK(std::abs(pairing_l(phi, phi).value) <= 1e-12);
}

TEST_CASE("Dirac pairings") {
  VelocityMeasure a(1, {0.5}, {2.0}, {1.0});
  VelocityMeasure b(1, {-1.0}, {0.5}, {1.0});
  CHECK(pairing_r(a, b).value == doctest::Approx(1.5 * 1.5));
  CHECK(pairing_l(a, b).value == doctest::Approx(1.5 * 1.5));
  CHECK(pairing_r_nu(a, DiscreteMeasure::dirac({-1.0})).value == doctest::Approx(1.5 * 2.0));
}

TEST_CASE("rhombus: right and left pairings differ") {
  auto r = pairing_r_nu(rhombus(), rhombus_nu());
  auto l = pairing_l_nu(rhombus(), rhombus_nu());
  CHECK(r.value == -1.0);
  CHECK(l.value == 1.0);
  CHECK(r.side == Side::Right);
  CHECK(is_optimal(r.witness));

  // One-sided derivatives of 1/2 W^2 along exp^t: right -1, left +1.
  auto curve = [](double t) { return push_exp(rhombus(), t); };
  const double right = dini_w2(curve, rhombus_nu(), 0.0, Side::Right);
  const double left = dini_w2(curve, rhombus_nu(), 0.0, Side::Left);
  CHECK(std::abs(right + 1.0) <= 1e-9);
  CHECK(std::abs(left - 1.0) <= 1e-9);
  CHECK(std::abs((left - right) - 2.0) <= 0.05);
}

TEST_CASE("splitting field on Leb[0,1] against the origin") {
  auto nu = uniform_interval(0.0, 1.0, 100);
  auto phi = evaluate(MpvfSpec::splitting_particle(), nu);
  auto r = pairing_r_nu(phi, DiscreteMeasure::dirac({0.0}));
  // Exact value for the discretization.
  double exact = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const double x = nu.point(i)[0];
    exact += nu.weight(i) * x * (x < splitting_point(nu) ? -1.0 : 1.0);
  }
  CHECK(std::abs(r.value - exact) <= 1e-12);
  CHECK(std::abs(r.value - 0.25) <= 0.01);
}

TEST_CASE("rotation field pairs to nearly zero with any measure") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> pts;
  while (pts.size() < 400) {
    double a = u(rng), b = u(rng);
    if (a * a + b * b > 1.0) continue;
    pts.push_back(a);
    pts.push_back(b);
  }
  auto disc = DiscreteMeasure::uniform(2, pts);
  auto phi = evaluate(MpvfSpec::rotation(), disc);
  auto nu = DiscreteMeasure(2, {0.3, -0.2, -0.5, 0.4, 0.1, 0.9}, {0.2, 0.5, 0.3});
  CHECK(std::abs(pairing_r_nu(phi, nu).value) <= 0.05);
}

TEST_CASE("pairing calculus on random instances") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + trial % 3;
    auto p0 = random_velocity(rng, d, 1 + trial % 6);
    auto p1 = random_velocity(rng, d, 1 + (trial / 2) % 6);
    const double r = pairing_r(p0, p1).value;
    const double l = pairing_l(p0, p1).value;
    CHECK(r <= l + 1e-12);
    // Negation identity.
    CHECK(std::abs(l + pairing_r(negate(p0), negate(p1)).value) <= 1e-9);
    // Sum of measure pairings bounded by the pairing of the fields.
    const auto mu0 = x_marginal(p0), mu1 = x_marginal(p1);
    CHECK(pairing_r_nu(p0, mu1).value + pairing_r_nu(p1, mu0).value <= r + 1e-9);
    CHECK(pairing_l_nu(p0, mu1).value + pairing_l_nu(p1, mu0).value >= l - 1e-9);

    // lambda transform relation.
    const double lambda = 0.7 - 0.3 * (trial % 3);
    const double w2sq = w2(mu0, mu1).cost;
    const double lhs = pairing_r_nu(lambda_transform(p0, lambda), mu1).value;
    const double rhs = pairing_r_nu(p0, mu1).value -
                       0.5 * lambda * (second_moment(mu0) - second_moment(mu1) + w2sq);
    CHECK(std::abs(lhs - rhs) <= 1e-8);
  }
}

TEST_CASE("semiconcavity and one-sided derivative bounds") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + trial % 3;
    auto phi = random_velocity(rng, d, 2 + trial % 5);
    auto nu = x_marginal(random_velocity(rng, d, 1 + trial % 4));
    const double norm2 = velocity_norm(phi) * velocity_norm(phi);
    auto g = [&](double s) { return 0.5 * w2(push_exp(phi, s), nu).cost; };
    for (double s0 = -1.0; s0 < 1.0; s0 += 0.25) {
      const double s1 = s0 + 0.5;
      CHECK(g(0.5 * (s0 + s1)) >= 0.5 * g(s0) + 0.5 * g(s1) - 0.125 * (s1 - s0) * (s1 - s0) * norm2 - 1e-8);
    }
    // Upper bound from the superdifferential; always holds.
    const double p = pairing_r_nu(phi, nu).value;
    for (double h : {1e-2, 1e-3}) {
      const double q = (g(h) - g(0.0)) / h - p;
      CHECK(q <= h * norm2 + 1e-9);
    }
  }
}

TEST_CASE("directional pairing") {
  // Dirac geodesic from 0 to 2, velocity v at the midpoint.
  auto gamma = w2(DiscreteMeasure::dirac({0.0}), DiscreteMeasure::dirac({2.0})).plan;
  VelocityMeasure phi(1, {1.0}, {0.75}, {1.0});
  CHECK(directional_pairing(phi, gamma, 0.5, Side::Right).value == doctest::Approx(-1.5));
  CHECK(directional_pairing(phi, gamma, 0.5, Side::Left).value == doctest::Approx(-1.5));

  // Marginal mismatch is rejected.
  VelocityMeasure wrong(1, {0.9}, {0.75}, {1.0});
  CHECK_THROWS_AS(directional_pairing(wrong, gamma, 0.5, Side::Right), InvalidArgument);

  // Interior points of a geodesic supported on a map: right = left, and the
  // measure pairing equals (1 - t) times the directional pairing.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + trial % 2;
    auto mu0 = x_marginal(random_velocity(rng, d, 2 + trial % 4));
    auto mu1 = x_marginal(random_velocity(rng, d, 2 + (trial / 2) % 4));
    auto plan = w2(mu0, mu1).plan;
    for (double t : {0.25, 0.5, 0.75}) {
      auto mut = geodesic_point(plan, t);
      // A two-valued velocity field on mu_t.
      std::vector<double> xs, vs, ws;
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (std::size_t i = 0; i < mut.size(); ++i) {
        for (int k = 0; k < 2; ++k) {
          auto x = mut.point(i);
          xs.insert(xs.end(), x.begin(), x.end());
          for (std::size_t q = 0; q < d; ++q) vs.push_back(u(rng));
          ws.push_back(0.5 * mut.weight(i));
        }
      }
      VelocityMeasure phit(d, xs, vs, ws);
      const double right = directional_pairing(phit, plan, t, Side::Right).value;
      const double left = directional_pairing(phit, plan, t, Side::Left).value;
      CHECK(right <= left + 1e-12);
      CHECK(std::abs(pairing_r_nu(phit, mu1).value - (1.0 - t) * right) <= 1e-9);
    }
  }
}

TEST_CASE("dini derivatives") {
  auto curve = [](double s) { return DiscreteMeasure::dirac({s}); };
  const double y = 0.3;
  CHECK(std::abs(dini_w2(curve, DiscreteMeasure::dirac({y}), 1.0, Side::Right) - (1.0 - y)) <= 1e-9);
  CHECK(std::abs(dini_w2(curve, DiscreteMeasure::dirac({y}), 1.0, Side::Left) - (1.0 - y)) <= 1e-9);

  // Splitting flow from the origin: 1/2 W^2(mu_t, delta_0) = t^2 / 2.
  auto split = [](double t) { return DiscreteMeasure(1, {t, -t}, {0.5, 0.5}); };
  CHECK(std::abs(dini_w2(split, DiscreteMeasure::dirac({0.0}), 0.4, Side::Right) - 0.4) <= 1e-9);

  // Consistency with the pairing of the velocity lift.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto phi = random_velocity(rng, 2, 4);
    auto nu = x_marginal(random_velocity(rng, 2, 3));
    const double h = 1e-3;
    const double d = dini_w2([&](double s) { return push_exp(phi, s); }, nu, 0.0, Side::Right, h);
    const double norm2 = velocity_norm(phi) * velocity_norm(phi);
    CHECK(std::abs(d - pairing_r_nu(phi, nu).value) <= 2.0 * h * norm2 + 1e-9);
  }
  CHECK_THROWS_AS(dini_w2(curve, DiscreteMeasure::dirac({0.0}), 0.0, Side::Right, 0.0),
                  InvalidArgument);
}

TEST_CASE("pairing JSON record") {
  auto r = pairing_r_nu(rhombus(), rhombus_nu());
  auto j = to_json(r);
  CHECK(j.find("\"side\":\"right\"") != std::string::npos);
  CHECK(j.find("i,j,mass") != std::string::npos);
}

TEST_CASE("property suite and its brute-force enumerator") {
  const std::vector<double> a{0.2, 0.5, 0.3}, b{0.6, 0.4};
  auto lib = transport_polytope_vertices(a, b);
  auto ref = oracle::transport_vertices(a, b);
  REQUIRE(lib.size() == ref.size());
  for (std::size_t k = 0; k < lib.size(); ++k) CHECK(lib[k] == ref[k].flow);

  auto bf = brute_force_pairing(rhombus(), zero_lift(rhombus_nu()));
  CHECK(bf.right == doctest::Approx(-1.0));
  CHECK(bf.left == doctest::Approx(1.0));

  auto rep = pairing_property_suite(2024, 100);
  CHECK(rep.passed);
  for (const auto& t : rep.properties) {
    CHECK(t.checked > 0);
    CHECK(t.failures == 0);
  }
  CHECK(to_json(rep) == to_json(pairing_property_suite(2024, 100)));
}
