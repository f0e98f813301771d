#include <doctest.h>

#include <cmath>
#include <random>

#include "dissflow/error.hpp"
#include "dissflow/io.hpp"
#include "dissflow/measure.hpp"
#include "dissflow/transport.hpp"

using namespace dissflow;

namespace {

VelocityMeasure random_velocity(std::mt19937_64& rng, std::size_t dim, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xs(n * dim), vs(n * dim), w(n);
  for (auto& c : xs) c = u(rng);
  for (auto& c : vs) c = u(rng);
  double total = 0.0;
  for (auto& c : w) total += (c = 0.1 + std::abs(u(rng)));
  for (auto& c : w) c /= total;
  return VelocityMeasure(dim, xs, vs, w);
}

}  // namespace

TEST_CASE("construction validates and normalizes") {
  CHECK_THROWS_AS(DiscreteMeasure(1, {}, {}), InvalidMeasure);
  CHECK_THROWS_AS(DiscreteMeasure(1, {0.0, 1.0}, {0.5, 0.4}), InvalidMeasure);
  CHECK_THROWS_AS(DiscreteMeasure(1, {0.0, 1.0}, {1.5, -0.5}), InvalidMeasure);
  CHECK_THROWS_AS(DiscreteMeasure(1, {NAN}, {1.0}), InvalidMeasure);
  CHECK_THROWS_AS(DiscreteMeasure(2, {0.0, 1.0, 2.0}, {1.0}), InvalidMeasure);

  DiscreteMeasure m(1, {0.0, 1.0, 2.0}, {0.5, 0.0, 0.5});
  CHECK(m.size() == 2);
  CHECK(m.point(1)[0] == 2.0);
  double s = 0.0;
  for (double w : m.weights()) s += w;
  CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("second moment") {
  CHECK(second_moment(DiscreteMeasure::dirac({0.0})) == 0.0);
  CHECK(second_moment(DiscreteMeasure(1, {-1.0, 1.0}, {0.5, 0.5})) == doctest::Approx(1.0));
  // Midpoint rule: sum ((k - 1/2)/100)^2 / 100 = 1/3 - 1/(12 * 100^2).
  const double exact = 1.0 / 3.0 - 1.0 / 120000.0;
  CHECK(std::abs(second_moment(uniform_interval(0.0, 1.0, 100)) - exact) <= 1e-14);
  CHECK(std::abs(second_moment(uniform_interval(0.0, 1.0, 100)) - 1.0 / 3.0) <= 1e-4 * 3);
}

TEST_CASE("velocity norm") {
  CHECK(velocity_norm(zero_lift(DiscreteMeasure::dirac({2.0, 3.0}))) == 0.0);
  CHECK(velocity_norm(VelocityMeasure(1, {0.0, 0.0}, {1.0, -1.0}, {0.5, 0.5})) ==
        doctest::Approx(1.0));
  CHECK(velocity_norm(VelocityMeasure(2, {0.0, 0.0}, {3.0, 4.0}, {1.0})) == doctest::Approx(5.0));
}

TEST_CASE("push_exp") {
  VelocityMeasure phi(1, {0.0}, {1.0}, {1.0});
  CHECK(same_law(push_exp(phi, 0.25), DiscreteMeasure::dirac({0.25})));

  VelocityMeasure split(1, {0.0, 0.0}, {1.0, -1.0}, {0.5, 0.5});
  CHECK(same_law(push_exp(split, 1.0), DiscreteMeasure(1, {1.0, -1.0}, {0.5, 0.5})));
  CHECK(same_law(push_exp(split, 0.0), x_marginal(split)));
  CHECK(push_exp(split, 0.0).size() == 1);

  // Images closer than the merge tolerance collapse into one atom.
  VelocityMeasure near(1, {0.0, 1e-13}, {0.0, 0.0}, {0.5, 0.5});
  CHECK(push_exp(near, 1.0).size() == 1);
  VelocityMeasure apart(1, {0.0, 1e-10}, {0.0, 0.0}, {0.5, 0.5});
  CHECK(push_exp(apart, 1.0).size() == 2);
}

TEST_CASE("x_marginal aggregates shared positions") {
  VelocityMeasure phi(1, {0.0, 0.0}, {1.0, -1.0}, {0.5, 0.5});
  auto m = x_marginal(phi);
  CHECK(m.size() == 1);
  CHECK(m.weight(0) == doctest::Approx(1.0));

  VelocityMeasure single(2, {1.0, 2.0}, {3.0, 4.0}, {1.0});
  CHECK(same_law(x_marginal(single), DiscreteMeasure::dirac({1.0, 2.0})));
}

TEST_CASE("negate and lambda transform") {
  std::mt19937_64 rng(7);
  auto phi = random_velocity(rng, 2, 5);
  auto nn = negate(negate(phi));
  CHECK(nn.vs() == phi.vs());
  CHECK(velocity_norm(negate(phi)) == doctest::Approx(velocity_norm(phi)));

  VelocityMeasure one(1, {1.0}, {1.0}, {1.0});
  CHECK(lambda_transform(one, 1.0).v(0)[0] == 0.0);
  CHECK(lambda_transform(phi, 0.0).vs() == phi.vs());

  auto a = lambda_transform(lambda_transform(phi, 0.3), -1.1);
  auto b = lambda_transform(phi, 0.3 - 1.1);
  for (std::size_t k = 0; k < a.vs().size(); ++k) CHECK(std::abs(a.vs()[k] - b.vs()[k]) <= 1e-14);
}

TEST_CASE("quantile discretization") {
  CHECK(same_law(uniform_interval(0.0, 1.0, 1), DiscreteMeasure::dirac({0.5})));
  CHECK(same_law(uniform_interval(0.0, 1.0, 2), DiscreteMeasure(1, {0.25, 0.75}, {0.5, 0.5})));
  CHECK_THROWS_AS(quantile_discretize_1d([](double) { return INFINITY; }, 3), InvalidMeasure);
  CHECK_THROWS_AS(quantile_discretize_1d([](double u) { return u; }, 0), InvalidMeasure);
}

TEST_CASE("free motion semigroup and displacement bound") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto phi = random_velocity(rng, 1 + trial % 3, 2 + trial % 5);
    const double s = 0.3, t = 0.45;
    CHECK(same_law(push_exp(phi, s + t), push_exp(shift(phi, t), s), 1e-12, 1e-12));
    const double d = w2_distance(push_exp(phi, t), x_marginal(phi));
    CHECK(d <= t * velocity_norm(phi) + 1e-12);
  }
}

TEST_CASE("csv round trip is lossless") {
  std::mt19937_64 rng(3);
  auto phi = random_velocity(rng, 3, 6);
  auto back = velocity_from_csv(velocity_to_csv(phi));
  CHECK(back.xs() == phi.xs());
  CHECK(back.vs() == phi.vs());
  CHECK(back.weights() == phi.weights());

  auto mu = phi.positions();
  auto mu2 = measure_from_csv(measure_to_csv(mu));
  CHECK(mu2.coords() == mu.coords());
  CHECK(mu2.weights() == mu.weights());

  CHECK_THROWS_AS(measure_from_csv("x,w\n1,1\n"), IoError);
  CHECK_THROWS_AS(measure_from_csv("w,x1\n1,abc\n"), IoError);
}

TEST_CASE("sha256 known vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("binary operations reject mismatched dimensions") {
  CHECK_THROWS_AS(w2(DiscreteMeasure::dirac({0.0}), DiscreteMeasure::dirac({0.0, 1.0})),
                  DimensionMismatch);
}
