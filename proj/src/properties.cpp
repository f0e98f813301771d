#include "dissflow/properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dissflow/error.hpp"
#include "dissflow/mpvf.hpp"
#include "dissflow/pairing.hpp"
#include "dissflow/transport.hpp"
#include "json_support.hpp"

namespace dissflow {

std::vector<std::vector<double>> transport_polytope_vertices(const std::vector<double>& a,
                                                             const std::vector<double>& b) {
  const std::size_t m = a.size(), n = b.size();
  if (m == 0 || n == 0) throw InvalidArgument("transport_polytope_vertices: empty marginal");
  if (m * n > 16) throw InvalidArgument("transport_polytope_vertices: more than 16 arcs");
  const std::size_t arcs = m * n, k = m + n - 1;
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    // Peel leaves of the chosen arc set; a spanning tree is consumed entirely.
    std::vector<double> rem(m + n);
    std::copy(a.begin(), a.end(), rem.begin());
    std::copy(b.begin(), b.end(), rem.begin() + std::ptrdiff_t(m));
    std::vector<int> degree(m + n, 0);
    for (auto s : pick) {
      ++degree[s / n];
      ++degree[m + s % n];
    }
    std::vector<char> used(k, 0);
    std::vector<double> flow(arcs, 0.0);
    std::size_t done = 0;
    for (bool progress = true; progress;) {
      progress = false;
      for (std::size_t x = 0; x < m + n && !progress; ++x) {
        if (degree[x] != 1) continue;
        for (std::size_t q = 0; q < k; ++q) {
          if (used[q]) continue;
          const std::size_t i = pick[q] / n, j = pick[q] % n;
          if (i != x && m + j != x) continue;
          const std::size_t y = (i == x) ? m + j : i;
          flow[pick[q]] = rem[x];
          rem[y] -= rem[x];
          rem[x] = 0.0;
          used[q] = 1;
          --degree[x];
          --degree[y];
          ++done;
          progress = true;
          break;
        }
      }
    }
    if (done == k) {
      bool feasible = true;
      for (double f : flow) feasible = feasible && f >= -1e-12;
      for (double r : rem) feasible = feasible && std::abs(r) <= 1e-9;
      if (feasible) {
        for (double& f : flow) f = std::max(f, 0.0);
        out.push_back(std::move(flow));
      }
    }
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == arcs - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t q = i; q < k; ++q) pick[q] = pick[q - 1] + 1;
  }
  return out;
}

BruteForcePairing brute_force_pairing(const VelocityMeasure& phi0, const VelocityMeasure& phi1) {
  require_same_dim(phi0.dim(), phi1.dim(), "brute_force_pairing");
  const std::size_t m = phi0.size(), n = phi1.size();
  std::vector<double> a(phi0.weights().begin(), phi0.weights().end());
  std::vector<double> b(phi1.weights().begin(), phi1.weights().end());
  std::vector<double> primary(m * n), secondary(m * n);
  double cmax = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double p = 0.0, s = 0.0;
      for (std::size_t q = 0; q < phi0.dim(); ++q) {
        const double dx = phi0.x(i)[q] - phi1.x(j)[q];
        p += dx * dx;
        s += dx * (phi0.v(i)[q] - phi1.v(j)[q]);
      }
      primary[i * n + j] = p;
      secondary[i * n + j] = s;
      cmax = std::max(cmax, p);
    }
  }
  auto value = [](const std::vector<double>& f, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * c[k];
    return s;
  };
  const auto vertices = transport_polytope_vertices(a, b);
  BruteForcePairing r{std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
  for (const auto& v : vertices) r.primary = std::min(r.primary, value(v, primary));
  for (const auto& v : vertices) {
    if (value(v, primary) > r.primary + 1e-9 * (1.0 + cmax)) continue;
    const double s = value(v, secondary);
    r.right = std::min(r.right, s);
    r.left = std::max(r.left, s);
  }
  return r;
}

namespace {

VelocityMeasure draw_velocity(std::mt19937_64& rng, std::size_t dim, std::size_t n, bool repeat) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xs(n * dim), vs(n * dim), w(n);
  for (auto& c : xs) c = u(rng);
  for (auto& c : vs) c = u(rng);
  if (repeat && n >= 2) {
    for (std::size_t i = 1; i < n; i += 2)
      std::copy_n(xs.begin() + std::ptrdiff_t((i - 1) * dim), dim,
                  xs.begin() + std::ptrdiff_t(i * dim));
  }
  double total = 0.0;
  for (auto& c : w) total += (c = 0.05 + std::abs(u(rng)));
  for (auto& c : w) c /= total;
  return VelocityMeasure(dim, xs, vs, w);
}

void record(PropertyTally& t, double violation) {
  ++t.checked;
  if (violation > t.tolerance) ++t.failures;
  t.max_violation = std::max(t.max_violation, violation);
}

}  // namespace

PropertySuiteReport pairing_property_suite(std::uint64_t seed, std::size_t n_instances,
                                           std::size_t max_atoms, std::size_t max_dim,
                                           std::size_t brute_force_atoms) {
  if (n_instances == 0) throw InvalidArgument("pairing_property_suite: n_instances must be >= 1");
  if (max_atoms == 0 || max_dim == 0) throw InvalidArgument("pairing_property_suite: empty ranges");
  PropertySuiteReport rep;
  rep.seed = seed;
  rep.n_instances = n_instances;
  rep.properties = {{"r_le_l", 1e-12},           {"measure_pairing_bounds", 1e-9},
                    {"negation_identity", 1e-9}, {"lambda_transform_identity", 1e-8},
                    {"semiconcavity", 1e-9},     {"brute_force_agreement", 1e-9}};
  auto& order = rep.properties[0];
  auto& bounds = rep.properties[1];
  auto& negation = rep.properties[2];
  auto& transform = rep.properties[3];
  auto& semiconcave = rep.properties[4];
  auto& brute = rep.properties[5];

  for (std::size_t k = 0; k < n_instances; ++k) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(k)));
    const std::size_t d = 1 + rng() % max_dim;
    const std::size_t m = 1 + rng() % max_atoms, n = 1 + rng() % max_atoms;
    const bool repeat = k % 3 == 0;
    auto p0 = draw_velocity(rng, d, m, repeat);
    auto p1 = draw_velocity(rng, d, n, repeat);
    const auto mu0 = x_marginal(p0), mu1 = x_marginal(p1);

    const double r = pairing_r(p0, p1).value;
    const double l = pairing_l(p0, p1).value;
    record(order, r - l);

    record(bounds, pairing_r_nu(p0, mu1).value + pairing_r_nu(p1, mu0).value - r);
    record(bounds, l - pairing_l_nu(p0, mu1).value - pairing_l_nu(p1, mu0).value);

    record(negation, std::abs(l + pairing_r(negate(p0), negate(p1)).value));

    std::uniform_real_distribution<double> lam(-2.0, 2.0);
    const double lambda = lam(rng);
    const double w2sq = w2(mu0, mu1).cost;
    const double lhs = pairing_r_nu(lambda_transform(p0, lambda), mu1).value;
    const double rhs = pairing_r_nu(p0, mu1).value -
                       0.5 * lambda * (second_moment(mu0) - second_moment(mu1) + w2sq);
    record(transform, std::abs(lhs - rhs));

    const double norm = velocity_norm(p0);
    auto g = [&](double s) { return 0.5 * w2(push_exp(p0, s), mu1).cost; };
    for (double s0 : {-1.0, -0.5, 0.0, 0.5}) {
      const double s1 = s0 + 0.5;
      const double bound = 0.5 * g(s0) + 0.5 * g(s1) - 0.125 * (s1 - s0) * (s1 - s0) * norm * norm;
      record(semiconcave, bound - g(0.5 * (s0 + s1)));
    }

    if (m <= brute_force_atoms && n <= brute_force_atoms) {
      const auto bf = brute_force_pairing(p0, p1);
      record(brute, std::max(std::abs(bf.right - r), std::abs(bf.left - l)));
    }
  }
  rep.passed = std::all_of(rep.properties.begin(), rep.properties.end(),
                           [](const PropertyTally& t) { return t.failures == 0; });
  return rep;
}

std::string to_json(const PropertySuiteReport& report) {
  detail::ojson j;
  j["seed"] = report.seed;
  j["n_instances"] = report.n_instances;
  detail::ojson props = detail::ojson::array();
  for (const auto& t : report.properties) {
    props.push_back({{"name", t.name},
                     {"tolerance", t.tolerance},
                     {"checked", t.checked},
                     {"failures", t.failures},
                     {"max_violation", t.max_violation}});
  }
  j["properties"] = std::move(props);
  j["passed"] = report.passed;
  return j.dump();
}

}  // namespace dissflow
