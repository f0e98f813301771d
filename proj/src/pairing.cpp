#include "dissflow/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "dissflow/error.hpp"
#include "dissflow/io.hpp"

namespace dissflow {

namespace {

constexpr double kCompatTolerance = 1e-9;

bool close(std::span<const double> a, std::span<const double> b, double tol) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > tol) return false;
  }
  return true;
}

PairingResult from_lexi(LexiResult&& lexi, Side side) {
  PairingResult r;
  r.value = lexi.value;
  r.witness = std::move(lexi.plan);
  r.side = side;
  return r;
}

}  // namespace

const char* side_name(Side side) noexcept { return side == Side::Right ? "right" : "left"; }

PairingResult pairing_r(const VelocityMeasure& phi0, const VelocityMeasure& phi1,
                        const LexiOptions& options) {
  return from_lexi(lexi_transport_lp(phi0, phi1, Objective::Minimize, options), Side::Right);
}

PairingResult pairing_l(const VelocityMeasure& phi0, const VelocityMeasure& phi1,
                        const LexiOptions& options) {
  return from_lexi(lexi_transport_lp(phi0, phi1, Objective::Maximize, options), Side::Left);
}

PairingResult pairing_r_nu(const VelocityMeasure& phi, const DiscreteMeasure& nu,
                           const LexiOptions& options) {
  return pairing_r(phi, zero_lift(nu), options);
}

PairingResult pairing_l_nu(const VelocityMeasure& phi, const DiscreteMeasure& nu,
                           const LexiOptions& options) {
  return pairing_l(phi, zero_lift(nu), options);
}

PairingResult directional_pairing(const VelocityMeasure& phi, const Coupling& gamma, double t,
                                  Side side) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("directional_pairing: t must lie in [0, 1]");
  require_same_dim(phi.dim(), gamma.rows().dim(), "directional_pairing");
  if (!is_optimal(gamma)) throw InvalidArgument("directional_pairing: plan is not optimal");

  const std::size_t d = phi.dim();
  const auto& entries = gamma.entries();
  const std::size_t ne = entries.size();

  // Interpolated position of each entry.
  std::vector<double> z(ne * d);
  for (std::size_t e = 0; e < ne; ++e) {
    auto x0 = gamma.rows().point(entries[e].row);
    auto x1 = gamma.cols().point(entries[e].col);
    for (std::size_t k = 0; k < d; ++k) z[e * d + k] = (1.0 - t) * x0[k] + t * x1[k];
  }
  auto zpt = [&](std::size_t e) { return std::span<const double>(z.data() + e * d, d); };

  // Position groups of Phi in order of first occurrence.
  std::vector<std::size_t> group_of_atom(phi.size());
  std::vector<std::size_t> representative;
  for (std::size_t a = 0; a < phi.size(); ++a) {
    std::size_t g = 0;
    for (; g < representative.size(); ++g) {
      if (close(phi.x(representative[g]), phi.x(a), kCompatTolerance)) break;
    }
    if (g == representative.size()) representative.push_back(a);
    group_of_atom[a] = g;
  }
  const std::size_t ng = representative.size();

  std::vector<std::vector<std::size_t>> atoms(ng), ents(ng);
  for (std::size_t a = 0; a < phi.size(); ++a) atoms[group_of_atom[a]].push_back(a);
  for (std::size_t e = 0; e < ne; ++e) {
    std::size_t g = 0;
    for (; g < ng; ++g) {
      if (close(phi.x(representative[g]), zpt(e), kCompatTolerance)) break;
    }
    if (g == ng) {
      throw InvalidArgument("directional_pairing: plan moves mass to a position outside Phi");
    }
    ents[g].push_back(e);
  }

  std::vector<PlanEntry> witness;
  double value = 0.0;
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& A = atoms[g];
    const auto& E = ents[g];
    std::vector<double> supply(E.size()), demand(A.size());
    for (std::size_t r = 0; r < E.size(); ++r) supply[r] = entries[E[r]].mass;
    for (std::size_t c = 0; c < A.size(); ++c) demand[c] = phi.weight(A[c]);
    const double s_total = std::accumulate(supply.begin(), supply.end(), 0.0);
    const double d_total = std::accumulate(demand.begin(), demand.end(), 0.0);
    if (E.empty() || std::abs(s_total - d_total) > kCompatTolerance) {
      throw InvalidArgument("directional_pairing: position marginal of Phi differs from x^t_# gamma");
    }
    for (double& w : demand) w *= s_total / d_total;

    std::vector<double> cost(E.size() * A.size());
    std::vector<double> signed_cost(cost.size());
    for (std::size_t r = 0; r < E.size(); ++r) {
      auto x0 = gamma.rows().point(entries[E[r]].row);
      auto x1 = gamma.cols().point(entries[E[r]].col);
      for (std::size_t c = 0; c < A.size(); ++c) {
        auto v = phi.v(A[c]);
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += (x0[k] - x1[k]) * v[k];
        cost[r * A.size() + c] = s;
        signed_cost[r * A.size() + c] = side == Side::Right ? s : -s;
      }
    }
    TransportSimplex solver(supply, demand, std::move(signed_cost));
    solver.solve();
    for (const auto& pe : solver.plan()) {
      if (pe.mass <= 1e-15) continue;
      value += pe.mass * cost[pe.row * A.size() + pe.col];
      witness.push_back({E[pe.row], A[pe.col], pe.mass});
    }
  }

  std::vector<double> entry_mass(ne);
  for (std::size_t e = 0; e < ne; ++e) entry_mass[e] = entries[e].mass;
  std::sort(witness.begin(), witness.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  PairingResult r;
  r.value = value;
  r.side = side;
  r.witness = Coupling(DiscreteMeasure(d, std::move(z), std::move(entry_mass)), phi.positions(),
                       std::move(witness));
  return r;
}

double dini_w2(const std::function<DiscreteMeasure(double)>& curve, const DiscreteMeasure& nu,
               double t, Side side, double h) {
  if (!(h > 0.0)) throw InvalidArgument("dini_w2: h must be positive");
  auto g = [&](double s) { return 0.5 * w2(curve(s), nu).cost; };
  const double g0 = g(t);
  auto quotient = [&](double step) {
    return side == Side::Right ? (g(t + step) - g0) / step : (g0 - g(t - step)) / step;
  };
  return 2.0 * quotient(0.5 * h) - quotient(h);
}

std::string to_json(const PairingResult& result) {
  nlohmann::ordered_json j;
  j["value"] = result.value;
  j["side"] = side_name(result.side);
  j["witness"] = plan_to_csv(result.witness);
  return j.dump();
}

}  // namespace dissflow
