#include "dissflow/euler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dissflow/pairing.hpp"
#include "dissflow/transport.hpp"

namespace dissflow {

namespace {

// Systematic resampling onto at most `budget` equally weighted atoms.
DiscreteMeasure thin(const DiscreteMeasure& mu, std::size_t budget) {
  std::vector<double> coords;
  std::vector<double> weights;
  double cum = 0.0;
  std::size_t i = 0;
  for (std::size_t k = 0; k < budget; ++k) {
    const double u = (double(k) + 0.5) / double(budget);
    while (i + 1 < mu.size() && cum + mu.weight(i) <= u) cum += mu.weight(i++);
    auto p = mu.point(i);
    coords.insert(coords.end(), p.begin(), p.end());
    weights.push_back(1.0 / double(budget));
  }
  return DiscreteMeasure(mu.dim(), std::move(coords), std::move(weights)).merged();
}

}  // namespace

std::size_t step_count(double T, double tau) {
  if (!(tau > 0.0) || !(T > 0.0) || !std::isfinite(T / tau)) {
    throw InvalidArgument("step_count: need tau > 0 and T > 0");
  }
  const double q = T / tau;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(q));
}

EulerTrajectory euler_run(const SelectionFn& field, const DiscreteMeasure& mu0, double tau,
                          double T, double L, const EulerOptions& options) {
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("euler_run: need L > 0");
  EulerTrajectory traj;
  traj.tau = tau;
  traj.T = T;
  traj.L = L;
  traj.N = step_count(T, tau);
  traj.M.reserve(traj.N + 1);
  traj.phi.reserve(traj.N);
  traj.M.push_back(mu0);

  const double bound = L * (1.0 + options.stability_slack);
  for (std::size_t n = 0; n < traj.N; ++n) {
    const DiscreteMeasure& m = traj.M.back();
    auto candidates = field(m);
    if (candidates.empty()) throw InvalidArgument("field returned no selection");
    std::size_t chosen = candidates.size();
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < candidates.size(); ++s) {
      const double norm = velocity_norm(candidates[s]);
      smallest = std::min(smallest, norm);
      if (norm <= bound) {
        chosen = s;
        break;
      }
    }
    if (chosen == candidates.size()) {
      std::ostringstream os;
      os.precision(17);
      os << "step " << n << ": no selection satisfies |Phi|_2 <= L (smallest norm " << smallest
         << ", L = " << L << ")";
      throw StabilityViolation(n, smallest, L, os.str());
    }
    DiscreteMeasure next = push_exp(candidates[chosen], tau);
    if (next.size() > options.atom_budget) {
      if (!options.resample) {
        throw AtomBudgetExceeded("step " + std::to_string(n + 1) + ": " +
                                 std::to_string(next.size()) + " atoms exceed the budget of " +
                                 std::to_string(options.atom_budget));
      }
      next = thin(next, options.atom_budget);
      traj.resampled_steps.push_back(n + 1);
    }
    traj.phi.push_back(std::move(candidates[chosen]));
    traj.selection_index.push_back(chosen);
    traj.M.push_back(std::move(next));
  }
  return traj;
}

EulerTrajectory euler_run(const MpvfSpec& field, const DiscreteMeasure& mu0, double tau, double T,
                          double L, const EulerOptions& options) {
  field.validate();
  auto traj = euler_run([&](const DiscreteMeasure& m) { return selections(field, m); }, mu0, tau,
                        T, L, options);
  traj.field_json = spec_to_json(field);
  return traj;
}

DiscreteMeasure interpolate(const EulerTrajectory& traj, double t, InterpolationMode mode) {
  const double end = double(traj.N) * traj.tau;
  if (!(t >= 0.0) || t > end * (1.0 + 1e-12)) {
    throw InvalidArgument("interpolate: t outside [0, N tau]");
  }
  t = std::min(t, end);
  std::size_t n = static_cast<std::size_t>(std::floor(t / traj.tau + 1e-9));
  n = std::min(n, traj.N);
  if (mode == InterpolationMode::Piecewise || n == traj.N) return traj.M[n];
  const double s = std::max(0.0, t - double(n) * traj.tau);
  if (s == 0.0) return traj.M[n];
  return push_exp(traj.phi[n], s);
}

GlobalBounds global_bounds(const DiscreteMeasure& mu0, const VelocityMeasure& psi0, double T,
                           double lambda, const std::function<double(double)>& M_of_R,
                           const std::function<double(double)>& tau_bar) {
  if (!(T > 0.0)) throw InvalidArgument("global_bounds: need T > 0");
  const double lambda_plus = std::max(lambda, 0.0);
  GlobalBounds b;
  b.R = std::sqrt(second_moment(mu0)) +
        (velocity_norm(psi0) + 1.0) * std::sqrt(2.0 * T) * std::exp((1.0 + 2.0 * lambda_plus) * T);
  b.L = M_of_R(b.R);
  if (!(b.L > 0.0)) throw InvalidArgument("global_bounds: M(R) must be positive");
  const double tb = tau_bar ? tau_bar(b.R) : std::numeric_limits<double>::infinity();
  b.tau_max = std::min({1.0 / (b.L * b.L), tb, T});
  return b;
}

IeviReport ievi_check(const EulerTrajectory& traj, const DiscreteMeasure& nu) {
  IeviReport rep;
  std::vector<double> w2sq(traj.M.size());
  double scale = 0.0;
  for (std::size_t n = 0; n < traj.M.size(); ++n) {
    w2sq[n] = w2(traj.M[n], nu).cost;
    scale = std::max(scale, w2sq[n]);
  }
  rep.tolerance = 1e-7 * (1.0 + scale);
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < traj.N; ++n) {
    IeviRow row;
    row.n = n;
    row.lhs = 0.5 * w2sq[n + 1] - 0.5 * w2sq[n];
    row.rhs = traj.tau * pairing_r_nu(traj.phi[n], nu).value +
              0.5 * traj.tau * traj.tau * traj.L * traj.L;
    rep.max_violation = std::max(rep.max_violation, row.lhs - row.rhs);
    rep.rows.push_back(row);
  }
  if (rep.rows.empty()) rep.max_violation = 0.0;
  rep.passed = rep.max_violation <= rep.tolerance;
  return rep;
}

std::string trajectory_index_json(const EulerTrajectory& traj) {
  nlohmann::ordered_json j;
  j["tau"] = traj.tau;
  j["T"] = traj.T;
  j["L"] = traj.L;
  j["N"] = traj.N;
  j["field_spec"] = traj.field_json.empty() ? nlohmann::ordered_json(nullptr)
                                            : nlohmann::ordered_json::parse(traj.field_json);
  nlohmann::ordered_json snaps = nlohmann::ordered_json::array();
  for (std::size_t n = 0; n < traj.M.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%05zu.csv", n);
    snaps.push_back(name);
  }
  j["snapshots"] = std::move(snaps);
  j["resampled_steps"] = traj.resampled_steps;
  return j.dump(2);
}

}  // namespace dissflow
