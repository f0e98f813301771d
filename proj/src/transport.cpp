#include "dissflow/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "dissflow/error.hpp"

namespace dissflow {

namespace {

// Flows below this are rounding residue of the pivoting and are dropped.
constexpr double kDust = 1e-15;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<PlanEntry> drop_dust(std::vector<PlanEntry> entries) {
  std::erase_if(entries, [](const PlanEntry& e) { return e.mass <= kDust; });
  return entries;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// ---------------------------------------------------------------------------
// Coupling

Coupling::Coupling(DiscreteMeasure rows, DiscreteMeasure cols, std::vector<PlanEntry> entries)
    : rows_(std::move(rows)), cols_(std::move(cols)), entries_(std::move(entries)) {
  require_same_dim(rows_.dim(), cols_.dim(), "coupling");
  std::vector<double> row_sum(rows_.size(), 0.0), col_sum(cols_.size(), 0.0);
  for (const auto& e : entries_) {
    if (e.row >= rows_.size() || e.col >= cols_.size()) {
      throw InvalidArgument("coupling entry index out of range");
    }
    if (!(e.mass >= 0.0) || !std::isfinite(e.mass)) {
      throw InvalidArgument("coupling entry has invalid mass");
    }
    row_sum[e.row] += e.mass;
    col_sum[e.col] += e.mass;
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (std::abs(row_sum[i] - rows_.weight(i)) > 1e-9) {
      throw InvalidArgument("coupling row marginal does not match row measure");
    }
  }
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    if (std::abs(col_sum[j] - cols_.weight(j)) > 1e-9) {
      throw InvalidArgument("coupling column marginal does not match column measure");
    }
  }
}

double Coupling::cost() const {
  double c = 0.0;
  for (const auto& e : entries_) {
    c += e.mass * squared_distance(rows_.point(e.row), cols_.point(e.col));
  }
  return c;
}

Coupling Coupling::transposed() const {
  std::vector<PlanEntry> t;
  t.reserve(entries_.size());
  for (const auto& e : entries_) t.push_back({e.col, e.row, e.mass});
  std::sort(t.begin(), t.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return Coupling(cols_, rows_, std::move(t));
}

// ---------------------------------------------------------------------------
// W2

TransportResult w2_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu.dim(), nu.dim(), "w2_1d");
  if (mu.dim() != 1) throw DimensionMismatch("w2_1d requires one-dimensional measures");
  const auto start = Clock::now();

  auto sorted = [](const DiscreteMeasure& m) {
    std::vector<std::size_t> idx(m.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return m.point(a)[0] < m.point(b)[0]; });
    return idx;
  };
  const auto pi = sorted(mu);
  const auto pj = sorted(nu);

  std::vector<PlanEntry> entries;
  std::size_t a = 0, b = 0;
  double ra = mu.weight(pi[0]);
  double rb = nu.weight(pj[0]);
  while (a < pi.size() && b < pj.size()) {
    const double x = std::min(ra, rb);
    if (x > kDust) entries.push_back({pi[a], pj[b], x});
    ra -= x;
    rb -= x;
    if (ra <= rb) {
      if (++a < pi.size()) ra = mu.weight(pi[a]);
    } else {
      if (++b < pj.size()) rb = nu.weight(pj[b]);
    }
  }
  std::sort(entries.begin(), entries.end(), [](const PlanEntry& l, const PlanEntry& r) {
    return l.row != r.row ? l.row < r.row : l.col < r.col;
  });

  TransportResult result;
  result.plan = Coupling(mu, nu, std::move(entries));
  result.cost = result.plan.cost();
  result.runtime_ms = elapsed_ms(start);
  return result;
}

TransportResult w2_simplex(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu.dim(), nu.dim(), "w2");
  const auto start = Clock::now();
  const std::size_t m = mu.size(), n = nu.size();
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = squared_distance(mu.point(i), nu.point(j));
  }
  TransportSimplex solver(mu.weights(), nu.weights(), std::move(cost));
  solver.solve();

  TransportResult result;
  result.plan = Coupling(mu, nu, drop_dust(solver.plan()));
  result.cost = result.plan.cost();
  auto u = solver.row_potentials();
  auto v = solver.col_potentials();
  result.row_potential = std::vector<double>(u.begin(), u.end());
  result.col_potential = std::vector<double>(v.begin(), v.end());
  result.runtime_ms = elapsed_ms(start);
  return result;
}

TransportResult w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu.dim(), nu.dim(), "w2");
  if (mu.dim() == 1) return w2_1d(mu, nu);
  return w2_simplex(mu, nu);
}

double w2_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return std::sqrt(std::max(0.0, w2(mu, nu).cost));
}

bool is_optimal(const Coupling& plan, std::optional<double> tol) {
  const double best = w2(plan.rows(), plan.cols()).cost;
  const double slack = tol.value_or(1e-9 * (1.0 + best));
  return plan.cost() <= best + slack;
}

DiscreteMeasure geodesic_point(const Coupling& plan, double t, bool check_optimal) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("geodesic_point: t must lie in [0, 1]");
  if (check_optimal && !is_optimal(plan)) {
    throw InvalidArgument("geodesic_point: plan is not optimal");
  }
  const std::size_t d = plan.rows().dim();
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(plan.entries().size() * d);
  for (const auto& e : plan.entries()) {
    auto x = plan.rows().point(e.row);
    auto y = plan.cols().point(e.col);
    for (std::size_t k = 0; k < d; ++k) coords.push_back((1.0 - t) * x[k] + t * y[k]);
    weights.push_back(e.mass);
  }
  return DiscreteMeasure(d, std::move(coords), std::move(weights)).merged();
}

// ---------------------------------------------------------------------------
// Lexicographic LP

LexiResult lexi_transport_lp(const VelocityMeasure& row, const VelocityMeasure& col,
                             Objective objective, const LexiOptions& options) {
  require_same_dim(row.dim(), col.dim(), "lexi_transport_lp");
  const std::size_t m = row.size(), n = col.size();

  std::vector<double> primary(m * n);
  std::vector<double> secondary(m * n);
  double cmax = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = squared_distance(row.x(i), col.x(j));
      primary[i * n + j] = c;
      cmax = std::max(cmax, c);
      double s = 0.0;
      auto xi = row.x(i), yj = col.x(j), vi = row.v(i), wj = col.v(j);
      for (std::size_t k = 0; k < row.dim(); ++k) s += (xi[k] - yj[k]) * (vi[k] - wj[k]);
      secondary[i * n + j] = s;
    }
  }

  TransportSimplex solver(row.weights(), col.weights(), primary);
  solver.solve();

  const double threshold = options.face_tolerance * (1.0 + cmax);
  std::vector<char> allowed(m * n, 0);
  std::size_t face_arcs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (solver.reduced_cost(i, j) <= threshold) {
        allowed[i * n + j] = 1;
        ++face_arcs;
      }
    }
  }

  std::vector<double> signed_secondary = secondary;
  if (objective == Objective::Maximize) {
    for (double& s : signed_secondary) s = -s;
  }
  solver.reoptimize(std::move(signed_secondary), std::move(allowed));

  LexiResult result;
  auto entries = drop_dust(solver.plan());
  for (const auto& e : entries) {
    result.value += e.mass * secondary[e.row * n + e.col];
    result.primary_cost += e.mass * primary[e.row * n + e.col];
  }
  if (!std::isfinite(result.value)) throw SolverError("lexicographic LP produced a non-finite value");
  result.plan = Coupling(row.positions(), col.positions(), std::move(entries));
  result.face_arcs = face_arcs;
  return result;
}

std::string to_record(const TransportResult& result) {
  nlohmann::ordered_json j;
  j["cost"] = result.cost;
  j["n_entries"] = result.plan.entries().size();
  j["runtime_ms"] = result.runtime_ms;
  return j.dump();
}

}  // namespace dissflow
