#include "dissflow/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "dissflow/error.hpp"

namespace dissflow {

namespace {
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
}

TransportSimplex::TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                                   std::vector<double> cost)
    : m_(supply.size()),
      n_(demand.size()),
      supply_(supply.begin(), supply.end()),
      demand_(demand.begin(), demand.end()),
      cost_(std::move(cost)) {
  if (m_ == 0 || n_ == 0) throw InvalidArgument("transport problem needs nonempty marginals");
  if (cost_.size() != m_ * n_) throw InvalidArgument("cost matrix has the wrong size");
  for (double c : cost_) {
    if (!std::isfinite(c)) throw InvalidArgument("non-finite transport cost");
  }
  adjacency_.resize(m_ + n_);
  parent_slot_.resize(m_ + n_);
  parent_node_.resize(m_ + n_);
  depth_.resize(m_ + n_);
  u_.resize(m_);
  v_.resize(n_);
}

void TransportSimplex::northwest_corner() {
  std::vector<double> a = supply_;
  std::vector<double> b = demand_;
  basis_.clear();
  basis_.reserve(m_ + n_ - 1);
  slot_of_arc_.assign(m_ * n_, -1);
  std::size_t i = 0, j = 0;
  while (true) {
    double x = std::max(0.0, std::min(a[i], b[j]));
    slot_of_arc_[i * n_ + j] = static_cast<int>(basis_.size());
    basis_.push_back({i, j, x});
    a[i] -= x;
    b[j] -= x;
    if (i == m_ - 1 && j == n_ - 1) break;
    if (i == m_ - 1) {
      ++j;
    } else if (j == n_ - 1) {
      ++i;
    } else if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
}

void TransportSimplex::build_tree() {
  for (auto& adj : adjacency_) adj.clear();
  for (std::size_t s = 0; s < basis_.size(); ++s) {
    adjacency_[basis_[s].i].push_back(s);
    adjacency_[m_ + basis_[s].j].push_back(s);
  }
  std::fill(parent_node_.begin(), parent_node_.end(), kNone);
  std::vector<char> seen(m_ + n_, 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  u_[0] = 0.0;
  depth_[0] = 0;
  std::size_t reached = 1;
  while (!queue.empty()) {
    std::size_t x = queue.front();
    queue.pop_front();
    for (std::size_t s : adjacency_[x]) {
      const Arc& arc = basis_[s];
      const double c = cost_[arc.i * n_ + arc.j];
      std::size_t y;
      if (x < m_) {
        y = m_ + arc.j;
        if (seen[y]) continue;
        v_[arc.j] = c - u_[arc.i];
      } else {
        y = arc.i;
        if (seen[y]) continue;
        u_[arc.i] = c - v_[arc.j];
      }
      seen[y] = 1;
      parent_node_[y] = x;
      parent_slot_[y] = s;
      depth_[y] = depth_[x] + 1;
      queue.push_back(y);
      ++reached;
    }
  }
  if (reached != m_ + n_) throw SolverError("transport basis is not a spanning tree");
}

// Returns false at optimality. `last_theta` receives the step length.
bool TransportSimplex::pivot(bool bland) {
  std::size_t entering = kNone;
  double best = -price_tol_;
  for (std::size_t idx = 0; idx < m_ * n_; ++idx) {
    if (slot_of_arc_[idx] >= 0) continue;
    if (!allowed_.empty() && !allowed_[idx]) continue;
    const std::size_t i = idx / n_, j = idx % n_;
    const double r = cost_[idx] - u_[i] - v_[j];
    if (bland) {
      if (r < -price_tol_) {
        entering = idx;
        break;
      }
    } else if (r < best) {
      best = r;
      entering = idx;
    }
  }
  if (entering == kNone) return false;

  const std::size_t ei = entering / n_, ej = entering % n_;
  // Tree path between row node ei and column node m+ej.
  std::vector<std::size_t> from_row, from_col;
  std::size_t x = ei, y = m_ + ej;
  while (depth_[x] > depth_[y]) {
    from_row.push_back(parent_slot_[x]);
    x = parent_node_[x];
  }
  while (depth_[y] > depth_[x]) {
    from_col.push_back(parent_slot_[y]);
    y = parent_node_[y];
  }
  while (x != y) {
    from_row.push_back(parent_slot_[x]);
    x = parent_node_[x];
    from_col.push_back(parent_slot_[y]);
    y = parent_node_[y];
  }
  // Cycle after the entering arc: column side upwards, then row side
  // downwards. Signs alternate starting with a decrease.
  std::vector<std::size_t> cycle(from_col);
  cycle.insert(cycle.end(), from_row.rbegin(), from_row.rend());

  double theta = std::numeric_limits<double>::infinity();
  std::size_t leaving = kNone;
  std::size_t leaving_arc_index = kNone;
  for (std::size_t k = 0; k < cycle.size(); k += 2) {
    const Arc& arc = basis_[cycle[k]];
    const double f = std::max(0.0, arc.flow);
    const std::size_t arc_index = arc.i * n_ + arc.j;
    if (f < theta || (f == theta && arc_index < leaving_arc_index)) {
      theta = f;
      leaving = cycle[k];
      leaving_arc_index = arc_index;
    }
  }
  if (leaving == kNone) throw SolverError("transport simplex found no leaving arc");

  for (std::size_t k = 0; k < cycle.size(); ++k) {
    Arc& arc = basis_[cycle[k]];
    arc.flow += (k % 2 == 0) ? -theta : theta;
  }
  slot_of_arc_[leaving_arc_index] = -1;
  basis_[leaving] = {ei, ej, theta};
  slot_of_arc_[entering] = static_cast<int>(leaving);
  ++pivots_;
  last_theta_ = theta;
  return true;
}

void TransportSimplex::run() {
  double cmax = 0.0;
  for (std::size_t idx = 0; idx < cost_.size(); ++idx) {
    if (allowed_.empty() || allowed_[idx]) cmax = std::max(cmax, std::abs(cost_[idx]));
  }
  price_tol_ = 1e-12 * (1.0 + cmax);

  const std::size_t nodes = m_ + n_;
  const std::size_t limit = 1000 + 50 * nodes * nodes + 10 * m_ * n_;
  std::size_t start = pivots_;
  std::size_t degenerate_streak = 0;
  bool bland = false;
  while (true) {
    build_tree();
    if (!pivot(bland)) break;
    if (last_theta_ > 0.0) {
      degenerate_streak = 0;
      bland = false;
    } else if (++degenerate_streak > 2 * nodes) {
      bland = true;
    }
    if (pivots_ - start > limit) throw SolverError("transport simplex exceeded its pivot limit");
  }
  recompute_flows();
}

void TransportSimplex::recompute_flows() {
  std::vector<double> rem(m_ + n_);
  std::copy(supply_.begin(), supply_.end(), rem.begin());
  std::copy(demand_.begin(), demand_.end(), rem.begin() + m_);
  std::vector<std::size_t> degree(m_ + n_);
  for (std::size_t x = 0; x < m_ + n_; ++x) degree[x] = adjacency_[x].size();
  std::vector<char> done(basis_.size(), 0);
  std::deque<std::size_t> leaves;
  for (std::size_t x = 0; x < m_ + n_; ++x) {
    if (degree[x] == 1) leaves.push_back(x);
  }
  while (!leaves.empty()) {
    std::size_t x = leaves.front();
    leaves.pop_front();
    if (degree[x] != 1) continue;
    std::size_t s = kNone;
    for (std::size_t cand : adjacency_[x]) {
      if (!done[cand]) {
        s = cand;
        break;
      }
    }
    if (s == kNone) continue;
    Arc& arc = basis_[s];
    const std::size_t y = (x < m_) ? m_ + arc.j : arc.i;
    const double f = std::max(0.0, rem[x]);
    arc.flow = f;
    rem[x] -= f;
    rem[y] -= f;
    done[s] = 1;
    --degree[x];
    if (--degree[y] == 1) leaves.push_back(y);
  }
}

void TransportSimplex::solve() {
  northwest_corner();
  allowed_.clear();
  run();
}

void TransportSimplex::reoptimize(std::vector<double> cost, std::vector<char> allowed) {
  if (basis_.empty()) throw SolverError("reoptimize called before solve");
  if (cost.size() != m_ * n_) throw InvalidArgument("cost matrix has the wrong size");
  if (!allowed.empty() && allowed.size() != m_ * n_) {
    throw InvalidArgument("arc mask has the wrong size");
  }
  for (const Arc& arc : basis_) {
    if (!allowed.empty() && !allowed[arc.i * n_ + arc.j]) {
      throw SolverError("current basis leaves the allowed arc set");
    }
  }
  cost_ = std::move(cost);
  allowed_ = std::move(allowed);
  run();
}

double TransportSimplex::objective() const {
  double total = 0.0;
  for (const Arc& arc : basis_) total += arc.flow * cost_[arc.i * n_ + arc.j];
  return total;
}

std::vector<PlanEntry> TransportSimplex::plan() const {
  std::vector<PlanEntry> out;
  for (const Arc& arc : basis_) {
    if (arc.flow > 0.0) out.push_back({arc.i, arc.j, arc.flow});
  }
  std::sort(out.begin(), out.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return out;
}

}  // namespace dissflow
