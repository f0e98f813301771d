#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dissflow {

struct PlanEntry {
  std::size_t row;
  std::size_t col;
  double mass;
};

/// Primal network simplex for the dense transportation problem
///
///   min sum_ij c_ij f_ij   s.t.  sum_j f_ij = a_i,  sum_i f_ij = b_j,  f >= 0.
///
/// The basis is a spanning tree of the bipartite row/column graph with
/// exactly m + n - 1 arcs (degenerate zero-flow arcs included). The initial
/// basis comes from the northwest-corner rule, so no artificial arcs are
/// needed. Entering arcs follow Dantzig's rule with ties broken by the lowest
/// arc index; after a streak of degenerate pivots the solver switches to
/// Bland's rule until a pivot makes progress. Leaving-arc ties always go to
/// the lowest arc index.
///
/// Instances are single-threaded and own their scratch state.
class TransportSimplex {
 public:
  /// `cost` is m x n, row-major. Supplies and demands must have equal totals
  /// (up to rounding; the last basic arcs absorb the residual).
  TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                   std::vector<double> cost);

  /// Optimizes from the northwest-corner basis.
  void solve();

  /// Replaces the objective and re-optimizes starting from the current
  /// basis. Only arcs with allowed[i*n+j] != 0 may enter; every arc of the
  /// current basis must be allowed. This is how a secondary objective is
  /// optimized over a face of the transport polytope.
  void reoptimize(std::vector<double> cost, std::vector<char> allowed);

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }

  double objective() const;
  double cost(std::size_t i, std::size_t j) const { return cost_[i * n_ + j]; }

  /// c_ij - u_i - v_j under the current basis potentials.
  double reduced_cost(std::size_t i, std::size_t j) const {
    return cost_[i * n_ + j] - u_[i] - v_[j];
  }
  std::span<const double> row_potentials() const noexcept { return u_; }
  std::span<const double> col_potentials() const noexcept { return v_; }

  /// Basic arcs carrying positive flow.
  std::vector<PlanEntry> plan() const;

  std::size_t pivots() const noexcept { return pivots_; }
  double price_tolerance() const noexcept { return price_tol_; }

 private:
  struct Arc {
    std::size_t i;
    std::size_t j;
    double flow;
  };

  void northwest_corner();
  void build_tree();
  bool pivot(bool bland);
  void run();
  void recompute_flows();

  std::size_t m_;
  std::size_t n_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<double> cost_;
  std::vector<char> allowed_;
  double price_tol_ = 0.0;

  std::vector<Arc> basis_;
  std::vector<int> slot_of_arc_;  // m*n, -1 when non-basic

  // Tree scratch, rebuilt from basis_ before each pricing pass. Nodes are
  // rows 0..m-1 followed by columns m..m+n-1.
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> parent_slot_;
  std::vector<std::size_t> parent_node_;
  std::vector<std::size_t> depth_;
  std::vector<double> u_;
  std::vector<double> v_;

  std::size_t pivots_ = 0;
  double last_theta_ = 0.0;
};

}  // namespace dissflow
