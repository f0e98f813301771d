#pragma once

// Exact quadratic optimal transport between discrete measures, displacement
// interpolation, and the lexicographic LP behind the duality pairings.

#include <optional>
#include <string>
#include <vector>

#include "dissflow/measure.hpp"
#include "dissflow/network_simplex.hpp"

namespace dissflow {

/// A transport plan between two discrete measures, stored sparsely. Row and
/// column indices refer to atoms of the stored measures.
class Coupling {
 public:
  Coupling() = default;
  /// Throws InvalidArgument if the marginals differ from the measures'
  /// weights by more than 1e-9 or an entry is out of range.
  Coupling(DiscreteMeasure rows, DiscreteMeasure cols, std::vector<PlanEntry> entries);

  const DiscreteMeasure& rows() const noexcept { return rows_; }
  const DiscreteMeasure& cols() const noexcept { return cols_; }
  const std::vector<PlanEntry>& entries() const noexcept { return entries_; }

  /// sum mass * |x_i - y_j|^2
  double cost() const;
  Coupling transposed() const;

 private:
  DiscreteMeasure rows_;
  DiscreteMeasure cols_;
  std::vector<PlanEntry> entries_;
};

struct TransportResult {
  double cost = 0.0;  // W_2^2
  Coupling plan;
  // Dual potentials with u_i + v_j <= |x_i - y_j|^2; present when the
  // network simplex produced the result.
  std::optional<std::vector<double>> row_potential;
  std::optional<std::vector<double>> col_potential;
  double runtime_ms = 0.0;
};

/// Optimal transport for the squared Euclidean cost. In one dimension this
/// delegates to w2_1d; otherwise it runs the network simplex.
TransportResult w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Network simplex regardless of dimension.
TransportResult w2_simplex(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Co-monotone coupling of sorted atoms; requires d = 1.
TransportResult w2_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// sqrt(W_2^2), clamped at zero.
double w2_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Default optimality slack 1e-9 * (1 + cost).
bool is_optimal(const Coupling& plan, std::optional<double> tol = std::nullopt);

/// Displacement interpolation ((1-t)x + t y)_# plan for t in [0, 1]. The plan
/// is checked for optimality unless `check_optimal` is false.
DiscreteMeasure geodesic_point(const Coupling& plan, double t, bool check_optimal = true);

enum class Objective { Minimize, Maximize };

struct LexiOptions {
  /// Arcs whose primary reduced cost is at most face_tolerance*(1+max cost)
  /// are treated as lying on the optimal face.
  double face_tolerance = 1e-9;
};

struct LexiResult {
  double value = 0.0;         // optimal secondary objective
  double primary_cost = 0.0;  // W_2^2 of the position marginals
  Coupling plan;              // over the atoms of the two velocity measures
  std::size_t face_arcs = 0;  // number of arcs admitted to the optimal face
};

/// Optimizes sum Theta_ij <x_i - y_j, v_i - w_j> over couplings Theta of the
/// two velocity measures whose position plan is W_2-optimal. Solved
/// lexicographically: the quadratic cost is minimized first, then the
/// secondary objective is optimized over the arcs with zero primary reduced
/// cost, warm-starting from the primary optimal basis.
LexiResult lexi_transport_lp(const VelocityMeasure& row, const VelocityMeasure& col,
                             Objective objective, const LexiOptions& options = {});

/// {"cost": ..., "n_entries": ..., "runtime_ms": ...}
std::string to_record(const TransportResult& result);

double squared_distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace dissflow
