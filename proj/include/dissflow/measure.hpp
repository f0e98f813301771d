#pragma once

// Finitely supported probability measures on R^d and on the tangent bundle
// TR^d = R^d x R^d, together with the elementary maps acting on them.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dissflow {

/// Absolute per-coordinate tolerance under which two atoms are identified.
inline constexpr double kMergeTolerance = 1e-12;

/// Weights must sum to one within this bound after construction.
inline constexpr double kWeightTolerance = 1e-12;

/// A probability measure sum_i w_i delta_{x_i} with x_i in R^d.
///
/// Points are stored row-major in one flat buffer. Atoms with zero weight are
/// dropped at construction; atoms are not merged unless explicitly requested
/// through merged().
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  /// Throws InvalidMeasure on empty input, non-finite data, negative weights
  /// or a total mass that differs from one by more than 1e-9. The accepted
  /// weights are renormalized to sum to one.
  DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

  static DiscreteMeasure dirac(std::span<const double> x);
  static DiscreteMeasure dirac(std::initializer_list<double> x);
  /// Equal weights 1/n on the given points.
  static DiscreteMeasure uniform(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  bool empty() const noexcept { return weights_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const { return weights_[i]; }

  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Atoms closer than `tol` in every coordinate are combined; the merged
  /// atom keeps the position of the first occurrence, and atoms are listed in
  /// order of first occurrence.
  DiscreteMeasure merged(double tol = kMergeTolerance) const;

  /// Lexicographically sorted and merged copy; two measures describe the same
  /// law iff their canonical forms agree.
  DiscreteMeasure canonical(double tol = kMergeTolerance) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// A probability measure on position-velocity pairs (x_i, v_i).
///
/// Several atoms may share the same position with different velocities; this
/// is how multivalued velocity distributions over one particle are encoded.
class VelocityMeasure {
 public:
  VelocityMeasure() = default;
  VelocityMeasure(std::size_t dim, std::vector<double> xs, std::vector<double> vs,
                  std::vector<double> weights);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }

  std::span<const double> x(std::size_t i) const { return {xs_.data() + i * dim_, dim_}; }
  std::span<const double> v(std::size_t i) const { return {vs_.data() + i * dim_, dim_}; }
  double weight(std::size_t i) const { return weights_[i]; }

  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& vs() const noexcept { return vs_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// The position atoms, one per pair, without aggregation. Used as the row
  /// or column measure of couplings between velocity measures.
  DiscreteMeasure positions() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> xs_;
  std::vector<double> vs_;
  std::vector<double> weights_;
};

/// Zero-velocity lift (i, 0)_# mu.
VelocityMeasure zero_lift(const DiscreteMeasure& mu);

/// sum_i w_i |x_i|^2
double second_moment(const DiscreteMeasure& mu);

/// (sum_i w_i |v_i|^2)^{1/2}
double velocity_norm(const VelocityMeasure& phi);

/// Push-forward under (x, v) -> x + t v. Coincident images are merged.
DiscreteMeasure push_exp(const VelocityMeasure& phi, double t);

/// Free motion of the pairs: (x, v) -> (x + t v, v).
VelocityMeasure shift(const VelocityMeasure& phi, double t);

/// Position marginal; weights of pairs sharing a position are aggregated.
DiscreteMeasure x_marginal(const VelocityMeasure& phi);

/// (x, v) -> (x, -v)
VelocityMeasure negate(const VelocityMeasure& phi);

/// (x, v) -> (x, v - lambda x)
VelocityMeasure lambda_transform(const VelocityMeasure& phi, double lambda);

/// Atoms at F^{-1}((k - 1/2)/n), k = 1..n, each with weight 1/n.
DiscreteMeasure quantile_discretize_1d(const std::function<double(double)>& quantile,
                                       std::size_t n);

/// Quantile discretization of the normalized Lebesgue measure on [a, b].
DiscreteMeasure uniform_interval(double a, double b, std::size_t n);

/// Throws DimensionMismatch unless both dimensions agree.
void require_same_dim(std::size_t a, std::size_t b, const char* what);

/// True when the canonical forms coincide within `tol` (positions, absolute)
/// and `wtol` (weights, absolute).
bool same_law(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol = 1e-12,
              double wtol = 1e-12);

}  // namespace dissflow
