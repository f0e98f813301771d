#pragma once

// Multivalued probability vector fields: a section F[mu] is a set of velocity
// measures whose position marginal is mu. Built-in families are described
// declaratively by MpvfSpec and evaluated on discrete measures.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dissflow/measure.hpp"

namespace dissflow {

enum class FieldKind {
  Potential,          // v = -scale * grad P(x)
  Interaction,        // v = -scale * sum_j w_j grad W(x - x_j)
  Constant,           // mu (x) theta
  Rotation,           // v = scale * R x, R(x1, x2) = (x2, -x1)
  SplittingParticle,  // d = 1, unit speed away from the median point
  TowardMeasure,      // v = sign * (b(x) - x), b the barycentric projection onto target
  PairwiseMap,        // v = scale * sum_j w_j A(x - x_j)
  PerParticleMap,     // v = F0(x)
  CompositeSum,       // velocity-wise sum of children
  SelectionList,      // multivalued: ordered list of alternative selections
};

const char* kind_name(FieldKind kind) noexcept;
std::optional<FieldKind> kind_from_name(std::string_view name) noexcept;

/// Declarative field description. Construct through the factory functions,
/// which validate parameters.
struct MpvfSpec {
  FieldKind kind = FieldKind::Constant;
  std::string name;    // named potential, kernel or map
  double scale = 1.0;  // multiplies the velocity; negative values flip it
  double offset = 0.0; // interaction kernels only; a nonzero value breaks evenness
  DiscreteMeasure theta;   // constant field: the velocity distribution
  DiscreteMeasure target;  // toward_measure
  double sign = 1.0;       // toward_measure
  std::vector<MpvfSpec> children;

  /// Throws ConfigError on invalid parameters.
  void validate() const;

  /// Required dimension, or 0 when any dimension is accepted.
  std::size_t required_dim() const;

  static MpvfSpec potential(std::string name, double scale = 1.0);
  static MpvfSpec interaction(std::string kernel, double scale = 1.0, double offset = 0.0);
  static MpvfSpec constant(DiscreteMeasure theta);
  static MpvfSpec rotation(double scale = 1.0);
  static MpvfSpec splitting_particle();
  static MpvfSpec toward_measure(DiscreteMeasure target, double sign = 1.0);
  static MpvfSpec pairwise_map(std::string name, double scale = 1.0);
  static MpvfSpec per_particle_map(std::string name, double scale = 1.0);
  static MpvfSpec composite_sum(std::vector<MpvfSpec> children);
  static MpvfSpec selection_list(std::vector<MpvfSpec> children);
};

// Named built-ins.
//   potentials:      quadratic_potential (|x|^2/2), quartic_potential (|x|^4/4)
//   kernels:         quadratic_interaction (|z|^2/2), attractive_quartic (|z|^4/4)
//   pairwise maps:   rotation_pairwise (R z, d = 2), linear_contraction_pairwise (-z)
//   per-particle:    rotation (R x, d = 2), linear_contraction (-x),
//                    neg_sign (-sign x_k per coordinate, 0 at 0), sine (sin x_k)
std::vector<std::string> builtin_names(FieldKind kind);

/// Lipschitz constant of a per-particle map at unit scale.
double per_particle_lipschitz(const std::string& name);

/// The canonical element of F[mu]. For a selection list this is the first
/// selection. Atoms are laid out in the order of mu, velocities of one atom
/// consecutively.
VelocityMeasure evaluate(const MpvfSpec& field, const DiscreteMeasure& mu);

/// All listed elements of F[mu] in preference order; single-valued fields
/// return one element.
std::vector<VelocityMeasure> selections(const MpvfSpec& field, const DiscreteMeasure& mu);

/// Norm of the canonical selection.
double field_norm(const MpvfSpec& field, const DiscreteMeasure& mu);

/// Median point B(nu) = sup{x : nu(]-inf, x]) <= 1/2} of a 1-D measure.
double splitting_point(const DiscreteMeasure& nu);

// JSON round trip. See README for the schema.
std::string spec_to_json(const MpvfSpec& field);
MpvfSpec spec_from_json(std::string_view text);

// ---------------------------------------------------------------------------
// Dissipativity certificates

using FieldFn = std::function<VelocityMeasure(const DiscreteMeasure&)>;

/// Seeded generator of random measure pairs: n atoms uniform in
/// {min_atoms..max_atoms}, coordinates uniform in [-box, box]^d, equal
/// weights. Pair k uses a seed derived from (seed, k) so pairs are
/// independent of evaluation order.
struct MeasureSampler {
  std::size_t dim = 1;
  std::size_t min_atoms = 2;
  std::size_t max_atoms = 8;
  double box = 1.0;
  std::uint64_t seed = 0;

  DiscreteMeasure sample(std::uint64_t stream) const;
  std::pair<DiscreteMeasure, DiscreteMeasure> pair(std::size_t k) const;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct PairRecord {
  double w2sq = 0.0;
  double residual = 0.0;  // lhs - lambda * w2sq
  bool passed = false;    // residual <= 1e-7 * (1 + w2sq)
};

struct DissipativityReport {
  double lambda_tested = 0.0;
  std::size_t n_pairs = 0;
  double max_residual = 0.0;
  std::size_t worst_index = 0;
  std::string worst_mu0;  // measure CSV
  std::string worst_mu1;
  std::vector<PairRecord> pairs;
  bool passed = false;
};

/// Residual [Phi0, Phi1]_r - lambda W_2^2(mu0, mu1) over sampled pairs.
DissipativityReport dissipativity_certificate(const FieldFn& field, const MeasureSampler& sampler,
                                              double lambda, std::size_t n_pairs);
DissipativityReport dissipativity_certificate(const MpvfSpec& field, const MeasureSampler& sampler,
                                              double lambda, std::size_t n_pairs);

/// Residual [Phi0, mu1]_r + [Phi1, mu0]_r - lambda W_2^2(mu0, mu1).
DissipativityReport weak_dissipativity_certificate(const FieldFn& field,
                                                   const MeasureSampler& sampler, double lambda,
                                                   std::size_t n_pairs);
DissipativityReport weak_dissipativity_certificate(const MpvfSpec& field,
                                                   const MeasureSampler& sampler, double lambda,
                                                   std::size_t n_pairs);

std::string to_json(const DissipativityReport& report);

}  // namespace dissflow
