#pragma once

// Seeded property suite for the duality pairings, with a brute-force LP
// oracle over the vertices of the transportation polytope.

#include <cstdint>
#include <string>
#include <vector>

#include "dissflow/measure.hpp"

namespace dissflow {

/// Vertices of {f >= 0, row sums a, column sums b}, flows row-major. Every
/// (m + n - 1)-subset of arcs is tried, so only small m, n are practical.
/// Throws InvalidArgument when m * n > 16.
std::vector<std::vector<double>> transport_polytope_vertices(const std::vector<double>& a,
                                                             const std::vector<double>& b);

/// Extremes of the pairing objective over the vertices of minimal position
/// cost: {W_2^2, min, max}.
struct BruteForcePairing {
  double primary = 0.0;
  double right = 0.0;
  double left = 0.0;
};
BruteForcePairing brute_force_pairing(const VelocityMeasure& phi0, const VelocityMeasure& phi1);

struct PropertyTally {
  std::string name;
  double tolerance = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
  double max_violation = 0.0;  // largest amount by which the inequality or identity is missed
};

struct PropertySuiteReport {
  std::uint64_t seed = 0;
  std::size_t n_instances = 0;
  std::vector<PropertyTally> properties;
  bool passed = false;
};

/// Instance k draws d in {1..max_dim} and 1..max_atoms atoms per side from a
/// seed derived from (seed, k); every third instance repeats positions with
/// distinct velocities so that the optimal face is not a single plan.
/// Checks r <= l, the two-sided pairing bounds by measure pairings, the
/// negation identity, the lambda-transform identity, semiconcavity of
/// s -> 1/2 W^2(exp^s Phi, nu) at midpoints, and agreement with
/// brute_force_pairing when both sides have at most brute_force_atoms atoms.
PropertySuiteReport pairing_property_suite(std::uint64_t seed, std::size_t n_instances,
                                           std::size_t max_atoms = 6, std::size_t max_dim = 3,
                                           std::size_t brute_force_atoms = 4);

std::string to_json(const PropertySuiteReport& report);

}  // namespace dissflow
