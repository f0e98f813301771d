#pragma once

// Duality pairings between velocity measures, directional pairings along
// geodesics, and one-sided derivatives of t -> W_2^2(mu_t, nu).

#include <functional>
#include <string>

#include "dissflow/measure.hpp"
#include "dissflow/transport.hpp"

namespace dissflow {

enum class Side { Right, Left };

const char* side_name(Side side) noexcept;

struct PairingResult {
  double value = 0.0;
  Coupling witness;  // one optimizer; not unique when the optimal face has several vertices
  Side side = Side::Right;
};

/// [Phi0, Phi1]_r: minimum of sum Theta <x0 - x1, v0 - v1> over couplings
/// whose position plan is optimal.
PairingResult pairing_r(const VelocityMeasure& phi0, const VelocityMeasure& phi1,
                        const LexiOptions& options = {});

/// [Phi0, Phi1]_l: the corresponding maximum.
PairingResult pairing_l(const VelocityMeasure& phi0, const VelocityMeasure& phi1,
                        const LexiOptions& options = {});

/// Pairings against a measure, through its zero-velocity lift.
PairingResult pairing_r_nu(const VelocityMeasure& phi, const DiscreteMeasure& nu,
                           const LexiOptions& options = {});
PairingResult pairing_l_nu(const VelocityMeasure& phi, const DiscreteMeasure& nu,
                           const LexiOptions& options = {});

/// Optimizes sum sigma <x0 - x1, v0> over the plans sigma that disintegrate
/// gamma and whose (x^t(x0, x1), v0)-marginal is Phi. Entries of gamma are
/// matched to atoms of Phi whose position agrees with (1-t)x0 + t x1 within
/// 1e-9; the problem decomposes into one transport LP per position.
///
/// Throws InvalidArgument when the position masses of Phi and of
/// x^t_# gamma disagree by more than 1e-9, or when gamma is not optimal.
PairingResult directional_pairing(const VelocityMeasure& phi, const Coupling& gamma, double t,
                                  Side side);

/// One-sided derivative of s -> 1/2 W_2^2(curve(s), nu) at s = t.
/// With D(h) the one-sided difference quotient, returns 2 D(h/2) - D(h).
double dini_w2(const std::function<DiscreteMeasure(double)>& curve, const DiscreteMeasure& nu,
               double t, Side side, double h = 1e-3);

/// {"value": ..., "side": ..., "witness": "i,j,mass\n..."}
std::string to_json(const PairingResult& result);

}  // namespace dissflow
