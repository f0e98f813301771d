#pragma once

// Explicit Euler scheme M^{n+1} = (exp^tau)_# Phi^n with Phi^n in F[M^n] and
// |Phi^n|_2 <= L, its interpolants, and the global-solvability constants.

#include <functional>
#include <string>
#include <vector>

#include "dissflow/error.hpp"
#include "dissflow/measure.hpp"
#include "dissflow/mpvf.hpp"

namespace dissflow {

/// Raised when the support outgrows the atom budget with resampling off.
class AtomBudgetExceeded : public Error {
 public:
  using Error::Error;
};

struct EulerOptions {
  double stability_slack = 1e-12;  // relative slack on |Phi^n|_2 <= L
  std::size_t atom_budget = 200000;
  bool resample = false;  // systematic thinning to the budget; flagged in the trajectory
};

struct EulerTrajectory {
  double tau = 0.0;
  double T = 0.0;
  double L = 0.0;
  std::size_t N = 0;
  std::vector<DiscreteMeasure> M;    // N + 1 entries
  std::vector<VelocityMeasure> phi;  // N entries
  std::vector<std::size_t> selection_index;
  std::vector<std::size_t> resampled_steps;
  std::string field_json;
};

/// N(T, tau) = ceil(T / tau). Quotients within 1e-9 of an integer are
/// rounded to it so that T = k tau in floating point yields k steps.
std::size_t step_count(double T, double tau);

using SelectionFn = std::function<std::vector<VelocityMeasure>(const DiscreteMeasure&)>;

/// Runs the scheme, taking at each step the first selection with norm <= L.
/// Throws StabilityViolation when none qualifies.
EulerTrajectory euler_run(const SelectionFn& field, const DiscreteMeasure& mu0, double tau,
                          double T, double L, const EulerOptions& options = {});
EulerTrajectory euler_run(const MpvfSpec& field, const DiscreteMeasure& mu0, double tau, double T,
                          double L, const EulerOptions& options = {});

enum class InterpolationMode { Affine, Piecewise };

/// affine: push_exp(Phi^n, t - n tau); piecewise: M^n, with n = floor(t / tau).
/// t is accepted in [0, N tau]; throws InvalidArgument outside.
DiscreteMeasure interpolate(const EulerTrajectory& traj, double t,
                            InterpolationMode mode = InterpolationMode::Affine);

struct GlobalBounds {
  double R = 0.0;
  double L = 0.0;
  double tau_max = 0.0;
};

/// R = m_2(mu0) + (|Psi0|_2 + 1) sqrt(2T) e^{(1 + 2 lambda_+) T}, L = M(R),
/// tau_max = min(1/L^2, tau_bar(R), T). m_2 is the square root of the second
/// moment. An empty tau_bar is treated as +infinity.
GlobalBounds global_bounds(const DiscreteMeasure& mu0, const VelocityMeasure& psi0, double T,
                           double lambda, const std::function<double(double)>& M_of_R,
                           const std::function<double(double)>& tau_bar = {});

struct IeviRow {
  std::size_t n = 0;
  double lhs = 0.0;  // 1/2 W^2(M^{n+1}, nu) - 1/2 W^2(M^n, nu)
  double rhs = 0.0;  // tau [Phi^n, nu]_r + tau^2 L^2 / 2
};

struct IeviReport {
  std::vector<IeviRow> rows;
  double max_violation = 0.0;
  double tolerance = 0.0;  // 1e-7 (1 + max_n W^2(M^n, nu))
  bool passed = false;
};

IeviReport ievi_check(const EulerTrajectory& traj, const DiscreteMeasure& nu);

/// Snapshot CSVs and an index record {tau, T, L, N, field_spec}.
std::string trajectory_index_json(const EulerTrajectory& traj);

}  // namespace dissflow
