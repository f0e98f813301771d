#pragma once

// Checks of solution concepts and error estimates on sampled curves, and
// closed-form reference solutions.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dissflow/euler.hpp"
#include "dissflow/measure.hpp"
#include "dissflow/mpvf.hpp"

namespace dissflow {

using CurveFn = std::function<DiscreteMeasure(double)>;

struct CurveSamples {
  std::vector<double> times;  // strictly increasing
  std::vector<DiscreteMeasure> measures;

  /// Throws InvalidArgument on an unsorted grid or length mismatch, DimensionMismatch
  /// on mixed dimensions.
  void validate() const;
};

CurveSamples sample_curve(const CurveFn& curve, const std::vector<double>& times);

/// The nodes (n tau, M^n), n = 0..N.
CurveSamples trajectory_samples(const EulerTrajectory& traj);

/// n + 1 equally spaced times on [a, b].
std::vector<double> uniform_grid(double a, double b, std::size_t n);

/// One line of a check report, written as `check,param,grid_t,lhs,rhs,excess`.
struct CheckRow {
  std::string check;
  double param = 0.0;
  double grid_t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double excess = 0.0;  // lhs - rhs
};

struct CheckReport {
  std::vector<CheckRow> rows;
  double max_excess = 0.0;  // max over rows of excess - budget(row)
  bool passed = false;
};

std::string report_csv(const std::vector<CheckRow>& rows);

// ---------------------------------------------------------------------------
// EVI

struct EviReport {
  double max_residual = 0.0;  // max over pairs s < t of lhs - rhs
  double worst_s = 0.0;
  double worst_t = 0.0;
  double budget = 0.0;     // quadrature budget of the worst pair
  double max_excess = 0.0; // max over pairs of (lhs - rhs) - budget
  bool passed = false;     // max_excess <= 0
  std::vector<CheckRow> rows;
};

/// Integrated EVI with Phi = evaluate(F, nu):
///   e^{-2 lambda (t-s)} W^2(mu_t, nu) - W^2(mu_s, nu)
///     <= -2 int_s^t e^{-2 lambda (r-s)} [Phi, mu_r]_r dr,
/// integrated by the trapezoid rule on the grid. Each pair is allowed the
/// trapezoid error bound (t-s) h^2 / 12 * max|f''| with f'' estimated from
/// second differences of the integrand (h the largest grid spacing), doubled,
/// plus 1e-7.
EviReport evi_residual(const CurveSamples& curve, const MpvfSpec& field, const DiscreteMeasure& nu,
                       double lambda);

// ---------------------------------------------------------------------------
// Stability, contraction, Cauchy estimates

/// Discretization allowance 8 L sqrt(t tau)(1 + |lambda| sqrt(t tau)) e^{lambda_+ t}.
double same_step_allowance(double L, double t, double tau, double lambda);

/// Two runs of one field with one step: at every node,
/// W(M_tau(t), M'_tau(t)) <= W(mu0, mu0') e^{lambda t} + same_step_allowance.
/// Requires lambda_+ tau <= 2.
CheckReport same_step_check(const EulerTrajectory& a, const EulerTrajectory& b, double lambda);

/// Runs the field from mu0 and mu1 and applies same_step_check.
CheckReport contraction_check(const MpvfSpec& field, const DiscreteMeasure& mu0,
                              const DiscreteMeasure& mu1, double tau, double T, double lambda,
                              double L);

/// C(theta) = (14 theta + 4 theta*)^{1/2} + 10 theta, theta* = theta / (theta - 1).
double cauchy_constant(double theta);

/// W(M_tau(t), M_eta(t)) <= (sqrt(theta) W(M_tau^0, M_eta^0)
///                           + C(theta) L sqrt((tau + eta)(t + tau + eta))) e^{lambda_+ t}
/// on the nodes of the finer trajectory, both curves affinely interpolated;
/// L is the larger of the two stability bounds. Throws InvalidArgument unless
/// theta > 1 and lambda sqrt(T (tau + eta)) <= 1.
CheckReport cauchy_gap_check(const EulerTrajectory& coarse, const EulerTrajectory& fine,
                             double theta, double lambda);

// ---------------------------------------------------------------------------
// Convergence rates

struct RateFit {
  std::vector<double> taus;
  std::vector<double> errors;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool fit_valid = false;               // at least two taus survive the exclusion
  std::vector<double> excluded_taus;    // errors at float-noise level, left out of the fit
  double max_envelope_excess = 0.0;     // max over runs and nodes of W - 13 L sqrt(tau (t + tau))
};

/// Log-log least squares of errors against taus. Errors at or below
/// `noise_floor` are excluded and reported.
RateFit fit_rate(const std::vector<double>& taus, const std::vector<double>& errors,
                 double noise_floor);

/// e(tau) = W(interpolate(run(tau), T), reference(T)). Also records the
/// largest excess over the envelope 13 L sqrt(tau (t + tau)) on every node.
/// Throws InvalidArgument with fewer than two distinct taus.
RateFit error_rate_study(const MpvfSpec& field, const DiscreteMeasure& mu0,
                         const CurveFn& reference, const std::vector<double>& taus, double T,
                         double L);

// ---------------------------------------------------------------------------
// Barycentric property

struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

/// Monomials x^alpha with 1 <= |alpha| <= max_degree in d variables.
std::vector<TestFunction> monomial_test_functions(std::size_t dim, int max_degree = 3);

struct BarycentricReport {
  double max_residual = 0.0;
  std::string worst_function;
  double worst_t = 0.0;
  std::vector<CheckRow> rows;
};

/// At interior nodes: | (int phi d mu_{k+1} - int phi d mu_{k-1}) / (t_{k+1} - t_{k-1})
///                      - sum w <grad phi(x), v> |, Phi = evaluate(F, mu_k).
/// Throws InvalidArgument with fewer than three nodes.
BarycentricReport barycentric_residual(const CurveSamples& curve, const MpvfSpec& field,
                                       const std::vector<TestFunction>& functions);

// ---------------------------------------------------------------------------
// Reference solutions

/// Splitting-particle flow of a discrete 1-D measure: atoms below B(mu0) move
/// left and atoms above move right at unit speed; the atom at B splits into
/// eta at B + t and 1/2 - mu0(]-inf, B[) at B - t.
DiscreteMeasure analytic_splitting(const DiscreteMeasure& mu0, double t);

/// Quantile discretization with n atoms of the flow from the normalized
/// Lebesgue measure on [a, b]: halves on [a - t, m - t] and [m + t, b + t].
DiscreteMeasure analytic_splitting_interval(double a, double b, double t, std::size_t n);

/// geodesic_point(w2(target, mu0).plan, e^{-t}); d = 1.
DiscreteMeasure analytic_geodesic_flow(const DiscreteMeasure& target, const DiscreteMeasure& mu0,
                                       double t);

/// Exact per-particle flows: "rotation" (angle t), "linear_contraction"
/// (e^{-t} x), "neg_sign" (|x_k| decreases at unit speed and stops at 0).
/// `scale` multiplies the time.
DiscreteMeasure analytic_lift(const std::string& map_id, const DiscreteMeasure& mu0, double t,
                              double scale = 1.0);

/// Closed-form solution of the field from mu0 when one is known:
/// rotation and per-particle maps with exact flows, the splitting particle,
/// constant fields (translation by the barycenter of theta) and 1-D
/// toward_measure with sign +1.
std::optional<CurveFn> exact_solution(const MpvfSpec& field, const DiscreteMeasure& mu0);

}  // namespace dissflow
