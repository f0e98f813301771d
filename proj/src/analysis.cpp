#include "dissflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dissflow/error.hpp"
#include "dissflow/io.hpp"
#include "dissflow/pairing.hpp"
#include "dissflow/transport.hpp"

namespace dissflow {

namespace {

constexpr double kEviFloor = 1e-7;

double lambda_plus(double lambda) { return std::max(lambda, 0.0); }

CheckReport finish(std::vector<CheckRow> rows, double tol) {
  CheckReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) rep.max_excess = std::max(rep.max_excess, r.excess);
  if (rows.empty()) rep.max_excess = 0.0;
  rep.passed = rep.max_excess <= tol;
  rep.rows = std::move(rows);
  return rep;
}

DiscreteMeasure map_atoms(const DiscreteMeasure& mu,
                          const std::function<void(std::span<const double>, double*)>& f) {
  std::vector<double> coords(mu.coords().size());
  for (std::size_t i = 0; i < mu.size(); ++i) f(mu.point(i), coords.data() + i * mu.dim());
  return DiscreteMeasure(mu.dim(), std::move(coords), mu.weights()).merged();
}

double integrate(const DiscreteMeasure& mu, const TestFunction& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * f.value(mu.point(i));
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Curves and reports

void CurveSamples::validate() const {
  if (times.size() != measures.size()) throw InvalidArgument("curve: times and measures differ");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw InvalidArgument("curve: times must increase strictly");
    require_same_dim(measures[k].dim(), measures[0].dim(), "curve");
  }
}

CurveSamples sample_curve(const CurveFn& curve, const std::vector<double>& times) {
  CurveSamples c;
  c.times = times;
  for (double t : times) c.measures.push_back(curve(t));
  c.validate();
  return c;
}

CurveSamples trajectory_samples(const EulerTrajectory& traj) {
  CurveSamples c;
  for (std::size_t n = 0; n < traj.M.size(); ++n) {
    c.times.push_back(double(n) * traj.tau);
    c.measures.push_back(traj.M[n]);
  }
  return c;
}

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
  if (n == 0 || !(b > a)) throw InvalidArgument("uniform_grid: need n >= 1 and b > a");
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = a + (b - a) * double(k) / double(n);
  g[n] = b;
  return g;
}

std::string report_csv(const std::vector<CheckRow>& rows) {
  std::string out = "check,param,grid_t,lhs,rhs,excess\n";
  for (const auto& r : rows) {
    out += r.check + ',' + format_double(r.param) + ',' + format_double(r.grid_t) + ',' +
           format_double(r.lhs) + ',' + format_double(r.rhs) + ',' + format_double(r.excess) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// EVI

EviReport evi_residual(const CurveSamples& curve, const MpvfSpec& field, const DiscreteMeasure& nu,
                       double lambda) {
  curve.validate();
  const std::size_t K = curve.times.size();
  if (K < 3) throw InvalidArgument("evi_residual: the grid needs at least three points");
  const VelocityMeasure phi = evaluate(field, nu);
  const auto& t = curve.times;

  std::vector<double> w2sq(K), pairing(K), g(K);
  for (std::size_t k = 0; k < K; ++k) {
    w2sq[k] = w2(curve.measures[k], nu).cost;
    pairing[k] = pairing_r_nu(phi, curve.measures[k]).value;
    g[k] = std::exp(-2.0 * lambda * (t[k] - t[0])) * pairing[k];
  }
  double h = 0.0, g2 = 0.0;
  for (std::size_t k = 1; k < K; ++k) h = std::max(h, t[k] - t[k - 1]);
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const double hl = t[k] - t[k - 1], hr = t[k + 1] - t[k];
    const double second = 2.0 * ((g[k + 1] - g[k]) / hr - (g[k] - g[k - 1]) / hl) / (hl + hr);
    g2 = std::max(g2, std::abs(second));
  }

  EviReport rep;
  rep.max_residual = -std::numeric_limits<double>::infinity();
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < K; ++i) {
    // integral_{t_i}^{t_j} e^{-2 lambda (r - t_i)} [Phi, mu_r]_r dr, accumulated over j
    double integral = 0.0;
    const double rescale = std::exp(2.0 * lambda * (t[i] - t[0]));
    for (std::size_t j = i + 1; j < K; ++j) {
      integral += 0.5 * (t[j] - t[j - 1]) * (g[j - 1] + g[j]) * rescale;
      const double lhs = std::exp(-2.0 * lambda * (t[j] - t[i])) * w2sq[j] - w2sq[i];
      const double rhs = -2.0 * integral;
      const double budget = 2.0 * 2.0 * (t[j] - t[i]) * h * h / 12.0 * g2 * rescale + kEviFloor;
      const double residual = lhs - rhs;
      if (residual > rep.max_residual) {
        rep.max_residual = residual;
        rep.worst_s = t[i];
        rep.worst_t = t[j];
      }
      if (residual - budget > rep.max_excess) {
        rep.max_excess = residual - budget;
        rep.budget = budget;
      }
      rep.rows.push_back({"evi", t[i], t[j], lhs, rhs, residual});
    }
  }
  rep.passed = rep.max_excess <= 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Stability, contraction, Cauchy

double same_step_allowance(double L, double t, double tau, double lambda) {
  const double r = std::sqrt(t * tau);
  return 8.0 * L * r * (1.0 + std::abs(lambda) * r) * std::exp(lambda_plus(lambda) * t);
}

CheckReport same_step_check(const EulerTrajectory& a, const EulerTrajectory& b, double lambda) {
  if (a.tau != b.tau || a.N != b.N) throw InvalidArgument("same_step_check: trajectories differ in step");
  if (lambda_plus(lambda) * a.tau > 2.0) throw InvalidArgument("same_step_check: need lambda_+ tau <= 2");
  const double L = std::max(a.L, b.L);
  const double w0 = w2_distance(a.M[0], b.M[0]);
  std::vector<CheckRow> rows;
  for (std::size_t n = 0; n <= a.N; ++n) {
    const double t = double(n) * a.tau;
    const double lhs = w2_distance(a.M[n], b.M[n]);
    const double rhs = w0 * std::exp(lambda * t) + same_step_allowance(L, t, a.tau, lambda);
    rows.push_back({"same_step", a.tau, t, lhs, rhs, lhs - rhs});
  }
  return finish(std::move(rows), 1e-7);
}

CheckReport contraction_check(const MpvfSpec& field, const DiscreteMeasure& mu0,
                              const DiscreteMeasure& mu1, double tau, double T, double lambda,
                              double L) {
  auto a = euler_run(field, mu0, tau, T, L);
  auto b = euler_run(field, mu1, tau, T, L);
  auto rep = same_step_check(a, b, lambda);
  for (auto& r : rep.rows) r.check = "contraction";
  return rep;
}

double cauchy_constant(double theta) {
  if (!(theta > 1.0)) throw InvalidArgument("cauchy_constant: need theta > 1");
  const double theta_star = theta / (theta - 1.0);
  return std::sqrt(14.0 * theta + 4.0 * theta_star) + 10.0 * theta;
}

CheckReport cauchy_gap_check(const EulerTrajectory& coarse, const EulerTrajectory& fine,
                             double theta, double lambda) {
  const double C = cauchy_constant(theta);
  const double tau = coarse.tau, eta = fine.tau;
  const double T = std::min(coarse.T, fine.T);
  if (lambda * std::sqrt(T * (tau + eta)) > 1.0) {
    throw InvalidArgument("cauchy_gap_check: need lambda sqrt(T (tau + eta)) <= 1");
  }
  const double L = std::max(coarse.L, fine.L);
  const double w0 = w2_distance(coarse.M[0], fine.M[0]);
  const double h = std::min(tau, eta);
  const std::size_t steps = step_count(T, h);
  const double end = std::min(double(coarse.N) * tau, double(fine.N) * eta);
  std::vector<CheckRow> rows;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = std::min(double(k) * h, end);
    const double lhs = w2_distance(interpolate(coarse, t), interpolate(fine, t));
    const double rhs = (std::sqrt(theta) * w0 + C * L * std::sqrt((tau + eta) * (t + tau + eta))) *
                       std::exp(lambda_plus(lambda) * t);
    rows.push_back({"cauchy", tau, t, lhs, rhs, lhs - rhs});
  }
  return finish(std::move(rows), 0.0);
}

// ---------------------------------------------------------------------------
// Rates

RateFit fit_rate(const std::vector<double>& taus, const std::vector<double>& errors,
                 double noise_floor) {
  if (taus.size() != errors.size()) throw InvalidArgument("fit_rate: lengths differ");
  RateFit fit;
  fit.taus = taus;
  fit.errors = errors;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (!(errors[k] > noise_floor)) {
      fit.excluded_taus.push_back(taus[k]);
      continue;
    }
    lx.push_back(std::log(taus[k]));
    ly.push_back(std::log(errors[k]));
  }
  std::vector<double> distinct(lx);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) {
    fit.slope = fit.intercept = fit.r2 = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double n = double(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k] / n;
    my += ly[k] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.fit_valid = true;
  return fit;
}

RateFit error_rate_study(const MpvfSpec& field, const DiscreteMeasure& mu0,
                         const CurveFn& reference, const std::vector<double>& taus, double T,
                         double L) {
  std::vector<double> distinct(taus);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw InvalidArgument("error_rate_study: need two distinct taus");

  std::vector<double> errors;
  double envelope = -std::numeric_limits<double>::infinity();
  for (double tau : taus) {
    auto traj = euler_run(field, mu0, tau, T, L);
    errors.push_back(w2_distance(interpolate(traj, T), reference(T)));
    for (std::size_t n = 0; n <= traj.N; ++n) {
      const double t = double(n) * tau;
      const double w = w2_distance(traj.M[n], reference(t));
      envelope = std::max(envelope, w - 13.0 * L * std::sqrt(tau * (t + tau)));
    }
  }
  // Rounding accumulates over up to N steps, so the noise level is taken as
  // 10 * N_max * eps relative to the reference scale.
  const double n_max = double(step_count(T, distinct.front()));
  const double scale = 1.0 + std::sqrt(second_moment(reference(T)));
  RateFit fit = fit_rate(taus, errors,
                         10.0 * n_max * std::numeric_limits<double>::epsilon() * scale);
  fit.max_envelope_excess = envelope;
  return fit;
}

// ---------------------------------------------------------------------------
// Barycentric property

std::vector<TestFunction> monomial_test_functions(std::size_t dim, int max_degree) {
  std::vector<TestFunction> out;
  std::vector<int> alpha(dim, 0);
  // Enumerate exponent vectors with total degree in [1, max_degree].
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int left) {
    if (k == dim) {
      int deg = 0;
      for (int a : alpha) deg += a;
      if (deg == 0) return;
      std::string name;
      for (std::size_t q = 0; q < dim; ++q) {
        if (alpha[q] == 0) continue;
        if (!name.empty()) name += '*';
        name += "x" + std::to_string(q + 1);
        if (alpha[q] > 1) name += "^" + std::to_string(alpha[q]);
      }
      const auto a = alpha;
      TestFunction f;
      f.name = name;
      f.value = [a](std::span<const double> x) {
        double v = 1.0;
        for (std::size_t q = 0; q < a.size(); ++q) v *= std::pow(x[q], a[q]);
        return v;
      };
      f.gradient = [a](std::span<const double> x) {
        std::vector<double> g(a.size(), 0.0);
        for (std::size_t q = 0; q < a.size(); ++q) {
          if (a[q] == 0) continue;
          double v = a[q] * std::pow(x[q], a[q] - 1);
          for (std::size_t r = 0; r < a.size(); ++r) {
            if (r != q) v *= std::pow(x[r], a[r]);
          }
          g[q] = v;
        }
        return g;
      };
      out.push_back(std::move(f));
      return;
    }
    for (int e = 0; e <= left; ++e) {
      alpha[k] = e;
      rec(k + 1, left - e);
    }
    alpha[k] = 0;
  };
  rec(0, max_degree);
  return out;
}

BarycentricReport barycentric_residual(const CurveSamples& curve, const MpvfSpec& field,
                                       const std::vector<TestFunction>& functions) {
  curve.validate();
  const std::size_t K = curve.times.size();
  if (K < 3) throw InvalidArgument("barycentric_residual: the grid needs at least three points");
  BarycentricReport rep;
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const auto phi = evaluate(field, curve.measures[k]);
    const double dt = curve.times[k + 1] - curve.times[k - 1];
    for (const auto& f : functions) {
      const double lhs =
          (integrate(curve.measures[k + 1], f) - integrate(curve.measures[k - 1], f)) / dt;
      double rhs = 0.0;
      for (std::size_t i = 0; i < phi.size(); ++i) {
        auto g = f.gradient(phi.x(i));
        rhs += phi.weight(i) * dot(g, phi.v(i));
      }
      const double r = std::abs(lhs - rhs);
      if (r > rep.max_residual || rep.worst_function.empty()) {
        rep.max_residual = std::max(rep.max_residual, r);
        rep.worst_function = f.name;
        rep.worst_t = curve.times[k];
      }
      rep.rows.push_back({"barycentric:" + f.name, 0.0, curve.times[k], lhs, rhs, lhs - rhs});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Reference solutions

DiscreteMeasure analytic_splitting(const DiscreteMeasure& mu0, double t) {
  if (mu0.dim() != 1) throw DimensionMismatch("analytic_splitting requires d = 1");
  if (!(t >= 0.0)) throw InvalidArgument("analytic_splitting requires t >= 0");
  const double B = splitting_point(mu0);
  double below = 0.0, at = 0.0;
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    const double x = mu0.point(i)[0];
    if (std::abs(x - B) <= 1e-12) {
      at += mu0.weight(i);
    } else if (x < B) {
      below += mu0.weight(i);
    }
  }
  const double eta = std::max(0.0, below + at - 0.5);
  const double left = std::max(0.0, 0.5 - below);
  std::vector<double> xs, ws;
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    const double x = mu0.point(i)[0];
    const double w = mu0.weight(i);
    if (std::abs(x - B) <= 1e-12) {
      xs.push_back(x + t);
      ws.push_back(w * eta / at);
      xs.push_back(x - t);
      ws.push_back(w * left / at);
    } else {
      xs.push_back(x < B ? x - t : x + t);
      ws.push_back(w);
    }
  }
  return DiscreteMeasure(1, std::move(xs), std::move(ws)).merged();
}

DiscreteMeasure analytic_splitting_interval(double a, double b, double t, std::size_t n) {
  if (!(b > a)) throw InvalidArgument("analytic_splitting_interval: need a < b");
  return quantile_discretize_1d(
      [=](double u) { return a + u * (b - a) + (u < 0.5 ? -t : t); }, n);
}

DiscreteMeasure analytic_geodesic_flow(const DiscreteMeasure& target, const DiscreteMeasure& mu0,
                                       double t) {
  if (target.dim() != 1 || mu0.dim() != 1) {
    throw DimensionMismatch("analytic_geodesic_flow requires d = 1");
  }
  if (!(t >= 0.0)) throw InvalidArgument("analytic_geodesic_flow requires t >= 0");
  return geodesic_point(w2(target, mu0).plan, std::exp(-t), false);
}

DiscreteMeasure analytic_lift(const std::string& map_id, const DiscreteMeasure& mu0, double t,
                              double scale) {
  const double s = t * scale;
  if (map_id == "rotation") {
    if (mu0.dim() != 2) throw InvalidArgument("rotation flow requires d = 2");
    const double c = std::cos(s), sn = std::sin(s);
    return map_atoms(mu0, [&](std::span<const double> x, double* out) {
      out[0] = c * x[0] + sn * x[1];
      out[1] = -sn * x[0] + c * x[1];
    });
  }
  if (map_id == "linear_contraction") {
    const double f = std::exp(-s);
    return map_atoms(mu0, [&](std::span<const double> x, double* out) {
      for (std::size_t k = 0; k < x.size(); ++k) out[k] = f * x[k];
    });
  }
  if (map_id == "neg_sign") {
    if (s < 0.0) throw InvalidArgument("neg_sign flow needs a nonnegative time scale");
    return map_atoms(mu0, [&](std::span<const double> x, double* out) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = std::max(std::abs(x[k]) - s, 0.0);
        out[k] = x[k] > 0.0 ? r : -r;
      }
    });
  }
  throw InvalidArgument("no exact flow registered for map '" + map_id + "'");
}

std::optional<CurveFn> exact_solution(const MpvfSpec& field, const DiscreteMeasure& mu0) {
  switch (field.kind) {
    case FieldKind::Rotation: {
      const double a = field.scale;
      return CurveFn([=](double t) { return analytic_lift("rotation", mu0, t, a); });
    }
    case FieldKind::PerParticleMap:
      if (field.name == "rotation" || field.name == "linear_contraction" ||
          (field.name == "neg_sign" && field.scale >= 0.0)) {
        const std::string name = field.name;
        const double a = field.scale;
        return CurveFn([=](double t) { return analytic_lift(name, mu0, t, a); });
      }
      return std::nullopt;
    case FieldKind::SplittingParticle:
      return CurveFn([=](double t) { return analytic_splitting(mu0, t); });
    case FieldKind::Constant: {
      std::vector<double> bary(field.theta.dim(), 0.0);
      for (std::size_t k = 0; k < field.theta.size(); ++k) {
        for (std::size_t q = 0; q < bary.size(); ++q) {
          bary[q] += field.theta.weight(k) * field.theta.point(k)[q];
        }
      }
      return CurveFn([=](double t) {
        return map_atoms(mu0, [&](std::span<const double> x, double* out) {
          for (std::size_t q = 0; q < x.size(); ++q) out[q] = x[q] + t * bary[q];
        });
      });
    }
    case FieldKind::TowardMeasure:
      if (field.sign == 1.0 && field.target.dim() == 1) {
        const DiscreteMeasure target = field.target;
        return CurveFn([=](double t) { return analytic_geodesic_flow(target, mu0, t); });
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

}  // namespace dissflow
