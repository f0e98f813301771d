#include "dissflow/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dissflow/error.hpp"

namespace dissflow {

namespace {

void check_finite(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InvalidMeasure(std::string(what) + " contains a non-finite entry");
    }
  }
}

// Validates weights, drops zero-weight atoms from every parallel buffer and
// renormalizes. `blocks` holds the per-atom coordinate buffers (dim values
// per atom each).
void normalize_atoms(std::size_t dim, std::vector<double>& weights,
                     std::initializer_list<std::vector<double>*> blocks) {
  if (weights.empty()) throw InvalidMeasure("measure has no atoms");
  check_finite(weights, "weights");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidMeasure("negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", expected 1";
    throw InvalidMeasure(os.str());
  }
  std::size_t kept = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    if (kept != i) {
      weights[kept] = weights[i];
      for (auto* b : blocks) {
        std::copy_n(b->begin() + i * dim, dim, b->begin() + kept * dim);
      }
    }
    ++kept;
  }
  if (kept == 0) throw InvalidMeasure("all weights are zero");
  weights.resize(kept);
  for (auto* b : blocks) b->resize(kept * dim);
  for (double& w : weights) w /= total;
}

bool close(std::span<const double> a, std::span<const double> b, double tol) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > tol) return false;
  }
  return true;
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Group ids for atoms of `points` (n x dim, row-major) such that atoms within
// `tol` per coordinate share a group. Groups are numbered in order of first
// occurrence.
std::vector<std::size_t> group_atoms(std::size_t dim, const std::vector<double>& points,
                                     std::size_t n, double tol, std::size_t& n_groups) {
  auto at = [&](std::size_t i) { return std::span<const double>(points.data() + i * dim, dim); };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(at(a), at(b)); });

  std::vector<std::size_t> raw(n);
  std::size_t g = 0;
  std::size_t rep = order.empty() ? 0 : order[0];
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i = order[k];
    if (k > 0 && !close(at(i), at(rep), tol)) {
      ++g;
      rep = i;
    }
    raw[i] = g;
  }
  // Renumber by first occurrence.
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> remap(n == 0 ? 0 : g + 1, none);
  std::vector<std::size_t> out(n);
  n_groups = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (remap[raw[i]] == none) remap[raw[i]] = n_groups++;
    out[i] = remap[raw[i]];
  }
  return out;
}

DiscreteMeasure aggregate(std::size_t dim, const std::vector<double>& points,
                          const std::vector<double>& weights, double tol) {
  std::size_t n_groups = 0;
  auto group = group_atoms(dim, points, weights.size(), tol, n_groups);
  std::vector<double> coords(n_groups * dim);
  std::vector<double> w(n_groups, 0.0);
  std::vector<bool> seen(n_groups, false);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    std::size_t g = group[i];
    if (!seen[g]) {
      std::copy_n(points.begin() + i * dim, dim, coords.begin() + g * dim);
      seen[g] = true;
    }
    w[g] += weights[i];
  }
  return DiscreteMeasure(dim, std::move(coords), std::move(w));
}

}  // namespace

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(os.str());
  }
}

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> coords,
                                 std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ == 0) throw InvalidMeasure("dimension must be at least 1");
  if (coords_.size() != weights_.size() * dim_) {
    throw InvalidMeasure("coordinate buffer does not match weights and dimension");
  }
  check_finite(coords_, "points");
  normalize_atoms(dim_, weights_, {&coords_});
}

DiscreteMeasure DiscreteMeasure::dirac(std::span<const double> x) {
  return DiscreteMeasure(x.size(), std::vector<double>(x.begin(), x.end()), {1.0});
}

DiscreteMeasure DiscreteMeasure::dirac(std::initializer_list<double> x) {
  return DiscreteMeasure(x.size(), std::vector<double>(x), {1.0});
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t dim, std::vector<double> coords) {
  if (dim == 0 || coords.empty() || coords.size() % dim != 0) {
    throw InvalidMeasure("uniform: coordinate buffer does not match dimension");
  }
  const std::size_t n = coords.size() / dim;
  return DiscreteMeasure(dim, std::move(coords), std::vector<double>(n, 1.0 / double(n)));
}

DiscreteMeasure DiscreteMeasure::merged(double tol) const {
  return aggregate(dim_, coords_, weights_, tol);
}

DiscreteMeasure DiscreteMeasure::canonical(double tol) const {
  DiscreteMeasure m = merged(tol);
  std::vector<std::size_t> order(m.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lex_less(m.point(a), m.point(b)); });
  std::vector<double> coords;
  coords.reserve(m.coords_.size());
  std::vector<double> w;
  w.reserve(m.size());
  for (std::size_t i : order) {
    auto p = m.point(i);
    coords.insert(coords.end(), p.begin(), p.end());
    w.push_back(m.weight(i));
  }
  m.coords_ = std::move(coords);
  m.weights_ = std::move(w);
  return m;
}

// ---------------------------------------------------------------------------
// VelocityMeasure

VelocityMeasure::VelocityMeasure(std::size_t dim, std::vector<double> xs, std::vector<double> vs,
                                 std::vector<double> weights)
    : dim_(dim), xs_(std::move(xs)), vs_(std::move(vs)), weights_(std::move(weights)) {
  if (dim_ == 0) throw InvalidMeasure("dimension must be at least 1");
  if (xs_.size() != weights_.size() * dim_ || vs_.size() != xs_.size()) {
    throw InvalidMeasure("velocity measure buffers do not match weights and dimension");
  }
  check_finite(xs_, "positions");
  check_finite(vs_, "velocities");
  normalize_atoms(dim_, weights_, {&xs_, &vs_});
}

DiscreteMeasure VelocityMeasure::positions() const {
  return DiscreteMeasure(dim_, xs_, weights_);
}

// ---------------------------------------------------------------------------
// Operations

VelocityMeasure zero_lift(const DiscreteMeasure& mu) {
  return VelocityMeasure(mu.dim(), mu.coords(), std::vector<double>(mu.coords().size(), 0.0),
                         mu.weights());
}

double second_moment(const DiscreteMeasure& mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double sq = 0.0;
    for (double c : mu.point(i)) sq += c * c;
    s += mu.weight(i) * sq;
  }
  return s;
}

double velocity_norm(const VelocityMeasure& phi) {
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double sq = 0.0;
    for (double c : phi.v(i)) sq += c * c;
    s += phi.weight(i) * sq;
  }
  return std::sqrt(s);
}

DiscreteMeasure push_exp(const VelocityMeasure& phi, double t) {
  std::vector<double> pts(phi.xs().size());
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = phi.xs()[k] + t * phi.vs()[k];
  return aggregate(phi.dim(), pts, phi.weights(), kMergeTolerance);
}

VelocityMeasure shift(const VelocityMeasure& phi, double t) {
  std::vector<double> xs(phi.xs().size());
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = phi.xs()[k] + t * phi.vs()[k];
  return VelocityMeasure(phi.dim(), std::move(xs), phi.vs(), phi.weights());
}

DiscreteMeasure x_marginal(const VelocityMeasure& phi) {
  return aggregate(phi.dim(), phi.xs(), phi.weights(), kMergeTolerance);
}

VelocityMeasure negate(const VelocityMeasure& phi) {
  std::vector<double> vs(phi.vs());
  for (double& c : vs) c = -c;
  return VelocityMeasure(phi.dim(), phi.xs(), std::move(vs), phi.weights());
}

VelocityMeasure lambda_transform(const VelocityMeasure& phi, double lambda) {
  std::vector<double> vs(phi.vs());
  for (std::size_t k = 0; k < vs.size(); ++k) vs[k] -= lambda * phi.xs()[k];
  return VelocityMeasure(phi.dim(), phi.xs(), std::move(vs), phi.weights());
}

DiscreteMeasure quantile_discretize_1d(const std::function<double(double)>& quantile,
                                       std::size_t n) {
  if (n == 0) throw InvalidMeasure("quantile discretization needs n >= 1");
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) {
    double x = quantile((double(k) + 0.5) / double(n));
    if (!std::isfinite(x)) throw InvalidMeasure("quantile function returned a non-finite value");
    xs[k] = x;
  }
  return DiscreteMeasure(1, std::move(xs), std::vector<double>(n, 1.0 / double(n)));
}

DiscreteMeasure uniform_interval(double a, double b, std::size_t n) {
  if (!(b >= a)) throw InvalidMeasure("uniform_interval: need a <= b");
  return quantile_discretize_1d([a, b](double u) { return a + u * (b - a); }, n);
}

bool same_law(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol, double wtol) {
  if (a.dim() != b.dim()) return false;
  DiscreteMeasure ca = a.canonical(tol);
  DiscreteMeasure cb = b.canonical(tol);
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (!close(ca.point(i), cb.point(i), tol)) return false;
    if (std::abs(ca.weight(i) - cb.weight(i)) > wtol) return false;
  }
  return true;
}

}  // namespace dissflow
