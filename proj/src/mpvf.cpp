#include "dissflow/mpvf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dissflow/error.hpp"
#include "dissflow/io.hpp"
#include "dissflow/pairing.hpp"
#include "dissflow/transport.hpp"
#include "json_support.hpp"

namespace dissflow {

namespace {

using Vec = std::vector<double>;

// Conditional velocity law at one atom: (velocity, fraction of the atom's weight).
using Conditional = std::vector<std::pair<Vec, double>>;

constexpr double kSplitTolerance = 1e-12;

struct NameTable {
  FieldKind kind;
  std::vector<std::string> names;
};

const std::vector<NameTable>& name_tables() {
  static const std::vector<NameTable> tables = {
      {FieldKind::Potential, {"quadratic_potential", "quartic_potential"}},
      {FieldKind::Interaction, {"quadratic_interaction", "attractive_quartic"}},
      {FieldKind::PairwiseMap, {"rotation_pairwise", "linear_contraction_pairwise"}},
      {FieldKind::PerParticleMap, {"rotation", "linear_contraction", "neg_sign", "sine"}},
  };
  return tables;
}

bool known_name(FieldKind kind, const std::string& name) {
  for (const auto& t : name_tables()) {
    if (t.kind == kind) return std::find(t.names.begin(), t.names.end(), name) != t.names.end();
  }
  return false;
}

Vec to_vec(std::span<const double> s) { return Vec(s.begin(), s.end()); }

double norm_sq(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

Vec rotate(std::span<const double> x) { return {x[1], -x[0]}; }

Vec potential_gradient(const std::string& name, std::span<const double> x) {
  Vec g = to_vec(x);
  if (name == "quartic_potential") {
    const double r2 = norm_sq(x);
    for (double& c : g) c *= r2;
  }
  return g;
}

Vec kernel_gradient(const std::string& name, std::span<const double> z) {
  Vec g = to_vec(z);
  if (name == "attractive_quartic") {
    const double r2 = norm_sq(z);
    for (double& c : g) c *= r2;
  }
  return g;
}

Vec pairwise_value(const std::string& name, std::span<const double> z) {
  if (name == "rotation_pairwise") return rotate(z);
  Vec g = to_vec(z);
  for (double& c : g) c = -c;
  return g;
}

Vec per_particle_value(const std::string& name, std::span<const double> x) {
  if (name == "rotation") return rotate(x);
  Vec g = to_vec(x);
  if (name == "linear_contraction") {
    for (double& c : g) c = -c;
  } else if (name == "neg_sign") {
    for (double& c : g) c = c > 0.0 ? -1.0 : (c < 0.0 ? 1.0 : 0.0);
  } else if (name == "sine") {
    for (double& c : g) c = std::sin(c);
  }
  return g;
}

void scale_in_place(Vec& v, double s) {
  for (double& c : v) c *= s;
}

std::vector<Conditional> single_valued(const DiscreteMeasure& mu,
                                       const std::function<Vec(std::size_t)>& velocity) {
  std::vector<Conditional> out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) out[i] = {{velocity(i), 1.0}};
  return out;
}

void require_dim(const MpvfSpec& field, const DiscreteMeasure& mu) {
  const std::size_t d = field.required_dim();
  if (d != 0 && mu.dim() != d) {
    throw DimensionMismatch(std::string(kind_name(field.kind)) + " field requires dimension " +
                          std::to_string(d) + ", got " + std::to_string(mu.dim()));
  }
}

std::vector<Conditional> conditionals(const MpvfSpec& field, const DiscreteMeasure& mu);

std::vector<Conditional> splitting_conditionals(const DiscreteMeasure& mu) {
  const double b = splitting_point(mu);
  double below = 0.0, at = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double x = mu.point(i)[0];
    if (std::abs(x - b) <= kSplitTolerance) {
      at += mu.weight(i);
    } else if (x < b) {
      below += mu.weight(i);
    }
  }
  const double eta = std::max(0.0, below + at - 0.5);
  const double left = std::max(0.0, 0.5 - below);
  std::vector<Conditional> out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double x = mu.point(i)[0];
    if (std::abs(x - b) <= kSplitTolerance) {
      if (eta > 0.0) out[i].push_back({{1.0}, eta / at});
      if (left > 0.0) out[i].push_back({{-1.0}, left / at});
    } else {
      out[i] = {{{x < b ? -1.0 : 1.0}, 1.0}};
    }
  }
  return out;
}

std::vector<Conditional> toward_conditionals(const MpvfSpec& field, const DiscreteMeasure& mu) {
  require_same_dim(mu.dim(), field.target.dim(), "toward_measure");
  const TransportResult ot = w2(mu, field.target);
  const std::size_t d = mu.dim();
  std::vector<Vec> bary(mu.size(), Vec(d, 0.0));
  for (const auto& e : ot.plan.entries()) {
    auto y = field.target.point(e.col);
    for (std::size_t k = 0; k < d; ++k) bary[e.row][k] += e.mass * y[k];
  }
  return single_valued(mu, [&](std::size_t i) {
    Vec v(d);
    auto x = mu.point(i);
    for (std::size_t k = 0; k < d; ++k) v[k] = field.sign * (bary[i][k] / mu.weight(i) - x[k]);
    return v;
  });
}

std::vector<Conditional> composite_conditionals(const MpvfSpec& field, const DiscreteMeasure& mu) {
  std::vector<Conditional> acc(mu.size(), Conditional{{Vec(mu.dim(), 0.0), 1.0}});
  for (const auto& child : field.children) {
    auto part = conditionals(child, mu);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      Conditional next;
      for (const auto& [va, fa] : acc[i]) {
        for (const auto& [vb, fb] : part[i]) {
          Vec v(va);
          for (std::size_t k = 0; k < v.size(); ++k) v[k] += vb[k];
          next.push_back({std::move(v), fa * fb});
        }
      }
      acc[i] = std::move(next);
    }
  }
  return acc;
}

std::vector<Conditional> conditionals(const MpvfSpec& field, const DiscreteMeasure& mu) {
  require_dim(field, mu);
  const std::size_t d = mu.dim();
  switch (field.kind) {
    case FieldKind::Potential:
      return single_valued(mu, [&](std::size_t i) {
        Vec v = potential_gradient(field.name, mu.point(i));
        scale_in_place(v, -field.scale);
        return v;
      });
    case FieldKind::Interaction:
    case FieldKind::PairwiseMap:
      return single_valued(mu, [&](std::size_t i) {
        Vec v(d, 0.0);
        Vec z(d);
        for (std::size_t j = 0; j < mu.size(); ++j) {
          for (std::size_t k = 0; k < d; ++k) z[k] = mu.point(i)[k] - mu.point(j)[k] - field.offset;
          Vec g = field.kind == FieldKind::Interaction ? kernel_gradient(field.name, z)
                                                       : pairwise_value(field.name, z);
          for (std::size_t k = 0; k < d; ++k) v[k] += mu.weight(j) * g[k];
        }
        scale_in_place(v, field.kind == FieldKind::Interaction ? -field.scale : field.scale);
        return v;
      });
    case FieldKind::Constant: {
      require_same_dim(d, field.theta.dim(), "constant field");
      Conditional c;
      for (std::size_t k = 0; k < field.theta.size(); ++k) {
        c.push_back({to_vec(field.theta.point(k)), field.theta.weight(k)});
      }
      return std::vector<Conditional>(mu.size(), c);
    }
    case FieldKind::Rotation:
      return single_valued(mu, [&](std::size_t i) {
        Vec v = rotate(mu.point(i));
        scale_in_place(v, field.scale);
        return v;
      });
    case FieldKind::SplittingParticle:
      return splitting_conditionals(mu);
    case FieldKind::TowardMeasure:
      return toward_conditionals(field, mu);
    case FieldKind::PerParticleMap:
      return single_valued(mu, [&](std::size_t i) {
        Vec v = per_particle_value(field.name, mu.point(i));
        scale_in_place(v, field.scale);
        return v;
      });
    case FieldKind::CompositeSum:
      return composite_conditionals(field, mu);
    case FieldKind::SelectionList:
      return conditionals(field.children.front(), mu);
  }
  throw InvalidArgument("unknown field kind");
}

VelocityMeasure assemble(const DiscreteMeasure& mu, const std::vector<Conditional>& cond) {
  Vec xs, vs, ws;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (const auto& [v, f] : cond[i]) {
      auto x = mu.point(i);
      xs.insert(xs.end(), x.begin(), x.end());
      vs.insert(vs.end(), v.begin(), v.end());
      ws.push_back(mu.weight(i) * f);
    }
  }
  return VelocityMeasure(mu.dim(), std::move(xs), std::move(vs), std::move(ws));
}

}  // namespace

const char* kind_name(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::Potential: return "potential";
    case FieldKind::Interaction: return "interaction";
    case FieldKind::Constant: return "constant";
    case FieldKind::Rotation: return "rotation";
    case FieldKind::SplittingParticle: return "splitting_particle";
    case FieldKind::TowardMeasure: return "toward_measure";
    case FieldKind::PairwiseMap: return "pairwise_map";
    case FieldKind::PerParticleMap: return "per_particle_map";
    case FieldKind::CompositeSum: return "composite_sum";
    case FieldKind::SelectionList: return "selection_list";
  }
  return "unknown";
}

std::optional<FieldKind> kind_from_name(std::string_view name) noexcept {
  for (int k = 0; k <= static_cast<int>(FieldKind::SelectionList); ++k) {
    auto kind = static_cast<FieldKind>(k);
    if (name == kind_name(kind)) return kind;
  }
  return std::nullopt;
}

std::vector<std::string> builtin_names(FieldKind kind) {
  for (const auto& t : name_tables()) {
    if (t.kind == kind) return t.names;
  }
  return {};
}

double per_particle_lipschitz(const std::string& name) {
  if (name == "rotation" || name == "linear_contraction" || name == "sine") return 1.0;
  throw InvalidArgument("map '" + name + "' is not Lipschitz");
}

// ---------------------------------------------------------------------------
// MpvfSpec

void MpvfSpec::validate() const {
  if (!std::isfinite(scale) || !std::isfinite(offset) || !std::isfinite(sign)) {
    throw ConfigError("field parameters must be finite");
  }
  switch (kind) {
    case FieldKind::Potential:
    case FieldKind::Interaction:
    case FieldKind::PairwiseMap:
    case FieldKind::PerParticleMap:
      if (!known_name(kind, name)) {
        throw ConfigError("unknown " + std::string(kind_name(kind)) + " name '" + name + "'");
      }
      break;
    default:
      break;
  }
  if (kind == FieldKind::Interaction && offset != 0.0) {
    throw ConfigError("interaction kernel must be even; a nonzero offset breaks evenness");
  }
  if (kind == FieldKind::Constant && theta.empty()) throw ConfigError("constant field needs theta");
  if (kind == FieldKind::TowardMeasure) {
    if (target.empty()) throw ConfigError("toward_measure needs a target");
    if (sign != 1.0 && sign != -1.0) throw ConfigError("toward_measure sign must be +1 or -1");
  }
  if (kind == FieldKind::CompositeSum || kind == FieldKind::SelectionList) {
    if (children.empty()) throw ConfigError(std::string(kind_name(kind)) + " needs children");
    std::size_t d = 0;
    for (const auto& c : children) {
      c.validate();
      const std::size_t cd = c.required_dim();
      if (cd != 0 && d != 0 && cd != d) throw ConfigError("children disagree on dimension");
      if (cd != 0) d = cd;
    }
  }
}

std::size_t MpvfSpec::required_dim() const {
  switch (kind) {
    case FieldKind::Rotation: return 2;
    case FieldKind::SplittingParticle: return 1;
    case FieldKind::Constant: return theta.dim();
    case FieldKind::TowardMeasure: return target.dim();
    case FieldKind::PairwiseMap:
      return name == "rotation_pairwise" ? 2 : 0;
    case FieldKind::PerParticleMap:
      return name == "rotation" ? 2 : 0;
    case FieldKind::CompositeSum:
    case FieldKind::SelectionList:
      for (const auto& c : children) {
        if (c.required_dim() != 0) return c.required_dim();
      }
      return 0;
    default:
      return 0;
  }
}

MpvfSpec MpvfSpec::potential(std::string name, double scale) {
  MpvfSpec s;
  s.kind = FieldKind::Potential;
  s.name = std::move(name);
  s.scale = scale;
  s.validate();
  return s;
}

MpvfSpec MpvfSpec::interaction(std::string kernel, double scale, double offset) {
  MpvfSpec s;
  s.kind = FieldKind::Interaction;
  s.name = std::move(kernel);
  s.scale = scale;
  s.offset = offset;
  s.validate();
  return s;
}

MpvfSpec MpvfSpec::constant(DiscreteMeasure theta) {
  MpvfSpec s;
  s.kind = FieldKind::Constant;
  s.theta = std::move(theta);
  s.validate();
  return s;
}

MpvfSpec MpvfSpec::rotation(double scale) {
  MpvfSpec s;
  s.kind = FieldKind::Rotation;
  s.scale = scale;
  s.validate();
  return s;
}

MpvfSpec MpvfSpec::splitting_particle() {
  MpvfSpec s;
  s.kind = FieldKind::SplittingParticle;
  return s;
}

MpvfSpec MpvfSpec::toward_measure(DiscreteMeasure target, double sign) {
  MpvfSpec s;
  s.kind = FieldKind::TowardMeasure;
  s.target = std::move(target);
  s.sign = sign;
  s.validate();
  return s;
}

MpvfSpec MpvfSpec::pairwise_map(std::string name, double scale) {
  MpvfSpec s;
  s.kind = FieldKind::PairwiseMap;
  s.name = std::move(name);
  s.scale = scale;
  s.validate();
  return s;
}

MpvfSpec MpvfSpec::per_particle_map(std::string name, double scale) {
  MpvfSpec s;
  s.kind = FieldKind::PerParticleMap;
  s.name = std::move(name);
  s.scale = scale;
  s.validate();
  return s;
}

MpvfSpec MpvfSpec::composite_sum(std::vector<MpvfSpec> children) {
  MpvfSpec s;
  s.kind = FieldKind::CompositeSum;
  s.children = std::move(children);
  s.validate();
  return s;
}

MpvfSpec MpvfSpec::selection_list(std::vector<MpvfSpec> children) {
  MpvfSpec s;
  s.kind = FieldKind::SelectionList;
  s.children = std::move(children);
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation

double splitting_point(const DiscreteMeasure& nu) {
  if (nu.dim() != 1) throw InvalidArgument("splitting point requires a one-dimensional measure");
  std::vector<std::size_t> order(nu.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return nu.point(a)[0] < nu.point(b)[0];
  });
  double cum = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double x = nu.point(order[k])[0];
    // All atoms at x enter the cumulative weight together.
    while (k < order.size() && std::abs(nu.point(order[k])[0] - x) <= kSplitTolerance) {
      cum += nu.weight(order[k]);
      ++k;
    }
    if (cum > 0.5 + kSplitTolerance) return x;
  }
  return nu.point(order.back())[0];
}

VelocityMeasure evaluate(const MpvfSpec& field, const DiscreteMeasure& mu) {
  return assemble(mu, conditionals(field, mu));
}

std::vector<VelocityMeasure> selections(const MpvfSpec& field, const DiscreteMeasure& mu) {
  if (field.kind != FieldKind::SelectionList) return {evaluate(field, mu)};
  std::vector<VelocityMeasure> out;
  for (const auto& c : field.children) {
    auto more = selections(c, mu);
    out.insert(out.end(), std::make_move_iterator(more.begin()),
               std::make_move_iterator(more.end()));
  }
  return out;
}

double field_norm(const MpvfSpec& field, const DiscreteMeasure& mu) {
  return velocity_norm(evaluate(field, mu));
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

MpvfSpec spec_from_json_value(const json& j) {
  if (!j.is_object()) throw ConfigError("field must be a JSON object");
  const std::string kind_str = get_string(j, "kind");
  auto kind = kind_from_name(kind_str);
  if (!kind) throw ConfigError("unknown field kind '" + kind_str + "'");
  MpvfSpec s;
  s.kind = *kind;
  s.name = get_string(j, "name", "");
  s.scale = get_number(j, "scale", 1.0);
  s.offset = get_number(j, "offset", 0.0);
  s.sign = get_number(j, "sign", 1.0);
  if (j.contains("theta")) s.theta = measure_from_json(j.at("theta"));
  if (j.contains("target")) s.target = measure_from_json(j.at("target"));
  if (j.contains("children")) {
    if (!j.at("children").is_array()) throw ConfigError("children must be an array");
    for (const auto& c : j.at("children")) s.children.push_back(spec_from_json_value(c));
  }
  s.validate();
  return s;
}

ojson spec_to_json_value(const MpvfSpec& field) {
  ojson j;
  j["kind"] = kind_name(field.kind);
  if (!field.name.empty()) j["name"] = field.name;
  if (field.scale != 1.0) j["scale"] = field.scale;
  if (field.offset != 0.0) j["offset"] = field.offset;
  if (field.kind == FieldKind::TowardMeasure) j["sign"] = field.sign;
  if (!field.theta.empty()) j["theta"] = measure_to_json(field.theta);
  if (!field.target.empty()) j["target"] = measure_to_json(field.target);
  if (!field.children.empty()) {
    ojson arr = ojson::array();
    for (const auto& c : field.children) arr.push_back(spec_to_json_value(c));
    j["children"] = std::move(arr);
  }
  return j;
}

}  // namespace detail

std::string spec_to_json(const MpvfSpec& field) { return detail::spec_to_json_value(field).dump(); }

MpvfSpec spec_from_json(std::string_view text) {
  detail::json j;
  try {
    j = detail::json::parse(text);
  } catch (const detail::json::exception& e) {
    throw ConfigError(std::string("field JSON: ") + e.what());
  }
  return detail::spec_from_json_value(j);
}

// ---------------------------------------------------------------------------
// Certificates

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

DiscreteMeasure MeasureSampler::sample(std::uint64_t stream) const {
  if (dim == 0 || min_atoms == 0 || max_atoms < min_atoms || !(box > 0.0)) {
    throw InvalidArgument("invalid sampler parameters");
  }
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(stream)));
  std::uniform_int_distribution<std::size_t> count(min_atoms, max_atoms);
  std::uniform_real_distribution<double> coord(-box, box);
  const std::size_t n = count(rng);
  std::vector<double> coords(n * dim);
  for (double& c : coords) c = coord(rng);
  return DiscreteMeasure::uniform(dim, std::move(coords));
}

std::pair<DiscreteMeasure, DiscreteMeasure> MeasureSampler::pair(std::size_t k) const {
  return {sample(2 * k), sample(2 * k + 1)};
}

namespace {

template <typename Residual>
DissipativityReport certify(const MeasureSampler& sampler, double lambda, std::size_t n_pairs,
                            Residual residual) {
  if (n_pairs == 0) throw InvalidArgument("certificate needs at least one pair");
  DissipativityReport rep;
  rep.lambda_tested = lambda;
  rep.n_pairs = n_pairs;
  rep.max_residual = -std::numeric_limits<double>::infinity();
  rep.passed = true;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    auto [mu0, mu1] = sampler.pair(k);
    PairRecord rec;
    rec.w2sq = w2(mu0, mu1).cost;
    rec.residual = residual(mu0, mu1) - lambda * rec.w2sq;
    rec.passed = rec.residual <= 1e-7 * (1.0 + rec.w2sq);
    if (!std::isfinite(rec.residual)) throw SolverError("certificate produced a non-finite residual");
    if (rec.residual > rep.max_residual) {
      rep.max_residual = rec.residual;
      rep.worst_index = k;
      rep.worst_mu0 = measure_to_csv(mu0);
      rep.worst_mu1 = measure_to_csv(mu1);
    }
    rep.passed = rep.passed && rec.passed;
    rep.pairs.push_back(rec);
  }
  return rep;
}

FieldFn as_fn(const MpvfSpec& field) {
  return [field](const DiscreteMeasure& mu) { return evaluate(field, mu); };
}

}  // namespace

DissipativityReport dissipativity_certificate(const FieldFn& field, const MeasureSampler& sampler,
                                              double lambda, std::size_t n_pairs) {
  return certify(sampler, lambda, n_pairs, [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return pairing_r(field(a), field(b)).value;
  });
}

DissipativityReport dissipativity_certificate(const MpvfSpec& field, const MeasureSampler& sampler,
                                              double lambda, std::size_t n_pairs) {
  return dissipativity_certificate(as_fn(field), sampler, lambda, n_pairs);
}

DissipativityReport weak_dissipativity_certificate(const FieldFn& field,
                                                   const MeasureSampler& sampler, double lambda,
                                                   std::size_t n_pairs) {
  return certify(sampler, lambda, n_pairs, [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return pairing_r_nu(field(a), b).value + pairing_r_nu(field(b), a).value;
  });
}

DissipativityReport weak_dissipativity_certificate(const MpvfSpec& field,
                                                   const MeasureSampler& sampler, double lambda,
                                                   std::size_t n_pairs) {
  return weak_dissipativity_certificate(as_fn(field), sampler, lambda, n_pairs);
}

std::string to_json(const DissipativityReport& report) {
  nlohmann::ordered_json j;
  j["lambda_tested"] = report.lambda_tested;
  j["n_pairs"] = report.n_pairs;
  j["max_residual"] = report.max_residual;
  j["worst_index"] = report.worst_index;
  j["worst_mu0"] = report.worst_mu0;
  j["worst_mu1"] = report.worst_mu1;
  j["passed"] = report.passed;
  auto& pairs = j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs)
    pairs.push_back({{"w2sq", p.w2sq}, {"residual", p.residual}, {"passed", p.passed}});
  return j.dump();
}

}  // namespace dissflow
