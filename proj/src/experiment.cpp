#include "dissflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "dissflow/analysis.hpp"
#include "dissflow/error.hpp"
#include "dissflow/euler.hpp"
#include "dissflow/io.hpp"
#include "dissflow/mpvf.hpp"
#include "dissflow/pairing.hpp"
#include "dissflow/properties.hpp"
#include "dissflow/transport.hpp"
#include "json_support.hpp"

namespace dissflow {

using detail::json;
using detail::ojson;

namespace {

// Pinned defaults. The first two may be overridden per config under
// numeric.tolerances; the rest are fixed by the library.
struct Tolerances {
  double reference_w2 = 1e-12;
  double contraction_ratio_rel = 0.1;
};

const std::vector<std::pair<std::string, double>>& pinned_tolerances() {
  static const std::vector<std::pair<std::string, double>> table = {
      {"merge", 1e-12},
      {"plan_dust", 1e-15},
      {"marginal", 1e-9},
      {"lexi_face_rel", 1e-9},
      {"certificate_rel", 1e-7},
      {"ievi_rel", 1e-7},
      {"evi_abs", 1e-7},
      {"same_step_abs", 1e-7},
      {"cauchy_abs", 0.0},
      {"stability_slack_rel", 1e-12},
      {"rate_noise_factor", 10.0},
  };
  return table;
}

enum class Command { Simulate, Pairing, Certify, EviCheck, RateStudy, Contraction, Cauchy, Suite };

const std::vector<std::pair<std::string, Command>>& command_table() {
  static const std::vector<std::pair<std::string, Command>> t = {
      {"simulate", Command::Simulate},       {"pairing", Command::Pairing},
      {"certify", Command::Certify},         {"evi-check", Command::EviCheck},
      {"rate-study", Command::RateStudy},    {"contraction", Command::Contraction},
      {"cauchy", Command::Cauchy},           {"pairing-suite", Command::Suite}};
  return t;
}

struct Config {
  Command command = Command::Simulate;
  std::string command_name;
  json raw;
  std::optional<MpvfSpec> field;
  std::optional<DiscreteMeasure> mu0;
  std::optional<DiscreteMeasure> mu1;
  std::optional<DiscreteMeasure> nu;
  std::optional<VelocityMeasure> phi;
  json numeric = json::object();
  json reference;
  json expect = json::object();
  bool expect_violation = false;
  std::filesystem::path output_dir = "dissflow_out";
  std::uint64_t seed = 0;
  Tolerances tol;
};

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) bad("unknown key '" + it.key() + "' in " + where);
  }
}

std::vector<double> number_list(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) bad(what + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

VelocityMeasure velocity_from_json(const json& j) {
  if (!j.is_object()) bad("phi must be an object");
  if (j.contains("csv")) return load_velocity(j.at("csv").get<std::string>());
  check_keys(j, {"points", "velocities", "weights"}, "phi");
  if (!j.contains("points") || !j.contains("velocities")) bad("phi needs points and velocities");
  const auto& pts = j.at("points");
  const auto& vel = j.at("velocities");
  if (!pts.is_array() || !vel.is_array() || pts.size() != vel.size() || pts.empty())
    bad("phi.points and phi.velocities must be non-empty arrays of equal length");
  std::size_t dim = 0;
  std::vector<double> xs, vs;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto x = number_list(pts[i], "phi.points[i]");
    auto v = number_list(vel[i], "phi.velocities[i]");
    if (i == 0) dim = x.size();
    if (x.size() != dim || v.size() != dim || dim == 0) bad("phi: inconsistent dimensions");
    xs.insert(xs.end(), x.begin(), x.end());
    vs.insert(vs.end(), v.begin(), v.end());
  }
  std::vector<double> w;
  if (j.contains("weights")) {
    w = number_list(j.at("weights"), "phi.weights");
  } else {
    w.assign(pts.size(), 1.0 / double(pts.size()));
  }
  try {
    return VelocityMeasure(dim, xs, vs, w);
  } catch (const InvalidMeasure& e) {
    bad(std::string("phi: ") + e.what());
  }
}

DiscreteMeasure measure_key(const json& j, const char* key) {
  try {
    return detail::measure_from_json(j.at(key));
  } catch (const InvalidMeasure& e) {
    bad(std::string(key) + ": " + e.what());
  }
}

double num(const json& numeric, const char* key) {
  if (!numeric.contains(key)) bad(std::string("numeric.") + key + " is required");
  if (!numeric.at(key).is_number()) bad(std::string("numeric.") + key + " must be a number");
  return numeric.at(key).get<double>();
}

double num(const json& numeric, const char* key, double fallback) {
  return numeric.contains(key) ? num(numeric, key) : fallback;
}

double positive(const json& numeric, const char* key) {
  const double v = num(numeric, key);
  if (!(v > 0.0) || !std::isfinite(v)) bad(std::string("numeric.") + key + " must be > 0");
  return v;
}

Config parse(std::string_view text) {
  Config c;
  try {
    c.raw = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  const json& j = c.raw;
  if (!j.is_object()) bad("config must be a JSON object");
  check_keys(j,
             {"command", "field", "initial_measure", "second_measure", "nu", "phi", "numeric",
              "reference", "expect", "expect_violation", "output_dir", "sampler", "weak", "curve",
              "suite", "description"},
             "config");
  if (!j.contains("command") || !j.at("command").is_string()) bad("command is required");
  c.command_name = j.at("command").get<std::string>();
  bool found = false;
  for (const auto& [name, cmd] : command_table()) {
    if (name == c.command_name) c.command = cmd, found = true;
  }
  if (!found) bad("unknown command '" + c.command_name + "'");

  if (j.contains("field")) c.field = detail::spec_from_json_value(j.at("field"));
  if (j.contains("initial_measure")) c.mu0 = measure_key(j, "initial_measure");
  if (j.contains("second_measure")) c.mu1 = measure_key(j, "second_measure");
  if (j.contains("nu")) c.nu = measure_key(j, "nu");
  if (j.contains("phi")) c.phi = velocity_from_json(j.at("phi"));
  if (j.contains("numeric")) {
    c.numeric = j.at("numeric");
    if (!c.numeric.is_object()) bad("numeric must be an object");
    check_keys(c.numeric,
               {"tau", "tau_list", "tau_pairs", "T", "L", "lambda", "seed", "tolerances", "n_pairs",
                "theta", "grid", "atom_budget", "resample"},
               "numeric");
  }
  if (c.numeric.contains("seed")) {
    const auto& s = c.numeric.at("seed");
    if (!s.is_number_unsigned()) bad("numeric.seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (c.numeric.contains("tolerances")) {
    const auto& t = c.numeric.at("tolerances");
    if (!t.is_object()) bad("numeric.tolerances must be an object");
    check_keys(t, {"reference_w2", "contraction_ratio_rel"},
               "numeric.tolerances (other tolerances are pinned)");
    c.tol.reference_w2 = num(t, "reference_w2", c.tol.reference_w2);
    c.tol.contraction_ratio_rel = num(t, "contraction_ratio_rel", c.tol.contraction_ratio_rel);
  }
  if (j.contains("reference")) c.reference = j.at("reference");
  if (j.contains("expect")) {
    c.expect = j.at("expect");
    if (!c.expect.is_object()) bad("expect must be an object");
  }
  if (j.contains("expect_violation")) {
    if (!j.at("expect_violation").is_boolean()) bad("expect_violation must be a boolean");
    c.expect_violation = j.at("expect_violation").get<bool>();
  }
  if (j.contains("output_dir")) c.output_dir = detail::get_string(j, "output_dir");
  if (j.contains("curve") && !j.at("curve").is_string()) bad("curve must be a string");

  auto need = [&](bool ok, const char* what) {
    if (!ok) bad("command " + c.command_name + " requires " + what);
  };
  switch (c.command) {
    case Command::Simulate:
    case Command::RateStudy:
    case Command::Contraction:
    case Command::Cauchy:
    case Command::EviCheck:
      need(c.field.has_value(), "field");
      need(c.mu0.has_value(), "initial_measure");
      break;
    case Command::Pairing:
      need(c.nu.has_value(), "nu");
      need(c.phi.has_value() || (c.field && c.mu0), "phi or field + initial_measure");
      break;
    case Command::Certify:
      need(c.field.has_value(), "field");
      break;
    case Command::Suite:
      break;
  }
  if (c.command == Command::Contraction) need(c.mu1.has_value(), "second_measure");
  if (c.command == Command::EviCheck) need(c.nu.has_value(), "nu");
  if (c.field && c.mu0 && c.field->required_dim() != 0 &&
      c.field->required_dim() != c.mu0->dim())
    bad("field requires dimension " + std::to_string(c.field->required_dim()) +
        " but initial_measure has dimension " + std::to_string(c.mu0->dim()));
  return c;
}

// ---------------------------------------------------------------------------
// Stability bound

// Linear growth |F|_2(mu) <= a + b m_2(mu) of the built-in fields; nullopt when
// no such bound is known (quartic terms).
std::optional<std::pair<double, double>> growth(const MpvfSpec& f, std::size_t dim) {
  const double s = std::abs(f.scale);
  switch (f.kind) {
    case FieldKind::Constant:
      return std::pair{std::sqrt(second_moment(f.theta)), 0.0};
    case FieldKind::SplittingParticle:
      return std::pair{1.0, 0.0};
    case FieldKind::Rotation:
      return std::pair{0.0, s};
    case FieldKind::Potential:
      if (f.name == "quadratic_potential") return std::pair{0.0, s};
      return std::nullopt;
    case FieldKind::Interaction:
      if (f.name == "quadratic_interaction") return std::pair{0.0, s};
      return std::nullopt;
    case FieldKind::PairwiseMap:
      return std::pair{0.0, s};
    case FieldKind::PerParticleMap:
      if (f.name == "neg_sign" || f.name == "sine") return std::pair{s * std::sqrt(double(dim)), 0.0};
      return std::pair{0.0, s * per_particle_lipschitz(f.name)};
    case FieldKind::TowardMeasure:
      return std::pair{std::sqrt(second_moment(f.target)), 1.0};
    case FieldKind::CompositeSum: {
      double a = 0.0, b = 0.0;
      for (const auto& c : f.children) {
        auto g = growth(c, dim);
        if (!g) return std::nullopt;
        a += g->first;
        b += g->second;
      }
      return std::pair{a, b};
    }
    case FieldKind::SelectionList: {
      double a = 0.0, b = 0.0;
      for (const auto& c : f.children) {
        auto g = growth(c, dim);
        if (!g) return std::nullopt;
        a = std::max(a, g->first);
        b = std::max(b, g->second);
      }
      return std::pair{a, b};
    }
  }
  return std::nullopt;
}

struct ResolvedL {
  double L = 0.0;
  bool automatic = false;
  GlobalBounds bounds;
};

ResolvedL resolve_L(const Config& c, const DiscreteMeasure& mu0, double T, double lambda) {
  if (!c.numeric.contains("L")) bad("numeric.L is required (a number or \"auto\")");
  const auto& l = c.numeric.at("L");
  ResolvedL r;
  if (l.is_string() && l.get<std::string>() == "auto") {
    auto g = growth(*c.field, mu0.dim());
    if (!g) bad("numeric.L = \"auto\" is not available for this field (no linear growth bound)");
    const auto [a, b] = *g;
    r.bounds = global_bounds(mu0, evaluate(*c.field, mu0), T, lambda,
                             [a = a, b = b](double R) { return a + b * R; });
    r.L = r.bounds.L;
    r.automatic = true;
    return r;
  }
  if (!l.is_number() || !(l.get<double>() > 0.0)) bad("numeric.L must be > 0 or \"auto\"");
  r.L = l.get<double>();
  return r;
}

void put_L(ojson& s, const ResolvedL& L) {
  s["L"] = L.L;
  s["L_source"] = L.automatic ? "auto" : "config";
  if (L.automatic) {
    s["global_bounds"] = {{"R", L.bounds.R}, {"L", L.bounds.L}, {"tau_max", L.bounds.tau_max}};
  }
}

EulerOptions euler_options(const Config& c) {
  EulerOptions o;
  if (c.numeric.contains("atom_budget")) {
    const auto& b = c.numeric.at("atom_budget");
    if (!b.is_number_unsigned() || b.get<std::size_t>() == 0)
      bad("numeric.atom_budget must be a positive integer");
    o.atom_budget = b.get<std::size_t>();
  }
  if (c.numeric.contains("resample")) {
    if (!c.numeric.at("resample").is_boolean()) bad("numeric.resample must be a boolean");
    o.resample = c.numeric.at("resample").get<bool>();
  }
  return o;
}

// ---------------------------------------------------------------------------
// Outputs

struct Output {
  std::filesystem::path dir;
  std::vector<std::pair<std::string, std::string>> files;  // path, sha256

  void write(const std::string& rel, const std::string& contents) {
    write_file_atomic(dir / rel, contents);
    files.emplace_back(rel, sha256_hex(contents));
  }
};

std::optional<CurveFn> reference_curve(const Config& c, const DiscreteMeasure& mu0) {
  if (c.reference.is_null()) return std::nullopt;
  const json& r = c.reference;
  if (r.is_string()) {
    if (r.get<std::string>() != "exact") bad("reference must be \"exact\" or an object");
    auto e = exact_solution(*c.field, mu0);
    if (!e) bad("reference \"exact\": no closed-form solution is known for this field");
    return e;
  }
  if (!r.is_object()) bad("reference must be \"exact\" or an object");
  if (r.contains("measure")) {
    auto m = measure_key(r, "measure");
    return CurveFn([m](double) { return m; });
  }
  if (r.contains("splitting_interval")) {
    auto ab = number_list(r.at("splitting_interval"), "reference.splitting_interval");
    if (ab.size() != 2 || !(ab[0] < ab[1])) bad("reference.splitting_interval must be [a, b], a < b");
    const double n = detail::get_number(r, "n");
    if (!(n >= 1.0) || n != std::floor(n)) bad("reference.n must be a positive integer");
    const double a = ab[0], b = ab[1];
    const auto count = std::size_t(n);
    return CurveFn([a, b, count](double t) { return analytic_splitting_interval(a, b, t, count); });
  }
  bad("reference object needs \"measure\" or \"splitting_interval\"");
}

// Expectation entries are [value, tolerance] pairs.
bool expect_close(const Config& c, ojson& summary, const char* key, double actual) {
  if (!c.expect.contains(key)) return true;
  auto vt = number_list(c.expect.at(key), std::string("expect.") + key);
  if (vt.size() != 2 || vt[1] < 0.0) bad(std::string("expect.") + key + " must be [value, tolerance]");
  const bool ok = std::abs(actual - vt[0]) <= vt[1];
  summary["expectations"][key] = {{"expected", vt[0]}, {"tolerance", vt[1]}, {"actual", actual},
                                  {"passed", ok}};
  return ok;
}

void append_rows(std::vector<CheckRow>& out, const std::vector<CheckRow>& rows) {
  out.insert(out.end(), rows.begin(), rows.end());
}

// ---------------------------------------------------------------------------
// Commands. Each fills the summary, writes its files and returns whether its
// checks passed.

bool run_simulate(const Config& c, Output& out, ojson& s) {
  const double tau = positive(c.numeric, "tau");
  const double T = positive(c.numeric, "T");
  const double lambda = num(c.numeric, "lambda", 0.0);
  const auto L = resolve_L(c, *c.mu0, T, lambda);
  auto traj = euler_run(*c.field, *c.mu0, tau, T, L.L, euler_options(c));
  put_L(s, L);
  s["tau"] = tau;
  s["T"] = T;
  s["N"] = traj.N;
  s["final_atoms"] = traj.M.back().size();
  s["final_second_moment"] = second_moment(traj.M.back());
  s["resampled_steps"] = traj.resampled_steps.size();
  for (std::size_t n = 0; n < traj.M.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "steps/step_%05zu.csv", n);
    out.write(name, measure_to_csv(traj.M[n]));
  }
  out.write("trajectory.json", trajectory_index_json(traj));

  bool ok = true;
  std::vector<CheckRow> rows;
  if (auto ref = reference_curve(c, *c.mu0)) {
    double worst = 0.0;
    for (std::size_t n = 0; n < traj.M.size(); ++n) {
      const double t = tau * double(n);
      const double e = w2_distance(traj.M[n], (*ref)(t));
      rows.push_back({"reference_w2", tau, t, e, c.tol.reference_w2, e - c.tol.reference_w2});
      worst = std::max(worst, e);
    }
    s["max_reference_w2"] = worst;
    s["reference_tolerance"] = c.tol.reference_w2;
    ok = ok && worst <= c.tol.reference_w2;
  }
  if (c.nu) {
    auto ievi = ievi_check(traj, *c.nu);
    for (const auto& r : ievi.rows)
      rows.push_back({"ievi", tau, tau * double(r.n), r.lhs, r.rhs, r.lhs - r.rhs});
    s["ievi_max_violation"] = ievi.max_violation;
    s["ievi_tolerance"] = ievi.tolerance;
    ok = ok && ievi.passed;
  }
  if (!rows.empty()) out.write("report.csv", report_csv(rows));
  return ok;
}

bool run_pairing(const Config& c, Output& out, ojson& s) {
  const VelocityMeasure phi = c.phi ? *c.phi : evaluate(*c.field, *c.mu0);
  auto r = pairing_r_nu(phi, *c.nu);
  auto l = pairing_l_nu(phi, *c.nu);
  const double w2sq = w2(x_marginal(phi), *c.nu).cost;
  s["right"] = r.value;
  s["left"] = l.value;
  s["w2sq"] = w2sq;
  out.write("witness_right.csv", plan_to_csv(r.witness));
  out.write("witness_left.csv", plan_to_csv(l.witness));
  bool ok = expect_close(c, s, "right", r.value);
  ok = expect_close(c, s, "left", l.value) && ok;
  ok = expect_close(c, s, "w2sq", w2sq) && ok;
  return ok;
}

MeasureSampler sampler_from(const Config& c) {
  MeasureSampler m;
  m.seed = c.seed;
  if (c.raw.contains("sampler")) {
    const auto& j = c.raw.at("sampler");
    if (!j.is_object()) bad("sampler must be an object");
    check_keys(j, {"dim", "min_atoms", "max_atoms", "box"}, "sampler");
    auto count = [&](const char* key, std::size_t fallback) {
      if (!j.contains(key)) return fallback;
      if (!j.at(key).is_number_unsigned() || j.at(key).get<std::size_t>() == 0)
        bad(std::string("sampler.") + key + " must be a positive integer");
      return j.at(key).get<std::size_t>();
    };
    m.dim = count("dim", m.dim);
    m.min_atoms = count("min_atoms", m.min_atoms);
    m.max_atoms = count("max_atoms", m.max_atoms);
    m.box = detail::get_number(j, "box", m.box);
    if (m.min_atoms > m.max_atoms) bad("sampler.min_atoms exceeds sampler.max_atoms");
    if (!(m.box > 0.0)) bad("sampler.box must be > 0");
  }
  if (c.field->required_dim() != 0 && c.field->required_dim() != m.dim)
    bad("sampler.dim does not match the field dimension");
  return m;
}

bool run_certify(const Config& c, Output& out, ojson& s) {
  const auto sampler = sampler_from(c);
  const double lambda = num(c.numeric, "lambda", 0.0);
  std::size_t n_pairs = 50;
  if (c.numeric.contains("n_pairs")) {
    if (!c.numeric.at("n_pairs").is_number_unsigned()) bad("numeric.n_pairs must be a positive integer");
    n_pairs = c.numeric.at("n_pairs").get<std::size_t>();
  }
  bool weak = false;
  if (c.raw.contains("weak")) {
    if (!c.raw.at("weak").is_boolean()) bad("weak must be a boolean");
    weak = c.raw.at("weak").get<bool>();
  }
  auto rep = weak ? weak_dissipativity_certificate(*c.field, sampler, lambda, n_pairs)
                  : dissipativity_certificate(*c.field, sampler, lambda, n_pairs);
  std::vector<CheckRow> rows;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.pairs.size(); ++k) {
    const auto& p = rep.pairs[k];
    const double budget = 1e-7 * (1.0 + p.w2sq);
    rows.push_back({weak ? "weak_dissipativity" : "dissipativity", lambda, double(k), p.residual,
                    budget, p.residual - budget});
    if (p.w2sq > 0.0) min_ratio = std::min(min_ratio, p.residual / p.w2sq);
  }
  out.write("report.csv", report_csv(rows));
  out.write("certificate.json", to_json(rep));
  s["lambda"] = lambda;
  s["weak"] = weak;
  s["n_pairs"] = rep.n_pairs;
  s["max_residual"] = rep.max_residual;
  s["worst_index"] = rep.worst_index;
  s["certified"] = rep.passed;
  if (std::isfinite(min_ratio)) s["min_residual_over_w2sq"] = min_ratio;
  bool ok = c.expect_violation ? !rep.passed : rep.passed;
  if (c.expect.contains("min_residual_over_w2sq")) {
    ok = expect_close(c, s, "min_residual_over_w2sq", min_ratio) && ok;
  }
  return ok;
}

bool run_evi(const Config& c, Output& out, ojson& s) {
  const double T = positive(c.numeric, "T");
  const double lambda = num(c.numeric, "lambda", 0.0);
  const std::string kind = c.raw.value("curve", std::string("exact"));
  CurveSamples curve;
  if (kind == "euler") {
    const double tau = positive(c.numeric, "tau");
    const auto L = resolve_L(c, *c.mu0, T, lambda);
    put_L(s, L);
    curve = trajectory_samples(euler_run(*c.field, *c.mu0, tau, T, L.L, euler_options(c)));
  } else {
    const double grid = num(c.numeric, "grid", 40.0);
    if (!(grid >= 2.0) || grid != std::floor(grid)) bad("numeric.grid must be an integer >= 2");
    const auto times = uniform_grid(0.0, T, std::size_t(grid));
    if (kind == "exact") {
      auto e = exact_solution(*c.field, *c.mu0);
      if (!e) bad("curve \"exact\": no closed-form solution is known for this field");
      curve = sample_curve(*e, times);
    } else if (kind == "stationary") {
      const DiscreteMeasure m = *c.mu0;
      curve = sample_curve([m](double) { return m; }, times);
    } else {
      bad("curve must be \"exact\", \"euler\" or \"stationary\"");
    }
  }
  auto rep = evi_residual(curve, *c.field, *c.nu, lambda);
  out.write("report.csv", report_csv(rep.rows));
  s["curve"] = kind;
  s["lambda"] = lambda;
  s["max_residual"] = rep.max_residual;
  s["worst_s"] = rep.worst_s;
  s["worst_t"] = rep.worst_t;
  s["budget"] = rep.budget;
  s["max_excess"] = rep.max_excess;
  s["certified"] = rep.passed;
  bool ok = c.expect_violation ? !rep.passed : rep.passed;
  if (c.expect.contains("min_violation")) {
    const double floor = detail::get_number(c.expect, "min_violation");
    const bool hit = rep.max_residual >= floor;
    s["expectations"]["min_violation"] = {{"expected_at_least", floor},
                                          {"actual", rep.max_residual},
                                          {"passed", hit}};
    ok = ok && hit;
  }
  return ok;
}

std::vector<double> tau_list(const Config& c) {
  if (!c.numeric.contains("tau_list")) bad("numeric.tau_list is required");
  auto taus = number_list(c.numeric.at("tau_list"), "numeric.tau_list");
  for (double t : taus)
    if (!(t > 0.0)) bad("numeric.tau_list entries must be > 0");
  return taus;
}

bool run_rate(const Config& c, Output& out, ojson& s) {
  const double T = positive(c.numeric, "T");
  const double lambda = num(c.numeric, "lambda", 0.0);
  const auto taus = tau_list(c);
  const auto L = resolve_L(c, *c.mu0, T, lambda);
  auto ref = reference_curve(c, *c.mu0);
  if (!ref) bad("command rate-study requires reference");
  auto fit = error_rate_study(*c.field, *c.mu0, *ref, taus, T, L.L);
  std::string table = "tau,error\n";
  for (std::size_t k = 0; k < fit.taus.size(); ++k)
    table += format_double(fit.taus[k]) + "," + format_double(fit.errors[k]) + "\n";
  out.write("rates.csv", table);
  put_L(s, L);
  s["T"] = T;
  s["slope"] = fit.slope;
  s["intercept"] = fit.intercept;
  s["r2"] = fit.r2;
  s["fit_valid"] = fit.fit_valid;
  s["excluded_taus"] = fit.excluded_taus;
  s["max_error"] = *std::max_element(fit.errors.begin(), fit.errors.end());
  s["max_envelope_excess"] = fit.max_envelope_excess;
  bool ok = fit.max_envelope_excess <= 0.0;
  if (c.expect.contains("slope")) {
    auto range = number_list(c.expect.at("slope"), "expect.slope");
    if (range.size() != 2) bad("expect.slope must be [low, high]");
    const bool in = fit.fit_valid && fit.slope >= range[0] && fit.slope <= range[1];
    s["expectations"]["slope"] = {{"low", range[0]}, {"high", range[1]}, {"actual", fit.slope},
                                  {"passed", in}};
    ok = ok && in;
  }
  if (c.expect.contains("max_error")) {
    const double cap = detail::get_number(c.expect, "max_error");
    const bool in = *std::max_element(fit.errors.begin(), fit.errors.end()) <= cap;
    s["expectations"]["max_error"] = {{"at_most", cap}, {"passed", in}};
    ok = ok && in;
  }
  if (c.expect.contains("sqrt_law_rel")) {
    // e(tau) = sqrt(T tau) pointwise within the given relative tolerance.
    const double rel = detail::get_number(c.expect, "sqrt_law_rel");
    double worst = 0.0;
    for (std::size_t k = 0; k < fit.taus.size(); ++k)
      worst = std::max(worst, std::abs(fit.errors[k] / std::sqrt(T * fit.taus[k]) - 1.0));
    s["expectations"]["sqrt_law_rel"] = {{"tolerance", rel}, {"actual", worst},
                                         {"passed", worst <= rel}};
    ok = ok && worst <= rel;
  }
  return ok;
}

bool run_contraction(const Config& c, Output& out, ojson& s) {
  const double tau = positive(c.numeric, "tau");
  const double T = positive(c.numeric, "T");
  const double lambda = num(c.numeric, "lambda", 0.0);
  const auto L = resolve_L(c, *c.mu0, T, lambda);
  auto a = euler_run(*c.field, *c.mu0, tau, T, L.L, euler_options(c));
  auto b = euler_run(*c.field, *c.mu1, tau, T, L.L, euler_options(c));
  auto rep = same_step_check(a, b, lambda);
  out.write("report.csv", report_csv(rep.rows));
  put_L(s, L);
  s["lambda"] = lambda;
  s["max_excess"] = rep.max_excess;
  const double w0 = w2_distance(*c.mu0, *c.mu1);
  const double wT = w2_distance(a.M.back(), b.M.back());
  const double tN = tau * double(a.N);
  s["initial_distance"] = w0;
  s["final_distance"] = wT;
  s["final_time"] = tN;
  bool ok = rep.passed;
  if (c.expect.contains("ratio_rate")) {
    const double rate = detail::get_number(c.expect, "ratio_rate");
    const double expected = std::exp(rate * tN);
    const double ratio = w0 > 0.0 ? wT / w0 : 1.0;
    const bool in = std::abs(ratio / expected - 1.0) <= c.tol.contraction_ratio_rel;
    s["expectations"]["ratio_rate"] = {{"expected_ratio", expected}, {"actual", ratio},
                                       {"relative_tolerance", c.tol.contraction_ratio_rel},
                                       {"passed", in}};
    ok = ok && in;
  }
  return ok;
}

bool run_cauchy(const Config& c, Output& out, ojson& s) {
  const double T = positive(c.numeric, "T");
  const double lambda = num(c.numeric, "lambda", 0.0);
  const double theta = num(c.numeric, "theta", 2.0);
  if (!c.numeric.contains("tau_pairs")) bad("numeric.tau_pairs is required");
  const auto& pairs = c.numeric.at("tau_pairs");
  if (!pairs.is_array() || pairs.empty()) bad("numeric.tau_pairs must be a non-empty array");
  const auto L = resolve_L(c, *c.mu0, T, lambda);
  put_L(s, L);
  std::vector<CheckRow> rows;
  bool ok = true;
  ojson results = ojson::array();
  for (const auto& p : pairs) {
    auto te = number_list(p, "numeric.tau_pairs[i]");
    if (te.size() != 2 || !(te[0] > 0.0) || !(te[1] > 0.0)) bad("tau_pairs entries must be [tau, eta]");
    auto coarse = euler_run(*c.field, *c.mu0, te[0], T, L.L, euler_options(c));
    auto fine = euler_run(*c.field, *c.mu0, te[1], T, L.L, euler_options(c));
    auto gap = cauchy_gap_check(coarse, fine, theta, lambda);
    append_rows(rows, gap.rows);
    ojson r = {{"tau", te[0]}, {"eta", te[1]}, {"cauchy_max_excess", gap.max_excess}};
    ok = ok && gap.passed;
    if (c.mu1) {
      for (double step : te) {
        auto a = euler_run(*c.field, *c.mu0, step, T, L.L, euler_options(c));
        auto b = euler_run(*c.field, *c.mu1, step, T, L.L, euler_options(c));
        auto same = same_step_check(a, b, lambda);
        append_rows(rows, same.rows);
        r[step == te[0] ? "same_step_max_excess_tau" : "same_step_max_excess_eta"] = same.max_excess;
        ok = ok && same.passed;
      }
    }
    results.push_back(std::move(r));
  }
  out.write("report.csv", report_csv(rows));
  s["theta"] = theta;
  s["cauchy_constant"] = cauchy_constant(theta);
  s["lambda"] = lambda;
  s["pairs"] = std::move(results);
  return ok;
}

bool run_suite(const Config& c, Output& out, ojson& s) {
  std::size_t n = 100, atoms = 6, dim = 3, brute = 4;
  if (c.raw.contains("suite")) {
    const auto& j = c.raw.at("suite");
    if (!j.is_object()) bad("suite must be an object");
    check_keys(j, {"n_instances", "max_atoms", "max_dim", "brute_force_atoms"}, "suite");
    auto count = [&](const char* key, std::size_t fallback) {
      if (!j.contains(key)) return fallback;
      if (!j.at(key).is_number_unsigned() || j.at(key).get<std::size_t>() == 0)
        bad(std::string("suite.") + key + " must be a positive integer");
      return j.at(key).get<std::size_t>();
    };
    n = count("n_instances", n);
    atoms = count("max_atoms", atoms);
    dim = count("max_dim", dim);
    brute = std::min<std::size_t>(count("brute_force_atoms", brute), 4);
  }
  auto rep = pairing_property_suite(c.seed, n, atoms, dim, brute);
  std::vector<CheckRow> rows;
  for (const auto& t : rep.properties)
    rows.push_back({t.name, double(t.checked), 0.0, t.max_violation, t.tolerance,
                    t.max_violation - t.tolerance});
  out.write("report.csv", report_csv(rows));
  s["suite"] = ojson::parse(to_json(rep));
  return rep.passed;
}

void write_manifest(const Config& c, Output& out, std::string_view config_text, int exit_code) {
  ojson m;
  m["command"] = c.command_name;
  m["seed"] = c.seed;
  m["exit_code"] = exit_code;
  m["config_sha256"] = sha256_hex(config_text);
  ojson tol = ojson::object();
  for (const auto& [k, v] : pinned_tolerances()) tol[k] = v;
  tol["reference_w2"] = c.tol.reference_w2;
  tol["contraction_ratio_rel"] = c.tol.contraction_ratio_rel;
  m["tolerances"] = std::move(tol);
  ojson files = ojson::array();
  for (const auto& [path, hash] : out.files) files.push_back({{"path", path}, {"sha256", hash}});
  m["files"] = std::move(files);
  const std::string text = m.dump(2) + "\n";
  write_file_atomic(out.dir / "manifest.json", text);
  out.files.emplace_back("manifest.json", sha256_hex(text));
}

}  // namespace

std::vector<std::pair<std::string, double>> tolerance_table() {
  auto t = pinned_tolerances();
  const Tolerances d;
  t.emplace_back("reference_w2", d.reference_w2);
  t.emplace_back("contraction_ratio_rel", d.contraction_ratio_rel);
  return t;
}

void validate_config(std::string_view config_json) { (void)parse(config_json); }

RunOutcome run_experiment(std::string_view config_json, const RunOverrides& overrides) {
  RunOutcome outcome;
  Config c;
  try {
    c = parse(config_json);
  } catch (const Error& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
    return outcome;
  }
  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.output_dir) c.output_dir = *overrides.output_dir;
  outcome.output_dir = c.output_dir;

  Output out{c.output_dir, {}};
  ojson summary;
  summary["command"] = c.command_name;
  summary["seed"] = c.seed;
  int code = kExitOk;
  try {
    std::filesystem::create_directories(out.dir);
    if (c.command == Command::Simulate) std::filesystem::create_directories(out.dir / "steps");
    bool passed = false;
    switch (c.command) {
      case Command::Simulate: passed = run_simulate(c, out, summary); break;
      case Command::Pairing: passed = run_pairing(c, out, summary); break;
      case Command::Certify: passed = run_certify(c, out, summary); break;
      case Command::EviCheck: passed = run_evi(c, out, summary); break;
      case Command::RateStudy: passed = run_rate(c, out, summary); break;
      case Command::Contraction: passed = run_contraction(c, out, summary); break;
      case Command::Cauchy: passed = run_cauchy(c, out, summary); break;
      case Command::Suite: passed = run_suite(c, out, summary); break;
    }
    if (c.expect_violation) summary["expect_violation"] = true;
    summary["passed"] = passed;
    code = passed ? kExitOk : kExitCheckFailed;
    outcome.message = passed ? "ok" : "check failed";
  } catch (const StabilityViolation& e) {
    code = kExitStability;
    outcome.message = e.what();
    summary["passed"] = false;
    summary["stability_violation"] = {{"step", e.step()},
                                      {"attempted_norm", e.attempted_norm()},
                                      {"bound", e.bound()}};
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
    return outcome;
  } catch (const InvalidMeasure& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
    return outcome;
  } catch (const DimensionMismatch& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
    return outcome;
  } catch (const InvalidArgument& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
    return outcome;
  } catch (const std::exception& e) {
    outcome.exit_code = kExitInternal;
    outcome.message = e.what();
    return outcome;
  }
  summary["exit_code"] = code;
  try {
    const std::string text = summary.dump(2) + "\n";
    out.write("summary.json", text);
    write_manifest(c, out, config_json, code);
  } catch (const std::exception& e) {
    outcome.exit_code = kExitInternal;
    outcome.message = e.what();
    return outcome;
  }
  outcome.exit_code = code;
  outcome.summary_json = summary.dump();
  for (const auto& f : out.files) outcome.files.push_back(f.first);
  return outcome;
}

RunOutcome run_experiment_file(const std::filesystem::path& config_path,
                               const RunOverrides& overrides) {
  std::string text;
  try {
    text = read_file(config_path);
  } catch (const std::exception& e) {
    RunOutcome o;
    o.exit_code = kExitConfig;
    o.message = e.what();
    return o;
  }
  return run_experiment(text, overrides);
}

}  // namespace dissflow
