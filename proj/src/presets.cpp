#include <cmath>
#include <functional>
#include <numbers>

#include "dissflow/error.hpp"
#include "dissflow/experiment.hpp"
#include "json_support.hpp"

namespace dissflow {

using detail::ojson;

namespace {

ojson interval(double a, double b, int n) { return {{"interval", {a, b}}, {"n", n}}; }
ojson dirac(std::initializer_list<double> x) { return {{"dirac", std::vector<double>(x)}}; }
ojson points(std::vector<std::vector<double>> pts, std::vector<double> w = {}) {
  ojson j = {{"points", pts}};
  if (!w.empty()) j["weights"] = w;
  return j;
}

ojson splitting() { return {{"kind", "splitting_particle"}}; }
ojson rotation() { return {{"kind", "rotation"}}; }
ojson plus_minus_one() { return {{"kind", "constant"}, {"theta", points({{1.0}, {-1.0}})}}; }

// Rings of radius 1/4..1 with 8 angles each.
ojson disc_sample() {
  std::vector<std::vector<double>> pts;
  for (int r = 1; r <= 4; ++r) {
    for (int k = 0; k < 8; ++k) {
      const double a = 2.0 * std::numbers::pi * (k + 0.5 * (r % 2)) / 8.0;
      pts.push_back({0.25 * r * std::cos(a), 0.25 * r * std::sin(a)});
    }
  }
  return points(pts);
}

std::vector<double> dyadic_taus(int from, int to) {
  std::vector<double> t;
  for (int k = from; k <= to; ++k) t.push_back(std::ldexp(1.0, -k));
  return t;
}

struct Preset {
  const char* name;
  const char* description;
  std::function<ojson()> build;
};

const std::vector<Preset>& catalog() {
  static const std::vector<Preset> presets = {
      {"splitting_dirac", "Euler run of the splitting particle from a Dirac against the exact flow",
       [] {
         return ojson{{"command", "simulate"},
                      {"field", splitting()},
                      {"initial_measure", dirac({0.0})},
                      {"numeric", {{"tau", 0.125}, {"T", 1.0}, {"L", 2.0}}},
                      {"reference", "exact"}};
       }},
      {"splitting_lebesgue",
       "Euler run of the splitting particle from 200 quantiles of Leb[0,1] against the interval flow",
       [] {
         return ojson{{"command", "simulate"},
                      {"field", splitting()},
                      {"initial_measure", interval(0.0, 1.0, 200)},
                      {"numeric",
                       {{"tau", 0.125}, {"T", 1.0}, {"L", 2.0}, {"tolerances", {{"reference_w2", 0.02}}}}},
                      {"reference", {{"splitting_interval", {0.0, 1.0}}, {"n", 200}}}};
       }},
      {"constant_walk", "Rate study of the +-1 random walk: error sqrt(T tau), slope 1/2",
       [] {
         return ojson{{"command", "rate-study"},
                      {"field", plus_minus_one()},
                      {"initial_measure", dirac({0.0})},
                      {"numeric", {{"tau_list", dyadic_taus(3, 9)}, {"T", 1.0}, {"L", 1.0}}},
                      {"reference", {{"measure", dirac({0.0})}}},
                      {"expect", {{"slope", {0.48, 0.52}}, {"sqrt_law_rel", 0.02}}}};
       }},
      {"rotation_disc", "Rate study of the rotation field on a disc sample against the exact rotation",
       [] {
         return ojson{{"command", "rate-study"},
                      {"field", rotation()},
                      {"initial_measure", disc_sample()},
                      {"numeric", {{"tau_list", dyadic_taus(3, 7)}, {"T", 1.0}, {"L", 1.2}}},
                      {"reference", "exact"},
                      {"expect", {{"slope", {0.5, 1.05}}}}};
       }},
      {"geodesic_flow",
       "Contraction of the flow toward a target measure at lambda = -1, distance ratio e^{-t}",
       [] {
         return ojson{{"command", "contraction"},
                      {"field", {{"kind", "toward_measure"}, {"target", interval(-1.0, 1.0, 10)}}},
                      {"initial_measure", interval(-0.5, 0.5, 10)},
                      {"second_measure", interval(0.0, 2.0, 10)},
                      {"numeric", {{"tau", 0.01}, {"T", 1.0}, {"lambda", -1.0}, {"L", 2.0}}},
                      {"expect", {{"ratio_rate", -1.0}}}};
       }},
      {"rhombus_pairing", "Right and left pairings of the rhombus configuration: -1 and +1",
       [] {
         return ojson{{"command", "pairing"},
                      {"phi",
                       {{"points", {{1.0, 0.0}, {-1.0, 0.0}}},
                        {"velocities", {{0.0, 1.0}, {0.0, -1.0}}},
                        {"weights", {0.5, 0.5}}}},
                      {"nu", points({{0.0, 1.0}, {0.0, -1.0}}, {0.5, 0.5})},
                      {"expect", {{"right", {-1.0, 0.0}}, {"left", {1.0, 0.0}}}}};
       }},
      {"sign_filippov", "Euler run of x' = -sign(x), which stops at the origin",
       [] {
         return ojson{{"command", "simulate"},
                      {"field", {{"kind", "per_particle_map"}, {"name", "neg_sign"}}},
                      {"initial_measure", points({{2.0}, {-1.0}}, {0.5, 0.5})},
                      {"numeric",
                       {{"tau", 0.01}, {"T", 2.5}, {"L", 1.0}, {"tolerances", {{"reference_w2", 0.01}}}}},
                      {"reference", "exact"}};
       }},
      {"splitting_pairing", "Pairing of the splitting field on Leb[0,1] with the origin: 1/4",
       [] {
         return ojson{{"command", "pairing"},
                      {"field", splitting()},
                      {"initial_measure", interval(0.0, 1.0, 100)},
                      {"nu", dirac({0.0})},
                      {"expect", {{"right", {0.25, 0.01}}, {"w2sq", {1.0 / 3.0, 1e-3}}}}};
       }},
      {"rotation_certificate", "Dissipativity certificate of the rotation field at lambda = 0",
       [] {
         return ojson{{"command", "certify"},
                      {"field", rotation()},
                      {"sampler", {{"dim", 2}}},
                      {"numeric", {{"lambda", 0.0}, {"n_pairs", 50}, {"seed", 1}}}};
       }},
      {"potential_certificate", "Dissipativity certificate of -grad |x|^2/2 at lambda = -1",
       [] {
         return ojson{{"command", "certify"},
                      {"field", {{"kind", "potential"}, {"name", "quadratic_potential"}}},
                      {"sampler", {{"dim", 2}}},
                      {"numeric", {{"lambda", -1.0}, {"n_pairs", 50}, {"seed", 2}}}};
       }},
      {"splitting_certificate", "Dissipativity certificate of the splitting particle at lambda = 1/2",
       [] {
         return ojson{{"command", "certify"},
                      {"field", splitting()},
                      {"numeric", {{"lambda", 0.5}, {"n_pairs", 50}, {"seed", 3}}}};
       }},
      {"antipotential_certificate",
       "The sign-flipped potential fails at lambda = 0 with residual W2^2 on every pair",
       [] {
         return ojson{{"command", "certify"},
                      {"field",
                       {{"kind", "potential"}, {"name", "quadratic_potential"}, {"scale", -1.0}}},
                      {"sampler", {{"dim", 2}}},
                      {"numeric", {{"lambda", 0.0}, {"n_pairs", 50}, {"seed", 4}}},
                      {"expect_violation", true},
                      {"expect", {{"min_residual_over_w2sq", {1.0, 1e-9}}}}};
       }},
      {"splitting_evi", "EVI residual of the exact splitting flow from the origin at lambda = 1/2",
       [] {
         return ojson{{"command", "evi-check"},
                      {"field", splitting()},
                      {"initial_measure", dirac({0.0})},
                      {"nu", dirac({0.0})},
                      {"curve", "exact"},
                      {"numeric", {{"T", 1.0}, {"lambda", 0.5}, {"grid", 40}}}};
       }},
      {"stationary_evi", "EVI residual of the stationary curve at the origin: a violation is flagged",
       [] {
         return ojson{{"command", "evi-check"},
                      {"field", splitting()},
                      {"initial_measure", dirac({0.0})},
                      {"nu", interval(0.0, 1.0, 100)},
                      {"curve", "stationary"},
                      {"numeric", {{"T", 1.0}, {"lambda", 0.5}, {"grid", 40}}},
                      {"expect_violation", true},
                      {"expect", {{"min_violation", 0.05}}}};
       }},
      {"splitting_contraction", "Two splitting runs from nearby Diracs at lambda = 1/2",
       [] {
         return ojson{{"command", "contraction"},
                      {"field", splitting()},
                      {"initial_measure", dirac({0.0})},
                      {"second_measure", dirac({0.1})},
                      {"numeric", {{"tau", 0.01}, {"T", 1.0}, {"lambda", 0.5}, {"L", 1.0}}}};
       }},
      {"constant_cauchy", "Cauchy and same-step envelopes of the +-1 random walk",
       [] {
         return ojson{{"command", "cauchy"},
                      {"field", plus_minus_one()},
                      {"initial_measure", dirac({0.0})},
                      {"second_measure", points({{0.3}, {-0.2}}, {0.5, 0.5})},
                      {"numeric",
                       {{"tau_pairs", {{0.1, 0.05}, {0.02, 0.01}}},
                        {"T", 1.0},
                        {"theta", 2.0},
                        {"lambda", 0.0},
                        {"L", 1.0}}}};
       }},
      {"rotation_cauchy", "Cauchy and same-step envelopes of the rotation field",
       [] {
         return ojson{{"command", "cauchy"},
                      {"field", rotation()},
                      {"initial_measure", dirac({1.0, 0.0})},
                      {"second_measure", dirac({0.0, 0.5})},
                      {"numeric",
                       {{"tau_pairs", {{0.1, 0.05}, {0.02, 0.01}}},
                        {"T", 1.0},
                        {"theta", 2.0},
                        {"lambda", 0.0},
                        {"L", 1.1}}}};
       }},
      {"splitting_rate", "Rate study of the splitting particle from a Dirac: step-exact",
       [] {
         return ojson{{"command", "rate-study"},
                      {"field", splitting()},
                      {"initial_measure", dirac({0.2})},
                      {"numeric", {{"tau_list", dyadic_taus(2, 6)}, {"T", 1.0}, {"L", 1.0}}},
                      {"reference", "exact"},
                      {"expect", {{"max_error", 1e-12}}}};
       }},
      {"pairing_suite", "Pairing-calculus property suite on 100 seeded random instances",
       [] {
         return ojson{{"command", "pairing-suite"},
                      {"numeric", {{"seed", 2024}}},
                      {"suite", {{"n_instances", 100}, {"max_atoms", 6}, {"max_dim", 3}}}};
       }},
  };
  return presets;
}

const Preset& find(std::string_view name) {
  for (const auto& p : catalog())
    if (name == p.name) return p;
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : catalog()) names.emplace_back(p.name);
  return names;
}

std::string preset_description(std::string_view name) { return find(name).description; }

std::string preset_config(std::string_view name) {
  const auto& p = find(name);
  ojson j = p.build();
  j["description"] = p.description;
  j["output_dir"] = "dissflow_out/" + std::string(p.name);
  return j.dump(2) + "\n";
}

}  // namespace dissflow
