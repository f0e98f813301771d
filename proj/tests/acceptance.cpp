// Acceptance suite: one PASS/FAIL line per criterion. Each scenario runs the
// corresponding preset through the experiment runner, then the artifacts are
// re-checked here against the thresholds below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dissflow/experiment.hpp"
#include "dissflow/io.hpp"
#include "dissflow/measure.hpp"
#include "dissflow/transport.hpp"
#include "json.hpp"

using namespace dissflow;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Pinned acceptance thresholds.
constexpr double kSplitDiracW2 = 1e-12;
constexpr double kSplitLebesgueW2 = 0.02;
constexpr double kPairingRight = 0.25;
constexpr double kPairingRightTol = 0.01;
constexpr double kPairingW2sq = 1.0 / 3.0;
constexpr double kPairingW2sqTol = 1e-3;
constexpr double kRhombusTol = 0.0;
constexpr std::size_t kCertificatePairs = 50;
constexpr double kCertificateRel = 1e-7;
constexpr double kAntiRatioTol = 1e-9;
constexpr double kSqrtLawRel = 0.02;
constexpr double kSlopeLo = 0.48;
constexpr double kSlopeHi = 0.52;
constexpr double kRotationSlopeLo = 0.5;
constexpr double kRotationSlopeHi = 1.05;
constexpr double kEnvelopeExcess = 0.0;
constexpr double kCauchyExcess = 0.0;
constexpr double kSameStepExcess = 0.0;
constexpr double kEviExcess = 0.0;
constexpr double kStationaryViolation = 0.05;
constexpr double kContractionExcess = 0.0;
constexpr double kGeodesicRatioRel = 0.10;
constexpr std::size_t kSuiteInstances = 100;
constexpr std::size_t kSuiteMaxAtoms = 6;
constexpr std::size_t kSuiteMaxDim = 3;
constexpr std::size_t kBruteForceAtoms = 4;

fs::path g_root;

struct Check {
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Runs a preset and returns its summary; records a failure on a nonzero exit.
json run_preset(const std::string& name, Check& c, fs::path* dir_out = nullptr) {
  RunOverrides o;
  o.output_dir = g_root / name;
  fs::remove_all(*o.output_dir);
  const auto out = run_experiment(preset_config(name), o);
  if (dir_out) *dir_out = out.output_dir;
  c.require(out.exit_code == kExitOk, name + " exit " + std::to_string(out.exit_code) + ": " + out.message);
  if (out.summary_json.empty()) return json::object();
  return json::parse(out.summary_json);
}

double num(const json& j, const char* key) {
  return j.contains(key) && j[key].is_number() ? j[key].get<double>() : std::nan("");
}

void criterion_splitting(Check& c) {
  fs::path dir;
  const json s = run_preset("splitting_dirac", c, &dir);
  c.require(num(s, "tau") == 0.125 && num(s, "T") == 1.0 && num(s, "L") == 2.0, "splitting_dirac parameters");
  double worst = 0.0;
  for (int n = 0; n <= 8; ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%05d.csv", n);
    const auto m = load_measure(dir / "steps" / name);
    const double t = 0.125 * n;
    const auto exact = n == 0 ? DiscreteMeasure::dirac({0.0})
                              : DiscreteMeasure(1, {-t, t}, {0.5, 0.5});
    worst = std::max(worst, w2_distance(m, exact));
  }
  c.require(worst <= kSplitDiracW2, "Dirac W2 " + fmt(worst));

  const json l = run_preset("splitting_lebesgue", c);
  c.require(num(l, "final_atoms") >= 200, "Lebesgue run uses n = 200");
  const double lw = num(l, "max_reference_w2");
  c.require(lw <= kSplitLebesgueW2, "Lebesgue W2 " + fmt(lw));
}

void criterion_pairing(Check& c) {
  const json s = run_preset("splitting_pairing", c);
  c.require(std::abs(num(s, "right") - kPairingRight) <= kPairingRightTol, "right " + fmt(num(s, "right")));
  c.require(std::abs(num(s, "w2sq") - kPairingW2sq) <= kPairingW2sqTol, "w2sq " + fmt(num(s, "w2sq")));
  const json r = run_preset("rhombus_pairing", c);
  c.require(std::abs(num(r, "right") + 1.0) <= kRhombusTol, "rhombus right " + fmt(num(r, "right")));
  c.require(std::abs(num(r, "left") - 1.0) <= kRhombusTol, "rhombus left " + fmt(num(r, "left")));
}

void criterion_certificates(Check& c) {
  struct Case {
    const char* preset;
    double lambda;
  };
  for (const Case k : {Case{"rotation_certificate", 0.0}, Case{"potential_certificate", -1.0},
                       Case{"splitting_certificate", 0.5}}) {
    fs::path dir;
    const json s = run_preset(k.preset, c, &dir);
    c.require(num(s, "lambda") == k.lambda, std::string(k.preset) + " lambda");
    c.require(num(s, "n_pairs") == kCertificatePairs, std::string(k.preset) + " pair count");
    const json cert = json::parse(read_file(dir / "certificate.json"));
    bool all = cert["pairs"].size() == kCertificatePairs;
    for (const auto& p : cert["pairs"])
      all = all && p["residual"].get<double>() <= kCertificateRel * (1.0 + p["w2sq"].get<double>());
    c.require(all, std::string(k.preset) + " residual max " + fmt(num(s, "max_residual")));
  }
  fs::path dir;
  const json a = run_preset("antipotential_certificate", c, &dir);
  c.require(a["certified"] == false, "sign-flipped potential certified");
  const json cert = json::parse(read_file(dir / "certificate.json"));
  bool all = cert["pairs"].size() == kCertificatePairs;
  for (const auto& p : cert["pairs"]) {
    const double w = p["w2sq"].get<double>();
    all = all && w > 0.0 && p["residual"].get<double>() >= w * (1.0 - kAntiRatioTol);
  }
  c.require(all, "sign-flipped residual below W2^2 on some pair");
}

std::vector<std::pair<double, double>> read_rates(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return rows;
}

void criterion_rates(Check& c) {
  fs::path dir;
  const json s = run_preset("constant_walk", c, &dir);
  const auto rows = read_rates(dir / "rates.csv");
  c.require(rows.size() == 7, "constant study tau count " + std::to_string(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double tau = rows[k].first;
    c.require(tau == std::ldexp(1.0, -3 - static_cast<int>(k)), "tau grid");
    const double expected = std::sqrt(1.0 * tau);
    c.require(std::abs(rows[k].second - expected) <= kSqrtLawRel * expected,
              "sqrt law at tau " + fmt(tau) + ": " + fmt(rows[k].second));
  }
  const double slope = num(s, "slope");
  c.require(slope >= kSlopeLo && slope <= kSlopeHi, "constant slope " + fmt(slope));
  c.require(num(s, "max_envelope_excess") <= kEnvelopeExcess, "constant envelope");

  const json r = run_preset("rotation_disc", c);
  const double rs = num(r, "slope");
  c.require(rs >= kRotationSlopeLo && rs <= kRotationSlopeHi, "rotation slope " + fmt(rs));
  c.require(num(r, "max_envelope_excess") <= kEnvelopeExcess, "rotation envelope");
}

void criterion_cauchy(Check& c) {
  for (const char* preset : {"constant_cauchy", "rotation_cauchy"}) {
    const json s = run_preset(preset, c);
    c.require(num(s, "theta") == 2.0, std::string(preset) + " theta");
    const auto& pairs = s.value("pairs", json::array());
    c.require(pairs.size() == 2, std::string(preset) + " pair count");
    for (const auto& p : pairs) {
      const std::string tag = std::string(preset) + " " + fmt(p["tau"].get<double>()) + "/" +
                              fmt(p["eta"].get<double>());
      c.require(p["cauchy_max_excess"].get<double>() <= kCauchyExcess, tag + " cauchy excess");
      c.require(p["same_step_max_excess_tau"].get<double>() <= kSameStepExcess, tag + " same-step tau");
      c.require(p["same_step_max_excess_eta"].get<double>() <= kSameStepExcess, tag + " same-step eta");
    }
  }
}

void criterion_evi(Check& c) {
  const json s = run_preset("splitting_evi", c);
  c.require(num(s, "max_excess") <= kEviExcess && s["certified"] == true,
            "exact flow residual " + fmt(num(s, "max_residual")) + " budget " + fmt(num(s, "budget")));
  const json v = run_preset("stationary_evi", c);
  const double viol = num(v, "max_residual");
  c.require(v["certified"] == false, "stationary curve certified");
  c.require(viol >= kStationaryViolation && num(v, "max_excess") > 0.0, "stationary violation " + fmt(viol));
}

void criterion_contraction(Check& c) {
  const json s = run_preset("splitting_contraction", c);
  c.require(num(s, "lambda") == 0.5, "splitting lambda");
  c.require(num(s, "max_excess") <= kContractionExcess, "splitting excess " + fmt(num(s, "max_excess")));
  const json g = run_preset("geodesic_flow", c);
  c.require(num(g, "lambda") == -1.0, "geodesic lambda");
  c.require(num(g, "max_excess") <= kContractionExcess, "geodesic excess " + fmt(num(g, "max_excess")));
  const double ratio = num(g, "final_distance") / num(g, "initial_distance");
  const double target = std::exp(-1.0);
  c.require(num(g, "final_time") == 1.0, "geodesic final time");
  c.require(std::abs(ratio - target) <= kGeodesicRatioRel * target, "geodesic ratio " + fmt(ratio));
}

void criterion_suite(Check& c) {
  const json s = run_preset("pairing_suite", c);
  const json& suite = s.value("suite", json::object());
  c.require(suite.value("n_instances", 0) == kSuiteInstances, "instance count");
  const json cfg = json::parse(preset_config("pairing_suite"));
  c.require(cfg["suite"].value("max_atoms", 0) <= kSuiteMaxAtoms, "max atoms");
  c.require(cfg["suite"].value("max_dim", 0) <= kSuiteMaxDim, "max dim");
  c.require(cfg["suite"].value("brute_force_atoms", kBruteForceAtoms) <= kBruteForceAtoms, "brute-force atoms");
  const std::vector<std::string> required = {"r_le_l", "measure_pairing_bounds", "negation_identity",
                                             "lambda_transform_identity", "semiconcavity",
                                             "brute_force_agreement"};
  for (const auto& name : required) {
    bool found = false;
    for (const auto& p : suite.value("properties", json::array())) {
      if (p["name"] != name) continue;
      found = true;
      c.require(p["checked"].get<std::size_t>() > 0, name + " unchecked");
      c.require(p["failures"].get<std::size_t>() == 0,
                name + " failures " + std::to_string(p["failures"].get<std::size_t>()));
    }
    c.require(found, name + " missing");
  }
  const json lam = [&] {
    for (const auto& p : suite.value("properties", json::array()))
      if (p["name"] == "lambda_transform_identity") return p;
    return json::object();
  }();
  c.require(lam.value("tolerance", 1.0) <= 1e-8, "lambda-transform tolerance");
}

struct Criterion {
  int id;
  const char* title;
  double limit_s;
  std::function<void(Check&)> body;
};

}  // namespace

int main(int argc, char** argv) {
  g_root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "dissflow_acceptance";
  fs::create_directories(g_root);

  const std::vector<Criterion> criteria = {
      {1, "splitting-particle exactness", 5.0, criterion_splitting},
      {2, "pairing values", 2.0, criterion_pairing},
      {3, "dissipativity certificates", 10.0, criterion_certificates},
      {4, "convergence order", 30.0, criterion_rates},
      {5, "Cauchy and same-step envelopes", 30.0, criterion_cauchy},
      {6, "EVI discrimination", 10.0, criterion_evi},
      {7, "contraction", 10.0, criterion_contraction},
      {8, "pairing-calculus property suite", 60.0, criterion_suite},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs < cr.limit_s, "runtime " + fmt(secs) + " s over " + fmt(cr.limit_s) + " s");
    const bool ok = c.failures.empty();
    if (!ok) ++failed;
    std::printf("%s criterion %d: %s (%.2f s)", ok ? "PASS" : "FAIL", cr.id, cr.title, secs);
    for (const auto& f : c.failures) std::printf(" | %s", f.c_str());
    std::printf("\n");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
