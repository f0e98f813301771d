#include "json_support.hpp"

#include <cmath>

#include "dissflow/error.hpp"
#include "dissflow/io.hpp"

namespace dissflow::detail {

double get_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing key '") + key + "'");
  if (!it->is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return it->get<double>();
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return get_number(j, key);
}

std::string get_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing key '") + key + "'");
  if (!it->is_string()) throw ConfigError(std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  return get_string(j, key);
}

DiscreteMeasure measure_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("measure must be a JSON object");
  try {
    if (j.contains("dirac")) {
      auto x = j.at("dirac").get<std::vector<double>>();
      if (x.empty()) throw ConfigError("dirac needs at least one coordinate");
      return DiscreteMeasure::dirac(x);
    }
    if (j.contains("interval")) {
      auto ab = j.at("interval").get<std::vector<double>>();
      if (ab.size() != 2) throw ConfigError("interval must be [a, b]");
      const double n = get_number(j, "n");
      if (n < 1 || n != std::floor(n)) throw ConfigError("interval n must be a positive integer");
      return uniform_interval(ab[0], ab[1], static_cast<std::size_t>(n));
    }
    if (j.contains("csv")) return load_measure(get_string(j, "csv"));
    if (j.contains("points")) {
      auto pts = j.at("points").get<std::vector<std::vector<double>>>();
      if (pts.empty()) throw ConfigError("points must be nonempty");
      const std::size_t d = pts.front().size();
      std::vector<double> coords;
      for (const auto& p : pts) {
        if (p.size() != d || d == 0) throw ConfigError("points must share one positive dimension");
        coords.insert(coords.end(), p.begin(), p.end());
      }
      if (!j.contains("weights")) return DiscreteMeasure::uniform(d, std::move(coords));
      auto w = j.at("weights").get<std::vector<double>>();
      if (w.size() != pts.size()) throw ConfigError("weights and points differ in length");
      return DiscreteMeasure(d, std::move(coords), std::move(w));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed measure: ") + e.what());
  } catch (const InvalidMeasure& e) {
    throw ConfigError(std::string("invalid measure: ") + e.what());
  }
  throw ConfigError("measure needs one of 'points', 'dirac', 'interval', 'csv'");
}

ojson measure_to_json(const DiscreteMeasure& mu) {
  ojson pts = ojson::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  ojson j;
  j["points"] = std::move(pts);
  j["weights"] = mu.weights();
  return j;
}

}  // namespace dissflow::detail
