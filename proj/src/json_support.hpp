#pragma once

// JSON forms shared by the field specs and the experiment configs.

#include <json.hpp>

#include "dissflow/measure.hpp"
#include "dissflow/mpvf.hpp"

namespace dissflow::detail {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Accepted measure forms:
//   {"points": [[x1..xd], ...], "weights": [...]}   weights optional (uniform)
//   {"dirac": [x1..xd]}
//   {"interval": [a, b], "n": N}                      1-D quantile discretization
//   {"csv": "path"}                                   snapshot file
DiscreteMeasure measure_from_json(const json& j);
ojson measure_to_json(const DiscreteMeasure& mu);

MpvfSpec spec_from_json_value(const json& j);
ojson spec_to_json_value(const MpvfSpec& field);

// Typed lookups raising ConfigError with the key path in the message.
double get_number(const json& j, const char* key);
double get_number(const json& j, const char* key, double fallback);
std::string get_string(const json& j, const char* key);
std::string get_string(const json& j, const char* key, const std::string& fallback);

}  // namespace dissflow::detail
