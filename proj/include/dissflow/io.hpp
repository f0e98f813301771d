#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dissflow/measure.hpp"

namespace dissflow {

class Coupling;

// Snapshot formats. Values are written with 17 significant digits so that a
// save/load round trip reproduces every double exactly.
//   measure:          header `w,x1,...,xd`, one atom per row
//   velocity measure: header `w,x1,...,xd,v1,...,vd`
//   plan:             header `i,j,mass`
std::string measure_to_csv(const DiscreteMeasure& mu);
std::string velocity_to_csv(const VelocityMeasure& phi);
std::string plan_to_csv(const Coupling& plan);

DiscreteMeasure measure_from_csv(std::string_view text);
VelocityMeasure velocity_from_csv(std::string_view text);

DiscreteMeasure load_measure(const std::filesystem::path& path);
VelocityMeasure load_velocity(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// %.17g formatting.
std::string format_double(double v);

}  // namespace dissflow
