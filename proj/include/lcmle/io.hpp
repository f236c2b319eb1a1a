#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcmle/mle.hpp"

namespace lcmle {

inline constexpr int kModelSchemaVersion = 1;

struct CsvTable {
  std::vector<std::string> header;  // empty when the first row is numeric
  std::vector<std::vector<double>> rows;
};

// Comma-separated numbers, optional header row. ParseError messages carry
// 1-based line and column numbers.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);
PointSet read_points(const std::string& path);

// Model file: schema_version, dim, count, points (one row per point), heights,
// log_partition, normalized, seed, config, diagnostics.
nlohmann::json model_to_json(const Model& model, std::uint64_t seed = 0,
                             const nlohmann::json& config = nlohmann::json::object());
Model model_from_json(const nlohmann::json& j);

void write_model(const std::string& path, const Model& model, std::uint64_t seed = 0,
                 const nlohmann::json& config = nlohmann::json::object());
Model read_model(const std::string& path);

nlohmann::json config_to_json(const FitConfig& cfg);

// Shortest decimal that round-trips; integral values keep a trailing ".0".
std::string format_real(double v);

}  // namespace lcmle
