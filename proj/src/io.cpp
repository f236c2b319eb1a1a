#include "lcmle/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lcmle/error.hpp"

namespace lcmle {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(v);
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    int bad = -1;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_number(fields[c], row[c])) {
        bad = static_cast<int>(c);
        break;
      }
    }
    const bool first_row = table.rows.empty() && table.header.empty();
    if (bad >= 0 && first_row) {
      table.header = fields;
      width = fields.size();
      continue;
    }
    if (bad >= 0) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(line_no) + " column " +
                                             std::to_string(bad + 1) + ": not a number: '" +
                                             fields[bad] + "'");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " columns, expected " +
                                             std::to_string(width));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw Error(ErrorKind::ParseError, "no data rows");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  return parse_csv(in);
}

PointSet read_points(const std::string& path) { return PointSet::from_rows(read_csv(path).rows); }

nlohmann::json config_to_json(const FitConfig& cfg) {
  nlohmann::json j;
  j["iterations"] = cfg.iterations;
  j["step_constant"] = cfg.step_constant;
  j["chain_steps"] = cfg.chain_steps;
  j["round_target_C"] = cfg.round_target_C;
  j["tv_exponent"] = cfg.tv_exponent;
  j["restart"] = cfg.restart;
  j["radius_clip"] = cfg.radius_clip ? nlohmann::json(*cfg.radius_clip) : nlohmann::json(nullptr);
  j["strict_tv"] = cfg.strict_tv;
  j["iterate"] = cfg.iterate == IterateMode::Last ? "last" : "suffix";
  j["epsilon"] = cfg.epsilon;
  return j;
}

nlohmann::json model_to_json(const Model& model, std::uint64_t seed, const nlohmann::json& config) {
  const PointSet& ps = model.point_set;
  nlohmann::json j;
  j["schema_version"] = kModelSchemaVersion;
  j["dim"] = ps.dim();
  j["count"] = ps.count();
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(ps.dim()) * ps.count());
  for (int i = 0; i < ps.count(); ++i) {
    for (int k = 0; k < ps.dim(); ++k) points.push_back(ps.points()(k, i));
  }
  j["points"] = points;
  const Eigen::VectorXd& y = model.heights.heights();
  j["heights"] = std::vector<double>(y.data(), y.data() + y.size());
  j["log_partition"] = model.log_partition;
  j["log_partition_error"] = model.log_partition_error;
  j["normalized"] = model.normalized;
  j["seed"] = seed;
  j["config"] = config;
  const Diagnostics& d = model.diagnostics;
  j["diagnostics"] = {{"iterations_run", d.iterations_run},
                      {"final_height_norm", d.final_height_norm},
                      {"max_height_norm", d.max_height_norm},
                      {"surrogate_trace", d.surrogate_trace}};
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw Error(ErrorKind::ParseError, "unsupported model schema version " + std::to_string(version));
    }
    const int dim = j.at("dim").get<int>();
    const int count = j.at("count").get<int>();
    const auto points = j.at("points").get<std::vector<double>>();
    const auto heights = j.at("heights").get<std::vector<double>>();
    if (dim < 1 || count < 1 || points.size() != static_cast<std::size_t>(dim) * count ||
        heights.size() != static_cast<std::size_t>(count)) {
      throw Error(ErrorKind::ParseError, "model arrays do not match dim/count");
    }
    Eigen::MatrixXd x(dim, count);
    for (int i = 0; i < count; ++i) {
      for (int k = 0; k < dim; ++k) x(k, i) = points[static_cast<std::size_t>(i) * dim + k];
    }
    Model m{PointSet(std::move(x)),
            TentParams(Eigen::Map<const Eigen::VectorXd>(heights.data(), count)),
            j.at("log_partition").get<double>(),
            j.value("log_partition_error", 0.0),
            j.at("normalized").get<bool>(),
            {}};
    if (j.contains("diagnostics")) {
      const auto& d = j["diagnostics"];
      m.diagnostics.iterations_run = d.value("iterations_run", 0);
      m.diagnostics.final_height_norm = d.value("final_height_norm", 0.0);
      m.diagnostics.max_height_norm = d.value("max_height_norm", 0.0);
      m.diagnostics.surrogate_trace = d.value("surrogate_trace", std::vector<double>{});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed model file: ") + e.what());
  }
}

void write_model(const std::string& path, const Model& model, std::uint64_t seed,
                 const nlohmann::json& config) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write " + path);
  out << model_to_json(model, seed, config).dump(2) << '\n';
}

Model read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed model file: ") + e.what());
  }
  return model_from_json(j);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace lcmle
