#include "npiv/io.hpp"

#include "npiv/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace npiv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

Eigen::VectorXd vector_from_json(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw InputError(std::string("discrete model is missing array '") + key + "'");
  }
  const auto& arr = doc.at(key);
  Eigen::VectorXd out(static_cast<Eigen::Index>(arr.size()));
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw InputError(std::string("non-numeric entry in '") + key + "'");
    out[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return out;
}

}  // namespace

Sample read_sample_csv(std::istream& in, size_t min_rows) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw DataError("CSV input is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_line(line);
  std::array<int, 3> col{-1, -1, -1};
  const std::array<const char*, 3> names{"y", "x", "z"};
  for (size_t c = 0; c < header.size(); ++c) {
    for (size_t k = 0; k < names.size(); ++k) {
      if (header[c] == names[k]) col[k] = static_cast<int>(c);
    }
  }
  for (size_t k = 0; k < names.size(); ++k) {
    if (col[k] < 0) throw DataError(std::string("CSV header is missing column '") + names[k] + "'");
  }

  Sample s;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    std::array<double, 3> v{};
    for (size_t k = 0; k < names.size(); ++k) {
      const auto c = static_cast<size_t>(col[k]);
      if (c >= cells.size() || !parse_double(cells[c], v[k])) {
        throw DataError("non-numeric or missing value in column '" + std::string(names[k]) +
                        "' at data row " + std::to_string(row));
      }
    }
    s.y.push_back(v[0]);
    s.x.push_back(v[1]);
    s.z.push_back(v[2]);
  }
  if (s.size() < std::max<size_t>(1, min_rows)) {
    throw DataError("CSV has " + std::to_string(s.size()) + " data rows, need at least " +
                    std::to_string(std::max<size_t>(1, min_rows)));
  }
  return s;
}

Sample read_sample_csv_file(const std::string& path, size_t min_rows) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return read_sample_csv(in, min_rows);
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

void write_sample_csv(std::ostream& out, const Sample& sample) {
  out << "y,x,z\n";
  for (size_t i = 0; i < sample.size(); ++i) {
    out << format_double(sample.y[i]) << ',' << format_double(sample.x[i]) << ','
        << format_double(sample.z[i]) << '\n';
  }
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json json_array(std::span<const double> values) {
  auto arr = nlohmann::json::array();
  for (double v : values) arr.push_back(json_number(v));
  return arr;
}

nlohmann::json json_array(const Eigen::VectorXd& values) {
  return json_array(std::span<const double>(values.data(), static_cast<size_t>(values.size())));
}

nlohmann::json to_json(const EnvelopeBand& band) {
  const auto& d = band.diagnostics;
  return {
      {"feasible", band.feasible},
      {"x_grid", json_array(band.x_grid)},
      {"lower", json_array(band.lower)},
      {"upper", json_array(band.upper)},
      {"central", json_array(band.central)},
      {"diagnostics",
       {{"d1_grid_gap", json_number(d.d1_grid_gap)},
        {"d2_grid_gap", json_number(d.d2_grid_gap)},
        {"gram_condition", json_number(d.gram_condition)},
        {"gram_ill_conditioned", d.gram_ill_conditioned},
        {"n_constraints", d.n_constraints},
        {"n_variables", d.n_variables},
        {"min_relaxation", json_number(d.min_relaxation)}}},
  };
}

nlohmann::json to_json(const ShapeSpec& spec) {
  auto rows = nlohmann::json::array();
  for (const auto& r : spec.rows()) {
    rows.push_back({{"deriv_order", r.deriv_order}, {"sign", r.sign}, {"bound", r.bound}});
  }
  return {{"rows", rows}};
}

ShapeSpec shape_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("rows") || !doc.at("rows").is_array()) {
    throw ConfigError("shape config needs a 'rows' array");
  }
  std::vector<ShapeRow> rows;
  for (const auto& entry : doc.at("rows")) {
    if (!entry.is_object()) throw ConfigError("each shape row must be an object");
    const int order = entry.value("deriv_order", 0);
    const auto& bound = entry.contains("bound") ? entry.at("bound") : nlohmann::json();
    if (bound.is_string()) {
      if (bound.get<std::string>() != "unit_interval") {
        throw ConfigError("unknown bound shorthand '" + bound.get<std::string>() + "'");
      }
      if (order != 0) throw ConfigError("'unit_interval' applies to deriv_order 0 only");
      rows.push_back({0, +1, 1.0});
      rows.push_back({0, -1, 0.0});
      continue;
    }
    if (!bound.is_number()) throw ConfigError("shape row bound must be a number or 'unit_interval'");
    rows.push_back({order, entry.value("sign", 1), bound.get<double>()});
  }
  return ShapeSpec(std::move(rows));
}

DiscreteModel discrete_model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("discrete model must be a JSON object");
  DiscreteModel model;
  model.x_support = vector_from_json(doc, "x_support");
  model.z_support = vector_from_json(doc, "z_support");
  model.g0 = vector_from_json(doc, "g0");
  if (!doc.contains("joint_pmf") || !doc.at("joint_pmf").is_array()) {
    throw InputError("discrete model is missing 'joint_pmf'");
  }
  const auto& pmf = doc.at("joint_pmf");
  const auto p = static_cast<Eigen::Index>(pmf.size());
  const auto m = model.x_support.size();
  model.joint_pmf.resize(p, m);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& row = pmf[static_cast<size_t>(j)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) {
      throw InputError("joint_pmf row " + std::to_string(j) + " must have " + std::to_string(m) +
                       " entries");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!row[static_cast<size_t>(i)].is_number()) throw InputError("non-numeric pmf entry");
      model.joint_pmf(j, i) = row[static_cast<size_t>(i)].get<double>();
    }
  }
  model.validate();
  return model;
}

nlohmann::json to_json(const DiscreteModel& model) {
  auto pmf = nlohmann::json::array();
  for (Eigen::Index j = 0; j < model.joint_pmf.rows(); ++j) {
    Eigen::VectorXd row = model.joint_pmf.row(j).transpose();
    pmf.push_back(json_array(row));
  }
  return {{"x_support", json_array(model.x_support)},
          {"z_support", json_array(model.z_support)},
          {"joint_pmf", pmf},
          {"g0", json_array(model.g0)}};
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open JSON file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed JSON in '" + path + "': " + e.what());
  }
}

}  // namespace npiv
