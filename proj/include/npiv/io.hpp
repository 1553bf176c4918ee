#pragma once

#include "npiv/bounds.hpp"
#include "npiv/firststage.hpp"
#include "npiv/oracle.hpp"
#include "npiv/shapes.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace npiv {

inline constexpr int kSchemaVersion = 1;

/// Reads a CSV with a header row naming columns y, x and z (any order, extra
/// columns ignored). Throws DataError naming the offending row on bad cells.
Sample read_sample_csv(std::istream& in, size_t min_rows = 1);
Sample read_sample_csv_file(const std::string& path, size_t min_rows = 1);

/// Writes "y,x,z" with shortest round-trip formatting.
void write_sample_csv(std::ostream& out, const Sample& sample);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Non-finite values become null.
nlohmann::json json_number(double v);
nlohmann::json json_array(std::span<const double> values);
nlohmann::json json_array(const Eigen::VectorXd& values);

nlohmann::json to_json(const EnvelopeBand& band);
nlohmann::json to_json(const ShapeSpec& spec);

/**
 * Shape config: {"rows": [{"deriv_order": 2, "sign": 1, "bound": 5.0}, ...]}.
 * A row whose bound is the string "unit_interval" expands into h <= 1 and -h <= 0
 * (its deriv_order must be 0 and sign is ignored).
 */
ShapeSpec shape_spec_from_json(const nlohmann::json& doc);

/// {"x_support": [...], "z_support": [...], "joint_pmf": [[...], ...], "g0": [...]}
DiscreteModel discrete_model_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DiscreteModel& model);

nlohmann::json read_json_file(const std::string& path);

}  // namespace npiv
