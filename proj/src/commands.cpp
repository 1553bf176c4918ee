#include "npiv/commands.hpp"

#include "npiv/bounds.hpp"
#include "npiv/io.hpp"
#include "npiv/oracle.hpp"

#include <exception>
#include <sstream>

namespace npiv {

namespace {

const char* command_name(Command c) {
  switch (c) {
    case Command::estimate: return "estimate";
    case Command::simulate: return "simulate";
    case Command::oracle: return "oracle";
    case Command::bias: return "bias";
    case Command::reduced_form: return "reduced-form";
  }
  return "unknown";
}

nlohmann::json dgp_json(const ContinuousDGPParams& p) {
  return {{"catalog_version", kDgpCatalogVersion},
          {"h0", p.h0},
          {"u0", p.u0},
          {"u0_amplitude", p.u0_amplitude},
          {"u0_frequency", p.u0_frequency},
          {"z_lo", p.z_lo},
          {"z_hi", p.z_hi},
          {"rho", p.rho},
          {"endogeneity", p.endogeneity},
          {"noise_sd", p.noise_sd}};
}

BoundsConfig bounds_config(const RunConfig& rc) {
  BoundsConfig bc;
  bc.k_dim = rc.k_dim;
  bc.l_dim = rc.l_dim;
  bc.spline_order = rc.spline_order;
  bc.x_grid_size = rc.x_grid;
  bc.z_grid_size = rc.z_grid;
  bc.z_quantile_trim = rc.trim;
  return bc;
}

Sample load_sample(const RunConfig& rc, nlohmann::json& source) {
  if (!rc.input_path.empty()) {
    source = {{"source", "csv"}, {"path", rc.input_path}};
    return read_sample_csv_file(rc.input_path, static_cast<size_t>(rc.l_dim));
  }
  const ContinuousDGP dgp(*rc.dgp);
  source = {{"source", "dgp"}, {"dgp", dgp_json(*rc.dgp)}, {"n", rc.n}, {"seed", rc.seed}};
  return generate(dgp, rc.n, rc.seed);
}

nlohmann::json common_config(const RunConfig& rc) {
  return {{"k_dim", rc.k_dim},     {"l_dim", rc.l_dim},   {"spline_order", rc.spline_order},
          {"x_grid", rc.x_grid},   {"z_grid", rc.z_grid}, {"trim", rc.trim}};
}

DiscreteModel load_model(const RunConfig& rc) {
  return discrete_model_from_json(read_json_file(rc.model_path));
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void RunConfig::validate() const {
  const bool needs_data = command == Command::estimate || command == Command::reduced_form;
  if (needs_data && input_path.empty() == !dgp.has_value()) {
    throw ConfigError("exactly one data source is required: --input or --dgp");
  }
  if (command == Command::simulate && !dgp && model_path.empty()) {
    throw ConfigError("simulate needs --dgp or --model");
  }
  if ((command == Command::oracle || command == Command::bias) && model_path.empty()) {
    throw ConfigError(std::string(command_name(command)) + " needs --model");
  }
  if (b_sweep.empty()) throw ConfigError("b sweep must be nonempty");
  if (c_sweep.empty() && shape_path.empty()) throw ConfigError("c sweep must be nonempty");
  if (n < 1) throw ConfigError("--n must be >= 1");
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_configuration: return kExitConfig;
    case ErrorKind::invalid_input:
    case ErrorKind::domain:
    case ErrorKind::data: return kExitData;
    case ErrorKind::infeasible: return kExitInfeasible;
    case ErrorKind::singular_design:
    case ErrorKind::solver_failure: return kExitNumerical;
  }
  return kExitNumerical;
}

std::string dump_document(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

CommandResult run_estimate(const RunConfig& rc) {
  rc.validate();
  nlohmann::json source;
  const Sample sample = load_sample(rc, source);
  const BoundsConfig bc = bounds_config(rc);
  const EstimationContext ctx = prepare_estimation(sample, bc, rc.exec);

  struct Cell {
    double b;
    std::optional<double> c;
    ShapeSpec shape;
  };
  std::vector<Cell> cells;
  std::optional<ShapeSpec> file_shape;
  if (!rc.shape_path.empty()) file_shape = shape_spec_from_json(read_json_file(rc.shape_path));
  for (double b : rc.b_sweep) {
    if (file_shape) {
      cells.push_back({b, std::nullopt, *file_shape});
    } else {
      for (double c : rc.c_sweep) cells.push_back({b, c, default_engel_spec(c)});
    }
  }

  // Cells run in parallel; each cell's envelope loop stays serial inside.
  std::vector<EnvelopeBand> bands(cells.size());
  std::exception_ptr failure;
  const auto count = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic) if (is_parallel(rc.exec))
  for (long i = 0; i < count; ++i) {
    try {
      bands[i] = estimate_envelopes(ctx, cells[i].b, cells[i].shape, Execution::serial);
    } catch (...) {
#pragma omp critical(npiv_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  nlohmann::json config = common_config(rc);
  config["b_sweep"] = rc.b_sweep;
  if (file_shape) {
    config["shape"] = to_json(*file_shape);
  } else {
    config["c_sweep"] = rc.c_sweep;
  }
  config["data"] = source;

  auto cell_docs = nlohmann::json::array();
  bool any_feasible = false;
  for (size_t i = 0; i < cells.size(); ++i) {
    nlohmann::json doc = to_json(bands[i]);
    doc["b"] = cells[i].b;
    doc["c"] = cells[i].c ? nlohmann::json(*cells[i].c) : nlohmann::json(nullptr);
    any_feasible = any_feasible || bands[i].feasible;
    cell_docs.push_back(std::move(doc));
  }

  const ReducedFormSeries rf = reduced_form_series(ctx);
  auto rf_bands = nlohmann::json::array();
  for (double b : rc.b_sweep) {
    std::vector<double> lo(rf.g_hat.size()), hi(rf.g_hat.size());
    for (size_t i = 0; i < rf.g_hat.size(); ++i) {
      lo[i] = rf.g_hat[i] - b;
      hi[i] = rf.g_hat[i] + b;
    }
    rf_bands.push_back({{"b", b}, {"g_minus_b", json_array(lo)}, {"g_plus_b", json_array(hi)}});
  }

  auto notes = nlohmann::json::array();
  if (ctx.fit.ill_conditioned) {
    notes.push_back("instrument Gram matrix is ill-conditioned (condition number " +
                    format_double(ctx.fit.gram_condition) + ")");
  }
  const bool zero_bound = file_shape ? !file_shape->bounds_at_least(kDefaultBoundFloor)
                                     : !default_engel_spec(1.0).bounds_at_least(kDefaultBoundFloor);
  if (zero_bound) {
    notes.push_back("a shape bound is below " + format_double(kDefaultBoundFloor) +
                    "; the strict-interior condition rests on the remaining rows");
  }

  CommandResult out;
  out.document = {{"schema", kSchemaVersion},
                  {"command", "estimate"},
                  {"notes", notes},
                  {"config", config},
                  {"n", sample.size()},
                  {"first_stage",
                   {{"gram_condition", json_number(ctx.fit.gram_condition)},
                    {"ill_conditioned", ctx.fit.ill_conditioned}}},
                  {"reduced_form",
                   {{"z_grid", json_array(rf.z_grid)},
                    {"g_hat", json_array(rf.g_hat)},
                    {"bands", rf_bands}}},
                  {"cells", cell_docs}};
  out.exit_code = any_feasible ? kExitOk : kExitInfeasible;
  return out;
}

CommandResult run_reduced_form(const RunConfig& rc) {
  rc.validate();
  nlohmann::json source;
  const Sample sample = load_sample(rc, source);
  const EstimationContext ctx = prepare_estimation(sample, bounds_config(rc), rc.exec);
  const ReducedFormSeries rf = reduced_form_series(ctx);

  auto bands = nlohmann::json::array();
  for (double b : rc.b_sweep) {
    std::vector<double> lo(rf.g_hat.size()), hi(rf.g_hat.size());
    for (size_t i = 0; i < rf.g_hat.size(); ++i) {
      lo[i] = rf.g_hat[i] - b;
      hi[i] = rf.g_hat[i] + b;
    }
    bands.push_back({{"b", b}, {"g_minus_b", json_array(lo)}, {"g_plus_b", json_array(hi)}});
  }
  nlohmann::json config = common_config(rc);
  config["b_sweep"] = rc.b_sweep;
  config["data"] = source;

  CommandResult out;
  out.document = {{"schema", kSchemaVersion},  {"command", "reduced-form"},
                  {"config", config},          {"n", sample.size()},
                  {"z_grid", json_array(rf.z_grid)}, {"g_hat", json_array(rf.g_hat)},
                  {"bands", bands}};
  if (rc.dgp) {
    const ContinuousDGP dgp(*rc.dgp);
    out.document["g_population"] = json_array(population_reduced_form(dgp, rf.z_grid));
  }
  return out;
}

CommandResult run_simulate(const RunConfig& rc) {
  rc.validate();
  Sample sample;
  nlohmann::json meta{{"schema", kSchemaVersion}, {"command", "simulate"}, {"n", rc.n}, {"seed", rc.seed}};
  if (rc.dgp) {
    const ContinuousDGP dgp(*rc.dgp);
    sample = generate(dgp, rc.n, rc.seed);
    meta["dgp"] = dgp_json(*rc.dgp);
  } else {
    const DiscreteModel model = load_model(rc);
    sample = discrete_dgp_sampler(model, to_vector(rc.h0_values), to_vector(rc.u0_values),
                                  rc.noise_sd, rc.n, rc.seed);
    meta["model"] = rc.model_path;
  }
  std::ostringstream csv;
  write_sample_csv(csv, sample);
  CommandResult out;
  out.document = meta;
  out.csv = csv.str();
  return out;
}

CommandResult run_oracle(const RunConfig& rc) {
  rc.validate();
  const DiscreteModel model = load_model(rc);
  CommandResult out;
  auto cells = nlohmann::json::array();
  bool any_feasible = false;
  for (double b : rc.b_sweep) {
    const DiscreteEnvelopes env =
        discrete_envelopes(model, b, rc.h_lo, rc.h_hi, rc.second_diff_bound, rc.exec);
    any_feasible = any_feasible || env.feasible;
    cells.push_back({{"b", b},
                     {"feasible", env.feasible},
                     {"lower", json_array(env.lower)},
                     {"upper", json_array(env.upper)}});
  }
  out.document = {{"schema", kSchemaVersion},
                  {"command", "oracle"},
                  {"x_support", json_array(model.x_support)},
                  {"h_bounds", {rc.h_lo, rc.h_hi}},
                  {"second_diff_bound", rc.second_diff_bound ? nlohmann::json(*rc.second_diff_bound)
                                                             : nlohmann::json(nullptr)},
                  {"cells", cells}};
  out.exit_code = any_feasible ? kExitOk : kExitInfeasible;
  return out;
}

CommandResult run_bias(const RunConfig& rc) {
  rc.validate();
  const DiscreteModel model = load_model(rc);
  const Eigen::VectorXd w = to_vector(rc.w);
  auto cells = nlohmann::json::array();
  for (double b : rc.b_sweep) {
    const FunctionalBias fb = functional_bias(model, w, b);
    cells.push_back({{"b", b},
                     {"representable", fb.representable},
                     {"bias", json_number(fb.bias)},
                     {"alpha", json_array(fb.alpha)}});
  }
  CommandResult out;
  out.document = {{"schema", kSchemaVersion}, {"command", "bias"}, {"w", rc.w}, {"cells", cells}};
  return out;
}

CommandResult run_command(const RunConfig& rc) {
  switch (rc.command) {
    case Command::estimate: return run_estimate(rc);
    case Command::reduced_form: return run_reduced_form(rc);
    case Command::simulate: return run_simulate(rc);
    case Command::oracle: return run_oracle(rc);
    case Command::bias: return run_bias(rc);
  }
  throw ConfigError("unknown command");
}

}  // namespace npiv
