// Command-line front end: estimate, reduced-form, simulate, oracle, bias.

#include "npiv/commands.hpp"
#include "npiv/error.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

void add_grid_options(CLI::App* app, npiv::RunConfig& rc) {
  app->add_option("--k-dim", rc.k_dim, "Structural basis dimension")->capture_default_str();
  app->add_option("--l-dim", rc.l_dim, "Instrument basis dimension")->capture_default_str();
  app->add_option("--order", rc.spline_order, "Spline order (4 = cubic)")->capture_default_str();
  app->add_option("--x-grid", rc.x_grid, "Points in the x grid")->capture_default_str();
  app->add_option("--z-grid", rc.z_grid, "Points in the z grid")->capture_default_str();
  app->add_option("--trim", rc.trim, "Quantile trim of the z grid")->capture_default_str();
}

void add_dgp_options(CLI::App* app, npiv::RunConfig& rc, npiv::ContinuousDGPParams& dgp,
                     std::string& dgp_name) {
  app->add_option("--dgp", dgp_name, "Simulate data from a catalogued structural function");
  app->add_option("--n", rc.n, "Simulated sample size")->capture_default_str();
  app->add_option("--seed", rc.seed, "Random seed")->capture_default_str();
  app->add_option("--u0", dgp.u0, "Instrument invalidity: zero | sine")->capture_default_str();
  app->add_option("--u0-amp", dgp.u0_amplitude, "Amplitude of the sine invalidity");
  app->add_option("--u0-freq", dgp.u0_frequency, "Frequency of the sine invalidity");
  app->add_option("--rho", dgp.rho, "Instrument strength in X = rho Z + (1 - rho) V");
  app->add_option("--endogeneity", dgp.endogeneity, "Correlation of the error with V");
  app->add_option("--noise-sd", dgp.noise_sd, "Outcome noise scale");
}

void add_sweep_options(CLI::App* app, npiv::RunConfig& rc, std::vector<double>& b_single) {
  app->add_option("--b", b_single, "Single misspecification bound (overrides --b-sweep)");
  app->add_option("--b-sweep", rc.b_sweep, "Comma-separated misspecification bounds")
      ->delimiter(',')
      ->capture_default_str();
}

int write_result(const npiv::RunConfig& rc, const npiv::CommandResult& result) {
  if (result.document.is_object() && result.document.contains("notes")) {
    for (const auto& note : result.document["notes"]) std::cerr << "note: " << note.get<std::string>() << "\n";
  }
  const std::string body =
      result.document.is_null() || !result.csv.empty() ? result.csv : npiv::dump_document(result.document);
  if (rc.output_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(rc.output_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << rc.output_path << "'\n";
      return npiv::kExitData;
    }
    out << body;
    if (!result.csv.empty()) std::cout << npiv::dump_document(result.document);
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially identified NPIV envelopes under bounded instrument invalidity"};
  app.require_subcommand(1);

  npiv::RunConfig rc;
  npiv::ContinuousDGPParams dgp;
  std::string dgp_name;
  std::vector<double> b_single;
  std::vector<double> c_single;
  double second_diff = -1.0;
  bool serial = false;

  app.add_flag("--serial", serial, "Use the serial reference kernels");

  auto* estimate = app.add_subcommand("estimate", "Envelope estimation over a (b, c) sweep");
  estimate->add_option("--input", rc.input_path, "CSV with columns y, x, z");
  add_dgp_options(estimate, rc, dgp, dgp_name);
  add_sweep_options(estimate, rc, b_single);
  estimate->add_option("--c", c_single, "Single second-derivative bound (overrides --c-sweep)");
  estimate->add_option("--c-sweep", rc.c_sweep, "Comma-separated second-derivative bounds")
      ->delimiter(',')
      ->capture_default_str();
  estimate->add_option("--shape", rc.shape_path, "JSON shape config (replaces the c sweep)");
  add_grid_options(estimate, rc);
  estimate->add_option("--output", rc.output_path, "Output JSON path (default stdout)");

  auto* reduced = app.add_subcommand("reduced-form", "First-stage reduced form with +/- b bands");
  reduced->add_option("--input", rc.input_path, "CSV with columns y, x, z");
  add_dgp_options(reduced, rc, dgp, dgp_name);
  add_sweep_options(reduced, rc, b_single);
  add_grid_options(reduced, rc);
  reduced->add_option("--output", rc.output_path, "Output JSON path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic sample as CSV");
  add_dgp_options(simulate, rc, dgp, dgp_name);
  simulate->add_option("--model", rc.model_path, "Discrete model JSON (instead of --dgp)");
  simulate->add_option("--h0", rc.h0_values, "Structural values on the x support")->delimiter(',');
  simulate->add_option("--u0-values", rc.u0_values, "Invalidity values on the z support")
      ->delimiter(',');
  simulate->add_option("--output", rc.output_path, "Output CSV path (default stdout)");

  auto* oracle = app.add_subcommand("oracle", "Exact envelopes of a discrete population model");
  oracle->add_option("--model", rc.model_path, "Discrete model JSON")->required();
  add_sweep_options(oracle, rc, b_single);
  oracle->add_option("--h-lo", rc.h_lo, "Lower bound on h")->capture_default_str();
  oracle->add_option("--h-hi", rc.h_hi, "Upper bound on h")->capture_default_str();
  oracle->add_option("--second-diff-bound", second_diff, "Curvature bound (omit for none)");
  oracle->add_option("--output", rc.output_path, "Output JSON path (default stdout)");

  auto* bias = app.add_subcommand("bias", "Worst-case bias of a linear functional");
  bias->add_option("--model", rc.model_path, "Discrete model JSON")->required();
  bias->add_option("--w", rc.w, "Weights on the x support")->delimiter(',')->required();
  add_sweep_options(bias, rc, b_single);
  bias->add_option("--output", rc.output_path, "Output JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : npiv::kExitConfig;
  }

  if (estimate->parsed()) rc.command = npiv::Command::estimate;
  if (reduced->parsed()) rc.command = npiv::Command::reduced_form;
  if (simulate->parsed()) rc.command = npiv::Command::simulate;
  if (oracle->parsed()) rc.command = npiv::Command::oracle;
  if (bias->parsed()) rc.command = npiv::Command::bias;

  if (!b_single.empty()) rc.b_sweep = b_single;
  if (!c_single.empty()) rc.c_sweep = c_single;
  if (!dgp_name.empty()) {
    dgp.h0 = dgp_name;
    rc.dgp = dgp;
  }
  rc.noise_sd = dgp.noise_sd;
  if (second_diff >= 0.0) rc.second_diff_bound = second_diff;
  rc.exec = serial ? npiv::Execution::serial : npiv::Execution::parallel;

  try {
    return write_result(rc, npiv::run_command(rc));
  } catch (const npiv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return npiv::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return npiv::kExitNumerical;
  }
}
