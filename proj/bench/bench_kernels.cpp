// Times the OpenMP kernels against their serial reference paths and checks
// that both produce identical output.
//
//   npiv_bench [n] [repeats]

#include "npiv/bounds.hpp"
#include "npiv/firststage.hpp"
#include "npiv/synth.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

namespace {

double seconds(const std::function<void()>& body, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) body();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return elapsed.count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
  const long n = argc > 1 ? std::atol(argv[1]) : 200000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

  npiv::ContinuousDGPParams params;
  params.u0 = "sine";
  params.u0_amplitude = 0.01;
  const npiv::ContinuousDGP dgp(params);
  const npiv::Sample sample = npiv::generate(dgp, n, 42);

  npiv::BoundsConfig config;
  config.b = 0.02;
  config.shape = npiv::default_engel_spec(2.0);

  std::printf("threads: %d, n: %ld, repeats: %d\n", omp_get_max_threads(), n, repeats);

  const npiv::BSplineBasis zb(0.0, 1.0, 4, config.l_dim);
  const npiv::BSplineBasis xb(0.0, 1.0, 4, config.k_dim);
  npiv::FirstStageFit fit_serial = npiv::fit_first_stage(sample, zb, xb, npiv::Execution::serial);
  npiv::FirstStageFit fit_parallel = npiv::fit_first_stage(sample, zb, xb, npiv::Execution::parallel);
  const bool fit_same = fit_serial.g_coef == fit_parallel.g_coef && fit_serial.pi_coef == fit_parallel.pi_coef;
  const double fs_serial = seconds([&] { npiv::fit_first_stage(sample, zb, xb, npiv::Execution::serial); }, repeats);
  const double fs_parallel = seconds([&] { npiv::fit_first_stage(sample, zb, xb, npiv::Execution::parallel); }, repeats);
  std::printf("first stage   serial %8.4f s  parallel %8.4f s  speedup %5.2fx  identical=%s\n",
              fs_serial, fs_parallel, fs_serial / fs_parallel, fit_same ? "yes" : "NO");

  const npiv::EstimationContext ctx = npiv::prepare_estimation(sample, config);
  const npiv::Constraints program = npiv::assemble_program(ctx.fit, config.shape, config.b, ctx.grids);
  npiv::EnvelopeBand serial_band, parallel_band;
  const double env_serial = seconds(
      [&] { serial_band = npiv::solve_envelopes(program, ctx.x_basis, ctx.grids.x, npiv::Execution::serial); },
      repeats);
  const double env_parallel = seconds(
      [&] { parallel_band = npiv::solve_envelopes(program, ctx.x_basis, ctx.grids.x, npiv::Execution::parallel); },
      repeats);
  const bool env_same = serial_band.lower == parallel_band.lower && serial_band.upper == parallel_band.upper;
  std::printf("envelopes     serial %8.4f s  parallel %8.4f s  speedup %5.2fx  identical=%s  (%d constraints)\n",
              env_serial, env_parallel, env_serial / env_parallel, env_same ? "yes" : "NO",
              program.num_rows());
  return fit_same && env_same ? 0 : 1;
}
