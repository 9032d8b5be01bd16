// Graph pipeline on a 16x16 grid: scale estimate, level, and recovery error.

#include <cstdio>

#include "gamblet/gamblet.hpp"

using namespace gamblet;

int main() {
  GraphOptions opt;
  opt.q = 4;
  opt.trials = 10;
  const GraphRun run = denoise_graph(grid_graph(16), opt);
  std::printf("levels %d, H %.3f, d_eff %.3f, l_dagger %d, sigma %.3e\n", run.sys.levels(), run.estimate.H,
              run.estimate.d_eff, run.level, run.sigma);
  for (int k = 1; k <= run.sys.levels(); ++k)
    std::printf("  B^(%d): |J| = %4ld  lambda in [%.3e, %.3e]\n", k,
                static_cast<long>(run.estimate.detail_sizes[static_cast<std::size_t>(k - 1)]),
                run.estimate.lambda_min[static_cast<std::size_t>(k - 1)],
                run.estimate.lambda_max[static_cast<std::size_t>(k - 1)]);
  std::printf("noise energy %.4e\n", run.stats.noise_energy_avg);
  for (const auto& m : run.stats.methods) std::printf("  %-14s energy %.4e\n", m.method.c_str(), m.energy_avg);
}
