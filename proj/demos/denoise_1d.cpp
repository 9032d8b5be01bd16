// One noisy realization of the smooth 1D problem, recovered four ways.

#include <cstdio>
#include <memory>

#include "gamblet/gamblet.hpp"

using namespace gamblet;

int main() {
  const int q = 8;
  auto hier = std::make_shared<const Hierarchy>(build_dyadic(1, q));
  const Experiment ex = Experiment::build(hier, assemble_fem(coeff_1d(), *hier), SignalMode::Smooth1D);

  DenoiseConfig cfg;
  cfg.q = q;
  cfg.sigma = 1e-3;
  cfg.M = 1.0;
  const int level = select_level(cfg);

  const Observation obs = ex.observe(cfg.sigma, 42, 0, kEvalStream);
  std::printf("N = %ld, l_dagger = %d, |u| = %.4e, noise energy = %.4e\n", static_cast<long>(ex.op.size()), level,
              energy_norm(ex.op, obs.u), energy_norm(ex.op, obs.eta - obs.u));

  const auto show = [&](const char* name, const Vector& v) {
    const ErrorPair e = errors(ex.op, obs.u, v);
    std::printf("  %-16s energy %.4e   L2 %.4e\n", name, e.energy, e.l2);
  };
  show("level filter", level_filter(ex.sys, obs.eta, level).recovered);
  const double t0 = cfg.sigma * 0.25;
  show("hard threshold", hard_threshold(ex.sys, obs.eta, t0, cfg).recovered);
  show("soft threshold", soft_threshold(ex.sys, obs.eta, t0, cfg).recovered);
  const auto reg = ex.regularizer(obs.eta, Regularizer::radius(cfg.sigma, ex.op.size(), 0.95));
  show("regularization", reg.recovered);
  std::printf("  (alpha = %.4e)\n", reg.alpha);
}
