#pragma once

// Gamblets on grounded graph Laplacians: empirical scale parameters (H, d_eff)
// from the B^(k) spectra, the graph level rule, and the denoising pipeline with
// a fixed-threshold comparator.

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gamblet/denoise.hpp"
#include "gamblet/error.hpp"
#include "gamblet/gamblets.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/numerics.hpp"
#include "gamblet/operators.hpp"

namespace gamblet {

struct GraphScaleEstimate {
  double H = 0.5;
  double d_eff = 1.0;
  /// H implied by the lambda_min slope instead (diagnostic).
  double H_from_min = 0.5;
  double slope_max = 0.0;
  double slope_min = 0.0;
  /// Extreme eigenvalues of B^(k) and |J^(k)|, k = 1..q (stored at k-1).
  std::vector<double> lambda_max;
  std::vector<double> lambda_min;
  std::vector<Index> detail_sizes;
};

namespace detail {

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - sx / n) * (x[i] - sx / n);
    sxy += (x[i] - sx / n) * (y[i] - sy / n);
  }
  return sxy / sxx;
}

}  // namespace detail

inline GraphScaleEstimate estimate_H_d(const GambletSystem& sys) {
  const int q = sys.levels();
  detail::require(q >= 3, ErrorCode::TooFewLevels,
                  "estimating H and d needs q >= 3, got q=" + std::to_string(q));
  GraphScaleEstimate est;
  for (int k = 1; k <= q; ++k) {
    const EigenRange r = extreme_eigs(sys.B(k));
    est.lambda_min.push_back(r.min);
    est.lambda_max.push_back(r.max);
    est.detail_sizes.push_back(sys.hierarchy->detail_size(k));
  }
  std::vector<double> ks;
  std::vector<double> log_max;
  std::vector<double> log_min;
  std::vector<double> log_j;
  for (int k = 2; k <= q; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    ks.push_back(k);
    log_max.push_back(std::log(est.lambda_max[i]));
    log_min.push_back(std::log(est.lambda_min[i]));
    log_j.push_back(std::log(static_cast<double>(est.detail_sizes[i])));
  }
  est.slope_max = detail::ls_slope(ks, log_max);
  est.slope_min = detail::ls_slope(ks, log_min);
  detail::require(est.slope_max > 0.0, ErrorCode::InvariantViolation,
                  "lambda_max(B^(k)) does not grow with k; no scale H in (0,1)");
  est.H = std::exp(-est.slope_max / 2.0);
  est.H_from_min = std::exp(-est.slope_min / 2.0);
  // Slope of log|J^(k)| against k log(1/H) is the slope against k divided by log(1/H).
  est.d_eff = detail::ls_slope(ks, log_j) / std::log(1.0 / est.H);
  return est;
}

inline int select_level_graph(const GraphScaleEstimate& est, double sigma, double M, int q) {
  detail::require(sigma >= 0.0 && M > 0.0, ErrorCode::InvalidConfig, "need sigma >= 0 and M > 0");
  return argmin_level(level_costs(est.H, 1.0, est.d_eff, sigma, M, q));
}

/// Trigonometric test signal evaluated at a vertex.
inline double graph_signal(const Point2& p) { return smooth_2d(p[0], p[1]); }

struct GraphOptions {
  int q = 5;
  /// Noise level; if <= 0, sigma = sigma_rms_factor * RMS of u.
  double sigma = -1.0;
  double sigma_rms_factor = 10.0;
  /// Prior bound; if <= 0, the Euclidean norm of f is used.
  double M = -1.0;
  int trials = 20;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int tuning_trials = 20;
  double trunc = 0.0;
};

struct GraphRun {
  std::shared_ptr<const Hierarchy> hierarchy;
  /// Vertex (of the input graph) behind each fine label.
  std::vector<Index> vertices;
  DiscreteOperator op;
  GambletSystem sys;
  GraphScaleEstimate estimate;
  double sigma = 0.0;
  double M = 0.0;
  int level = 0;
  double t_hard = 0.0;
  Vector f;
  Vector u;
  Vector eta0;
  DenoiseResult first;
  TrialStats stats;
};

namespace detail {

/// Hierarchy over the non-grounded vertices and L permuted into its fine order;
/// leaves run.sys empty.
inline void graph_operator(const GeometricGraph& g, int q, GraphRun& run) {
  validate(g);
  const DiscreteOperator full = grounded_laplacian(g);
  std::vector<Index> keep;
  std::vector<Point2> pts;
  for (Index v = 0; v < g.vertex_count(); ++v)
    if (v != g.ground) {
      keep.push_back(v);
      pts.push_back(g.coords[static_cast<std::size_t>(v)]);
    }
  auto hier = std::make_shared<const Hierarchy>(build_from_points(pts, q));
  const Index n = static_cast<Index>(keep.size());
  const auto& fp = hier->fine_points;
  Matrix l(n, n);
  const Matrix& src = full.stiffness.dense();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) l(i, j) = src(fp[static_cast<std::size_t>(i)], fp[static_cast<std::size_t>(j)]);
  run.vertices.clear();
  for (Index i = 0; i < n; ++i) run.vertices.push_back(keep[static_cast<std::size_t>(fp[static_cast<std::size_t>(i)])]);
  run.op = full;
  run.op.stiffness = SymMatrix::from(l);
  run.op.meta.levels = hier->levels();
  run.hierarchy = hier;
}

inline void graph_system(const GeometricGraph& g, int q, double trunc, GraphRun& run) {
  graph_operator(g, q, run);
  run.sys = transform(run.op, run.hierarchy, trunc);
}

}  // namespace detail

/// Full graph pipeline: hierarchy, transform, (H, d_eff), l-dagger, then Monte-Carlo
/// over noise draws comparing the level filter with fixed-threshold hard shrinkage.
/// `run` must already hold the operator and system (see detail::graph_system).
inline void denoise_graph(const GeometricGraph& g, const GraphOptions& opt, GraphRun& run) {
  detail::require(opt.trials >= 1, ErrorCode::InvalidArgument, "need at least one trial");
  const int q = run.sys.levels();
  run.estimate = estimate_H_d(run.sys);

  const Index n = run.op.size();
  run.f.resize(n);
  for (Index i = 0; i < n; ++i) run.f(i) = graph_signal(g.coords[static_cast<std::size_t>(run.vertices[static_cast<std::size_t>(i)])]);
  run.u = cholesky(run.op.stiffness).solve(run.f);
  const double rms = run.u.norm() / std::sqrt(static_cast<double>(n));
  run.sigma = opt.sigma > 0.0 ? opt.sigma : opt.sigma_rms_factor * rms;
  run.M = opt.M > 0.0 ? opt.M : run.f.norm();
  run.level = select_level_graph(run.estimate, run.sigma, run.M, q);

  // Same t for every level: s = 0 in the schedule.
  DenoiseConfig fixed;
  fixed.h = run.estimate.H;
  fixed.s = 0.0;
  fixed.d = run.estimate.d_eff;
  fixed.q = q;
  fixed.sigma = run.sigma;
  fixed.M = run.M;

  auto observe = [&](std::uint64_t trial, std::uint32_t stream) {
    auto rng = trial_rng(opt.seed, trial, stream);
    return Observation{run.u, add_noise(run.u, run.sigma, rng)};
  };
  std::vector<Observation> tuning(static_cast<std::size_t>(std::max(opt.tuning_trials, 1)));
  detail::parallel_for(tuning.size(), opt.threads, [&](std::size_t i) { tuning[i] = observe(i, kTuneStream); });
  run.t_hard = tune_threshold(run.sys, run.op, tuning, default_threshold_grid(fixed), fixed, Shrink::Hard).t0;

  const auto trials = static_cast<std::size_t>(opt.trials);
  std::vector<std::array<ErrorPair, 2>> err(trials);
  std::vector<double> noise(trials);
  detail::parallel_for(trials, opt.threads, [&](std::size_t i) {
    const Observation obs = observe(i, kEvalStream);
    noise[i] = energy_norm(run.op, obs.eta - obs.u);
    err[i][0] = errors(run.op, obs.u, level_filter(run.sys, obs.eta, run.level).recovered);
    err[i][1] = errors(run.op, obs.u, hard_threshold(run.sys, obs.eta, run.t_hard, fixed).recovered);
  });
  run.eta0 = observe(0, kEvalStream).eta;
  run.first = level_filter(run.sys, run.eta0, run.level);

  TrialStats& st = run.stats;
  st.trials = opt.trials;
  st.seed = opt.seed;
  st.level = run.level;
  st.level_histogram[run.level] = opt.trials;
  st.t0_hard = run.t_hard;
  st.t0_grid = default_threshold_grid(fixed);
  if (opt.trials < 2) st.warnings.push_back("fewer than two trials: standard deviations reported as 0");
  const std::array<std::string, 2> names = {"near-minimax", "hard-threshold"};
  for (std::size_t m = 0; m < 2; ++m) {
    std::vector<double> e(trials);
    std::vector<double> l(trials);
    for (std::size_t i = 0; i < trials; ++i) {
      e[i] = err[i][m].energy;
      l[i] = err[i][m].l2;
    }
    st.methods.push_back({names[m], detail::mean(e), detail::stdev(e), detail::mean(l), detail::stdev(l)});
  }
  st.noise_energy_avg = detail::mean(noise);
  st.noise_energy_std = detail::stdev(noise);
}

inline GraphRun denoise_graph(const GeometricGraph& g, const GraphOptions& opt) {
  GraphRun run;
  detail::graph_system(g, opt.q, opt.trunc, run);
  denoise_graph(g, opt, run);
  return run;
}

}  // namespace gamblet
