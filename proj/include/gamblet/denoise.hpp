#pragma once

// Recovery of u from eta = u + zeta: the level filter at l-dagger, hard and soft
// thresholding of gamblet coefficients, and energy-norm regularization; plus
// signal/noise generation and the Monte-Carlo trial harness.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "gamblet/error.hpp"
#include "gamblet/gamblets.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/numerics.hpp"
#include "gamblet/operators.hpp"

namespace gamblet {

struct DenoiseConfig {
  double h = 0.5;
  double s = 1.0;
  double d = 1.0;
  int q = 1;
  double sigma = 0.0;
  double M = 1.0;
  double t0 = 0.0;
  double confidence = 0.95;

  void validate() const {
    detail::require(q >= 1, ErrorCode::InvalidConfig, "q must be >= 1");
    detail::require(sigma >= 0.0, ErrorCode::InvalidConfig, "sigma must be >= 0");
    detail::require(M > 0.0, ErrorCode::InvalidConfig, "M must be > 0");
    detail::require(h > 0.0 && h < 1.0, ErrorCode::InvalidConfig, "h must lie in (0,1)");
    detail::require(confidence > 0.0 && confidence < 1.0, ErrorCode::InvalidConfig, "confidence must lie in (0,1)");
  }
};

struct DenoiseResult {
  Vector recovered;
  /// Level used by the level filter; -1 for the other estimators.
  int level = -1;
  /// c^(k)^T B^(k) c^(k) of the kept coefficients, k = 1..q (stored at k-1).
  std::vector<double> level_energies;
  double energy = 0.0;
  std::vector<std::string> warnings;
};

/// beta_l for l = 0..q with scale h, smoothness s and dimension d.
inline std::vector<double> level_costs(double h, double s, double d, double sigma, double M, int q) {
  std::vector<double> beta(static_cast<std::size_t>(q + 1));
  const double var = sigma * sigma;
  const double bias = M * M;
  beta[0] = std::pow(h, 2.0 * s) * bias;
  for (int l = 1; l < q; ++l)
    beta[static_cast<std::size_t>(l)] =
        var * std::pow(h, -(2.0 * s + d) * l) + std::pow(h, 2.0 * s * (l + 1)) * bias;
  if (q >= 1) beta[static_cast<std::size_t>(q)] = std::pow(h, -(2.0 * s + d) * q) * var;
  return beta;
}

/// argmin of beta_l; ties go to the smaller l.
inline int argmin_level(const std::vector<double>& beta) {
  return static_cast<int>(std::min_element(beta.begin(), beta.end()) - beta.begin());
}

inline std::vector<double> level_costs(const DenoiseConfig& cfg) {
  return level_costs(cfg.h, cfg.s, cfg.d, cfg.sigma, cfg.M, cfg.q);
}

inline int select_level(const DenoiseConfig& cfg) {
  detail::require(cfg.sigma >= 0.0 && cfg.M > 0.0, ErrorCode::InvalidConfig, "need sigma >= 0 and M > 0");
  return argmin_level(level_costs(cfg));
}

namespace detail {

inline DenoiseResult finish(const GambletSystem& sys, const MultiresCoefficients& c, int upto) {
  DenoiseResult out;
  out.recovered = reconstruct(sys, c, upto);
  double total = 0.0;
  for (int k = 1; k <= sys.levels(); ++k) {
    const double e = k <= upto ? sys.B(k).quadratic(c.at(k)) : 0.0;
    out.level_energies.push_back(e);
    total += e;
  }
  out.energy = std::sqrt(std::max(0.0, total));
  return out;
}

}  // namespace detail

/// eta^(l): keep the gamblet coefficients of levels 1..l.
inline DenoiseResult level_filter(const GambletSystem& sys, const Vector& y, int l) {
  detail::require(l >= 0 && l <= sys.levels(), ErrorCode::BadLevel,
                  "filter level " + std::to_string(l) + " outside 0.." + std::to_string(sys.levels()));
  DenoiseResult out = detail::finish(sys, analyze(sys, y), l);
  out.level = l;
  return out;
}

inline double hard_map(double x, double beta) { return std::abs(x) > beta ? x : 0.0; }

inline double soft_map(double x, double beta) {
  if (std::abs(x) <= beta) return 0.0;
  return x > 0.0 ? x - beta : x + beta;
}

enum class Shrink { Hard, Soft };

/// t_k = h^(-2ks) t0.
inline double level_threshold(double t0, int k, double h, double s) { return std::pow(h, -2.0 * k * s) * t0; }

inline DenoiseResult threshold(const GambletSystem& sys, const Vector& y, double t0, const DenoiseConfig& cfg,
                               Shrink kind) {
  detail::require(t0 >= 0.0, ErrorCode::InvalidArgument, "threshold must be >= 0");
  MultiresCoefficients c = analyze(sys, y);
  for (int k = 1; k <= sys.levels(); ++k) {
    const double t = level_threshold(t0, k, cfg.h, cfg.s);
    for (double& v : c.at(k)) v = kind == Shrink::Hard ? hard_map(v, t) : soft_map(v, t);
  }
  return detail::finish(sys, c, sys.levels());
}

inline DenoiseResult hard_threshold(const GambletSystem& sys, const Vector& y, double t0, const DenoiseConfig& cfg) {
  return threshold(sys, y, t0, cfg, Shrink::Hard);
}

inline DenoiseResult soft_threshold(const GambletSystem& sys, const Vector& y, double t0, const DenoiseConfig& cfg) {
  return threshold(sys, y, t0, cfg, Shrink::Soft);
}

/// 16 values log-spaced over [1e-2, 1e2] * sigma * h^(2s).
inline std::vector<double> default_threshold_grid(const DenoiseConfig& cfg) {
  const double scale = cfg.sigma * std::pow(cfg.h, 2.0 * cfg.s);
  std::vector<double> grid;
  for (int i = 0; i < 16; ++i) grid.push_back(scale * std::pow(10.0, -2.0 + 4.0 * i / 15.0));
  return grid;
}

struct ErrorPair {
  double energy = 0.0;
  double l2 = 0.0;
};

inline ErrorPair errors(const DiscreteOperator& op, const Vector& u, const Vector& v) {
  detail::require_same(u.size(), op.size(), "errors: reference length");
  detail::require_same(v.size(), op.size(), "errors: recovery length");
  const Vector diff = v - u;
  return {std::sqrt(std::max(0.0, op.stiffness.quadratic(diff))), std::sqrt(std::max(0.0, op.mass.quadratic(diff)))};
}

/// Ground truth and noisy observation of one trial.
struct Observation {
  Vector u;
  Vector eta;
};

struct TuneResult {
  double t0 = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_energy_error;
};

/// Grid value of t0 with the smallest mean energy error over the given trials
/// (first one on ties).
inline TuneResult tune_threshold(const GambletSystem& sys, const DiscreteOperator& op,
                                 const std::vector<Observation>& trials, const std::vector<double>& grid,
                                 const DenoiseConfig& cfg, Shrink kind) {
  detail::require(!grid.empty(), ErrorCode::EmptyGrid, "threshold grid is empty");
  detail::require(!trials.empty(), ErrorCode::InvalidArgument, "no tuning trials");
  TuneResult out;
  out.grid = grid;
  out.mean_energy_error.assign(grid.size(), 0.0);
  for (const auto& obs : trials) {
    for (std::size_t g = 0; g < grid.size(); ++g)
      out.mean_energy_error[g] += errors(op, obs.u, threshold(sys, obs.eta, grid[g], cfg, kind).recovered).energy;
  }
  for (double& e : out.mean_energy_error) e /= static_cast<double>(trials.size());
  out.t0 = grid[static_cast<std::size_t>(
      std::min_element(out.mean_energy_error.begin(), out.mean_energy_error.end()) - out.mean_energy_error.begin())];
  return out;
}

struct RegularizeResult : DenoiseResult {
  double alpha = 0.0;
  double gamma = 0.0;
  /// g(alpha) - gamma at the returned alpha.
  double residual = 0.0;
  bool bracket_failed = false;
};

/// Penalised recovery x = (alpha A + I)^{-1} y with |y - x| = gamma. The
/// eigendecomposition of A is computed once so that g(alpha) costs O(N).
class Regularizer {
 public:
  Regularizer() = default;
  explicit Regularizer(const SymMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.dense());
    detail::require(es.info() == Eigen::Success, ErrorCode::NoConvergence, "eigendecomposition failed");
    lambda_ = es.eigenvalues();
    basis_ = es.eigenvectors();
    detail::require(lambda_.minCoeff() > 0.0, ErrorCode::NotSPD, "regularization needs an SPD operator");
  }

  Index size() const { return lambda_.size(); }

  /// gamma^2 = sigma^2 * chi2_N quantile(p).
  static double radius(double sigma, Index n, double p) {
    return sigma * std::sqrt(chi_square_quantile(static_cast<int>(n), p));
  }

  RegularizeResult operator()(const Vector& y, double gamma) const {
    detail::require_same(y.size(), size(), "regularize: signal length");
    detail::require(gamma >= 0.0, ErrorCode::InvalidArgument, "gamma must be >= 0");
    RegularizeResult out;
    out.gamma = gamma;
    if (gamma == 0.0) {
      out.recovered = y;
      return out;
    }
    if (y.norm() <= gamma) {
      out.recovered = Vector::Zero(y.size());
      out.alpha = std::numeric_limits<double>::infinity();
      return out;
    }
    const Vector yhat = basis_.transpose() * y;
    auto g = [&](double alpha) {
      double sum = 0.0;
      for (Index i = 0; i < yhat.size(); ++i) {
        const double r = alpha * lambda_(i) / (1.0 + alpha * lambda_(i));
        sum += r * r * yhat(i) * yhat(i);
      }
      return std::sqrt(sum);
    };
    double lo = 0.0;
    double hi = 1.0;
    constexpr double kAlphaCap = 1e300;
    while (g(hi) < gamma) {
      lo = hi;
      hi *= 2.0;
      if (hi > kAlphaCap) {
        out.bracket_failed = true;
        out.warnings.push_back("NoBracket: g(alpha) < gamma up to alpha = 1e300; returning the limiting projection");
        out.alpha = kAlphaCap;
        out.recovered = apply(yhat, kAlphaCap);
        out.residual = g(kAlphaCap) - gamma;
        return out;
      }
    }
    double alpha = hi;
    double val = g(alpha);
    for (int it = 0; it < 2000 && std::abs(val - gamma) > 1e-10 * gamma; ++it) {
      alpha = 0.5 * (lo + hi);
      if (alpha == lo || alpha == hi) break;
      val = g(alpha);
      if (val < gamma) {
        lo = alpha;
      } else {
        hi = alpha;
      }
    }
    out.alpha = alpha;
    out.residual = val - gamma;
    out.recovered = apply(yhat, alpha);
    return out;
  }

 private:
  Vector apply(const Vector& yhat, double alpha) const {
    Vector scaled(yhat.size());
    for (Index i = 0; i < yhat.size(); ++i) scaled(i) = yhat(i) / (1.0 + alpha * lambda_(i));
    return basis_ * scaled;
  }

  Vector lambda_;
  Matrix basis_;
};

inline RegularizeResult regularize(const DiscreteOperator& op, const Vector& y, double sigma, double p = 0.95) {
  detail::require(sigma > 0.0, ErrorCode::InvalidArgument, "regularization needs sigma > 0");
  return Regularizer(op.stiffness)(y, Regularizer::radius(sigma, op.size(), p));
}

enum class SignalMode { RandomSphere, Smooth1D, Smooth2D };

inline SignalMode parse_signal_mode(const std::string& s) {
  if (s == "random-sphere") return SignalMode::RandomSphere;
  if (s == "smooth-1d") return SignalMode::Smooth1D;
  if (s == "smooth-2d") return SignalMode::Smooth2D;
  throw Error(ErrorCode::InvalidConfig, "unknown signal mode '" + s + "'");
}

inline std::string to_string(SignalMode m) {
  switch (m) {
    case SignalMode::RandomSphere: return "random-sphere";
    case SignalMode::Smooth1D: return "smooth-1d";
    case SignalMode::Smooth2D: return "smooth-2d";
  }
  return "unknown";
}

/// sin(pi x)/x with the removable singularity filled in.
inline double smooth_1d(double x) { return x == 0.0 ? std::numbers::pi : std::sin(std::numbers::pi * x) / x; }

inline double smooth_2d(double x, double y) {
  return std::cos(3.0 * x + y) + std::sin(3.0 * y) + std::sin(7.0 * x - 5.0 * y);
}

struct Signal {
  /// Pre-Haar coefficients of f on the finest cells.
  Vector f;
  /// Solution coefficients of A u = O f.
  Vector u;
};

namespace detail {

inline constexpr std::array<double, 5> kGauss5Nodes = {0.04691007703066800, 0.23076534494715845, 0.5,
                                                       0.76923465505284155, 0.95308992296933200};
inline constexpr std::array<double, 5> kGauss5Weights = {0.11846344252809454, 0.23931433524968324,
                                                         0.28444444444444444, 0.23931433524968324,
                                                         0.11846344252809454};

}  // namespace detail

/// Draws f and solves for u; keeps the overlap and a Cholesky factor of A.
class SignalGenerator {
 public:
  SignalGenerator() = default;
  SignalGenerator(const Hierarchy& hier, const DiscreteOperator& op)
      : dim_(hier.dim), q_(hier.levels()), overlap_(measurement_overlap(hier, op)), chol_(cholesky(op.stiffness)) {}

  Index size() const { return overlap_.rows(); }
  const RectMatrix& overlap() const { return overlap_; }

  Vector solve(const Vector& f) const { return chol_.solve(Vector(overlap_ * f)); }

  /// Cell averages of the smooth profile times |tau|^(1/2).
  Vector project_smooth(SignalMode mode) const {
    const Index n = Index{1} << q_;
    const double w = 1.0 / static_cast<double>(n);
    Vector f(size());
    if (mode == SignalMode::Smooth1D) {
      detail::require(dim_ == 1, ErrorCode::UnsupportedDim, "smooth-1d needs a 1D hierarchy");
      for (Index j = 0; j < n; ++j) {
        double avg = 0.0;
        for (std::size_t g = 0; g < 5; ++g)
          avg += detail::kGauss5Weights[g] * smooth_1d((static_cast<double>(j) + detail::kGauss5Nodes[g]) * w);
        f(j) = avg * std::sqrt(w);
      }
    } else {
      detail::require(dim_ == 2, ErrorCode::UnsupportedDim, "smooth-2d needs a 2D hierarchy");
      for (Index iy = 0; iy < n; ++iy)
        for (Index ix = 0; ix < n; ++ix) {
          double avg = 0.0;
          for (std::size_t gy = 0; gy < 5; ++gy)
            for (std::size_t gx = 0; gx < 5; ++gx)
              avg += detail::kGauss5Weights[gx] * detail::kGauss5Weights[gy] *
                     smooth_2d((static_cast<double>(ix) + detail::kGauss5Nodes[gx]) * w,
                               (static_cast<double>(iy) + detail::kGauss5Nodes[gy]) * w);
          f(iy * n + ix) = avg * w;
        }
    }
    return f;
  }

  Signal draw(SignalMode mode, std::mt19937_64& rng) const {
    Signal s;
    if (mode == SignalMode::RandomSphere) {
      std::normal_distribution<double> g(0.0, 1.0);
      s.f.resize(size());
      for (Index i = 0; i < size(); ++i) s.f(i) = g(rng);
      s.f /= s.f.norm();
    } else {
      s.f = project_smooth(mode);
    }
    s.u = solve(s.f);
    return s;
  }

 private:
  int dim_ = 1;
  int q_ = 1;
  RectMatrix overlap_;
  CholFactor chol_;
};

inline Signal gen_signal(const Hierarchy& hier, const DiscreteOperator& op, SignalMode mode, std::mt19937_64& rng) {
  return SignalGenerator(hier, op).draw(mode, rng);
}

/// eta = u + z, z_i ~ N(0, sigma^2) i.i.d.
inline Vector add_noise(const Vector& u, double sigma, std::mt19937_64& rng) {
  detail::require(sigma >= 0.0, ErrorCode::InvalidArgument, "sigma must be >= 0");
  std::normal_distribution<double> g(0.0, 1.0);
  Vector eta = u;
  for (Index i = 0; i < eta.size(); ++i) eta(i) += sigma * g(rng);
  return eta;
}

/// Independent generator for (seed, trial, stream).
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32), stream};
  return std::mt19937_64(seq);
}

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Unbiased sample standard deviation; 0 for fewer than two values.
inline double stdev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Linear-interpolated empirical quantile (sample quantile type 7).
inline double empirical_quantile(std::vector<double> v, double p) {
  detail::require(!v.empty(), ErrorCode::InvalidArgument, "quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Everything a trial needs, built once and shared read-only between threads.
struct Experiment {
  std::shared_ptr<const Hierarchy> hierarchy;
  DiscreteOperator op;
  GambletSystem sys;
  SignalGenerator signals;
  Regularizer regularizer;
  SignalMode mode = SignalMode::RandomSphere;

  static Experiment build(std::shared_ptr<const Hierarchy> hier, DiscreteOperator op, SignalMode mode,
                          double trunc = 0.0) {
    Experiment e;
    e.hierarchy = hier;
    e.sys = transform(op, hier, trunc);
    e.signals = SignalGenerator(*hier, op);
    e.regularizer = Regularizer(op.stiffness);
    e.op = std::move(op);
    e.mode = mode;
    return e;
  }

  static Experiment build(std::shared_ptr<const Hierarchy> hier, DiscreteOperator op, GambletSystem sys,
                          SignalMode mode) {
    Experiment e;
    e.hierarchy = hier;
    e.sys = std::move(sys);
    e.signals = SignalGenerator(*hier, op);
    e.regularizer = Regularizer(op.stiffness);
    e.op = std::move(op);
    e.mode = mode;
    return e;
  }

  Observation observe(double sigma, std::uint64_t seed, std::uint64_t trial, std::uint32_t stream) const {
    auto rng = trial_rng(seed, trial, stream);
    Observation obs;
    obs.u = signals.draw(mode, rng).u;
    obs.eta = add_noise(obs.u, sigma, rng);
    return obs;
  }
};

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"near-minimax", "hard-threshold", "soft-threshold",
                                                 "regularization"};
  return names;
}

struct MethodStats {
  std::string method;
  double energy_avg = 0.0;
  double energy_std = 0.0;
  double l2_avg = 0.0;
  double l2_std = 0.0;
};

struct TrialOptions {
  int trials = 300;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Held-out trials (separate seed stream) used to tune t0 for thresholding.
  int tuning_trials = 50;
  /// Empty means default_threshold_grid.
  std::vector<double> t0_grid;
};

struct TrialStats {
  std::vector<MethodStats> methods;
  double noise_energy_avg = 0.0;
  double noise_energy_std = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  int level = 0;
  std::map<int, int> level_histogram;
  double t0_hard = 0.0;
  double t0_soft = 0.0;
  std::vector<double> t0_grid;
  std::vector<std::string> warnings;

  const MethodStats& method(const std::string& name) const {
    for (const auto& m : methods)
      if (m.method == name) return m;
    throw Error(ErrorCode::InvalidArgument, "no statistics for method " + name);
  }
};

inline constexpr std::uint32_t kEvalStream = 0;
inline constexpr std::uint32_t kTuneStream = 1;

/// Runs all four estimators on identical (f, zeta) draws.
inline TrialStats run_trials(const Experiment& ex, const DenoiseConfig& cfg, const TrialOptions& opt) {
  cfg.validate();
  detail::require(opt.trials >= 1, ErrorCode::InvalidArgument, "need at least one trial");
  TrialStats stats;
  stats.trials = opt.trials;
  stats.seed = opt.seed;
  stats.level = select_level(cfg);
  stats.level_histogram[stats.level] = opt.trials;
  if (opt.trials < 2) stats.warnings.push_back("fewer than two trials: standard deviations reported as 0");

  stats.t0_grid = opt.t0_grid.empty() ? default_threshold_grid(cfg) : opt.t0_grid;
  {
    std::vector<Observation> tuning(static_cast<std::size_t>(std::max(opt.tuning_trials, 1)));
    detail::parallel_for(tuning.size(), opt.threads, [&](std::size_t i) {
      tuning[i] = ex.observe(cfg.sigma, opt.seed, i, kTuneStream);
    });
    stats.t0_hard = tune_threshold(ex.sys, ex.op, tuning, stats.t0_grid, cfg, Shrink::Hard).t0;
    stats.t0_soft = tune_threshold(ex.sys, ex.op, tuning, stats.t0_grid, cfg, Shrink::Soft).t0;
  }

  const double gamma = cfg.sigma > 0.0 ? Regularizer::radius(cfg.sigma, ex.op.size(), cfg.confidence) : 0.0;
  const auto n = static_cast<std::size_t>(opt.trials);
  std::vector<std::array<ErrorPair, 4>> err(n);
  std::vector<double> noise(n);
  std::vector<int> bracket_failures(n, 0);
  detail::parallel_for(n, opt.threads, [&](std::size_t i) {
    const Observation obs = ex.observe(cfg.sigma, opt.seed, i, kEvalStream);
    noise[i] = energy_norm(ex.op, obs.eta - obs.u);
    err[i][0] = errors(ex.op, obs.u, level_filter(ex.sys, obs.eta, stats.level).recovered);
    err[i][1] = errors(ex.op, obs.u, hard_threshold(ex.sys, obs.eta, stats.t0_hard, cfg).recovered);
    err[i][2] = errors(ex.op, obs.u, soft_threshold(ex.sys, obs.eta, stats.t0_soft, cfg).recovered);
    const RegularizeResult reg = ex.regularizer(obs.eta, gamma);
    bracket_failures[i] = reg.bracket_failed ? 1 : 0;
    err[i][3] = errors(ex.op, obs.u, reg.recovered);
  });

  for (std::size_t m = 0; m < 4; ++m) {
    std::vector<double> e(n);
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = err[i][m].energy;
      l[i] = err[i][m].l2;
    }
    stats.methods.push_back({method_names()[m], detail::mean(e), detail::stdev(e), detail::mean(l), detail::stdev(l)});
  }
  stats.noise_energy_avg = detail::mean(noise);
  stats.noise_energy_std = detail::stdev(noise);
  const int failures = std::accumulate(bracket_failures.begin(), bracket_failures.end(), 0);
  if (failures > 0) stats.warnings.push_back(std::to_string(failures) + " regularization solves hit NoBracket");
  return stats;
}

struct GrowthCheck {
  int level = 0;
  double quantile = 0.0;
  /// ||eta^(l)|| - ||u|| per trial.
  std::vector<double> excess;
  /// ||zeta^(l)|| per trial (the triangle-inequality bound on the excess).
  std::vector<double> noise_part;
};

/// Empirical 0.95 quantile of ||eta^(l-dagger)|| - ||u|| in energy norm.
inline GrowthCheck energy_growth_check(const Experiment& ex, const DenoiseConfig& cfg, int n_trials,
                                       std::uint64_t seed, unsigned threads = 1) {
  cfg.validate();
  GrowthCheck out;
  out.level = select_level(cfg);
  detail::require(out.level >= 1, ErrorCode::LevelZero, "selected level is 0; the growth bound needs l >= 1");
  const auto n = static_cast<std::size_t>(n_trials);
  out.excess.resize(n);
  out.noise_part.resize(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    const Observation obs = ex.observe(cfg.sigma, seed, i, kEvalStream);
    const double ue = energy_norm(ex.op, obs.u);
    out.excess[i] = level_filter(ex.sys, obs.eta, out.level).energy - ue;
    out.noise_part[i] = level_filter(ex.sys, obs.eta - obs.u, out.level).energy;
  });
  out.quantile = empirical_quantile(out.excess, 0.95);
  return out;
}

}  // namespace gamblet
