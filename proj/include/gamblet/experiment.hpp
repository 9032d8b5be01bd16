#pragma once

// Experiment plumbing behind the command-line tool: `key = value` configs, cached
// transforms, and the transform / denoise / graph / selftest commands with their
// output files.

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gamblet/denoise.hpp"
#include "gamblet/error.hpp"
#include "gamblet/gamblets.hpp"
#include "gamblet/graph.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/matrix_io.hpp"
#include "gamblet/operators.hpp"
#include "gamblet/storage.hpp"

namespace gamblet {

struct ExperimentConfig {
  std::string problem = "pde-1d";
  int q = 6;
  std::optional<double> sigma;
  std::optional<double> M;
  std::vector<std::string> methods = method_names();
  int trials = 300;
  std::uint64_t seed = 1;
  std::string coefficient = "rough";
  std::string coefficient_file;
  std::string signal;
  std::string out = "out";
  double trunc = 0.0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  double confidence = 0.95;
  int tuning_trials = 50;
  std::string graph_file;
  Index ground = 0;
  Index synthetic_grid = 0;
  double sigma_rms_factor = 10.0;

  bool is_graph() const { return problem == "graph"; }
  int dim() const { return problem == "pde-2d" ? 2 : 1; }

  SignalMode signal_mode() const {
    if (!signal.empty()) return parse_signal_mode(signal);
    return SignalMode::RandomSphere;
  }

  void validate() const {
    detail::require(problem == "pde-1d" || problem == "pde-2d" || problem == "graph", ErrorCode::InvalidConfig,
                    "problem must be pde-1d, pde-2d or graph, got '" + problem + "'");
    detail::require(q >= 1, ErrorCode::InvalidConfig, "q must be >= 1");
    if (!is_graph()) {
      const int max_q = dim() == 1 ? 12 : 6;
      detail::require(q <= max_q, ErrorCode::TooLarge,
                      "q=" + std::to_string(q) + " exceeds the dense limit (N <= 4096) for " + problem);
      detail::require(coefficient == "rough" || coefficient == "unit" || coefficient == "file",
                      ErrorCode::InvalidConfig, "coefficient must be rough, unit or file");
      detail::require(coefficient != "file" || !coefficient_file.empty(), ErrorCode::InvalidConfig,
                      "coefficient = file needs coefficient_file");
      (void)signal_mode();
    } else {
      detail::require(!graph_file.empty() || synthetic_grid >= 2, ErrorCode::InvalidConfig,
                      "graph problems need graph_file or synthetic_grid");
      detail::require(sigma_rms_factor > 0.0, ErrorCode::InvalidConfig, "sigma_rms_factor must be > 0");
    }
    if (sigma) detail::require(*sigma >= 0.0, ErrorCode::InvalidConfig, "sigma must be >= 0");
    if (M) detail::require(*M > 0.0, ErrorCode::InvalidConfig, "M must be > 0");
    detail::require(trials >= 1, ErrorCode::InvalidConfig, "trials must be >= 1");
    detail::require(tuning_trials >= 1, ErrorCode::InvalidConfig, "tuning_trials must be >= 1");
    detail::require(trunc >= 0.0, ErrorCode::InvalidConfig, "trunc must be >= 0");
    detail::require(threads >= 1, ErrorCode::InvalidConfig, "threads must be >= 1");
    detail::require(confidence > 0.0 && confidence < 1.0, ErrorCode::InvalidConfig, "confidence must lie in (0,1)");
    for (const auto& m : methods)
      detail::require(std::find(method_names().begin(), method_names().end(), m) != method_names().end(),
                      ErrorCode::InvalidConfig, "unknown method '" + m + "'");
  }

  DenoiseConfig denoise_config() const {
    DenoiseConfig c;
    c.d = dim();
    c.q = q;
    c.sigma = sigma.value_or(0.001);
    c.M = M.value_or(1.0);
    c.confidence = confidence;
    return c;
  }

  /// Everything except threads and out, which do not change results.
  Json to_json() const {
    Json j;
    j["problem"] = problem;
    j["q"] = q;
    j["sigma"] = sigma ? Json(*sigma) : Json(nullptr);
    j["M"] = M ? Json(*M) : Json(nullptr);
    j["methods"] = methods;
    j["trials"] = trials;
    j["seed"] = seed;
    j["coefficient"] = coefficient;
    j["coefficient_file"] = coefficient_file;
    j["signal"] = signal;
    j["trunc"] = trunc;
    j["confidence"] = confidence;
    j["tuning_trials"] = tuning_trials;
    j["graph_file"] = graph_file;
    j["ground"] = ground;
    j["synthetic_grid"] = synthetic_grid;
    j["sigma_rms_factor"] = sigma_rms_factor;
    return j;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (!is || !(is >> std::ws).eof())
    throw Error(ErrorCode::InvalidConfig, "bad value '" + value + "' for key '" + key + "'");
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// Sets one config key from its string form; unknown keys are rejected.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "problem") c.problem = value;
  else if (key == "q") c.q = parse_number<int>(key, value);
  else if (key == "sigma") c.sigma = parse_number<double>(key, value);
  else if (key == "M") c.M = parse_number<double>(key, value);
  else if (key == "methods") c.methods = detail::split_list(value);
  else if (key == "trials") c.trials = parse_number<int>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "coefficient") c.coefficient = value;
  else if (key == "coefficient_file") c.coefficient_file = value;
  else if (key == "signal") c.signal = value;
  else if (key == "out") c.out = value;
  else if (key == "trunc") c.trunc = parse_number<double>(key, value);
  else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
  else if (key == "confidence") c.confidence = parse_number<double>(key, value);
  else if (key == "tuning_trials") c.tuning_trials = parse_number<int>(key, value);
  else if (key == "graph_file") c.graph_file = value;
  else if (key == "ground") c.ground = parse_number<Index>(key, value);
  else if (key == "synthetic_grid") c.synthetic_grid = parse_number<Index>(key, value);
  else if (key == "sigma_rms_factor") c.sigma_rms_factor = parse_number<double>(key, value);
  else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
}

/// `key = value` lines; `#` starts a comment.
inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected `key = value`");
    try {
      apply_setting(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline ExperimentConfig read_config_file(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open config file " + path);
  return parse_config(is, std::move(base));
}

/// Piecewise-constant conductivity from a CSV of fine-cell values (2^q values in
/// 1D; a 2^q x 2^q table indexed [iy][ix] in 2D).
inline CoefficientField coefficient_from_file(const std::string& path, int dim, int q) {
  const Matrix m = read_csv_file(path);
  const Index n = Index{1} << q;
  Matrix cells;
  if (dim == 1) {
    detail::require(m.size() == n, ErrorCode::ShapeMismatch,
                    path + ": need " + std::to_string(n) + " cell values, got " + std::to_string(m.size()));
    cells = m.reshaped(1, n);
  } else {
    detail::require(m.rows() == n && m.cols() == n, ErrorCode::ShapeMismatch,
                    path + ": need a " + std::to_string(n) + "x" + std::to_string(n) + " table");
    cells = m;
  }
  detail::require(cells.minCoeff() > 0.0, ErrorCode::InvalidArgument, path + ": conductivity must be positive");
  CoefficientField f;
  f.dim = dim;
  f.name = "file";
  f.lambda_min = cells.minCoeff();
  f.lambda_max = cells.maxCoeff();
  f.eval = [cells, n, dim](double x, double y) {
    auto idx = [n](double t) { return std::clamp(static_cast<Index>(std::floor(t * static_cast<double>(n))), Index{0}, n - 1); };
    return dim == 1 ? cells(0, idx(x)) : cells(idx(y), idx(x));
  };
  return f;
}

struct PdeProblem {
  std::shared_ptr<const Hierarchy> hierarchy;
  CoefficientField field;
  DiscreteOperator op;
};

inline PdeProblem build_pde(const ExperimentConfig& cfg) {
  PdeProblem p;
  p.hierarchy = std::make_shared<const Hierarchy>(build_dyadic(cfg.dim(), cfg.q));
  if (cfg.coefficient == "unit") {
    p.field = constant_field(1.0, cfg.dim());
  } else if (cfg.coefficient == "file") {
    p.field = coefficient_from_file(cfg.coefficient_file, cfg.dim(), cfg.q);
  } else {
    p.field = cfg.dim() == 1 ? coeff_1d() : coeff_2d();
  }
  p.op = assemble_fem(p.field, *p.hierarchy);
  return p;
}

inline GeometricGraph load_graph(const ExperimentConfig& cfg) {
  if (cfg.synthetic_grid >= 2) return grid_graph(cfg.synthetic_grid, cfg.ground);
  detail::require(std::filesystem::exists(cfg.graph_file), ErrorCode::Io, "graph file not found: " + cfg.graph_file);
  return read_graph_file(cfg.graph_file, cfg.ground);
}

/// Identifies the operator a cached system was computed from.
inline std::string input_hash(const ExperimentConfig& cfg) {
  std::string key = cfg.problem + ";q=" + std::to_string(cfg.q) + ";trunc=" + format_double(cfg.trunc);
  if (cfg.is_graph()) {
    if (cfg.synthetic_grid >= 2) {
      key += ";grid=" + std::to_string(cfg.synthetic_grid);
    } else {
      key += ";graph=" + hex64(fnv1a(read_text(cfg.graph_file)));
    }
    key += ";ground=" + std::to_string(cfg.ground);
  } else {
    key += ";coefficient=" + cfg.coefficient;
    if (cfg.coefficient == "file") key += ":" + hex64(fnv1a(read_text(cfg.coefficient_file)));
  }
  return hex64(fnv1a(key));
}

using LogFn = std::function<void(const std::string& level, const std::string& message)>;

inline void log_to(const LogFn& log, const std::string& level, const std::string& msg) {
  if (log) log(level, msg);
}

/// Loads <dir> when its manifest records the same input hash, otherwise runs the
/// transform and saves it. A manifest that exists but is damaged is an error.
inline GambletSystem cached_transform(const DiscreteOperator& op, std::shared_ptr<const Hierarchy> hier,
                                      const std::filesystem::path& dir, const std::string& hash, double trunc,
                                      const LogFn& log, bool* hit = nullptr) {
  if (std::filesystem::exists(dir / "manifest.json")) {
    const Json m = read_manifest(dir);
    if (detail::manifest_field<std::string>(m, "input_hash") == hash) {
      GambletSystem sys = load_system(dir);
      detail::require(hierarchy_hash(*sys.hierarchy) == hierarchy_hash(*hier), ErrorCode::Io,
                      "manifest field 'hierarchy_hash' does not match the configured hierarchy");
      detail::require(sys.fine_size() == op.size(), ErrorCode::Io, "manifest field 'sizes' does not match the operator");
      sys.hierarchy = hier;
      log_to(log, "info", "cache hit: " + dir.string());
      if (hit) *hit = true;
      return sys;
    }
    log_to(log, "info", "cache stale (input hash changed); recomputing " + dir.string());
  }
  GambletSystem sys = transform(op, hier, trunc);
  save_system(sys, dir, hash);
  log_to(log, "info", "transform saved to " + dir.string());
  if (hit) *hit = false;
  return sys;
}

struct TransformOutcome {
  GambletSystem sys;
  bool cache_hit = false;
};

inline TransformOutcome cmd_transform(const ExperimentConfig& cfg, const LogFn& log = {}) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path out(cfg.out);
  fs::create_directories(out);
  TransformOutcome res;
  std::shared_ptr<const Hierarchy> hier;
  if (cfg.is_graph()) {
    GraphRun run;
    detail::graph_operator(load_graph(cfg), cfg.q, run);
    res.sys = cached_transform(run.op, run.hierarchy, out / "system", input_hash(cfg), cfg.trunc, log, &res.cache_hit);
  } else {
    const PdeProblem p = build_pde(cfg);
    res.sys = cached_transform(p.op, p.hierarchy, out / "system", input_hash(cfg), cfg.trunc, log, &res.cache_hit);
  }
  check_invariants(res.sys);
  return res;
}

namespace detail {

inline void write_results_csv(const std::filesystem::path& path, const std::vector<MethodStats>& rows,
                              const std::vector<std::string>& keep) {
  std::ostringstream os;
  os << "method,energy_avg,energy_std,l2_avg,l2_std\n";
  for (const auto& r : rows) {
    if (std::find(keep.begin(), keep.end(), r.method) == keep.end()) continue;
    os << r.method << ',' << format_double(r.energy_avg) << ',' << format_double(r.energy_std) << ','
       << format_double(r.l2_avg) << ',' << format_double(r.l2_std) << '\n';
  }
  write_text(path, os.str());
}

inline Json stats_json(const TrialStats& st) {
  Json j;
  j["trials"] = st.trials;
  j["seed"] = st.seed;
  j["level"] = st.level;
  Json hist = Json::object();
  for (const auto& [l, n] : st.level_histogram) hist[std::to_string(l)] = n;
  j["level_histogram"] = hist;
  j["t0_hard"] = st.t0_hard;
  j["t0_soft"] = st.t0_soft;
  j["t0_grid"] = st.t0_grid;
  j["noise_energy_avg"] = st.noise_energy_avg;
  j["noise_energy_std"] = st.noise_energy_std;
  Json methods = Json::array();
  for (const auto& m : st.methods)
    methods.push_back({{"method", m.method}, {"energy_avg", m.energy_avg}, {"energy_std", m.energy_std},
                       {"l2_avg", m.l2_avg}, {"l2_std", m.l2_std}});
  j["methods"] = methods;
  j["warnings"] = st.warnings;
  return j;
}

}  // namespace detail

struct DenoiseOutcome {
  TrialStats stats;
  bool cache_hit = false;
};

/// Writes results.csv, manifest.json, realization0.csv and system/ under cfg.out.
inline DenoiseOutcome cmd_denoise(const ExperimentConfig& cfg, const LogFn& log = {}) {
  cfg.validate();
  detail::require(!cfg.is_graph(), ErrorCode::InvalidConfig, "denoise runs pde-1d/pde-2d problems; use graph");
  namespace fs = std::filesystem;
  const fs::path out(cfg.out);
  fs::create_directories(out);
  PdeProblem p = build_pde(cfg);
  DenoiseOutcome res;
  GambletSystem sys =
      cached_transform(p.op, p.hierarchy, out / "system", input_hash(cfg), cfg.trunc, log, &res.cache_hit);
  const Experiment ex = Experiment::build(p.hierarchy, p.op, std::move(sys), cfg.signal_mode());
  const DenoiseConfig dc = cfg.denoise_config();
  TrialOptions opt;
  opt.trials = cfg.trials;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  opt.tuning_trials = cfg.tuning_trials;
  res.stats = run_trials(ex, dc, opt);
  for (const auto& w : res.stats.warnings) log_to(log, "warn", w);

  detail::write_results_csv(out / "results.csv", res.stats.methods, cfg.methods);

  Json m;
  m["command"] = "denoise";
  m["config"] = cfg.to_json();
  m["N"] = ex.op.size();
  m["stats"] = detail::stats_json(res.stats);
  m["system_input_hash"] = input_hash(cfg);
  write_text(out / "manifest.json", m.dump(2) + "\n");

  // First realization for plotting.
  const Observation obs = ex.observe(dc.sigma, cfg.seed, 0, kEvalStream);
  auto rng = trial_rng(cfg.seed, 0, kEvalStream);
  const Signal sig = ex.signals.draw(ex.mode, rng);
  const Vector rec = level_filter(ex.sys, obs.eta, res.stats.level).recovered;
  const Index n = Index{1} << cfg.q;
  const double hf = 1.0 / static_cast<double>(n + 1);
  const double cell = 1.0 / static_cast<double>(n);
  std::ostringstream os;
  os << (cfg.dim() == 1 ? "x" : "x,y") << ",a,f,u,eta,recovery,error\n";
  for (Index i = 0; i < ex.op.size(); ++i) {
    const Index ix = cfg.dim() == 1 ? i : i % n;
    const Index iy = cfg.dim() == 1 ? 0 : i / n;
    const double x = static_cast<double>(ix + 1) * hf;
    const double y = static_cast<double>(iy + 1) * hf;
    // Pre-Haar coefficient back to the cell average of f.
    const double favg = sig.f(i) / std::pow(cell, 0.5 * cfg.dim());
    os << format_double(x) << ',';
    if (cfg.dim() == 2) os << format_double(y) << ',';
    os << format_double(p.field(x, y)) << ',' << format_double(favg) << ',' << format_double(obs.u(i)) << ','
       << format_double(obs.eta(i)) << ',' << format_double(rec(i)) << ',' << format_double(rec(i) - obs.u(i))
       << '\n';
  }
  write_text(out / "realization0.csv", os.str());
  return res;
}

struct GraphOutcome {
  GraphRun run;
  bool cache_hit = false;
};

/// Writes results.csv, scale.csv (H,d_eff), manifest.json, realization0.csv and system/.
inline GraphOutcome cmd_graph(const ExperimentConfig& cfg, const LogFn& log = {}) {
  cfg.validate();
  detail::require(cfg.is_graph(), ErrorCode::InvalidConfig, "graph needs problem = graph");
  namespace fs = std::filesystem;
  const fs::path out(cfg.out);
  fs::create_directories(out);
  const GeometricGraph g = load_graph(cfg);
  GraphOutcome res;
  GraphRun& run = res.run;
  detail::graph_operator(g, cfg.q, run);
  run.sys = cached_transform(run.op, run.hierarchy, out / "system", input_hash(cfg), cfg.trunc, log, &res.cache_hit);
  GraphOptions opt;
  opt.q = cfg.q;
  opt.sigma = cfg.sigma.value_or(-1.0);
  opt.sigma_rms_factor = cfg.sigma_rms_factor;
  opt.M = cfg.M.value_or(-1.0);
  opt.trials = cfg.trials;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  opt.tuning_trials = cfg.tuning_trials;
  opt.trunc = cfg.trunc;
  denoise_graph(g, opt, run);
  for (const auto& w : run.stats.warnings) log_to(log, "warn", w);

  detail::write_results_csv(out / "results.csv", run.stats.methods, {"near-minimax", "hard-threshold"});
  write_text(out / "scale.csv", "H,d_eff\n" + format_double(run.estimate.H) + "," + format_double(run.estimate.d_eff) + "\n");

  Json m;
  m["command"] = "graph";
  m["config"] = cfg.to_json();
  m["vertices"] = g.vertex_count();
  m["edges"] = g.edges.size();
  m["N"] = run.op.size();
  m["levels"] = run.sys.levels();
  m["sigma"] = run.sigma;
  m["M"] = run.M;
  m["H"] = run.estimate.H;
  m["d_eff"] = run.estimate.d_eff;
  m["H_from_lambda_min"] = run.estimate.H_from_min;
  m["lambda_max_B"] = run.estimate.lambda_max;
  m["lambda_min_B"] = run.estimate.lambda_min;
  m["detail_sizes"] = run.estimate.detail_sizes;
  m["t_hard"] = run.t_hard;
  m["stats"] = detail::stats_json(run.stats);
  m["system_input_hash"] = input_hash(cfg);
  write_text(out / "manifest.json", m.dump(2) + "\n");

  std::ostringstream os;
  os << "vertex,x,y,f,u,eta,recovery,error\n";
  for (Index i = 0; i < run.op.size(); ++i) {
    const Index v = run.vertices[static_cast<std::size_t>(i)];
    const Point2& c = g.coords[static_cast<std::size_t>(v)];
    const double rec = run.first.recovered(i);
    os << v << ',' << format_double(c[0]) << ',' << format_double(c[1]) << ',' << format_double(run.f(i)) << ','
       << format_double(run.u(i)) << ',' << format_double(run.eta0(i)) << ',' << format_double(rec) << ','
       << format_double(rec - run.u(i)) << '\n';
  }
  write_text(out / "realization0.csv", os.str());
  return res;
}

struct SelftestLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Quick invariant suite over small configurations.
inline std::vector<SelftestLine> cmd_selftest() {
  std::vector<SelftestLine> lines;
  auto record = [&](const std::string& name, auto&& fn) {
    SelftestLine l;
    l.name = name;
    try {
      l.detail = fn();
      l.pass = true;
    } catch (const std::exception& e) {
      l.detail = e.what();
    }
    lines.push_back(std::move(l));
  };
  auto fmt = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return std::string(buf);
  };

  for (int dim : {1, 2}) {
    const int q = dim == 1 ? 5 : 3;
    auto hier = std::make_shared<const Hierarchy>(build_dyadic(dim, q));
    const DiscreteOperator op = assemble_fem(dim == 1 ? coeff_1d() : coeff_2d(), *hier);
    const std::string tag = std::to_string(dim) + "d q=" + std::to_string(q);
    record("hierarchy " + tag, [&] {
      const auto r = residuals(*hier);
      const double worst = std::max({r.aggregation_orthonormal, r.detail_orthonormal, r.detail_kernel});
      detail::require(r.sizes_consistent && worst < 1e-12, ErrorCode::InvariantViolation, "residual " + fmt(worst));
      return "residual " + fmt(worst);
    });
    const GambletSystem sys = transform(op, hier);
    record("transform vs oracle " + tag, [&] {
      const GambletSystem ref = oracle_transform(op, hier);
      double worst = 0.0;
      for (int k = 1; k <= q; ++k) {
        worst = std::max(worst, (sys.A(k).dense() - ref.A(k).dense()).norm() / ref.A(k).dense().norm());
        worst = std::max(worst, (sys.B(k).dense() - ref.B(k).dense()).norm() / ref.B(k).dense().norm());
      }
      detail::require(worst < 1e-8, ErrorCode::InvariantViolation, "relative error " + fmt(worst));
      return "relative error " + fmt(worst);
    });
    record("system invariants " + tag, [&] {
      check_invariants(sys);
      return "worst " + fmt(residuals(sys).worst());
    });
    record("round trip and solve " + tag, [&] {
      std::mt19937_64 rng(7);
      std::normal_distribution<double> g;
      Vector y(op.size());
      for (Index i = 0; i < y.size(); ++i) y(i) = g(rng);
      const double rt = (reconstruct(sys, analyze(sys, y)) - y).norm() / y.norm();
      const Vector x = solve(sys, y);
      const double res = (op.stiffness.dense() * x - y).norm() / y.norm();
      detail::require(rt < 1e-9 && res < 1e-9, ErrorCode::InvariantViolation,
                      "round trip " + fmt(rt) + ", residual " + fmt(res));
      return "round trip " + fmt(rt) + ", residual " + fmt(res);
    });
  }
  record("regularization stationarity", [&] {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Matrix x(20, 20);
    for (Index i = 0; i < 20; ++i)
      for (Index j = 0; j < 20; ++j) x(i, j) = g(rng);
    const Matrix a = x * x.transpose() + Matrix::Identity(20, 20);
    Vector y(20);
    for (Index i = 0; i < 20; ++i) y(i) = g(rng);
    const auto r = Regularizer(SymMatrix::from(a))(y, 0.5 * y.norm());
    const double st = ((r.recovered - y) + r.alpha * a * r.recovered).norm();
    detail::require(st < 1e-8, ErrorCode::InvariantViolation, "stationarity " + fmt(st));
    return "stationarity " + fmt(st);
  });
  record("graph gamblets 8x8 grid", [&] {
    GraphRun run;
    detail::graph_system(grid_graph(8), 3, 0.0, run);
    check_invariants(run.sys);
    return "worst " + fmt(residuals(run.sys).worst());
  });
  return lines;
}

}  // namespace gamblet
