#pragma once

// Discrete SPD operators: P1/Q1 finite-element discretisations of
// -div(a grad u) with zero Dirichlet data on [0,1]^d, and grounded graph
// Laplacians.
//
// Node convention: the fine label set I^(q) has 2^q entries per axis, so the
// element grid carries 2^q interior nodes per axis at spacing 1/(2^q + 1). Node i
// is paired with fine cell i of the dyadic hierarchy; measurement_overlap()
// accounts for the offset between tents and cells.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gamblet/error.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/numerics.hpp"

namespace gamblet {

/// Scalar conductivity with known bounds lambda_min(a) <= a(x) <= lambda_max(a).
struct CoefficientField {
  int dim = 1;
  std::string name;
  std::function<double(double, double)> eval;
  double lambda_min = 1.0;
  double lambda_max = 1.0;

  double operator()(double x, double y = 0.0) const { return eval(x, y); }
};

/// a(x) = prod_{k=1}^{10} (1 + 0.25 cos(2^k x)).
inline CoefficientField coeff_1d() {
  CoefficientField f;
  f.dim = 1;
  f.name = "rough";
  f.eval = [](double x, double) {
    double a = 1.0;
    for (int k = 1; k <= 10; ++k) a *= 1.0 + 0.25 * std::cos(std::ldexp(1.0, k) * x);
    return a;
  };
  f.lambda_min = std::pow(0.75, 10);
  f.lambda_max = std::pow(1.25, 10);
  return f;
}

/// a(x,y) = prod_{k=1}^{7} (1 + 0.25 cos(2^k pi (x+y))) (1 + 0.25 cos(2^k pi (x-3y))).
/// Each k contributes the product of the two displayed factors.
inline CoefficientField coeff_2d() {
  CoefficientField f;
  f.dim = 2;
  f.name = "rough";
  f.eval = [](double x, double y) {
    double a = 1.0;
    for (int k = 1; k <= 7; ++k) {
      const double freq = std::ldexp(1.0, k) * std::numbers::pi;
      a *= (1.0 + 0.25 * std::cos(freq * (x + y))) * (1.0 + 0.25 * std::cos(freq * (x - 3.0 * y)));
    }
    return a;
  };
  f.lambda_min = std::pow(0.75, 14);
  f.lambda_max = std::pow(1.25, 14);
  return f;
}

inline CoefficientField constant_field(double c, int dim) {
  detail::require(c > 0.0, ErrorCode::InvalidArgument, "conductivity must be positive");
  CoefficientField f;
  f.dim = dim;
  f.name = "unit";
  f.eval = [c](double, double) { return c; };
  f.lambda_min = c;
  f.lambda_max = c;
  return f;
}

struct OperatorMeta {
  int dim = 1;
  int smoothness = 1;
  int levels = 0;
  double mesh_width = 0.0;
};

struct DiscreteOperator {
  SymMatrix stiffness;
  SymMatrix mass;
  OperatorMeta meta;

  Index size() const { return stiffness.size(); }
};

namespace detail {

inline bool is_dyadic(const Hierarchy& hier) {
  if (!hier.fine_points.empty() || (hier.dim != 1 && hier.dim != 2)) return false;
  for (int k = 1; k <= hier.levels(); ++k)
    if (hier.size(k) != (Index{1} << (k * hier.dim))) return false;
  return true;
}

// Three-point Gauss-Legendre on [0,1].
inline constexpr std::array<double, 3> kGauss3Nodes = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
inline constexpr std::array<double, 3> kGauss3Weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
// Two-point Gauss-Legendre on [0,1].
inline constexpr std::array<double, 2> kGauss2Nodes = {0.5 - 0.28867513459481287, 0.5 + 0.28867513459481287};
inline constexpr std::array<double, 2> kGauss2Weights = {0.5, 0.5};

inline std::pair<Matrix, Matrix> assemble_1d(const CoefficientField& a, Index n, double hw) {
  Matrix k = Matrix::Zero(n, n);
  Matrix m = Matrix::Zero(n, n);
  for (Index e = 0; e <= n; ++e) {
    const double x0 = static_cast<double>(e) * hw;
    double int_a = 0.0;
    double mass_local[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t g = 0; g < 3; ++g) {
      const double t = kGauss3Nodes[g];
      const double wt = kGauss3Weights[g] * hw;
      int_a += wt * a(x0 + t * hw);
      const double shape[2] = {1.0 - t, t};
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) mass_local[r][c] += wt * shape[r] * shape[c];
    }
    const double stiff_local[2][2] = {{1.0, -1.0}, {-1.0, 1.0}};
    const Index node[2] = {e - 1, e};
    for (int r = 0; r < 2; ++r) {
      if (node[r] < 0 || node[r] >= n) continue;
      for (int c = 0; c < 2; ++c) {
        if (node[c] < 0 || node[c] >= n) continue;
        k(node[r], node[c]) += int_a / (hw * hw) * stiff_local[r][c];
        m(node[r], node[c]) += mass_local[r][c];
      }
    }
  }
  return {k, m};
}

inline std::pair<Matrix, Matrix> assemble_2d(const CoefficientField& a, Index n, double hw) {
  const Index total = n * n;
  Matrix k = Matrix::Zero(total, total);
  Matrix m = Matrix::Zero(total, total);
  for (Index ey = 0; ey <= n; ++ey) {
    for (Index ex = 0; ex <= n; ++ex) {
      double kl[4][4] = {};
      double ml[4][4] = {};
      for (std::size_t gy = 0; gy < 2; ++gy) {
        for (std::size_t gx = 0; gx < 2; ++gx) {
          const double s = kGauss2Nodes[gx];
          const double t = kGauss2Nodes[gy];
          const double wt = kGauss2Weights[gx] * kGauss2Weights[gy];
          const double av = a(static_cast<double>(ex) * hw + s * hw, static_cast<double>(ey) * hw + t * hw);
          // Local order: (0,0), (1,0), (0,1), (1,1) in (x, y) offsets.
          const double shape[4] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
          const double ds[4] = {-(1 - t), (1 - t), -t, t};
          const double dt[4] = {-(1 - s), -s, (1 - s), s};
          for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
              kl[r][c] += wt * av * (ds[r] * ds[c] + dt[r] * dt[c]);
              ml[r][c] += wt * hw * hw * shape[r] * shape[c];
            }
          }
        }
      }
      Index node[4];
      for (int l = 0; l < 4; ++l) {
        const Index ix = ex - 1 + (l & 1);
        const Index iy = ey - 1 + (l >> 1);
        node[l] = (ix < 0 || iy < 0 || ix >= n || iy >= n) ? -1 : iy * n + ix;
      }
      for (int r = 0; r < 4; ++r) {
        if (node[r] < 0) continue;
        for (int c = 0; c < 4; ++c) {
          if (node[c] < 0) continue;
          k(node[r], node[c]) += kl[r][c];
          m(node[r], node[c]) += ml[r][c];
        }
      }
    }
  }
  return {k, m};
}

}  // namespace detail

/// Stiffness and consistent mass matrices on the fine grid of a dyadic hierarchy.
/// 1D: P1 elements, 3-point Gauss. 2D: Q1 elements, 2x2 Gauss. Dirichlet nodes are
/// eliminated; the remaining nodes are ordered like the finest hierarchy cells.
inline DiscreteOperator assemble_fem(const CoefficientField& field, const Hierarchy& hier) {
  detail::require(hier.dim == 1 || hier.dim == 2, ErrorCode::UnsupportedDim,
                  "finite elements support dim 1 or 2, got " + std::to_string(hier.dim));
  detail::require(detail::is_dyadic(hier), ErrorCode::InvalidArgument,
                  "finite-element assembly needs a dyadic hierarchy");
  detail::require(field.dim == hier.dim, ErrorCode::UnsupportedDim,
                  "coefficient field dimension does not match the hierarchy");
  const int q = hier.levels();
  const Index n = Index{1} << q;
  const double hw = 1.0 / static_cast<double>(n + 1);
  auto [k, m] = hier.dim == 1 ? detail::assemble_1d(field, n, hw) : detail::assemble_2d(field, n, hw);
  DiscreteOperator op;
  op.stiffness = SymMatrix::from(k);
  op.mass = SymMatrix::from(m);
  op.meta = {hier.dim, 1, q, hw};
  return op;
}

namespace detail {

// Exact integral over [lo, hi] of the hat function with peak 1 at `center`
// and half-width `hw`.
inline double tent_integral(double center, double hw, double lo, double hi) {
  auto hat = [&](double x) { return std::max(0.0, 1.0 - std::abs(x - center) / hw); };
  const double knots[3] = {center - hw, center, center + hw};
  double total = 0.0;
  for (int piece = 0; piece < 2; ++piece) {
    const double a = std::max(lo, knots[piece]);
    const double b = std::min(hi, knots[piece + 1]);
    if (b > a) total += 0.5 * (b - a) * (hat(a) + hat(b));
  }
  return total;
}

inline Matrix overlap_1d(Index n, double hw) {
  const double cell = 1.0 / static_cast<double>(n);
  const double norm = 1.0 / std::sqrt(cell);
  Matrix o = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double center = static_cast<double>(i + 1) * hw;
    const Index first = std::max<Index>(0, static_cast<Index>(std::floor((center - hw) / cell)) - 1);
    const Index last = std::min<Index>(n - 1, static_cast<Index>(std::floor((center + hw) / cell)) + 1);
    for (Index j = first; j <= last; ++j)
      o(i, j) = norm * tent_integral(center, hw, static_cast<double>(j) * cell, static_cast<double>(j + 1) * cell);
  }
  return o;
}

}  // namespace detail

/// O with O_ij = integral of phi_j^(q) * psi~_i, so that a function with pre-Haar
/// coefficients c has finite-element load vector O c.
inline RectMatrix measurement_overlap(const Hierarchy& hier, const DiscreteOperator& op) {
  detail::require(detail::is_dyadic(hier), ErrorCode::InvalidArgument,
                  "measurement overlap needs a dyadic hierarchy");
  detail::require_same(op.size(), hier.fine_size(), "measurement_overlap: operator vs hierarchy size");
  const Index n = Index{1} << hier.levels();
  const double hw = 1.0 / static_cast<double>(n + 1);
  const Matrix o1 = detail::overlap_1d(n, hw);
  if (hier.dim == 1) return o1;
  // Tents and cells are tensor products, so O = O1 (x) O1 in row-major (iy, ix) order.
  Matrix o = Matrix::Zero(n * n, n * n);
  for (Index iy = 0; iy < n; ++iy)
    for (Index jy = 0; jy < n; ++jy) {
      if (o1(iy, jy) == 0.0) continue;
      o.block(iy * n, jy * n, n, n) = o1(iy, jy) * o1;
    }
  return o;
}

/// Simple undirected graph with vertex coordinates in the unit square.
struct GeometricGraph {
  std::vector<Point2> coords;
  std::vector<std::pair<Index, Index>> edges;
  Index ground = 0;

  Index vertex_count() const { return static_cast<Index>(coords.size()); }
};

/// Number of connected components.
inline Index component_count(const GeometricGraph& g) {
  const auto n = static_cast<std::size_t>(g.vertex_count());
  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  Index comps = static_cast<Index>(n);
  for (const auto& [a, b] : g.edges) {
    const auto ra = find(static_cast<std::size_t>(a));
    const auto rb = find(static_cast<std::size_t>(b));
    if (ra != rb) {
      root[ra] = rb;
      --comps;
    }
  }
  return comps;
}

inline void validate(const GeometricGraph& g) {
  const Index n = g.vertex_count();
  detail::require(n >= 2, ErrorCode::InvalidArgument, "graph needs at least two vertices");
  detail::require(g.ground >= 0 && g.ground < n, ErrorCode::IndexOutOfRange,
                  "grounded vertex " + std::to_string(g.ground) + " not in 0.." + std::to_string(n - 1));
  std::set<std::pair<Index, Index>> seen;
  for (const auto& [a, b] : g.edges) {
    detail::require(a >= 0 && a < n && b >= 0 && b < n, ErrorCode::IndexOutOfRange,
                    "edge (" + std::to_string(a) + "," + std::to_string(b) + ") references a missing vertex");
    detail::require(a != b, ErrorCode::InvalidArgument, "self-loop at vertex " + std::to_string(a));
    const bool fresh = seen.insert({std::min(a, b), std::max(a, b)}).second;
    detail::require(fresh, ErrorCode::InvalidArgument,
                    "duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
  }
  const Index comps = component_count(g);
  detail::require(comps == 1, ErrorCode::Disconnected,
                  "graph has " + std::to_string(comps) + " connected components");
}

/// Graph Laplacian (degree on the diagonal, -1 per edge) with the row and column of
/// the grounded vertex removed; remaining vertices keep their relative order.
inline DiscreteOperator grounded_laplacian(const GeometricGraph& g) {
  validate(g);
  const Index n = g.vertex_count();
  Matrix l = Matrix::Zero(n, n);
  for (const auto& [a, b] : g.edges) {
    l(a, a) += 1.0;
    l(b, b) += 1.0;
    l(a, b) -= 1.0;
    l(b, a) -= 1.0;
  }
  std::vector<Index> keep;
  for (Index v = 0; v < n; ++v)
    if (v != g.ground) keep.push_back(v);
  const Index m = n - 1;
  Matrix grounded(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) grounded(i, j) = l(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
  DiscreteOperator op;
  op.stiffness = SymMatrix::from(grounded);
  op.mass = SymMatrix::identity(m);
  op.meta = {2, 1, 0, 0.0};
  return op;
}

/// n x n grid graph with vertex (i, j) at ((i + 1/2)/n, (j + 1/2)/n), index j*n + i.
inline GeometricGraph grid_graph(Index n, Index ground = 0) {
  detail::require(n >= 2, ErrorCode::InvalidArgument, "grid graph needs n >= 2");
  GeometricGraph g;
  g.ground = ground;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      g.coords.push_back({(static_cast<double>(i) + 0.5) / static_cast<double>(n),
                          (static_cast<double>(j) + 0.5) / static_cast<double>(n)});
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (i + 1 < n) g.edges.emplace_back(j * n + i, j * n + i + 1);
      if (j + 1 < n) g.edges.emplace_back(j * n + i, (j + 1) * n + i);
    }
  return g;
}

/// Reads `N M`, then N lines `idx x y`, then M lines `i j` (0-based). Coordinates
/// are rescaled per axis onto [0,1].
inline GeometricGraph parse_graph(std::istream& is, Index ground = 0) {
  Index n = 0;
  Index m = 0;
  if (!(is >> n >> m) || n < 0 || m < 0) throw Error(ErrorCode::Io, "graph header must be `N M`");
  GeometricGraph g;
  g.ground = ground;
  g.coords.assign(static_cast<std::size_t>(n), Point2{0.0, 0.0});
  std::vector<bool> filled(static_cast<std::size_t>(n), false);
  for (Index r = 0; r < n; ++r) {
    Index idx = 0;
    double x = 0.0;
    double y = 0.0;
    if (!(is >> idx >> x >> y)) throw Error(ErrorCode::Io, "vertex line " + std::to_string(r + 1) + " malformed");
    detail::require(idx >= 0 && idx < n, ErrorCode::IndexOutOfRange,
                    "vertex index " + std::to_string(idx) + " out of range");
    g.coords[static_cast<std::size_t>(idx)] = {x, y};
    filled[static_cast<std::size_t>(idx)] = true;
  }
  for (Index v = 0; v < n; ++v)
    detail::require(filled[static_cast<std::size_t>(v)], ErrorCode::Io, "vertex " + std::to_string(v) + " missing");
  for (Index r = 0; r < m; ++r) {
    Index a = 0;
    Index b = 0;
    if (!(is >> a >> b)) throw Error(ErrorCode::Io, "edge line " + std::to_string(r + 1) + " malformed");
    g.edges.emplace_back(a, b);
  }
  for (int axis = 0; axis < 2; ++axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : g.coords) {
      lo = std::min(lo, c[static_cast<std::size_t>(axis)]);
      hi = std::max(hi, c[static_cast<std::size_t>(axis)]);
    }
    for (auto& c : g.coords)
      c[static_cast<std::size_t>(axis)] = hi > lo ? (c[static_cast<std::size_t>(axis)] - lo) / (hi - lo) : 0.5;
  }
  return g;
}

inline GeometricGraph read_graph_file(const std::string& path, Index ground = 0) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open graph file " + path);
  return parse_graph(is, ground);
}

}  // namespace gamblet
