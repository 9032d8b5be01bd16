#pragma once

// Nested measurement hierarchies: label sets I^(k), aggregation matrices
// pi^(k,k+1) and detail selectors W^(k), built from uniform dyadic cells
// (pre-Haar measurements) or from quadtree boxes over a point cloud.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gamblet/error.hpp"
#include "gamblet/numerics.hpp"

namespace gamblet {

using Point2 = std::array<double, 2>;

struct Hierarchy {
  int dim = 1;
  double h = 0.5;
  /// |I^(k)| for k = 1..q (stored at k-1).
  std::vector<Index> sizes;
  /// pi^(k,k+1) for k = 1..q-1 (stored at k-1).
  std::vector<RectMatrix> aggregation;
  /// W^(k) for k = 2..q (stored at k-2).
  std::vector<RectMatrix> details;
  /// parent label in I^(k-1) of each label in I^(k), for k = 2..q (stored at k-2).
  std::vector<std::vector<Index>> parents;
  /// |tau_i^(k)| for dyadic cells; point counts |S_i^(k)| for point hierarchies.
  std::vector<std::vector<double>> cell_volumes;
  /// Representative location of every label (cell or box centre).
  std::vector<std::vector<Point2>> centers;

  // Point-cloud hierarchies only.
  /// Input point index behind each finest label.
  std::vector<Index> fine_points;
  /// Requested box levels that were merged away because they added no labels.
  std::vector<int> merged_levels;
  /// True when the finest requested box level still held several points per box
  /// and an extra level of single points was appended.
  bool point_level_appended = false;
  Index min_points_per_box = 0;
  Index max_points_per_box = 0;

  int levels() const { return static_cast<int>(sizes.size()); }

  Index size(int k) const {
    check_level(k);
    return sizes[static_cast<std::size_t>(k - 1)];
  }

  /// |J^(k)|, with J^(1) := I^(1).
  Index detail_size(int k) const { return k == 1 ? size(1) : size(k) - size(k - 1); }

  Index fine_size() const { return sizes.back(); }

  /// pi^(k,k+1).
  const RectMatrix& pi(int k) const {
    detail::require(k >= 1 && k < levels(), ErrorCode::BadLevel,
                    "pi^(k,k+1) needs 1 <= k < q, got k=" + std::to_string(k));
    return aggregation[static_cast<std::size_t>(k - 1)];
  }

  /// W^(k).
  const RectMatrix& w(int k) const {
    detail::require(k >= 2 && k <= levels(), ErrorCode::BadLevel,
                    "W^(k) needs 2 <= k <= q, got k=" + std::to_string(k));
    return details[static_cast<std::size_t>(k - 2)];
  }

  /// pi^(k,l) = pi^(k,k+1) ... pi^(l-1,l), with pi^(k,k) = I.
  RectMatrix pi_between(int k, int l) const {
    check_level(k);
    check_level(l);
    detail::require(k <= l, ErrorCode::BadLevel, "pi_between needs k <= l");
    RectMatrix p = RectMatrix::Identity(size(k), size(k));
    for (int j = k; j < l; ++j) p = p * pi(j);
    return p;
  }

 private:
  void check_level(int k) const {
    detail::require(k >= 1 && k <= levels(), ErrorCode::BadLevel,
                    "level " + std::to_string(k) + " outside 1.." + std::to_string(levels()));
  }
};

namespace detail {

inline std::vector<std::vector<Index>> parents_from_aggregation(const std::vector<RectMatrix>& pis) {
  std::vector<std::vector<Index>> out;
  for (const auto& p : pis) {
    std::vector<Index> par(static_cast<std::size_t>(p.cols()), -1);
    for (Index i = 0; i < p.rows(); ++i)
      for (Index j = 0; j < p.cols(); ++j)
        if (p(i, j) != 0.0) par[static_cast<std::size_t>(j)] = i;
    out.push_back(std::move(par));
  }
  return out;
}

}  // namespace detail

/// Uniform dyadic partition of [0,1]^dim with q levels; level k has 2^(k*dim) cells.
/// 1D cells are ordered left to right. 2D cells are row-major (index = iy * 2^k + ix),
/// and the four children of a cell are taken in the order SW, SE, NW, NE.
inline Hierarchy build_dyadic(int dim, int q) {
  detail::require(dim == 1 || dim == 2, ErrorCode::UnsupportedDim,
                  "dyadic hierarchies support dim 1 or 2, got " + std::to_string(dim));
  detail::require(q >= 1, ErrorCode::InvalidArgument, "need at least one level");
  detail::require(q * dim <= 24, ErrorCode::TooLarge, "dyadic hierarchy too deep for dense storage");

  Hierarchy hier;
  hier.dim = dim;
  hier.h = 0.5;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  for (int k = 1; k <= q; ++k) {
    const Index per_axis = Index{1} << k;
    const Index n = dim == 1 ? per_axis : per_axis * per_axis;
    hier.sizes.push_back(n);
    hier.cell_volumes.emplace_back(static_cast<std::size_t>(n), std::pow(0.5, k * dim));
    std::vector<Point2> c(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      const Index ix = dim == 1 ? i : i % per_axis;
      const Index iy = dim == 1 ? 0 : i / per_axis;
      c[static_cast<std::size_t>(i)] = {(static_cast<double>(ix) + 0.5) / static_cast<double>(per_axis),
                                        dim == 1 ? 0.0 : (static_cast<double>(iy) + 0.5) / static_cast<double>(per_axis)};
    }
    hier.centers.push_back(std::move(c));
  }

  // Haar detail rows over (SW, SE, NW, NE).
  constexpr double haar2d[3][4] = {{0.5, -0.5, 0.5, -0.5}, {0.5, 0.5, -0.5, -0.5}, {0.5, -0.5, -0.5, 0.5}};

  for (int k = 1; k < q; ++k) {
    const Index coarse = hier.sizes[static_cast<std::size_t>(k - 1)];
    const Index fine = hier.sizes[static_cast<std::size_t>(k)];
    RectMatrix p = RectMatrix::Zero(coarse, fine);
    RectMatrix w = RectMatrix::Zero(fine - coarse, fine);
    if (dim == 1) {
      for (Index i = 0; i < coarse; ++i) {
        p(i, 2 * i) = inv_sqrt2;
        p(i, 2 * i + 1) = inv_sqrt2;
        w(i, 2 * i) = inv_sqrt2;
        w(i, 2 * i + 1) = -inv_sqrt2;
      }
    } else {
      const Index coarse_axis = Index{1} << k;
      const Index fine_axis = coarse_axis * 2;
      for (Index iy = 0; iy < coarse_axis; ++iy) {
        for (Index ix = 0; ix < coarse_axis; ++ix) {
          const Index parent = iy * coarse_axis + ix;
          const std::array<Index, 4> kids = {(2 * iy) * fine_axis + 2 * ix, (2 * iy) * fine_axis + 2 * ix + 1,
                                             (2 * iy + 1) * fine_axis + 2 * ix,
                                             (2 * iy + 1) * fine_axis + 2 * ix + 1};
          for (int c = 0; c < 4; ++c) {
            p(parent, kids[static_cast<std::size_t>(c)]) = 0.5;
            for (int r = 0; r < 3; ++r) w(3 * parent + r, kids[static_cast<std::size_t>(c)]) = haar2d[r][c];
          }
        }
      }
    }
    hier.aggregation.push_back(std::move(p));
    hier.details.push_back(std::move(w));
  }
  hier.parents = detail::parents_from_aggregation(hier.aggregation);
  return hier;
}

namespace detail {

// Orthonormal basis of {v : sum_j weight_j v_j = 0}, by Gram-Schmidt on
// (w_2 e_1 - w_1 e_2, w_3 e_1 - w_1 e_3, ...) in that order.
inline Matrix sibling_kernel_basis(const std::vector<double>& weight) {
  const Index m = static_cast<Index>(weight.size());
  Matrix basis(std::max<Index>(m - 1, 0), m);
  for (Index r = 1; r < m; ++r) {
    Vector v = Vector::Zero(m);
    v(0) = weight[static_cast<std::size_t>(r)];
    v(r) = -weight[0];
    for (int pass = 0; pass < 2; ++pass)
      for (Index s = 0; s + 1 < r; ++s) v -= basis.row(s).dot(v) * basis.row(s).transpose();
    basis.row(r - 1) = v.normalized().transpose();
  }
  return basis;
}

}  // namespace detail

/// Quadtree boxes over points in the unit square. Box (i, j) at level k holds the
/// points with floor(2^k x) = i and floor(2^k y) = j (clamped at the upper edge);
/// empty boxes are dropped and labels are ordered row-major by box. Levels that add
/// no labels are merged. If boxes at level q still hold several points, a final
/// level of single points is appended so the finest labels are the points.
inline Hierarchy build_from_points(const std::vector<Point2>& coords, int q) {
  detail::require(!coords.empty(), ErrorCode::EmptyPointSet, "no points given");
  detail::require(q >= 1 && q <= 20, ErrorCode::InvalidArgument,
                  "level count must lie in 1..20, got " + std::to_string(q));
  for (std::size_t p = 0; p < coords.size(); ++p) {
    const auto& c = coords[p];
    const bool inside = c[0] >= 0.0 && c[0] <= 1.0 && c[1] >= 0.0 && c[1] <= 1.0;
    detail::require(inside, ErrorCode::InvalidArgument,
                    "point " + std::to_string(p) + " lies outside the unit square");
  }

  const std::size_t npts = coords.size();
  auto box_key = [&](std::size_t p, int k) -> std::int64_t {
    const std::int64_t n = std::int64_t{1} << k;
    auto axis = [n](double x) {
      return std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(x * static_cast<double>(n))), n - 1);
    };
    return axis(coords[p][1]) * n + axis(coords[p][0]);
  };

  // Candidate levels: box levels 1..q, then optionally one level of single points.
  // keys[l][p] is the label key of point p at candidate level l.
  std::vector<std::vector<std::int64_t>> keys;
  for (int k = 1; k <= q; ++k) {
    std::vector<std::int64_t> kk(npts);
    for (std::size_t p = 0; p < npts; ++p) kk[p] = box_key(p, k);
    keys.push_back(std::move(kk));
  }

  Hierarchy hier;
  hier.dim = 2;
  hier.h = 0.5;
  {
    std::map<std::int64_t, Index> counts;
    for (auto key : keys.back()) ++counts[key];
    hier.min_points_per_box = static_cast<Index>(npts);
    hier.max_points_per_box = 0;
    for (const auto& [key, count] : counts) {
      hier.min_points_per_box = std::min(hier.min_points_per_box, count);
      hier.max_points_per_box = std::max(hier.max_points_per_box, count);
    }
  }
  if (hier.max_points_per_box > 1) {
    // Order single points by their finest box first, then by input index.
    std::vector<std::size_t> order(npts);
    std::iota(order.begin(), order.end(), 0);
    const auto& finest = keys.back();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return finest[a] < finest[b]; });
    std::vector<std::int64_t> kk(npts);
    for (std::size_t r = 0; r < npts; ++r) kk[order[r]] = static_cast<std::int64_t>(r);
    keys.push_back(std::move(kk));
    hier.point_level_appended = true;
  }

  auto distinct = [](const std::vector<std::int64_t>& kk) {
    std::vector<std::int64_t> u(kk);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
  };

  // Keep a candidate level only if it has more labels than the next coarser kept one.
  std::vector<std::size_t> kept;
  std::vector<std::vector<std::int64_t>> labels;
  for (std::size_t l = keys.size(); l-- > 0;) {
    auto lab = distinct(keys[l]);
    if (!kept.empty() && lab.size() == labels.front().size()) {
      if (l < static_cast<std::size_t>(q)) hier.merged_levels.push_back(static_cast<int>(l) + 1);
      continue;
    }
    kept.insert(kept.begin(), l);
    labels.insert(labels.begin(), std::move(lab));
  }
  std::sort(hier.merged_levels.begin(), hier.merged_levels.end());

  auto index_of = [](const std::vector<std::int64_t>& lab, std::int64_t key) {
    return static_cast<Index>(std::lower_bound(lab.begin(), lab.end(), key) - lab.begin());
  };

  const std::size_t nlev = kept.size();
  std::vector<std::vector<double>> counts(nlev);
  for (std::size_t l = 0; l < nlev; ++l) {
    const auto& lab = labels[l];
    counts[l].assign(lab.size(), 0.0);
    std::vector<Point2> centre(lab.size(), Point2{0.0, 0.0});
    for (std::size_t p = 0; p < npts; ++p) {
      const Index i = index_of(lab, keys[kept[l]][p]);
      counts[l][static_cast<std::size_t>(i)] += 1.0;
      centre[static_cast<std::size_t>(i)][0] += coords[p][0];
      centre[static_cast<std::size_t>(i)][1] += coords[p][1];
    }
    for (std::size_t i = 0; i < lab.size(); ++i) {
      centre[i][0] /= counts[l][i];
      centre[i][1] /= counts[l][i];
    }
    hier.sizes.push_back(static_cast<Index>(lab.size()));
    hier.centers.push_back(std::move(centre));
  }
  hier.cell_volumes = counts;

  for (std::size_t l = 0; l + 1 < nlev; ++l) {
    const Index coarse = hier.sizes[l];
    const Index fine = hier.sizes[l + 1];
    std::vector<Index> parent(static_cast<std::size_t>(fine), -1);
    for (std::size_t p = 0; p < npts; ++p) {
      const Index child = index_of(labels[l + 1], keys[kept[l + 1]][p]);
      parent[static_cast<std::size_t>(child)] = index_of(labels[l], keys[kept[l]][p]);
    }
    RectMatrix pi = RectMatrix::Zero(coarse, fine);
    std::vector<std::vector<Index>> children(static_cast<std::size_t>(coarse));
    for (Index j = 0; j < fine; ++j) {
      const Index i = parent[static_cast<std::size_t>(j)];
      pi(i, j) = std::sqrt(counts[l + 1][static_cast<std::size_t>(j)] / counts[l][static_cast<std::size_t>(i)]);
      children[static_cast<std::size_t>(i)].push_back(j);
    }
    RectMatrix w = RectMatrix::Zero(fine - coarse, fine);
    Index row = 0;
    for (Index i = 0; i < coarse; ++i) {
      const auto& kids = children[static_cast<std::size_t>(i)];
      std::vector<double> weight;
      for (Index j : kids) weight.push_back(pi(i, j));
      const Matrix basis = detail::sibling_kernel_basis(weight);
      for (Index r = 0; r < basis.rows(); ++r, ++row)
        for (std::size_t c = 0; c < kids.size(); ++c) w(row, kids[c]) = basis(r, static_cast<Index>(c));
    }
    hier.aggregation.push_back(std::move(pi));
    hier.details.push_back(std::move(w));
    hier.parents.push_back(std::move(parent));
  }

  hier.fine_points.assign(static_cast<std::size_t>(hier.sizes.back()), -1);
  for (std::size_t p = 0; p < npts; ++p) {
    const Index i = index_of(labels.back(), keys[kept.back()][p]);
    hier.fine_points[static_cast<std::size_t>(i)] = static_cast<Index>(p);
  }
  return hier;
}

/// Largest violations of the structural identities of a hierarchy.
struct HierarchyResiduals {
  double aggregation_orthonormal = 0.0;  // |pi pi^T - I|
  double detail_orthonormal = 0.0;       // |W W^T - J|
  double detail_kernel = 0.0;            // |W pi^(k,k-1)|
  double parent_locality = 0.0;          // largest |W_ij| with parent(i) != parent(j)
  bool sizes_consistent = true;          // |J^(k)| = |I^(k)| - |I^(k-1)| = rows(W^(k))

  double worst() const {
    return std::max({aggregation_orthonormal, detail_orthonormal, detail_kernel, parent_locality});
  }
};

inline HierarchyResiduals residuals(const Hierarchy& hier) {
  HierarchyResiduals r;
  for (int k = 1; k < hier.levels(); ++k) {
    const auto& p = hier.pi(k);
    r.aggregation_orthonormal = std::max(
        r.aggregation_orthonormal, (p * p.transpose() - Matrix::Identity(p.rows(), p.rows())).cwiseAbs().maxCoeff());
  }
  for (int k = 2; k <= hier.levels(); ++k) {
    const auto& w = hier.w(k);
    const auto& p = hier.pi(k - 1);
    const auto& parent = hier.parents[static_cast<std::size_t>(k - 2)];
    if (w.rows() != hier.detail_size(k) || w.cols() != hier.size(k)) r.sizes_consistent = false;
    if (w.rows() == 0) continue;
    r.detail_orthonormal = std::max(
        r.detail_orthonormal, (w * w.transpose() - Matrix::Identity(w.rows(), w.rows())).cwiseAbs().maxCoeff());
    r.detail_kernel = std::max(r.detail_kernel, (w * p.transpose()).cwiseAbs().maxCoeff());
    for (Index i = 0; i < w.rows(); ++i) {
      // The parent of a detail row is the parent of its first nonzero entry.
      Index owner = -1;
      for (Index j = 0; j < w.cols(); ++j) {
        if (w(i, j) == 0.0) continue;
        if (owner < 0) owner = parent[static_cast<std::size_t>(j)];
        if (parent[static_cast<std::size_t>(j)] != owner)
          r.parent_locality = std::max(r.parent_locality, std::abs(w(i, j)));
      }
    }
  }
  return r;
}

}  // namespace gamblet
