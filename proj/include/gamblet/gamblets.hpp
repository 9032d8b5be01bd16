#pragma once

// Operator-adapted wavelets. transform() runs the fine-to-coarse recursion
// producing A^(k), B^(k), N^(k) and R^(k-1,k); solve() is the matching multilevel
// solver, and analyze()/reconstruct() move between fine coefficients and the
// per-level detail coefficients c^(k).

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gamblet/error.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/numerics.hpp"
#include "gamblet/operators.hpp"

namespace gamblet {

struct GambletSystem {
  std::shared_ptr<const Hierarchy> hierarchy;
  /// A^(k) for k = 1..q (stored at k-1).
  std::vector<SymMatrix> a;
  /// B^(k) for k = 1..q (stored at k-1); B^(1) = A^(1).
  std::vector<SymMatrix> b;
  /// R^(k-1,k) for k = 2..q (stored at k-2).
  std::vector<RectMatrix> r;
  /// N^(k) for k = 2..q (stored at k-2).
  std::vector<RectMatrix> n;
  /// Cholesky factors of B^(k) (stored at k-1).
  std::vector<CholFactor> b_chol;
  double trunc = 0.0;

  int levels() const { return static_cast<int>(a.size()); }
  Index fine_size() const { return a.back().size(); }

  const SymMatrix& A(int k) const {
    check(k, 1);
    return a[static_cast<std::size_t>(k - 1)];
  }
  const SymMatrix& B(int k) const {
    check(k, 1);
    return b[static_cast<std::size_t>(k - 1)];
  }
  /// R^(k-1,k).
  const RectMatrix& R(int k) const {
    check(k, 2);
    return r[static_cast<std::size_t>(k - 2)];
  }
  const RectMatrix& N(int k) const {
    check(k, 2);
    return n[static_cast<std::size_t>(k - 2)];
  }

 private:
  void check(int k, int lo) const {
    detail::require(k >= lo && k <= levels(), ErrorCode::BadLevel,
                    "level " + std::to_string(k) + " outside " + std::to_string(lo) + ".." + std::to_string(levels()));
  }
};

/// Detail coefficients c^(k), k = 1..q, stored at k-1; c^(1) is indexed by I^(1).
struct MultiresCoefficients {
  std::vector<Vector> c;

  int levels() const { return static_cast<int>(c.size()); }
  Vector& at(int k) { return c.at(static_cast<std::size_t>(k - 1)); }
  const Vector& at(int k) const { return c.at(static_cast<std::size_t>(k - 1)); }
};

/// Largest relative defects of the defining identities of a system.
struct SystemResiduals {
  double b_definition = 0.0;   // |B - W A W^T| / |A|
  double a_recursion = 0.0;    // |A^(k-1) - R A^(k) R^T| / |A^(k)|
  double detail_inverse = 0.0; // |W N - J|

  double worst() const { return std::max({b_definition, a_recursion, detail_inverse}); }
};

namespace detail {

using Sparse = Eigen::SparseMatrix<double>;

inline void drop_small(Matrix& m, double trunc) {
  if (trunc <= 0.0) return;
  const double cut = trunc * m.cwiseAbs().maxCoeff();
  m = (m.array().abs() < cut).select(0.0, m);
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace detail

inline SystemResiduals residuals(const GambletSystem& sys) {
  SystemResiduals res;
  const Hierarchy& hier = *sys.hierarchy;
  for (int k = 2; k <= sys.levels(); ++k) {
    const Matrix& ak = sys.A(k).dense();
    const RectMatrix& w = hier.w(k);
    const double scale = std::max(detail::max_abs(ak), std::numeric_limits<double>::min());
    res.b_definition =
        std::max(res.b_definition, detail::max_abs(sys.B(k).dense() - w * ak * w.transpose()) / scale);
    res.a_recursion = std::max(
        res.a_recursion, detail::max_abs(sys.A(k - 1).dense() - sys.R(k) * ak * sys.R(k).transpose()) / scale);
    res.detail_inverse = std::max(
        res.detail_inverse, detail::max_abs(w * sys.N(k) - Matrix::Identity(w.rows(), w.rows())));
  }
  return res;
}

/// Throws InvariantViolation when an identity fails beyond tol (relative).
/// With truncation the A recursion is only expected to hold to the drop tolerance.
inline void check_invariants(const GambletSystem& sys, double tol = 1e-10) {
  const SystemResiduals res = residuals(sys);
  const double a_tol = tol + 10.0 * sys.trunc;
  detail::require(res.b_definition <= tol, ErrorCode::InvariantViolation,
                  "B != W A W^T (defect " + std::to_string(res.b_definition) + ")");
  detail::require(res.a_recursion <= a_tol, ErrorCode::InvariantViolation,
                  "A^(k-1) != R A^(k) R^T (defect " + std::to_string(res.a_recursion) + ")");
  detail::require(res.detail_inverse <= std::max(tol, 1e-8), ErrorCode::InvariantViolation,
                  "W N != J (defect " + std::to_string(res.detail_inverse) + ")");
}

/// Fine-to-coarse gamblet transform of op.stiffness over hier. With trunc > 0, entries
/// of A^(k-1) and R^(k-1,k) below trunc * (largest entry of that matrix) are dropped.
inline GambletSystem transform(const DiscreteOperator& op, std::shared_ptr<const Hierarchy> hier,
                               double trunc = 0.0) {
  detail::require(hier != nullptr, ErrorCode::InvalidArgument, "null hierarchy");
  detail::require(trunc >= 0.0, ErrorCode::InvalidArgument, "truncation tolerance must be >= 0");
  detail::require(op.size() == hier->fine_size(), ErrorCode::ShapeMismatch,
                  "operator size " + std::to_string(op.size()) + " vs fine label count " +
                      std::to_string(hier->fine_size()));
  const int q = hier->levels();
  GambletSystem sys;
  sys.hierarchy = hier;
  sys.trunc = trunc;
  sys.a.resize(static_cast<std::size_t>(q));
  sys.b.resize(static_cast<std::size_t>(q));
  sys.b_chol.resize(static_cast<std::size_t>(q));
  sys.r.resize(static_cast<std::size_t>(std::max(q - 1, 0)));
  sys.n.resize(static_cast<std::size_t>(std::max(q - 1, 0)));

  // Make sure the input itself is SPD before doing any work.
  (void)cholesky(op.stiffness);
  sys.a[static_cast<std::size_t>(q - 1)] = op.stiffness;

  for (int k = q; k >= 2; --k) {
    const Matrix& ak = sys.a[static_cast<std::size_t>(k - 1)].dense();
    const detail::Sparse w = hier->w(k).sparseView();
    const detail::Sparse p = hier->pi(k - 1).sparseView();

    const Matrix wa = w * ak;
    const Matrix wawt = (w * wa.transpose()).transpose();
    SymMatrix bk = SymMatrix::from(wawt, 1e-6);
    CholFactor bf = cholesky(bk);
    // N = A W^T B^{-1} = (B^{-1} W A)^T.
    Matrix nk = bf.solve(wa).transpose();
    // R = pi (I - N W) = pi - (pi N) W.
    const Matrix pn = p * nk;
    Matrix rk = Matrix(p) - Matrix(pn * w);
    detail::drop_small(rk, trunc);
    Matrix coarse = rk * ak * rk.transpose();
    detail::drop_small(coarse, trunc);
    SymMatrix acoarse = SymMatrix::from(coarse, 1e-6);

    sys.b[static_cast<std::size_t>(k - 1)] = std::move(bk);
    sys.b_chol[static_cast<std::size_t>(k - 1)] = std::move(bf);
    sys.n[static_cast<std::size_t>(k - 2)] = std::move(nk);
    sys.r[static_cast<std::size_t>(k - 2)] = std::move(rk);
    sys.a[static_cast<std::size_t>(k - 2)] = std::move(acoarse);
  }
  sys.b[0] = sys.a[0];
  sys.b_chol[0] = cholesky(sys.b[0]);
  for (int k = 2; k < q; ++k) (void)cholesky(sys.A(k));
  check_invariants(sys);
  return sys;
}

inline GambletSystem transform(const DiscreteOperator& op, const Hierarchy& hier, double trunc = 0.0) {
  return transform(op, std::make_shared<const Hierarchy>(hier), trunc);
}

inline constexpr Index kOracleLimit = 4096;

/// Reference system from explicit inverse Gramians: Theta^(k) = pi^(k,q) A^{-1} pi^(q,k),
/// A^(k) = Theta^(k)^{-1}. Test oracle only.
inline GambletSystem oracle_transform(const DiscreteOperator& op, std::shared_ptr<const Hierarchy> hier) {
  detail::require(op.size() <= kOracleLimit, ErrorCode::TooLarge,
                  "oracle transform limited to N <= " + std::to_string(kOracleLimit));
  detail::require(op.size() == hier->fine_size(), ErrorCode::ShapeMismatch, "operator vs hierarchy size");
  const int q = hier->levels();
  const Matrix ainv = spd_inverse(op.stiffness).dense();
  GambletSystem sys;
  sys.hierarchy = hier;
  std::vector<Matrix> theta(static_cast<std::size_t>(q));
  for (int k = 1; k <= q; ++k) {
    const RectMatrix pkq = hier->pi_between(k, q);
    theta[static_cast<std::size_t>(k - 1)] = pkq * ainv * pkq.transpose();
    sys.a.push_back(k == q ? op.stiffness : spd_inverse(SymMatrix::from(theta[static_cast<std::size_t>(k - 1)], 1e-6)));
  }
  sys.b.push_back(sys.a[0]);
  sys.b_chol.push_back(cholesky(sys.a[0]));
  for (int k = 2; k <= q; ++k) {
    const Matrix& ak = sys.A(k).dense();
    const RectMatrix& w = hier->w(k);
    SymMatrix bk = SymMatrix::from(w * ak * w.transpose(), 1e-6);
    CholFactor bf = cholesky(bk);
    sys.n.push_back(bf.solve(Matrix(w * ak)).transpose());
    sys.r.push_back(sys.A(k - 1).dense() * hier->pi(k - 1) * theta[static_cast<std::size_t>(k - 1)]);
    sys.b.push_back(std::move(bk));
    sys.b_chol.push_back(std::move(bf));
  }
  return sys;
}

inline GambletSystem oracle_transform(const DiscreteOperator& op, const Hierarchy& hier) {
  return oracle_transform(op, std::make_shared<const Hierarchy>(hier));
}

/// c^(k) = N^(k)^T m^(k) with m^(q) = y and m^(k) = pi^(k,k+1) m^(k+1); c^(1) = m^(1).
inline MultiresCoefficients analyze(const GambletSystem& sys, const Vector& y) {
  detail::require_same(y.size(), sys.fine_size(), "analyze: signal length");
  const int q = sys.levels();
  MultiresCoefficients out;
  out.c.resize(static_cast<std::size_t>(q));
  Vector m = y;
  for (int k = q; k >= 2; --k) {
    out.at(k) = sys.N(k).transpose() * m;
    m = sys.hierarchy->pi(k - 1) * m;
  }
  out.at(1) = m;
  return out;
}

/// Sum over k <= upto of chi^(k)^T c^(k) in fine coefficients; upto = 0 gives zero.
inline Vector reconstruct(const GambletSystem& sys, const MultiresCoefficients& c, int upto) {
  const int q = sys.levels();
  detail::require(upto >= 0 && upto <= q, ErrorCode::BadLevel,
                  "reconstruction level " + std::to_string(upto) + " outside 0.." + std::to_string(q));
  detail::require(c.levels() == q, ErrorCode::DimensionMismatch, "coefficient level count");
  for (int k = 1; k <= q; ++k)
    detail::require_same(c.at(k).size(), sys.hierarchy->detail_size(k), "reconstruct: c^(k) length");
  Vector x = upto >= 1 ? c.at(1) : Vector::Zero(sys.hierarchy->size(1));
  for (int k = 2; k <= q; ++k) {
    Vector next = sys.R(k).transpose() * x;
    if (k <= upto) next += sys.hierarchy->w(k).transpose() * c.at(k);
    x = std::move(next);
  }
  return x;
}

inline Vector reconstruct(const GambletSystem& sys, const MultiresCoefficients& c) {
  return reconstruct(sys, c, sys.levels());
}

/// Multilevel solve of A x = f.
inline Vector solve(const GambletSystem& sys, const Vector& f) {
  detail::require_same(f.size(), sys.fine_size(), "solve: load length");
  const int q = sys.levels();
  MultiresCoefficients w;
  w.c.resize(static_cast<std::size_t>(q));
  Vector fk = f;
  for (int k = q; k >= 2; --k) {
    w.at(k) = sys.b_chol[static_cast<std::size_t>(k - 1)].solve(Vector(sys.hierarchy->w(k) * fk));
    fk = sys.R(k) * fk;
  }
  w.at(1) = sys.b_chol[0].solve(fk);
  return reconstruct(sys, w, q);
}

inline double energy_norm(const DiscreteOperator& op, const Vector& x) {
  detail::require_same(x.size(), op.size(), "energy_norm: vector length");
  return std::sqrt(std::max(0.0, op.stiffness.quadratic(x)));
}

/// R^(k,q) = R^(k,k+1) ... R^(q-1,q): rows are psi^(k) in fine coefficients.
inline RectMatrix lift_psi(const GambletSystem& sys, int k) {
  const int q = sys.levels();
  detail::require(k >= 1 && k <= q, ErrorCode::BadLevel, "lift_psi level " + std::to_string(k));
  RectMatrix m = RectMatrix::Identity(sys.hierarchy->size(k), sys.hierarchy->size(k));
  for (int j = k + 1; j <= q; ++j) m = m * sys.R(j);
  return m;
}

/// Rows are chi^(k) in fine coefficients (chi^(1) = psi^(1)).
inline RectMatrix lift_chi(const GambletSystem& sys, int k) {
  const RectMatrix psi = lift_psi(sys, k);
  return k == 1 ? psi : RectMatrix(sys.hierarchy->w(k) * psi);
}

/// Z with blocks Z_(s,k) = N^(s)^T pi^(s,k) N^(k) for s <= k (N^(1) = I).
inline SymMatrix z_matrix(const GambletSystem& sys) {
  const Hierarchy& hier = *sys.hierarchy;
  const int q = sys.levels();
  std::vector<Index> offset(static_cast<std::size_t>(q + 1), 0);
  for (int k = 1; k <= q; ++k)
    offset[static_cast<std::size_t>(k)] = offset[static_cast<std::size_t>(k - 1)] + hier.detail_size(k);
  const Index total = offset.back();
  auto nmat = [&](int k) -> RectMatrix {
    return k == 1 ? RectMatrix::Identity(hier.size(1), hier.size(1)) : sys.N(k);
  };
  Matrix z = Matrix::Zero(total, total);
  for (int s = 1; s <= q; ++s) {
    const RectMatrix ns = nmat(s);
    for (int k = s; k <= q; ++k) {
      const Matrix blk = ns.transpose() * hier.pi_between(s, k) * nmat(k);
      const Index rs = offset[static_cast<std::size_t>(s - 1)];
      const Index rk = offset[static_cast<std::size_t>(k - 1)];
      z.block(rs, rk, blk.rows(), blk.cols()) = blk;
      if (k != s) z.block(rk, rs, blk.cols(), blk.rows()) = blk.transpose();
    }
  }
  return SymMatrix::from(z, 1e-8);
}

/// Cond(B^(k)) for k = 1..q (stored at k-1).
inline std::vector<double> b_conditions(const GambletSystem& sys) {
  std::vector<double> out;
  for (int k = 1; k <= sys.levels(); ++k) out.push_back(extreme_eigs(sys.B(k)).condition());
  return out;
}

}  // namespace gamblet
