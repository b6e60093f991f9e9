#ifndef QCMP_NUMLIN_HPP
#define QCMP_NUMLIN_HPP

///
/// \file numlin.hpp
///
/// Tolerant linear algebra on small dense Hermitian matrices: positivity,
/// numerical rank, range inclusion B = M W (minimal-norm W), the block
/// W* M W and the block anti-identity M_phi.
///

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "qcmp/error.hpp"
#include "qcmp/moment_core.hpp"

namespace qcmp {

inline double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& h) {
  return 0.5 * (h + h.adjoint());
}

struct PsdReport {
  bool is_psd = false;
  double min_eigenvalue = 0.0;
  /// Largest absolute eigenvalue.
  double scale = 0.0;
};

inline PsdReport psd_check(const Eigen::MatrixXcd& h, double tol_psd = 1e-8) {
  if (h.rows() != h.cols()) throw Error(ErrorCode::InvalidArgument, "psd_check needs a square matrix");
  if (h.size() == 0) return {true, 0.0, 0.0};
  if (max_abs(h - h.adjoint()) > 1e-12 * std::max(1.0, max_abs(h)))
    throw Error(ErrorCode::NotHermitian, "matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  PsdReport rep;
  rep.min_eigenvalue = ev.minCoeff();
  rep.scale = ev.cwiseAbs().maxCoeff();
  rep.is_psd = rep.min_eigenvalue >= -tol_psd * std::max(rep.scale, 1.0);
  return rep;
}

inline Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return {};
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
}

/// Number of singular values above tol_rank times the largest one. A
/// reference_scale (e.g. the norm of the matrix a block was cut from) keeps
/// round-off in a near-zero block from counting as rank.
inline int numeric_rank(const Eigen::MatrixXcd& m, double tol_rank = 1e-8, double reference_scale = 0.0) {
  const Eigen::VectorXd sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = tol_rank * std::max(sv(0), reference_scale);
  return static_cast<int>((sv.array() > cut).count());
}

/// Moore-Penrose inverse of a Hermitian PSD matrix; eigenvalues at or below
/// tol_rank * (largest) are treated as zero.
inline Eigen::MatrixXcd hermitian_pinv(const Eigen::MatrixXcd& m, double tol_rank = 1e-8) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(m));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev(k) > tol_rank * top) inv(k) = 1.0 / ev(k);
  const Eigen::MatrixXcd& u = es.eigenvectors();
  return u * inv.asDiagonal() * u.adjoint();
}

struct RangeSolution {
  Eigen::MatrixXcd W;
  /// max |M W - B|
  double residual = 0.0;
};

/// Minimal-norm W with M W = B. Throws RangeNotIncluded when the residual
/// exceeds tol_range * (1 + max|B|).
inline RangeSolution solve_range_inclusion(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& b,
                                           double tol_range = 1e-8, double tol_rank = 1e-8) {
  if (m.rows() != b.rows()) throw Error(ErrorCode::InvalidArgument, "row mismatch in range inclusion");
  RangeSolution sol;
  sol.W = hermitian_pinv(m, tol_rank) * b;
  sol.residual = max_abs(m * sol.W - b);
  if (sol.residual > tol_range * (1.0 + max_abs(b)))
    throw ResidualError(ErrorCode::RangeNotIncluded, "Ran B is not contained in Ran M", sol.residual);
  return sol;
}

/// max |A(n-1-j, n-1-i) - A(i, j)|.
inline double persymmetry_defect(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  double d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d = std::max(d, std::abs(a(n - 1 - j, n - 1 - i) - a(i, j)));
  return d;
}

/// W* M W, made exactly Hermitian and persymmetric after the defect has
/// been checked against tol_psym * max(1, scale).
inline Eigen::MatrixXcd persymmetric_product(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& w,
                                             double tol_psym = 1e-8, double* defect_out = nullptr) {
  Eigen::MatrixXcd full = hermitian_part(w.adjoint() * m * w);
  const double defect = persymmetry_defect(full);
  if (defect_out) *defect_out = defect;
  if (defect > tol_psym * std::max(1.0, max_abs(full)))
    throw ResidualError(ErrorCode::PersymmetryViolation, "W* M W is not persymmetric", defect);
  const Eigen::Index n = full.rows();
  Eigen::MatrixXcd flipped(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) flipped(i, j) = full(n - 1 - j, n - 1 - i);
  return 0.5 * (full + flipped);
}

/// W* M(2) W with its six free parameters
///
///   ( a     b     c  d )
///   ( b^*   e     f  c )
///   ( c^*   f^*   e  b )
///   ( d^*   c^*   b^* a ).
struct MiddleBlock {
  Eigen::Matrix4cd full = Eigen::Matrix4cd::Zero();
  double a = 0.0;
  Complex b;
  Complex c;
  Complex d;
  double e = 0.0;
  Complex f;
  double persymmetry_defect = 0.0;

  double scale() const { return full.cwiseAbs().maxCoeff(); }
};

inline MiddleBlock middle_block(const MomentMatrix& m2, const Eigen::MatrixXcd& w, double tol_psym = 1e-8) {
  if (m2.order != 2 || w.rows() != 6 || w.cols() != 4)
    throw Error(ErrorCode::InvalidArgument, "middle_block expects M(2) and a 6x4 W");
  MiddleBlock mb;
  mb.full = persymmetric_product(m2.entries, w, tol_psym, &mb.persymmetry_defect);
  mb.a = mb.full(0, 0).real();
  mb.b = mb.full(0, 1);
  mb.c = mb.full(0, 2);
  mb.d = mb.full(0, 3);
  mb.e = mb.full(1, 1).real();
  mb.f = mb.full(1, 2);
  return mb;
}

/// J_0 (+) J_1 (+) ... (+) J_n with J_p the (p+1)x(p+1) anti-identity.
struct PhiMatrix {
  int n = 0;
  Eigen::MatrixXi entries;

  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> as() const {
    return entries.cast<Scalar>();
  }
};

inline PhiMatrix build_phi(int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative order");
  const auto size = static_cast<Eigen::Index>(monomial_count(n));
  PhiMatrix phi{n, Eigen::MatrixXi::Zero(size, size)};
  for (int p = 0; p <= n; ++p) {
    const auto off = static_cast<Eigen::Index>(monomial_count(p - 1));
    for (int i = 0; i <= p; ++i) phi.entries(off + i, off + (p - i)) = 1;
  }
  return phi;
}

/// rank [[A, B], [B*, C]] = rank A + rank (C - W* A W).
inline int smuljan_extend_rank(int rank_a, const Eigen::MatrixXcd& c_minus, double tol_rank = 1e-8,
                               double reference_scale = 0.0) {
  return rank_a + numeric_rank(c_minus, tol_rank, reference_scale);
}

}  // namespace qcmp

#endif  // QCMP_NUMLIN_HPP
