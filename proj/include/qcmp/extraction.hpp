#ifndef QCMP_EXTRACTION_HPP
#define QCMP_EXTRACTION_HPP

///
/// \file extraction.hpp
///
/// Atomic measures, their moments, and recovery of the atoms from a flat
/// moment matrix. Atoms are the eigenvalues of multiplication by z on the
/// column space of the flat matrix; weights come from a least-squares
/// Vandermonde solve over every available moment.
///

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcmp/error.hpp"
#include "qcmp/moment_core.hpp"
#include "qcmp/numlin.hpp"

namespace qcmp {

struct AtomicMeasure {
  std::vector<Complex> atoms;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
};

/// Throws BadAtomSpec unless weights are positive and atoms distinct.
inline void validate_measure(const AtomicMeasure& mu, double merge_tol = 1e-7) {
  if (mu.atoms.size() != mu.weights.size())
    throw Error(ErrorCode::BadAtomSpec, "atom and weight counts differ");
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(mu.weights[k] > 0.0) || !std::isfinite(mu.weights[k]))
      throw Error(ErrorCode::BadAtomSpec, "weight " + std::to_string(k) + " is not positive");
    if (!std::isfinite(mu.atoms[k].real()) || !std::isfinite(mu.atoms[k].imag()))
      throw Error(ErrorCode::BadAtomSpec, "atom " + std::to_string(k) + " is not finite");
    for (std::size_t l = 0; l < k; ++l)
      if (std::abs(mu.atoms[k] - mu.atoms[l]) <= merge_tol)
        throw Error(ErrorCode::BadAtomSpec, "atoms " + std::to_string(l) + " and " + std::to_string(k) +
                                                " coincide");
  }
}

/// gamma_ij = sum_k w_k conj(z_k)^i z_k^j for i + j <= degree.
inline MomentSequence generate_moments(const AtomicMeasure& mu, int degree) {
  std::vector<Complex> e(monomial_count(degree));
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const Complex z = mu.atoms[k];
    for (const auto& m : monomials_up_to(degree))
      e[m.position()] += mu.weights[k] * std::pow(std::conj(z), m.conj_power) * std::pow(z, m.power);
  }
  // powers of conj(z) and z commute only up to rounding; pin the symmetry
  for (const auto& m : monomials_up_to(degree))
    if (m.conj_power < m.power) e[m.conjugate().position()] = std::conj(e[m.position()]);
    else if (m.conj_power == m.power) e[m.position()] = e[m.position()].real();
  return MomentSequence::unchecked(degree, std::move(e));
}

/// max over i + j <= degree of |gamma_ij - sum_k w_k conj(z_k)^i z_k^j| / (1 + |gamma_ij|).
inline double verify_measure(const MomentSequence& seq, const AtomicMeasure& mu) {
  double worst = 0.0;
  for (const auto& m : monomials_up_to(seq.degree())) {
    Complex s{};
    for (std::size_t k = 0; k < mu.size(); ++k)
      s += mu.weights[k] * std::pow(std::conj(mu.atoms[k]), m.conj_power) * std::pow(mu.atoms[k], m.power);
    const Complex g = seq.at(m);
    worst = std::max(worst, std::abs(g - s) / (1.0 + std::abs(g)));
  }
  return worst;
}

struct BasisSelection {
  std::vector<MonomialIndex> indices;

  std::size_t size() const { return indices.size(); }
};

/// Greedy scan in lexicographic order: a column joins iff it raises the
/// numerical rank. Only columns of degree <= max_degree are scanned
/// (default: the whole matrix).
inline BasisSelection column_space_basis(const MomentMatrix& m, double tol_rank = 1e-8, int max_degree = -1) {
  if (max_degree < 0) max_degree = m.order;
  BasisSelection basis;
  const Eigen::VectorXd sv = singular_values(m.entries);
  if (sv.size() == 0 || sv(0) == 0.0) return basis;
  const double cut = tol_rank * sv(0);
  for (const auto& label : monomials_up_to(std::min(max_degree, m.order))) {
    Eigen::MatrixXcd cols(m.size(), static_cast<Eigen::Index>(basis.size() + 1));
    for (std::size_t k = 0; k < basis.size(); ++k) cols.col(static_cast<Eigen::Index>(k)) = m.column(basis.indices[k]);
    cols.col(cols.cols() - 1) = m.column(label);
    const Eigen::VectorXd s = singular_values(cols);
    if ((s.array() > cut).count() == cols.cols()) basis.indices.push_back(label);
  }
  return basis;
}

/// Checks that the principal submatrix on `indices` is invertible.
inline BasisSelection make_basis(const MomentMatrix& m, std::vector<MonomialIndex> indices, double tol_rank = 1e-8) {
  const Eigen::MatrixXcd sub = m.restricted(indices, indices);
  if (numeric_rank(sub, tol_rank, max_abs(m.entries)) != static_cast<int>(indices.size()))
    throw Error(ErrorCode::InvalidArgument, "restricted moment matrix is singular on the proposed basis");
  return {std::move(indices)};
}

/// Matrix of multiplication by z on the column space of a flat moment
/// matrix, in the given basis: column k holds the coordinates of the
/// column z * m_k. Its eigenvalues are the atoms.
inline Eigen::MatrixXcd multiplication_matrix(const MomentMatrix& flat, const BasisSelection& basis,
                                              double tol = 1e-7) {
  const auto r = static_cast<Eigen::Index>(basis.size());
  if (r == 0) throw Error(ErrorCode::InvalidArgument, "empty basis");
  std::vector<MonomialIndex> shifted;
  for (const auto& m : basis.indices) {
    if (m.degree() + 1 > flat.order)
      throw Error(ErrorCode::InvalidArgument, "basis monomial " + to_string(m) + " cannot be shifted inside the matrix");
    shifted.push_back({m.conj_power, m.power + 1});
  }
  const Eigen::MatrixXcd mbb = flat.restricted(basis.indices, basis.indices);
  const Eigen::MatrixXcd rhs = flat.restricted(basis.indices, shifted);
  const Eigen::MatrixXcd x = mbb.fullPivLu().solve(rhs);

  // The relation must hold on every row, not only the basis rows.
  Eigen::MatrixXcd all_b(flat.size(), r), all_z(flat.size(), r);
  for (Eigen::Index k = 0; k < r; ++k) {
    all_b.col(k) = flat.column(basis.indices[static_cast<std::size_t>(k)]);
    all_z.col(k) = flat.column(shifted[static_cast<std::size_t>(k)]);
  }
  const double residual = max_abs(all_z - all_b * x);
  if (residual > tol * std::max(1.0, max_abs(flat.entries)))
    throw ResidualError(ErrorCode::ExpressFailure, "shifted basis columns are not in the column space", residual);
  return x;
}

/// Eigenvalues of the multiplication matrix with near-duplicates merged.
inline std::vector<Complex> eigen_atoms(const Eigen::MatrixXcd& mult, double merge_tol = 1e-7) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(mult, false);
  std::vector<Complex> raw(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::vector<Complex> atoms;
  std::vector<int> counts;
  for (const Complex z : raw) {
    bool merged = false;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      if (std::abs(atoms[k] - z) <= merge_tol * std::max(1.0, std::abs(z))) {
        atoms[k] = (atoms[k] * static_cast<double>(counts[k]) + z) / static_cast<double>(counts[k] + 1);
        ++counts[k];
        merged = true;
        break;
      }
    }
    if (!merged) {
      atoms.push_back(z);
      counts.push_back(1);
    }
  }
  return atoms;
}

/// Rows: monomials of degree <= degree; columns: atoms.
inline Eigen::MatrixXcd vandermonde(const std::vector<Complex>& atoms, const std::vector<MonomialIndex>& rows) {
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t k = 0; k < atoms.size(); ++k)
      v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          std::pow(std::conj(atoms[k]), rows[r].conj_power) * std::pow(atoms[k], rows[r].power);
  return v;
}

/// Least-squares weights over every moment of `seq`. The square subsystem
/// on the basis monomials must be well conditioned; imaginary parts above
/// tol (relative to the total mass) and weights below -tol are errors.
inline std::vector<double> solve_weights(const std::vector<Complex>& atoms, const MomentSequence& seq,
                                         const BasisSelection& basis, double tol = 1e-6) {
  if (atoms.empty()) return {};
  if (basis.size() == atoms.size()) {
    const Eigen::VectorXd sv = singular_values(vandermonde(atoms, basis.indices));
    if (sv(sv.size() - 1) <= 1e-12 * sv(0))
      throw Error(ErrorCode::IllConditionedVandermonde, "atoms do not interpolate on the basis monomials");
  }
  const auto rows = monomials_up_to(seq.degree());
  const Eigen::MatrixXcd v = vandermonde(atoms, rows);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-12 * sv(0))
    throw Error(ErrorCode::IllConditionedVandermonde, "Vandermonde system is numerically singular");
  Eigen::VectorXcd g(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) g(static_cast<Eigen::Index>(r)) = seq.at(rows[r]);
  const Eigen::VectorXcd w = svd.solve(g);

  const double mass = std::max(1.0, seq(0, 0).real());
  std::vector<double> out;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (std::abs(w(k).imag()) > tol * mass)
      throw ResidualError(ErrorCode::NegativeWeight, "weight has a non-negligible imaginary part",
                          std::abs(w(k).imag()));
    if (w(k).real() < -tol * mass)
      throw ResidualError(ErrorCode::NegativeWeight, "negative weight", w(k).real());
    out.push_back(w(k).real());
  }
  return out;
}

struct ExtractionConfig {
  double tol_rank = 1e-8;
  double tol_express = 1e-7;
  double atom_merge_tol = 1e-7;
  double tol_weight = 1e-6;
};

/// Atoms and weights from a flat moment matrix; weights are fitted to `seq`.
/// Atoms whose weight is within tol_weight of zero are dropped.
inline AtomicMeasure extract_measure(const MomentMatrix& flat, const BasisSelection& basis, const MomentSequence& seq,
                                     const ExtractionConfig& cfg = {}) {
  const Eigen::MatrixXcd mult = multiplication_matrix(flat, basis, cfg.tol_express);
  const std::vector<Complex> atoms = eigen_atoms(mult, cfg.atom_merge_tol);
  const std::vector<double> weights = solve_weights(atoms, seq, basis, cfg.tol_weight);
  AtomicMeasure mu;
  const double mass = std::max(1.0, seq(0, 0).real());
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (weights[k] <= cfg.tol_weight * mass) continue;
    mu.atoms.push_back(atoms[k]);
    mu.weights.push_back(weights[k]);
  }
  return mu;
}

}  // namespace qcmp

#endif  // QCMP_EXTRACTION_HPP
