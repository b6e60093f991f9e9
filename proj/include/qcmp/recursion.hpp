#ifndef QCMP_RECURSION_HPP
#define QCMP_RECURSION_HPP

///
/// \file recursion.hpp
///
/// Recursive bi-sequences. A sequence is recursive with generating
/// polynomial z-bar^e z^{d-e} - P when
///
///   gamma_{e+i, d-e+j} = Lambda(z-bar^i z^j P)   for all i + j <= n - d.
///

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qcmp/error.hpp"
#include "qcmp/moment_core.hpp"

namespace qcmp {

/// The relation z-bar^e z^{d-e} = tail, tail free of the leading monomial.
class GeneratingPolynomial {
 public:
  GeneratingPolynomial(MonomialIndex leading, BivariatePolynomial tail)
      : leading_(leading), tail_(std::move(tail)) {
    if (leading_.conj_power < 0 || leading_.power < 0)
      throw Error(ErrorCode::InvalidArgument, "negative exponent in leading monomial");
    if (tail_.coefficient(leading_) != Complex{})
      throw Error(ErrorCode::InvalidArgument, "tail of a generating polynomial contains its leading monomial");
    if (tail_.degree() > leading_.degree())
      throw Error(ErrorCode::InvalidArgument, "tail degree exceeds the leading degree");
  }

  const MonomialIndex& leading() const { return leading_; }
  const BivariatePolynomial& tail() const { return tail_; }
  int degree() const { return leading_.degree(); }

  /// z-bar^e z^{d-e} - P as a single polynomial.
  BivariatePolynomial relation() const { return BivariatePolynomial::monomial(leading_) - tail_; }

 private:
  MonomialIndex leading_;
  BivariatePolynomial tail_;
};

struct ExtensionWindow {
  int max_shift = 0;

  explicit ExtensionWindow(int shift) : max_shift(shift) {
    if (shift < 0) throw Error(ErrorCode::InvalidArgument, "negative extension window");
  }
};

struct GeneratingCheck {
  bool holds = false;
  double max_residual = 0.0;
  /// max_residual / max(1, max |gamma|)
  double relative_residual = 0.0;
};

/// Checks gamma_{e+i, d-e+j} = Lambda(z-bar^i z^j P) on every shift i + j <= max_shift.
inline GeneratingCheck is_generating(const MomentSequence& seq, const GeneratingPolynomial& g,
                                     ExtensionWindow window, double tol = 1e-7) {
  if (seq.degree() < g.degree() + window.max_shift)
    throw Error(ErrorCode::DegreeTooLow, "window reaches beyond the sequence degree");
  GeneratingCheck out;
  const auto [e, de] = g.leading();
  for (const auto& s : monomials_up_to(window.max_shift)) {
    const Complex lhs = seq(e + s.conj_power, de + s.power);
    const Complex rhs = riesz(seq, shift(g.tail(), s.conj_power, s.power));
    out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs));
  }
  out.relative_residual = out.max_residual / std::max(1.0, seq.max_abs());
  out.holds = out.relative_residual <= tol;
  return out;
}

/// z-bar^{d-e} z^e - conj(P).
inline GeneratingPolynomial conjugate_generating(const GeneratingPolynomial& g) {
  return {g.leading().conjugate(), g.tail().conjugate()};
}

/// A partially known bi-sequence. set() keeps gamma_ji = conj(gamma_ij).
class MomentTable {
 public:
  explicit MomentTable(int degree) : degree_(degree), entries_(monomial_count(degree)) {}

  explicit MomentTable(const MomentSequence& seq, int degree) : MomentTable(std::max(degree, seq.degree())) {
    for (const auto& m : monomials_up_to(seq.degree())) entries_[m.position()] = seq.at(m);
  }

  int degree() const { return degree_; }

  bool has(int i, int j) const {
    return i >= 0 && j >= 0 && i + j <= degree_ && entries_[MonomialIndex{i, j}.position()].has_value();
  }

  Complex get(int i, int j) const {
    if (!has(i, j))
      throw Error(ErrorCode::MissingInitialData,
                  "gamma_" + std::to_string(i) + "," + std::to_string(j) + " is not available");
    return *entries_[MonomialIndex{i, j}.position()];
  }

  void set(int i, int j, Complex v) {
    if (i + j > degree_) throw Error(ErrorCode::DegreeTooLow, "entry beyond table degree");
    if (i == j) v = v.real();
    entries_[MonomialIndex{i, j}.position()] = v;
    entries_[MonomialIndex{j, i}.position()] = std::conj(v);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : entries_)
      if (v) m = std::max(m, std::abs(*v));
    return m;
  }

  MomentSequence to_sequence() const {
    std::vector<Complex> e;
    e.reserve(entries_.size());
    for (const auto& m : monomials_up_to(degree_)) {
      if (!entries_[m.position()])
        throw Error(ErrorCode::MissingMoment, "gamma_" + std::to_string(m.conj_power) + "," +
                                                  std::to_string(m.power) + " was never filled");
      e.push_back(*entries_[m.position()]);
    }
    return MomentSequence::unchecked(degree_, std::move(e));
  }

 private:
  int degree_;
  std::vector<std::optional<Complex>> entries_;
};

/// Extends a partial sequence through the recurrence z^d = P (deg P < d):
///
///   gamma_{i, j+d} = Lambda(z-bar^i z^j P),   gamma_{j+d, i} = conj(gamma_{i, j+d}).
///
/// The initial data {gamma_ij : i, j < d} must be present. Entries already in
/// the table are kept but must agree with the recurrence to tol relative to
/// the largest known moment.
inline MomentSequence extend_by_recurrence(const MomentTable& partial, const GeneratingPolynomial& g,
                                           int target_degree, double tol = 1e-7) {
  const int d = g.degree();
  if (g.leading() != MonomialIndex{0, d} || d < 1)
    throw Error(ErrorCode::InvalidArgument, "recurrence extension needs a leading term z^d");
  if (g.tail().degree() >= d)
    throw Error(ErrorCode::InvalidArgument, "recurrence extension needs deg P < d");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i + j <= target_degree && !partial.has(i, j))
        throw Error(ErrorCode::MissingInitialData,
                    "initial datum gamma_" + std::to_string(i) + "," + std::to_string(j) + " is missing");

  MomentTable table(target_degree);
  for (const auto& m : monomials_up_to(std::min(target_degree, partial.degree())))
    if (partial.has(m.conj_power, m.power)) table.set(m.conj_power, m.power, partial.get(m.conj_power, m.power));
  const double scale = std::max(1.0, partial.max_abs());

  for (int t = d; t <= target_degree; ++t) {
    // gamma_{i, j+d} with i <= j + d; the others are mirrors of these.
    for (int i = 0; i <= t - d; ++i) {
      const int j = t - d - i;
      if (i > j + d) continue;
      Complex v{};
      for (const auto& [m, c] : g.tail().terms()) v += c * table.get(i + m.conj_power, j + m.power);
      if (partial.has(i, j + d) && i + j + d <= partial.degree()) {
        const Complex known = partial.get(i, j + d);
        if (std::abs(known - v) > tol * scale)
          throw ResidualError(ErrorCode::ConflictingEntry,
                              "recurrence disagrees with gamma_" + std::to_string(i) + "," + std::to_string(j + d),
                              std::abs(known - v));
        v = known;
      } else if (i == j + d && std::abs(v.imag()) > tol * scale) {
        throw ResidualError(ErrorCode::ConflictingEntry,
                            "recurrence gives a non-real diagonal moment gamma_" + std::to_string(i) + "," +
                                std::to_string(i),
                            std::abs(v.imag()));
      }
      table.set(i, j + d, v);
    }
  }
  return table.to_sequence();
}

struct LienCheck {
  bool holds = false;
  double max_residual = 0.0;
};

/// For a generating polynomial with leading z-bar^f z^{f+1}, checks
/// Lambda(z-bar^{l+1} z^k P) = Lambda(z-bar^l z^{k+1} conj(P)) for
/// l + k <= degree - 2f - 2.
inline LienCheck check_lien(const MomentSequence& seq, const GeneratingPolynomial& g, double tol = 1e-7) {
  const int f = g.leading().conj_power;
  if (g.leading().power != f + 1)
    throw Error(ErrorCode::InvalidArgument, "check_lien needs a leading monomial z-bar^f z^{f+1}");
  if (seq.degree() < 2 * f + 2) throw Error(ErrorCode::DegreeTooLow, "sequence too short for check_lien");
  const BivariatePolynomial conj_tail = g.tail().conjugate();
  LienCheck out;
  for (const auto& s : monomials_up_to(seq.degree() - 2 * f - 2)) {
    const int l = s.conj_power, k = s.power;
    const Complex lhs = riesz(seq, shift(g.tail(), l + 1, k));
    const Complex rhs = riesz(seq, shift(conj_tail, l, k + 1));
    out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs));
  }
  out.holds = out.max_residual <= tol * std::max(1.0, seq.max_abs());
  return out;
}

}  // namespace qcmp

#endif  // QCMP_RECURSION_HPP
