#ifndef QCMP_MOMENT_CORE_HPP
#define QCMP_MOMENT_CORE_HPP

///
/// \file moment_core.hpp
///
/// Truncated complex bi-sequences, bivariate polynomials in (z-bar, z), the
/// Riesz functional and moment matrices.
///
/// Monomials are ordered degree-lexicographically as
///
///   1, Z, Z-bar, Z^2, Z Z-bar, Z-bar^2, ..., Z^n, Z^{n-1} Z-bar, ..., Z-bar^n
///
/// so inside degree d the position of z-bar^i z^j is i. The moment matrix
/// entry at row z-bar^k z^l and column z-bar^i z^j is gamma_{i+l, j+k}.
///

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcmp/error.hpp"

namespace qcmp {

using Complex = std::complex<double>;

/// Number of monomials z-bar^i z^j with i + j <= n.
constexpr std::size_t monomial_count(int n) {
  return n < 0 ? 0 : static_cast<std::size_t>((n + 1) * (n + 2) / 2);
}

/// The monomial z-bar^i z^j, i = conj_power, j = power.
struct MonomialIndex {
  int conj_power = 0;
  int power = 0;

  constexpr int degree() const { return conj_power + power; }

  /// Position in degree-lexicographic order.
  constexpr std::size_t position() const {
    return monomial_count(degree() - 1) + static_cast<std::size_t>(conj_power);
  }

  static constexpr MonomialIndex at_position(std::size_t pos) {
    int d = 0;
    while (monomial_count(d) <= pos) ++d;
    const int i = static_cast<int>(pos - monomial_count(d - 1));
    return {i, d - i};
  }

  constexpr MonomialIndex conjugate() const { return {power, conj_power}; }

  friend constexpr bool operator==(const MonomialIndex&, const MonomialIndex&) = default;
  friend constexpr std::strong_ordering operator<=>(const MonomialIndex& a,
                                                    const MonomialIndex& b) {
    if (auto c = a.degree() <=> b.degree(); c != 0) return c;
    return a.conj_power <=> b.conj_power;
  }
};

inline std::string to_string(const MonomialIndex& m) {
  if (m.degree() == 0) return "1";
  std::string s;
  auto factor = [&s](const char* name, int p) {
    if (p == 0) return;
    if (!s.empty()) s += ' ';
    s += name;
    if (p > 1) s += '^' + std::to_string(p);
  };
  factor("zbar", m.conj_power);
  factor("z", m.power);
  return s;
}

/// All monomials of total degree <= n in lexicographic order.
inline std::vector<MonomialIndex> monomials_up_to(int n) {
  std::vector<MonomialIndex> out;
  out.reserve(monomial_count(n));
  for (int d = 0; d <= n; ++d)
    for (int i = 0; i <= d; ++i) out.push_back({i, d - i});
  return out;
}

/// The monomials of total degree exactly d: z^d, z-bar z^{d-1}, ..., z-bar^d.
inline std::vector<MonomialIndex> monomials_of_degree(int d) {
  std::vector<MonomialIndex> out;
  for (int i = 0; i <= d; ++i) out.push_back({i, d - i});
  return out;
}

// ---------------------------------------------------------------------------
// MomentSequence
// ---------------------------------------------------------------------------

/// A total map (i, j) -> gamma_ij over i + j <= degree.
///
/// Instances produced by validate_sequence() satisfy gamma_ji = conj(gamma_ij)
/// exactly and gamma_00 > 0. unchecked() skips all of that and exists for
/// internal assembly and negative tests.
class MomentSequence {
 public:
  MomentSequence() = default;

  static MomentSequence unchecked(int degree, std::vector<Complex> entries) {
    if (degree < 0 || entries.size() != monomial_count(degree))
      throw Error(ErrorCode::InvalidArgument, "moment vector size does not match degree");
    MomentSequence s;
    s.degree_ = degree;
    s.entries_ = std::move(entries);
    return s;
  }

  /// Builds gamma_ij = f(i, j) for all i + j <= degree.
  template <typename F>
  static MomentSequence from_function(int degree, F&& f) {
    std::vector<Complex> e;
    e.reserve(monomial_count(degree));
    for (const auto& m : monomials_up_to(degree)) e.push_back(f(m.conj_power, m.power));
    return unchecked(degree, std::move(e));
  }

  int degree() const { return degree_; }

  Complex operator()(int i, int j) const { return at({i, j}); }

  Complex at(const MonomialIndex& m) const {
    if (m.conj_power < 0 || m.power < 0 || m.degree() > degree_)
      throw Error(ErrorCode::DegreeTooLow, "moment gamma_" + std::to_string(m.conj_power) +
                                               std::to_string(m.power) + " outside sequence of degree " +
                                               std::to_string(degree_));
    return entries_[m.position()];
  }

  const std::vector<Complex>& entries() const { return entries_; }

  MomentSequence truncated(int degree) const {
    if (degree > degree_) throw Error(ErrorCode::DegreeTooLow, "cannot truncate upwards");
    return unchecked(degree, {entries_.begin(), entries_.begin() + monomial_count(degree)});
  }

  /// Largest |gamma_ij|.
  double max_abs() const {
    double m = 0.0;
    for (const auto& v : entries_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int degree_ = -1;
  std::vector<Complex> entries_;
};

/// Validates raw moments and returns an exactly Hermitian-symmetric sequence.
///
/// Pairs violating gamma_ji = conj(gamma_ij) by at most tol_sym (relative to
/// max(1, |gamma_ij|)) are repaired by averaging.
inline MomentSequence validate_sequence(const std::map<MonomialIndex, Complex>& raw, int degree,
                                        double tol_sym = 1e-9) {
  if (degree < 0) throw Error(ErrorCode::InvalidArgument, "negative degree");
  for (const auto& m : monomials_up_to(degree))
    if (!raw.contains(m))
      throw Error(ErrorCode::MissingMoment, "gamma_" + std::to_string(m.conj_power) + "," +
                                                std::to_string(m.power) + " is missing");

  const Complex g00 = raw.at({0, 0});
  if (!(g00.real() > 0.0) || std::abs(g00.imag()) > tol_sym * std::max(1.0, std::abs(g00)))
    throw Error(ErrorCode::NonpositiveMass, "gamma_00 must be real and strictly positive");

  std::vector<Complex> e(monomial_count(degree));
  for (const auto& m : monomials_up_to(degree)) {
    const Complex v = raw.at(m);
    const Complex w = std::conj(raw.at(m.conjugate()));
    const double scale = std::max({1.0, std::abs(v), std::abs(w)});
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorCode::InvalidArgument, "non-finite moment");
    if (std::abs(v - w) > tol_sym * scale)
      throw Error(ErrorCode::SymmetryViolation, "gamma_" + std::to_string(m.conj_power) + "," +
                                                    std::to_string(m.power) +
                                                    " is not the conjugate of its transpose");
    e[m.position()] = 0.5 * (v + w);
  }
  return MomentSequence::unchecked(degree, std::move(e));
}

// ---------------------------------------------------------------------------
// BivariatePolynomial
// ---------------------------------------------------------------------------

/// p(z-bar, z) = sum a_ij z-bar^i z^j with finitely many nonzero coefficients.
class BivariatePolynomial {
 public:
  using Terms = std::map<MonomialIndex, Complex>;

  BivariatePolynomial() = default;
  explicit BivariatePolynomial(Terms terms) : terms_(std::move(terms)) { prune(); }

  static BivariatePolynomial constant(Complex c) { return monomial({0, 0}, c); }

  static BivariatePolynomial monomial(MonomialIndex m, Complex c = 1.0) {
    return BivariatePolynomial(Terms{{m, c}});
  }

  const Terms& terms() const { return terms_; }

  Complex coefficient(const MonomialIndex& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Complex{} : it->second;
  }

  void add_term(const MonomialIndex& m, Complex c) {
    terms_[m] += c;
    if (terms_[m] == Complex{}) terms_.erase(m);
  }

  bool is_zero() const { return terms_.empty(); }

  /// Largest total degree carrying a nonzero coefficient (0 for the zero polynomial).
  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  /// conj(p): coefficient a_ij moves to (j, i) conjugated.
  BivariatePolynomial conjugate() const {
    Terms t;
    for (const auto& [m, c] : terms_) t[m.conjugate()] = std::conj(c);
    return BivariatePolynomial(std::move(t));
  }

  Complex evaluate(Complex z) const {
    Complex s{};
    for (const auto& [m, c] : terms_)
      s += c * std::pow(std::conj(z), m.conj_power) * std::pow(z, m.power);
    return s;
  }

  BivariatePolynomial& operator+=(const BivariatePolynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  BivariatePolynomial& operator-=(const BivariatePolynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  BivariatePolynomial& operator*=(Complex s) {
    for (auto& [m, c] : terms_) c *= s;
    prune();
    return *this;
  }

  friend BivariatePolynomial operator+(BivariatePolynomial a, const BivariatePolynomial& b) { return a += b; }
  friend BivariatePolynomial operator-(BivariatePolynomial a, const BivariatePolynomial& b) { return a -= b; }
  friend BivariatePolynomial operator*(BivariatePolynomial a, Complex s) { return a *= s; }
  friend BivariatePolynomial operator*(Complex s, BivariatePolynomial a) { return a *= s; }

  friend BivariatePolynomial operator*(const BivariatePolynomial& a, const BivariatePolynomial& b) {
    BivariatePolynomial out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_)
        out.add_term({ma.conj_power + mb.conj_power, ma.power + mb.power}, ca * cb);
    return out;
  }

  friend bool operator==(const BivariatePolynomial&, const BivariatePolynomial&) = default;

  /// Coefficient vector over monomials_up_to(n).
  Eigen::VectorXcd coefficient_vector(int n) const {
    if (degree() > n) throw Error(ErrorCode::DegreeTooLow, "polynomial degree exceeds vector order");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(monomial_count(n)));
    for (const auto& [m, c] : terms_) v(static_cast<Eigen::Index>(m.position())) = c;
    return v;
  }

  static BivariatePolynomial from_coefficient_vector(const Eigen::VectorXcd& v) {
    BivariatePolynomial p;
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (v(k) != Complex{}) p.add_term(MonomialIndex::at_position(static_cast<std::size_t>(k)), v(k));
    return p;
  }

 private:
  void prune() { std::erase_if(terms_, [](const auto& kv) { return kv.second == Complex{}; }); }

  Terms terms_;
};

/// z-bar^i z^j * p.
inline BivariatePolynomial shift(const BivariatePolynomial& p, int i, int j) {
  BivariatePolynomial::Terms t;
  for (const auto& [m, c] : p.terms()) t[{m.conj_power + i, m.power + j}] = c;
  return BivariatePolynomial(std::move(t));
}

/// Riesz functional: sum a_ij gamma_ij.
inline Complex riesz(const MomentSequence& seq, const BivariatePolynomial& p) {
  if (p.degree() > seq.degree())
    throw Error(ErrorCode::DegreeTooLow, "polynomial degree exceeds sequence degree");
  Complex s{};
  for (const auto& [m, c] : p.terms()) s += c * seq.at(m);
  return s;
}

// ---------------------------------------------------------------------------
// MomentMatrix
// ---------------------------------------------------------------------------

/// gamma_{i+l, j+k} for row z-bar^k z^l and column z-bar^i z^j.
inline Complex moment_entry(const MomentSequence& seq, const MonomialIndex& row, const MonomialIndex& col) {
  return seq(col.conj_power + row.power, col.power + row.conj_power);
}

/// Generic moment-structured block with arbitrary row and column labels.
inline Eigen::MatrixXcd moment_block(const MomentSequence& seq, const std::vector<MonomialIndex>& rows,
                                     const std::vector<MonomialIndex>& cols) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = moment_entry(seq, rows[r], cols[c]);
  return out;
}

struct MomentMatrix {
  int order = 0;
  Eigen::MatrixXcd entries;
  std::vector<MonomialIndex> labels;

  Eigen::Index size() const { return entries.rows(); }

  Eigen::Index index_of(const MonomialIndex& m) const {
    if (m.degree() > order) throw Error(ErrorCode::DegreeTooLow, "monomial outside moment matrix");
    return static_cast<Eigen::Index>(m.position());
  }

  /// Column labelled by m.
  Eigen::VectorXcd column(const MonomialIndex& m) const { return entries.col(index_of(m)); }

  /// The principal submatrix on the given labels.
  Eigen::MatrixXcd restricted(const std::vector<MonomialIndex>& rows,
                              const std::vector<MonomialIndex>& cols) const {
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c)
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = entries(index_of(rows[r]), index_of(cols[c]));
    return out;
  }
};

/// M(n) built from gamma^(2n) (or any sequence of degree >= 2n).
inline MomentMatrix build_moment_matrix(const MomentSequence& seq, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative order");
  if (seq.degree() < 2 * n)
    throw Error(ErrorCode::DegreeTooLow, "M(" + std::to_string(n) + ") needs moments of degree " +
                                             std::to_string(2 * n));
  MomentMatrix m;
  m.order = n;
  m.labels = monomials_up_to(n);
  m.entries = moment_block(seq, m.labels, m.labels);
  return m;
}

/// The block B(n+1) of M(n+1): rows of degree <= n, columns of degree n+1.
inline Eigen::MatrixXcd build_b_block(const MomentSequence& seq, int n) {
  if (seq.degree() < 2 * n + 1)
    throw Error(ErrorCode::DegreeTooLow, "B block needs moments of degree " + std::to_string(2 * n + 1));
  return moment_block(seq, monomials_up_to(n), monomials_of_degree(n + 1));
}

}  // namespace qcmp

#endif  // QCMP_MOMENT_CORE_HPP
