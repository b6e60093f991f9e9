#ifndef QCMP_QUINTIC_SOLVER_HPP
#define QCMP_QUINTIC_SOLVER_HPP

///
/// \file quintic_solver.hpp
///
/// Constructive solver for the quintic truncated complex moment problem.
///
/// Given gamma^(5) with M(2) >= 0 and Ran B in Ran M(2), the 4x4 block
/// W* M(2) W (B = M(2) W) is Hermitian and persymmetric with parameters
/// (a, b, c, d, e, f). They decide how the data is completed to gamma^(6):
///
///   a = e, b = f                    C(3) = W* M(2) W, M(3) flat, r atoms
///   a != e, (a - e)/2 < |b - f|     rank (C(3) - W* M(2) W) = 1, r + 1 atoms
///   a > e,  (a - e)/2 >= |b - f|    rank (C(3) - W* M(2) W) = 2, r + 2 atoms
///   a = e, b != f                   open case, reported as unsupported
///
/// In the two rank-raising cases M(3) carries the column relation
/// zbar z^2 = alpha z^3 + R (|alpha| != 1), which fixes gamma_43; a second
/// relation z^4 = P then generates gamma^(8) and M(4) is a flat extension
/// of M(3). Atoms are read off the flat matrix.
///

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "qcmp/error.hpp"
#include "qcmp/extraction.hpp"
#include "qcmp/moment_core.hpp"
#include "qcmp/numlin.hpp"
#include "qcmp/recursion.hpp"

namespace qcmp {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

enum class CaseLabel { FlatCaseI, RankOneCaseII1, RankTwoCaseII2, DegenerateBoundary, Unsupported };

inline const char* to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::FlatCaseI: return "FlatCaseI";
    case CaseLabel::RankOneCaseII1: return "RankOneCaseII1";
    case CaseLabel::RankTwoCaseII2: return "RankTwoCaseII2";
    case CaseLabel::DegenerateBoundary: return "DegenerateBoundary";
    case CaseLabel::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

struct SolverConfig {
  double tol_psd = 1e-8;
  double tol_rank = 1e-8;
  double tol_range = 1e-8;
  double tol_sym = 1e-9;
  double tol_psym = 1e-8;
  /// a = e and b = f are decided relative to max(1, max |W* M(2) W|).
  double tol_case = 1e-8;
  double tol_alpha = 1e-8;
  double tol_conflict = 1e-7;
  double tol_generating = 1e-7;
  double tol_verify = 1e-6;
  double gap_default = 1.0;
  double slack_frac = 0.1;
  /// Length of the gamma_33 window used when the feasible set is unbounded.
  double window_cap = 10.0;
  std::optional<double> gamma33_override;
  /// Grid size per branch for the flatness search over gamma_33.
  int search_points = 300;
  bool flatness_search = true;
  ExtractionConfig extraction;
};

/// Case of the middle block per the table at the top of this file.
inline CaseLabel classify(const MiddleBlock& mb, double tol = 1e-8) {
  const double t = tol * std::max(1.0, mb.scale());
  const double da = mb.a - mb.e;
  const double db = std::abs(mb.b - mb.f);
  if (std::abs(da) <= t) return db <= t ? CaseLabel::FlatCaseI : CaseLabel::Unsupported;
  if (da > 0.0) return db > 0.5 * da + t ? CaseLabel::RankOneCaseII1 : CaseLabel::RankTwoCaseII2;
  return db <= t ? CaseLabel::DegenerateBoundary : CaseLabel::RankOneCaseII1;
}

/// Smallest support size for rank M(2) = r; none for the open case.
inline std::optional<int> predicted_support(CaseLabel c, int r) {
  switch (c) {
    case CaseLabel::FlatCaseI: return r;
    case CaseLabel::RankOneCaseII1: return r + 1;
    case CaseLabel::RankTwoCaseII2: return r + 2;
    case CaseLabel::DegenerateBoundary: return r + 1;
    case CaseLabel::Unsupported: return std::nullopt;
  }
  return std::nullopt;
}

namespace detail {

/// Root of a monotone f on [lo, +inf) with f(lo) and f(hi) of opposite sign
/// for some hi found by doubling.
inline double monotone_root(const std::function<double(double)>& f, double lo) {
  double step = 1.0;
  double hi = lo + step;
  const double flo = f(lo);
  int guard = 0;
  while ((f(hi) > 0.0) == (flo > 0.0)) {
    step *= 2.0;
    hi = lo + step;
    if (++guard > 200) throw Error(ErrorCode::InfeasibleGamma33, "no sign change while bracketing");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) > 0.0) == (flo > 0.0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// The two sides of the circle-intersection condition on gamma_33 = x:
/// |(x-e) - sqrt((x-a)(x-e))| <= |b - f| <= (x-e) + sqrt((x-a)(x-e)).
inline double gamma33_lower(double x, double a, double e) {
  return std::abs((x - e) - std::sqrt(std::max(0.0, (x - a) * (x - e))));
}
inline double gamma33_upper(double x, double a, double e) {
  return (x - e) + std::sqrt(std::max(0.0, (x - a) * (x - e)));
}

/// Feasible x > max(a, e) for thresholds lower(x) <= lo_thr, upper(x) >= hi_thr,
/// as [start, end] with end = +inf when unbounded; nullopt when empty.
inline std::optional<std::pair<double, double>> gamma33_window(double a, double e, double lo_thr, double hi_thr) {
  const double x0 = std::max(a, e);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double start = x0, end = inf;

  // upper(x) increases from max(a - e, 0) to infinity
  if (gamma33_upper(x0, a, e) < hi_thr)
    start = detail::monotone_root([&](double x) { return gamma33_upper(x, a, e) - hi_thr; }, x0);

  if (a > e) {
    // lower(x) decreases from a - e towards (a - e) / 2
    if (lo_thr <= 0.5 * (a - e)) return std::nullopt;
    if (lo_thr < a - e)
      start = std::max(start, detail::monotone_root([&](double x) { return gamma33_lower(x, a, e) - lo_thr; }, x0));
  } else if (a < e) {
    // lower(x) increases from 0 towards (e - a) / 2
    if (lo_thr <= 0.0) return std::nullopt;
    if (lo_thr < 0.5 * (e - a))
      end = detail::monotone_root([&](double x) { return gamma33_lower(x, a, e) - lo_thr; }, x0);
  } else if (lo_thr < 0.0) {
    return std::nullopt;
  }
  if (!(start < end)) return std::nullopt;
  return std::make_pair(start, end);
}

/// gamma_33 for the rank-raising cases. Case II-1: midpoint of the window
/// where both circle conditions hold with slack slack_frac * |b - f| (the
/// slack is halved until the window opens, down to zero); an unbounded
/// window is cut to length window_cap. Case II-2: max(a, e) + gap_default.
inline double choose_gamma33(const MiddleBlock& mb, CaseLabel label, const SolverConfig& cfg = {}) {
  if (cfg.gamma33_override) return *cfg.gamma33_override;
  const double x0 = std::max(mb.a, mb.e);
  if (label == CaseLabel::RankTwoCaseII2) return x0 + cfg.gap_default;
  if (label != CaseLabel::RankOneCaseII1)
    throw Error(ErrorCode::InvalidArgument, std::string("choose_gamma33 does not apply to ") + to_string(label));
  const double bf = std::abs(mb.b - mb.f);
  for (double sigma = cfg.slack_frac;; sigma *= 0.5) {
    if (sigma < 1e-6) sigma = 0.0;
    if (auto w = gamma33_window(mb.a, mb.e, (1.0 - sigma) * bf, (1.0 + sigma) * bf)) {
      const double end = std::isinf(w->second) ? w->first + cfg.window_cap : w->second;
      return 0.5 * (w->first + end);
    }
    if (sigma == 0.0) break;
  }
  throw Error(ErrorCode::InfeasibleGamma33, "no gamma_33 places gamma_42 on both circles");
}

/// One intersection point of the circles C(c1, r1) and C(c2, r2). Of the
/// two points, the one displaced from the radical-axis midpoint towards
/// i (c2 - c1) is returned; tangency gives the single point.
inline Complex intersect_circles(Complex c1, double r1, Complex c2, double r2, double tol = 1e-9, int branch = 1) {
  const double dist = std::abs(c2 - c1);
  const double t = tol * std::max({1.0, r1, r2});
  if (dist <= t) {
    if (std::abs(r1 - r2) <= t) return c1 + r1;
    throw Error(ErrorCode::NoIntersection, "concentric circles with different radii");
  }
  if (dist > r1 + r2 + t || dist < std::abs(r1 - r2) - t)
    throw Error(ErrorCode::NoIntersection, "circles do not meet");
  const Complex u = (c2 - c1) / dist;
  const double along = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist);
  const double h = std::sqrt(std::max(0.0, r1 * r1 - along * along));
  return c1 + u * along + Complex(0.0, branch >= 0 ? 1.0 : -1.0) * u * h;
}

/// Hermitian Toeplitz C(3) with first row (g33, g42, g51, g60).
inline Eigen::Matrix4cd toeplitz_c3(double g33, Complex g42, Complex g51, Complex g60) {
  const std::array<Complex, 4> t{Complex(g33), g42, g51, g60};
  Eigen::Matrix4cd c;
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) c(r, k) = k >= r ? t[static_cast<std::size_t>(k - r)] : std::conj(t[static_cast<std::size_t>(r - k)]);
  return c;
}

/// The sixtic moments gamma_33, gamma_42, gamma_51, gamma_60 (and their
/// conjugates gamma_24, gamma_15, gamma_06) with the resulting C(3).
struct SixticCompletion {
  double gamma33 = 0.0;
  Complex gamma42;
  Complex gamma51;
  Complex gamma60;
  Eigen::Matrix4cd c3 = Eigen::Matrix4cd::Zero();
  /// numeric rank of C(3) - W* M(2) W
  int difference_rank = 0;

  Complex gamma24() const { return std::conj(gamma42); }
  Complex gamma15() const { return std::conj(gamma51); }
  Complex gamma06() const { return std::conj(gamma60); }
};

inline int expected_difference_rank(CaseLabel label) {
  switch (label) {
    case CaseLabel::FlatCaseI: return 0;
    case CaseLabel::RankOneCaseII1: return 1;
    case CaseLabel::RankTwoCaseII2: return 2;
    case CaseLabel::DegenerateBoundary: return 1;
    case CaseLabel::Unsupported: break;
  }
  throw Error(ErrorCode::UnsupportedCase, "a = e with b != f has no completion");
}

/// Builds C(3) for the given case. For DegenerateBoundary this is the
/// boundary completion gamma_33 = e, gamma_42 = b, gamma_51 = c,
/// gamma_60 = d + (e - a) e^{i boundary_phase} (the passed gamma33 is ignored).
/// branch picks the circle intersection point (Case II-1) or the sign of
/// the real offset sqrt((gamma_33 - a)(gamma_33 - e)) (Case II-2).
inline SixticCompletion build_completion(const MiddleBlock& mb, CaseLabel label, double gamma33,
                                         const SolverConfig& cfg = {}, int branch = 1, double boundary_phase = 0.0) {
  SixticCompletion s;
  const double a = mb.a, e = mb.e;
  const Complex b = mb.b, c = mb.c, d = mb.d, f = mb.f;

  // gamma_15 and gamma_06 from gamma_42 (shared by both rank-raising cases)
  auto finish_from_g42 = [&](Complex g42) {
    const double p = s.gamma33 - a;
    const Complex x = g42 - b;
    if (std::abs(x) <= 1e-14 * std::max(1.0, mb.scale()))
      throw Error(ErrorCode::RankMismatch, "gamma_42 coincides with b");
    const Complex g24 = std::conj(g42);
    const Complex g15 = std::conj(c) + p * (g24 - std::conj(f)) / x;
    const Complex g06 = std::conj(d) + p * p * (g24 - std::conj(f)) / (x * x);
    s.gamma42 = g42;
    s.gamma51 = std::conj(g15);
    s.gamma60 = std::conj(g06);
  };

  switch (label) {
    case CaseLabel::FlatCaseI:
      s.gamma33 = 0.5 * (a + e);
      s.gamma42 = 0.5 * (b + f);
      s.gamma51 = c;
      s.gamma60 = d;
      break;
    case CaseLabel::RankOneCaseII1: {
      if (!(gamma33 > std::max(a, e))) throw Error(ErrorCode::InfeasibleGamma33, "gamma_33 must exceed max(a, e)");
      s.gamma33 = gamma33;
      const double p = gamma33 - a, q = gamma33 - e;
      finish_from_g42(intersect_circles(b, std::sqrt(p * q), f, q, 1e-9, branch));
      break;
    }
    case CaseLabel::RankTwoCaseII2: {
      if (!(gamma33 > std::max(a, e))) throw Error(ErrorCode::InfeasibleGamma33, "gamma_33 must exceed max(a, e)");
      s.gamma33 = gamma33;
      const double p = gamma33 - a, q = gamma33 - e;
      finish_from_g42(b + (branch >= 0 ? 1.0 : -1.0) * std::sqrt(p * q));
      break;
    }
    case CaseLabel::DegenerateBoundary:
      s.gamma33 = e;
      s.gamma42 = b;
      s.gamma51 = c;
      s.gamma60 = d + std::polar(e - a, boundary_phase);
      break;
    case CaseLabel::Unsupported:
      throw Error(ErrorCode::UnsupportedCase, "a = e with b != f has no completion");
  }

  s.c3 = toeplitz_c3(s.gamma33, s.gamma42, s.gamma51, s.gamma60);
  const Eigen::MatrixXcd diff = s.c3 - mb.full;
  const PsdReport psd = psd_check(hermitian_part(diff), cfg.tol_psd);
  if (!psd.is_psd)
    throw ResidualError(ErrorCode::NotPsd, "C(3) - W* M(2) W is not positive semidefinite", psd.min_eigenvalue);
  s.difference_rank = numeric_rank(diff, cfg.tol_rank, std::max(1.0, max_abs(s.c3)));
  if (s.difference_rank != expected_difference_rank(label))
    throw Error(ErrorCode::RankMismatch, "rank (C(3) - W* M(2) W) = " + std::to_string(s.difference_rank) +
                                             ", expected " + std::to_string(expected_difference_rank(label)));
  return s;
}

/// gamma^(5) completed by the sixtic moments.
inline MomentSequence sixtic_extension(const MomentSequence& seq5, const SixticCompletion& s) {
  MomentTable t(seq5.truncated(5), 6);
  t.set(3, 3, s.gamma33);
  t.set(4, 2, s.gamma42);
  t.set(5, 1, s.gamma51);
  t.set(6, 0, s.gamma60);
  return t.to_sequence();
}

/// zbar z^2 = alpha z^3 + R in M(3), R supported on the basis of M(2).
struct ColumnRelation {
  Complex alpha;
  BivariatePolynomial remainder;
  double residual = 0.0;

  /// zbar z^2 - (alpha z^3 + R).
  GeneratingPolynomial generating() const {
    return {{1, 2}, remainder + BivariatePolynomial::monomial({0, 3}, alpha)};
  }
};

inline std::vector<MonomialIndex> with_z3(const BasisSelection& basis2) {
  std::vector<MonomialIndex> out = basis2.indices;
  out.push_back({0, 3});
  return out;
}

/// Solves the positive definite system on basis(2) + {Z^3} for the column
/// zbar z^2 of M(3) and checks the relation on every row.
inline ColumnRelation extract_column_relation(const MomentMatrix& m3, const BasisSelection& basis2,
                                              const SolverConfig& cfg = {}, bool allow_zero_alpha = false) {
  if (m3.order != 3) throw Error(ErrorCode::InvalidArgument, "extract_column_relation expects M(3)");
  const auto labels = with_z3(basis2);
  const Eigen::MatrixXcd a = m3.restricted(labels, labels);
  const Eigen::MatrixXcd rhs = m3.restricted(labels, {{1, 2}});
  Eigen::LLT<Eigen::MatrixXcd> llt(a);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::SingularBorderedSystem, "M(3) restricted to basis + Z^3 is not positive definite");
  const Eigen::VectorXcd x = llt.solve(rhs);

  Eigen::MatrixXcd cols(m3.size(), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t k = 0; k < labels.size(); ++k) cols.col(static_cast<Eigen::Index>(k)) = m3.column(labels[k]);
  ColumnRelation rel;
  rel.residual = max_abs(m3.column({1, 2}) - cols * x);
  if (rel.residual > cfg.extraction.tol_express * std::max(1.0, max_abs(m3.entries)))
    throw ResidualError(ErrorCode::ExpressFailure, "column zbar z^2 is not in span(basis, Z^3)", rel.residual);

  rel.alpha = x(x.size() - 1);
  for (std::size_t k = 0; k < basis2.size(); ++k)
    rel.remainder.add_term(basis2.indices[k], x(static_cast<Eigen::Index>(k)));
  if (!allow_zero_alpha && std::abs(rel.alpha) <= cfg.tol_alpha) throw Error(ErrorCode::AlphaZero, "alpha vanishes");
  if (std::abs(std::abs(rel.alpha) - 1.0) <= cfg.tol_alpha)
    throw Error(ErrorCode::AlphaUnimodular, "|alpha| = 1, gamma_43 is not determined");
  return rel;
}

/// s = sum r_ij gamma_{i+3, j+1} over the remainder coefficients.
inline Complex gamma43_offset(const MomentSequence& seq6, const BivariatePolynomial& remainder) {
  return riesz(seq6, shift(remainder, 3, 1));
}

/// The unique g with g = alpha conj(g) + s, solved as a 2x2 real system.
inline Complex solve_gamma43(Complex alpha, Complex s, double tol = 1e-8) {
  if (std::abs(std::abs(alpha) - 1.0) <= tol)
    throw Error(ErrorCode::AlphaUnimodular, "|alpha| = 1, gamma_43 is not determined");
  Eigen::Matrix2d m;
  m << 1.0 - alpha.real(), -alpha.imag(), -alpha.imag(), 1.0 + alpha.real();
  const Eigen::Vector2d v = m.partialPivLu().solve(Eigen::Vector2d(s.real(), s.imag()));
  return {v(0), v(1)};
}

/// z^4 = beta z^3 + sum beta_ij zbar^i z^j from the bordered positive
/// definite system on basis(2) + {Z^3}; the right side is the column Z^4
/// of M(4) on those rows, which needs gamma_34 beyond gamma^(6).
inline GeneratingPolynomial solve_P_z4(const MomentSequence& seq6, Complex gamma34, const BasisSelection& basis2) {
  const auto labels = with_z3(basis2);
  const Eigen::MatrixXcd a = moment_block(seq6, labels, labels);
  const Eigen::LLT<Eigen::MatrixXcd> llt(a);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::SingularBorderedSystem, "bordered matrix is not positive definite");
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& row = labels[k];
    // column Z^4, row zbar^k z^l -> gamma_{l, 4+k}
    const int i = row.power, j = 4 + row.conj_power;
    rhs(static_cast<Eigen::Index>(k)) = i + j <= seq6.degree() ? seq6(i, j) : gamma34;
  }
  const Eigen::VectorXcd beta = llt.solve(rhs);
  BivariatePolynomial tail;
  for (std::size_t k = 0; k < labels.size(); ++k) tail.add_term(labels[k], beta(static_cast<Eigen::Index>(k)));
  return {{0, 4}, tail};
}

/// The column `col` of m as a combination of the basis columns, checked on
/// every row: col = sum c_k basis_k.
inline GeneratingPolynomial express_column(const MomentMatrix& m, const BasisSelection& basis, MonomialIndex col,
                                           double tol = 1e-7) {
  const Eigen::MatrixXcd a = m.restricted(basis.indices, basis.indices);
  const Eigen::MatrixXcd rhs = m.restricted(basis.indices, {col});
  const Eigen::LLT<Eigen::MatrixXcd> llt(a);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::SingularBorderedSystem, "moment matrix is not positive definite on the basis");
  const Eigen::VectorXcd x = llt.solve(rhs);
  Eigen::MatrixXcd cols(m.size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) cols.col(static_cast<Eigen::Index>(k)) = m.column(basis.indices[k]);
  const double residual = max_abs(m.column(col) - cols * x);
  if (residual > tol * std::max(1.0, max_abs(m.entries)))
    throw ResidualError(ErrorCode::ExpressFailure, "column " + to_string(col) + " is not in the span of the basis",
                        residual);
  BivariatePolynomial tail;
  for (std::size_t k = 0; k < basis.size(); ++k) tail.add_term(basis.indices[k], x(static_cast<Eigen::Index>(k)));
  return {col, tail};
}

/// Moments of the push-forward of the measure under z -> z + c.
inline MomentSequence translate_moments(const MomentSequence& seq, Complex c) {
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
    return r;
  };
  return MomentSequence::from_function(seq.degree(), [&](int i, int j) {
    Complex s{};
    for (int p = 0; p <= i; ++p)
      for (int q = 0; q <= j; ++q)
        s += binom(i, p) * binom(j, q) * std::pow(std::conj(c), i - p) * std::pow(c, j - q) * seq(p, q);
    return s;
  });
}

// ---------------------------------------------------------------------------
// analysis and the full pipeline
// ---------------------------------------------------------------------------

/// The necessary conditions and the middle block. Failing conditions are
/// recorded, not thrown.
struct QuinticAnalysis {
  MomentMatrix m2;
  Eigen::MatrixXcd b;
  PsdReport psd;
  int rank_m2 = 0;
  Eigen::MatrixXcd w;
  double range_residual = 0.0;
  bool range_ok = false;
  std::optional<MiddleBlock> middle;
  std::optional<CaseLabel> label;
  std::optional<int> predicted_support;

  bool conditions_hold() const { return psd.is_psd && range_ok; }
};

inline QuinticAnalysis analyze(const MomentSequence& seq, const SolverConfig& cfg = {}) {
  if (seq.degree() < 5) throw Error(ErrorCode::DegreeTooLow, "the quintic problem needs moments of degree 5");
  const MomentSequence s5 = seq.degree() == 5 ? seq : seq.truncated(5);
  QuinticAnalysis an;
  an.m2 = build_moment_matrix(s5, 2);
  an.b = build_b_block(s5, 2);
  an.psd = psd_check(an.m2.entries, cfg.tol_psd);
  an.rank_m2 = numeric_rank(an.m2.entries, cfg.tol_rank);
  an.w = hermitian_pinv(an.m2.entries, cfg.tol_rank) * an.b;
  an.range_residual = max_abs(an.m2.entries * an.w - an.b);
  an.range_ok = an.range_residual <= cfg.tol_range * (1.0 + max_abs(an.b));
  if (an.conditions_hold()) {
    an.middle = middle_block(an.m2, an.w, cfg.tol_psym);
    an.label = classify(*an.middle, cfg.tol_case);
    an.predicted_support = predicted_support(*an.label, an.rank_m2);
  }
  return an;
}

struct SolverReport {
  CaseLabel label = CaseLabel::FlatCaseI;
  MiddleBlock middle;
  std::optional<SixticCompletion> completion;
  std::optional<Complex> alpha;
  std::optional<Complex> gamma43;
  int rank_m2 = 0;
  std::optional<int> rank_m3;
  std::optional<int> rank_m4;
  int predicted_support = 0;
  int achieved_support = 0;
  double max_moment_residual = 0.0;
  /// is_generating residuals on gamma^(8) (relative)
  std::optional<double> zbar_z2_residual;
  std::optional<double> z4_residual;
  /// Case I: z^3 = P and zbar z^2 = P on the basis of M(2).
  /// Cases II: zbar z^2 = alpha z^3 + R and z^4 = P.
  std::optional<GeneratingPolynomial> p_z3;
  std::optional<GeneratingPolynomial> p_zbar_z2;
  std::optional<GeneratingPolynomial> p_z4;
  std::optional<MomentSequence> extended;
  /// Boundary case: the phase theta of gamma_60 - d = (e - a) e^{i theta}.
  std::optional<double> boundary_phase;
  /// Set when gamma_33 came from the flatness search instead of the prescribed rule.
  bool gamma33_searched = false;
  /// Set when the achieved support is larger than the predicted minimum.
  bool minimality_not_reached = false;
  std::vector<std::string> notes;
};

struct Solution {
  AtomicMeasure measure;
  SolverReport report;
};

namespace detail {

inline void check_alpha(const ColumnRelation& rel, const SixticCompletion& s, const MiddleBlock& mb) {
  const Complex expected = (s.gamma42 - mb.b) / (s.gamma33 - mb.a);
  if (std::abs(rel.alpha - expected) > 1e-7 * std::max(1.0, std::abs(expected)))
    throw ResidualError(ErrorCode::VerificationFailure, "alpha disagrees with (gamma_42 - b)/(gamma_33 - a)",
                        std::abs(rel.alpha - expected));
}

/// Case I: M(3) with C(3) = W* M(2) W is a flat extension of M(2).
inline AtomicMeasure solve_flat(const MomentSequence& seq5, const QuinticAnalysis& an, SolverReport& rep,
                                const SolverConfig& cfg) {
  const SixticCompletion s = build_completion(*an.middle, CaseLabel::FlatCaseI, 0.0, cfg);
  const MomentSequence seq6 = sixtic_extension(seq5, s);
  const MomentMatrix m3 = build_moment_matrix(seq6, 3);
  rep.completion = s;
  rep.rank_m3 = numeric_rank(m3.entries, cfg.tol_rank);
  if (*rep.rank_m3 != an.rank_m2)
    throw Error(ErrorCode::FlatnessFailure, "rank M(3) = " + std::to_string(*rep.rank_m3) + " but rank M(2) = " +
                                                std::to_string(an.rank_m2));
  const BasisSelection basis = column_space_basis(an.m2, cfg.tol_rank);
  rep.p_z3 = express_column(m3, basis, {0, 3}, cfg.extraction.tol_express);
  rep.p_zbar_z2 = express_column(m3, basis, {1, 2}, cfg.extraction.tol_express);
  return extract_measure(m3, basis, seq5, cfg.extraction);
}

/// gamma^(6), the relation zbar z^2 = alpha z^3 + R, gamma_43, z^4 = P and
/// gamma^(8) for one completion choice. No flatness checks.
struct OcticExtension {
  SixticCompletion completion;
  ColumnRelation relation;
  Complex gamma43;
  GeneratingPolynomial p_z4{{0, 4}, {}};
  MomentSequence seq6;
  MomentSequence seq8;
  int rank_m3 = 0;
  BasisSelection basis2;
};

/// gamma_33 and branch for Cases II; the phase for the boundary case.
struct CompletionChoice {
  double gamma33 = 0.0;
  int branch = 1;
  double phase = 0.0;
};

inline OcticExtension extend_to_octic(const MomentSequence& seq5, const QuinticAnalysis& an, CaseLabel label,
                                      const CompletionChoice& choice, const SolverConfig& cfg) {
  const MiddleBlock& mb = *an.middle;
  OcticExtension ext;
  ext.completion = build_completion(mb, label, choice.gamma33, cfg, choice.branch, choice.phase);
  ext.seq6 = sixtic_extension(seq5, ext.completion);
  const MomentMatrix m3 = build_moment_matrix(ext.seq6, 3);
  ext.rank_m3 = numeric_rank(m3.entries, cfg.tol_rank);
  if (ext.rank_m3 != an.rank_m2 + ext.completion.difference_rank)
    throw Error(ErrorCode::RankMismatch, "rank M(3) = " + std::to_string(ext.rank_m3) + ", expected " +
                                             std::to_string(an.rank_m2 + ext.completion.difference_rank));
  ext.basis2 = column_space_basis(an.m2, cfg.tol_rank);
  ext.relation = extract_column_relation(m3, ext.basis2, cfg, label == CaseLabel::DegenerateBoundary);
  check_alpha(ext.relation, ext.completion, mb);
  ext.gamma43 = solve_gamma43(ext.relation.alpha, gamma43_offset(ext.seq6, ext.relation.remainder), cfg.tol_alpha);
  ext.p_z4 = solve_P_z4(ext.seq6, std::conj(ext.gamma43), ext.basis2);
  MomentTable table(ext.seq6, 8);
  table.set(4, 3, ext.gamma43);
  ext.seq8 = extend_by_recurrence(table, ext.p_z4, 8, cfg.tol_conflict);
  return ext;
}

/// Sum of squared relative residuals of zbar z^2 = P on gamma^(8), window 5.
inline double flatness_defect(const OcticExtension& ext) {
  const GeneratingPolynomial g = ext.relation.generating();
  const BivariatePolynomial& tail = g.tail();
  const double scale = std::max(1.0, ext.seq8.max_abs());
  double sum = 0.0;
  for (const auto& sh : monomials_up_to(5))
    sum += std::norm((ext.seq8(1 + sh.conj_power, 2 + sh.power) - riesz(ext.seq8, shift(tail, sh.conj_power, sh.power))) /
                     scale);
  return sum;
}

inline double defect_or_inf(const MomentSequence& seq5, const QuinticAnalysis& an, CaseLabel label,
                            const CompletionChoice& choice, const SolverConfig& cfg) {
  try {
    return flatness_defect(extend_to_octic(seq5, an, label, choice, cfg));
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// Brent-refined local minimizers of f sampled at xs: pairs (x, f(x)).
inline std::vector<std::pair<double, double>> local_minima(const std::function<double(double)>& f,
                                                           const std::vector<double>& xs) {
  std::vector<double> vals;
  for (double x : xs) vals.push_back(f(x));
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
    if (!std::isfinite(vals[k]) || vals[k] > vals[k - 1] || vals[k] > vals[k + 1]) continue;
    out.push_back(boost::math::tools::brent_find_minima(f, xs[k - 1], xs[k + 1], 52));
  }
  return out;
}

/// Flatness checks on gamma^(8) and atom extraction from M(4).
inline AtomicMeasure finish_extension(const MomentSequence& seq5, const OcticExtension& ext, SolverReport& rep,
                                      const SolverConfig& cfg) {
  rep.completion = ext.completion;
  rep.alpha = ext.relation.alpha;
  rep.gamma43 = ext.gamma43;
  rep.rank_m3 = ext.rank_m3;
  const MomentMatrix m3 = build_moment_matrix(ext.seq6, 3);
  const MomentMatrix m4 = build_moment_matrix(ext.seq8, 4);
  rep.rank_m4 = numeric_rank(m4.entries, cfg.tol_rank);
  if (*rep.rank_m4 != ext.rank_m3)
    throw Error(ErrorCode::FlatnessFailure, "rank M(4) = " + std::to_string(*rep.rank_m4) + " but rank M(3) = " +
                                                std::to_string(ext.rank_m3));
  const GeneratingPolynomial pzz2 = ext.relation.generating();
  const GeneratingCheck g1 = is_generating(ext.seq8, pzz2, ExtensionWindow(5), cfg.tol_generating);
  const GeneratingCheck g2 = is_generating(ext.seq8, ext.p_z4, ExtensionWindow(4), cfg.tol_generating);
  rep.zbar_z2_residual = g1.relative_residual;
  rep.z4_residual = g2.relative_residual;
  if (!g1.holds || !g2.holds)
    throw ResidualError(ErrorCode::FlatnessFailure, "generating polynomials do not propagate to gamma^(8)",
                        std::max(g1.relative_residual, g2.relative_residual));
  rep.p_zbar_z2 = pzz2;
  rep.p_z4 = ext.p_z4;
  rep.extended = ext.seq8;

  const BasisSelection basis3 = column_space_basis(m3, cfg.tol_rank);
  if (static_cast<int>(basis3.size()) != ext.rank_m3)
    throw Error(ErrorCode::RankMismatch, "greedy basis of M(3) has the wrong size");
  AtomicMeasure mu = extract_measure(m4, basis3, seq5, cfg.extraction);
  if (verify_measure(seq5, mu) > cfg.tol_verify)
    throw ResidualError(ErrorCode::VerificationFailure, "extracted measure does not reproduce the moments",
                        verify_measure(seq5, mu));
  return mu;
}

struct Candidate {
  CompletionChoice choice;
  double defect = 0.0;
};

/// Local minimizers of flatness_defect over the admissible gamma_33 range
/// on both branches, best first.
inline std::vector<Candidate> gamma33_candidates(const MomentSequence& seq5, const QuinticAnalysis& an,
                                                 CaseLabel label, const SolverConfig& cfg) {
  const MiddleBlock& mb = *an.middle;
  const double x0 = std::max(mb.a, mb.e);
  const double bf = std::abs(mb.b - mb.f);
  const double spread = std::max({cfg.window_cap, std::abs(x0), 4.0 * (std::abs(mb.a - mb.e) + bf)});
  double lo = x0, hi = x0 + spread;
  if (label == CaseLabel::RankOneCaseII1) {
    const auto w = gamma33_window(mb.a, mb.e, bf, bf);
    if (!w) return {};
    lo = w->first;
    hi = std::isinf(w->second) ? lo + spread : w->second;
  }

  // Offsets u from an end of the range on a geometric grid: flat extensions
  // often sit very close to the start of the admissible range.
  const double width = hi - lo;
  const int n = std::max(8, cfg.search_points);
  const bool two_sided = label == CaseLabel::RankOneCaseII1 && hi - lo < spread;
  std::vector<double> us;
  for (int k = 0; k <= n; ++k) us.push_back(width * std::pow(10.0, -9.0 + 9.0 * k / n) * (two_sided ? 0.5 : 1.0));
  std::vector<Candidate> out;
  for (int side : {1, -1}) {
    if (side < 0 && !two_sided) break;
    const double origin = side > 0 ? lo : hi;
    for (int branch : {1, -1}) {
      auto f = [&](double u) { return defect_or_inf(seq5, an, label, {origin + side * u, branch, 0.0}, cfg); };
      for (const auto& [u, v] : local_minima(f, us)) out.push_back({{origin + side * u, branch, 0.0}, v});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.defect < r.defect; });
  return out;
}

/// Local minimizers of flatness_defect over the boundary phase, best first.
inline std::vector<Candidate> phase_candidates(const MomentSequence& seq5, const QuinticAnalysis& an,
                                               const SolverConfig& cfg) {
  const int n = std::max(8, cfg.search_points / 2);
  const double two_pi = 2.0 * std::acos(-1.0);
  std::vector<double> ts;
  // one step past each end so minima at the seam are bracketed
  for (int k = -1; k <= n + 1; ++k) ts.push_back(two_pi * k / n);
  auto f = [&](double t) { return defect_or_inf(seq5, an, CaseLabel::DegenerateBoundary, {0.0, 1, t}, cfg); };
  std::vector<Candidate> out;
  for (const auto& [t, v] : local_minima(f, ts)) out.push_back({{0.0, 1, std::remainder(t, two_pi)}, v});
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.defect < r.defect; });
  return out;
}

/// Tries up to max_tries candidates; returns the first that passes.
inline std::optional<AtomicMeasure> try_candidates(const MomentSequence& seq5, const QuinticAnalysis& an,
                                                   CaseLabel label, const std::vector<Candidate>& cands,
                                                   SolverReport& rep, const SolverConfig& cfg, int max_tries = 8) {
  int tried = 0;
  for (const auto& cand : cands) {
    if (++tried > max_tries) break;
    SolverReport trial = rep;
    try {
      AtomicMeasure mu = finish_extension(seq5, extend_to_octic(seq5, an, label, cand.choice, cfg), trial, cfg);
      rep = std::move(trial);
      return mu;
    } catch (const Error&) {
      continue;
    }
  }
  return std::nullopt;
}

/// Cases II: complete to gamma^(6), derive gamma_43 and z^4 = P, generate
/// gamma^(8), extract from flat M(4). The prescribed gamma_33 is tried
/// first. If M(4) is not flat there, the admissible range is searched for
/// a gamma_33 where it is.
inline AtomicMeasure solve_extension(const MomentSequence& seq5, const QuinticAnalysis& an, CaseLabel label,
                                     SolverReport& rep, const SolverConfig& cfg) {
  const double g33 = choose_gamma33(*an.middle, label, cfg);
  try {
    return finish_extension(seq5, extend_to_octic(seq5, an, label, {g33, 1, 0.0}, cfg), rep, cfg);
  } catch (const Error& err) {
    if (cfg.gamma33_override || !cfg.flatness_search) throw;
    rep.notes.push_back("prescribed gamma_33 = " + format_double(g33) + " failed: " + err.what());
  }
  if (auto mu = try_candidates(seq5, an, label, gamma33_candidates(seq5, an, label, cfg), rep, cfg)) {
    rep.notes.push_back("flat extension found by search at gamma_33 = " + format_double(rep.completion->gamma33));
    rep.gamma33_searched = true;
    return *mu;
  }
  throw Error(ErrorCode::FlatnessFailure, "no admissible gamma_33 gives a flat extension M(4)");
}

/// Boundary case a < e, b = f. The completion gamma_33 = e, gamma_42 = b,
/// gamma_51 = c, gamma_60 = d + (e - a) e^{i theta} has rank-one difference
/// and alpha = 0; theta = 0 is tried first, then theta is searched.
inline AtomicMeasure solve_degenerate(const MomentSequence& seq5, const QuinticAnalysis& an, SolverReport& rep,
                                      const SolverConfig& cfg) {
  constexpr CaseLabel label = CaseLabel::DegenerateBoundary;
  try {
    AtomicMeasure mu = finish_extension(seq5, extend_to_octic(seq5, an, label, {}, cfg), rep, cfg);
    rep.boundary_phase = 0.0;
    return mu;
  } catch (const Error& err) {
    if (!cfg.flatness_search) throw;
    rep.notes.push_back(std::string("boundary completion with theta = 0 failed: ") + err.what());
  }
  const auto cands = phase_candidates(seq5, an, cfg);
  SolverReport trial = rep;
  if (auto mu = try_candidates(seq5, an, label, cands, trial, cfg)) {
    // the passing candidate is the one whose gamma_60 ended up in the report
    const Complex off = trial.completion->gamma60 - an.middle->d;
    trial.boundary_phase = std::arg(off);
    trial.notes.push_back("flat extension found by search at theta = " + format_double(*trial.boundary_phase));
    rep = std::move(trial);
    return *mu;
  }
  throw Error(ErrorCode::FlatnessFailure, "boundary case a < e, b = f: no phase gives a flat extension M(4)");
}

inline AtomicMeasure solve_case(const MomentSequence& seq5, const QuinticAnalysis& an, SolverReport& rep,
                                const SolverConfig& cfg) {
  switch (*an.label) {
    case CaseLabel::FlatCaseI: return solve_flat(seq5, an, rep, cfg);
    case CaseLabel::RankOneCaseII1:
    case CaseLabel::RankTwoCaseII2: return solve_extension(seq5, an, *an.label, rep, cfg);
    case CaseLabel::DegenerateBoundary: return solve_degenerate(seq5, an, rep, cfg);
    case CaseLabel::Unsupported: break;
  }
  throw Error(ErrorCode::UnsupportedCase,
              "a = e and b != f: this case of the quintic moment problem is open and not handled");
}

inline QuinticAnalysis require_conditions(const MomentSequence& seq5, const SolverConfig& cfg) {
  QuinticAnalysis an = analyze(seq5, cfg);
  if (!an.psd.is_psd) throw ResidualError(ErrorCode::NotPsd, "M(2) is not positive semidefinite", an.psd.min_eigenvalue);
  if (!an.range_ok) throw ResidualError(ErrorCode::RangeNotIncluded, "Ran B is not contained in Ran M(2)", an.range_residual);
  return an;
}

}  // namespace detail

/// Minimal atomic representing measure for gamma^(5).
inline Solution solve(const MomentSequence& seq, const SolverConfig& cfg = {}) {
  if (seq.degree() < 5) throw Error(ErrorCode::DegreeTooLow, "the quintic problem needs moments of degree 5");
  const MomentSequence seq5 = seq.degree() == 5 ? seq : seq.truncated(5);
  const QuinticAnalysis an = detail::require_conditions(seq5, cfg);

  Solution sol;
  SolverReport& rep = sol.report;
  rep.label = *an.label;
  rep.middle = *an.middle;
  rep.rank_m2 = an.rank_m2;
  if (rep.label == CaseLabel::Unsupported)
    throw Error(ErrorCode::UnsupportedCase,
                "a = e and b != f: this case of the quintic moment problem is open and not handled");
  rep.predicted_support = *an.predicted_support;

  sol.measure = detail::solve_case(seq5, an, rep, cfg);
  rep.predicted_support = *an.predicted_support;
  rep.achieved_support = static_cast<int>(sol.measure.size());
  rep.minimality_not_reached = rep.achieved_support > rep.predicted_support;
  rep.max_moment_residual = verify_measure(seq5, sol.measure);
  if (rep.max_moment_residual > cfg.tol_verify)
    throw ResidualError(ErrorCode::VerificationFailure, "measure does not reproduce the moments",
                        rep.max_moment_residual);
  return sol;
}

}  // namespace qcmp

#endif  // QCMP_QUINTIC_SOLVER_HPP
