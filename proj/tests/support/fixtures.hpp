#pragma once

// Test-side generators and oracles. Nothing here calls the solver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qcmp/qcmp.hpp"

namespace qcmp::fixtures {

/// The measure delta_0 + delta_1 + delta_-1 + delta_i + delta_-i + delta_{1+i}.
inline AtomicMeasure six_atom_measure() {
  return {{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}}, {1, 1, 1, 1, 1, 1}};
}

/// The reference degree-5 sequence, entered by hand (not generated).
inline MomentSequence six_atom_sequence() {
  using C = Complex;
  std::map<MonomialIndex, Complex> raw{
      {{0, 0}, C(6, 0)},   {{0, 1}, C(1, 1)},   {{1, 0}, C(1, -1)},  {{2, 0}, C(0, -2)},
      {{1, 1}, C(6, 0)},   {{0, 2}, C(0, 2)},   {{3, 0}, C(-2, -2)}, {{2, 1}, C(2, -2)},
      {{1, 2}, C(2, 2)},   {{0, 3}, C(-2, 2)},  {{4, 0}, C(0, 0)},   {{3, 1}, C(0, -4)},
      {{2, 2}, C(8, 0)},   {{1, 3}, C(0, 4)},   {{0, 4}, C(0, 0)},   {{5, 0}, C(-4, 4)},
      {{4, 1}, C(-4, -4)}, {{3, 2}, C(4, -4)},  {{2, 3}, C(4, 4)},   {{1, 4}, C(-4, 4)},
      {{0, 5}, C(-4, -4)}};
  return validate_sequence(raw, 5);
}

/// Atoms uniform in [-2, 2]^2 (rejecting pairs closer than min_sep),
/// weights log-uniform in [0.1, 10].
inline AtomicMeasure random_measure(std::mt19937_64& rng, int count, double min_sep = 0.2) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0), logw(std::log(0.1), std::log(10.0));
  AtomicMeasure mu;
  while (static_cast<int>(mu.size()) < count) {
    const Complex z(coord(rng), coord(rng));
    if (std::any_of(mu.atoms.begin(), mu.atoms.end(), [&](Complex w) { return std::abs(w - z) < min_sep; }))
      continue;
    mu.atoms.push_back(z);
    mu.weights.push_back(std::exp(logw(rng)));
  }
  return mu;
}

/// Degree-4 moments of a positive definite base (7 atoms) with free degree-5
/// moments gamma_23, gamma_14, gamma_05 (and mirrors). Every such sequence
/// satisfies M(2) > 0, hence range inclusion.
struct QuinticFamily {
  MomentSequence base;  // degree 4
  std::array<Complex, 3> free{};  // gamma_23, gamma_14, gamma_05

  MomentSequence with_g05(Complex g05) const {
    return MomentSequence::from_function(5, [&](int i, int j) -> Complex {
      if (i + j <= 4) return base(i, j);
      const std::array<Complex, 3> v{free[0], free[1], g05};
      // (i, j) with i < j: (2,3), (1,4), (0,5)
      if (i < j) return v[static_cast<std::size_t>(2 - i)];
      return std::conj(v[static_cast<std::size_t>(2 - j)]);
    });
  }

  MiddleBlock middle(Complex g05) const {
    const MomentSequence s = with_g05(g05);
    const MomentMatrix m2 = build_moment_matrix(s, 2);
    const Eigen::MatrixXcd w = hermitian_pinv(m2.entries) * build_b_block(s, 2);
    return middle_block(m2, w, 1e-6);
  }
};

inline QuinticFamily random_family(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  QuinticFamily fam;
  fam.base = generate_moments(random_measure(rng, 7), 4);
  const double s = std::sqrt(fam.base(2, 2).real() / fam.base(0, 0).real()) * fam.base(0, 0).real();
  for (auto& v : fam.free) v = s * Complex(g(rng), g(rng));
  return fam;
}

/// b depends on gamma_05 through conj(gamma_05) affinely: b = b0 + k conj(g05).
/// Returns the gamma_05 with b = f, if k != 0.
inline std::optional<Complex> g05_for_b_equals_f(const QuinticFamily& fam) {
  const MiddleBlock m0 = fam.middle(0.0), m1 = fam.middle(1.0);
  const Complex k = m1.b - m0.b;
  if (std::abs(k) < 1e-12) return std::nullopt;
  return std::conj((m0.f - m0.b) / k);
}

/// a(t) along g05 = t u is a convex quadratic; returns a root of a(t) = e.
inline std::optional<Complex> g05_for_a_equals_e(const QuinticFamily& fam, Complex u) {
  const MiddleBlock m0 = fam.middle(0.0), mp = fam.middle(u), mm = fam.middle(-u);
  const double c0 = m0.a - m0.e;
  const double qa = 0.5 * (mp.a + mm.a) - m0.a, qb = 0.5 * (mp.a - mm.a);
  const double disc = qb * qb - 4.0 * qa * c0;
  if (qa <= 0.0 || disc < 0.0) return std::nullopt;
  const double t = (-qb + std::sqrt(disc)) / (2.0 * qa);
  return t * u;
}

enum class Want { II1, II2, Unsupported, Degenerate };

/// Synthesizes a degree-5 sequence in the requested case. Classification is
/// decided here from the middle block alone.
inline MomentSequence synthesize(std::mt19937_64& rng, Want want) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> logt(std::log(0.05), std::log(20.0));
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const QuinticFamily fam = random_family(rng);
    const double unit = std::abs(fam.free[0]);
    if (want == Want::Unsupported) {
      const Complex u = unit * Complex(g(rng), g(rng));
      const auto g05 = g05_for_a_equals_e(fam, u);
      if (!g05) continue;
      const MiddleBlock mb = fam.middle(*g05);
      if (std::abs(mb.b - mb.f) < 1e-3 * mb.scale() || std::abs(mb.a - mb.e) > 1e-10 * mb.scale()) continue;
      return fam.with_g05(*g05);
    }
    if (want == Want::Degenerate || (want == Want::II2 && attempt % 2 == 0)) {
      const auto g05 = g05_for_b_equals_f(fam);
      if (!g05) continue;
      const MiddleBlock mb = fam.middle(*g05);
      const double gap = (mb.a - mb.e) / mb.scale();
      if (want == Want::Degenerate && gap > -1e-2) continue;
      if (want == Want::II2) {
        if (gap > 1e-2) return fam.with_g05(*g05);
        continue;
      }
      return fam.with_g05(*g05);
    }
    const Complex g05 = std::exp(logt(rng)) * unit * Complex(g(rng), g(rng));
    const MiddleBlock mb = fam.middle(g05);
    const double da = mb.a - mb.e, db = std::abs(mb.b - mb.f), sc = mb.scale();
    if (std::abs(da) < 1e-3 * sc) continue;
    if (want == Want::II1 && db > 0.5 * da + 1e-3 * sc) return fam.with_g05(g05);
    if (want == Want::II2 && da > 0 && db < 0.5 * da - 1e-3 * sc) return fam.with_g05(g05);
  }
  throw std::runtime_error("synthesize: no instance found");
}

/// The persymmetric Hermitian block with parameters (a, b, c, d, e, f).
inline MiddleBlock middle_from(double a, Complex b, Complex c, Complex d, double e, Complex f) {
  MiddleBlock mb;
  mb.a = a;
  mb.b = b;
  mb.c = c;
  mb.d = d;
  mb.e = e;
  mb.f = f;
  mb.full << a, b, c, d, std::conj(b), e, f, c, std::conj(c), std::conj(f), e, b, std::conj(d), std::conj(c),
      std::conj(b), a;
  return mb;
}

/// Degree-5 moments of random measures with `count` atoms until the data
/// classifies as `label`.
inline MomentSequence measure_instance(std::mt19937_64& rng, int count, CaseLabel label,
                                       AtomicMeasure* source = nullptr) {
  for (int attempt = 0; attempt < 20000; ++attempt) {
    const AtomicMeasure mu = random_measure(rng, count, 0.3);
    const MomentSequence seq = generate_moments(mu, 5);
    const QuinticAnalysis an = analyze(seq);
    if (!an.label || *an.label != label) continue;
    if (source) *source = mu;
    return seq;
  }
  throw std::runtime_error("measure_instance: no instance found");
}

/// A center atom plus `orbits` orbits of the rotation by 2 pi / fold. Such
/// measures have b = f and a < e for fold >= 3 when the orbits are generic.
inline AtomicMeasure rotation_symmetric(std::mt19937_64& rng, int fold, int orbits, bool center) {
  std::uniform_real_distribution<double> radius(0.5, 2.0), phase(0.0, 2.0 * std::acos(-1.0)),
      logw(std::log(0.3), std::log(3.0));
  const double step = 2.0 * std::acos(-1.0) / fold;
  AtomicMeasure mu;
  if (center) {
    mu.atoms.push_back(0.0);
    mu.weights.push_back(std::exp(logw(rng)));
  }
  for (int o = 0; o < orbits; ++o) {
    const double r = radius(rng), t = phase(rng), w = std::exp(logw(rng));
    for (int k = 0; k < fold; ++k) {
      mu.atoms.push_back(std::polar(r, t + step * k));
      mu.weights.push_back(w);
    }
  }
  return mu;
}

}  // namespace qcmp::fixtures
