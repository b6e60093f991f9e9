#pragma once

// Independent reference computations. They use only the raw moment
// definition and plain loops, never the library's matrix builders.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "qcmp/qcmp.hpp"

namespace qcmp::oracle {

inline Complex point_moment(Complex z, int i, int j) {
  Complex p = 1.0;
  for (int k = 0; k < i; ++k) p *= std::conj(z);
  for (int k = 0; k < j; ++k) p *= z;
  return p;
}

/// sum_k w_k u_k u_k^* where the entry of u_k for zbar^i z^j is
/// z_k^i conj(z_k)^j, in the order 1, Z, Zbar, Z^2, ...
inline Eigen::MatrixXcd outer_product_moment_matrix(const AtomicMeasure& mu, int n) {
  const auto size = static_cast<Eigen::Index>((n + 1) * (n + 2) / 2);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(size, size);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    Eigen::VectorXcd u(size);
    Eigen::Index pos = 0;
    for (int d = 0; d <= n; ++d)
      for (int i = 0; i <= d; ++i) u(pos++) = point_moment(mu.atoms[k], d - i, i);
    m += mu.weights[k] * u * u.adjoint();
  }
  return m;
}

/// max |A(3 - j, 3 - i) - A(i, j)| by explicit loops.
inline double persymmetry_gap(const Eigen::MatrixXcd& a) {
  double g = 0.0;
  const auto n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g = std::max(g, std::abs(a(n - 1 - j, n - 1 - i) - a(i, j)));
  return g;
}

/// sum c_ij conj(z)^i z^j evaluated term by term.
inline Complex evaluate(const BivariatePolynomial& p, Complex z) {
  Complex s{};
  for (const auto& [m, c] : p.terms()) s += c * point_moment(z, m.conj_power, m.power);
  return s;
}

/// Common zeros in the square [-half, half]^2 of the relations
/// leading - tail for each generating polynomial: dense grid, local minima
/// of the summed squared moduli, then Gauss-Newton in (x, y).
inline std::vector<Complex> common_roots(const std::vector<GeneratingPolynomial>& gs, double half = 2.6,
                                         int grid = 260, double accept = 1e-9) {
  auto residuals = [&](Complex z) {
    std::vector<Complex> r;
    for (const auto& g : gs)
      r.push_back(point_moment(z, g.leading().conj_power, g.leading().power) - evaluate(g.tail(), z));
    return r;
  };
  auto objective = [&](Complex z) {
    double s = 0.0;
    for (Complex v : residuals(z)) s += std::norm(v);
    return s;
  };
  const double h = 2.0 * half / grid;
  std::vector<std::vector<double>> f(grid + 1, std::vector<double>(grid + 1));
  for (int a = 0; a <= grid; ++a)
    for (int b = 0; b <= grid; ++b) f[a][b] = objective({-half + a * h, -half + b * h});

  double scale = 1.0;
  for (const auto& g : gs)
    for (const auto& [m, c] : g.tail().terms()) scale = std::max(scale, std::abs(c));

  std::vector<Complex> roots;
  for (int a = 1; a < grid; ++a) {
    for (int b = 1; b < grid; ++b) {
      bool is_min = true;
      for (int da = -1; da <= 1 && is_min; ++da)
        for (int db = -1; db <= 1; ++db)
          if ((da || db) && f[a + da][b + db] < f[a][b]) {
            is_min = false;
            break;
          }
      if (!is_min) continue;
      Complex z(-half + a * h, -half + b * h);
      for (int it = 0; it < 60; ++it) {
        const auto r0 = residuals(z);
        const auto m = static_cast<Eigen::Index>(2 * r0.size());
        Eigen::VectorXd r(m);
        Eigen::MatrixXd jac(m, 2);
        const double eps = 1e-7 * std::max(1.0, std::abs(z));
        const auto rx = residuals(z + eps), ry = residuals(z + Complex(0, eps));
        for (std::size_t k = 0; k < r0.size(); ++k) {
          const auto e = static_cast<Eigen::Index>(2 * k);
          r(e) = r0[k].real();
          r(e + 1) = r0[k].imag();
          jac(e, 0) = (rx[k].real() - r0[k].real()) / eps;
          jac(e + 1, 0) = (rx[k].imag() - r0[k].imag()) / eps;
          jac(e, 1) = (ry[k].real() - r0[k].real()) / eps;
          jac(e + 1, 1) = (ry[k].imag() - r0[k].imag()) / eps;
        }
        const Eigen::Vector2d step = jac.colPivHouseholderQr().solve(-r);
        z += Complex(step(0), step(1));
        if (step.norm() < 1e-15 * std::max(1.0, std::abs(z))) break;
      }
      if (std::sqrt(objective(z)) > accept * scale * std::max(1.0, std::pow(std::abs(z), 3))) continue;
      if (std::abs(z.real()) > half || std::abs(z.imag()) > half) continue;
      if (std::none_of(roots.begin(), roots.end(), [&](Complex w) { return std::abs(w - z) < 1e-6; }))
        roots.push_back(z);
    }
  }
  return roots;
}

/// Largest distance under the best matching of two equally sized point
/// sets (exhaustive for up to 8 points); infinity if the sizes differ.
inline double match_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  if (a.size() > 8) {
    // greedy nearest neighbour
    std::vector<bool> used(b.size());
    double worst = 0.0;
    for (Complex z : a) {
      std::size_t k_best = 0;
      double d_best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < b.size(); ++k)
        if (!used[k] && std::abs(b[k] - z) < d_best) d_best = std::abs(b[k] - z), k_best = k;
      used[k_best] = true;
      worst = std::max(worst, d_best);
    }
    return worst;
  }
  do {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[perm[k]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Matches atoms (absolute tolerance) and then the weights of matched atoms
/// relative to the weight.
inline bool same_measure(const AtomicMeasure& x, const AtomicMeasure& y, double tol) {
  if (x.size() != y.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < y.size(); ++l)
      if (std::abs(y.atoms[l] - x.atoms[k]) < std::abs(y.atoms[best] - x.atoms[k])) best = l;
    const double scale = std::max(1.0, std::abs(x.atoms[k]));
    if (std::abs(y.atoms[best] - x.atoms[k]) > tol * scale) return false;
    if (std::abs(y.weights[best] - x.weights[k]) > tol * std::max(1.0, x.weights[k])) return false;
  }
  return true;
}

}  // namespace qcmp::oracle
