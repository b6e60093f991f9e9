// A measure invariant under rotation by 2 pi / 3 lands in the boundary case
// a < e, b = f. The solver searches the phase of gamma_60 for a flat M(4).

#include <cmath>
#include <iostream>
#include <numbers>

#include "qcmp/qcmp.hpp"

int main() {
  qcmp::AtomicMeasure mu{{0.0}, {2.0}};
  for (int k = 0; k < 3; ++k) {
    mu.atoms.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / 3));
    mu.weights.push_back(1.0);
    mu.atoms.push_back(std::polar(1.7, 2.0 * std::numbers::pi * k / 3 + 0.5));
    mu.weights.push_back(0.5);
  }
  try {
    const qcmp::Solution sol = qcmp::solve(qcmp::generate_moments(mu, 5));
    qcmp::print_report(std::cout, sol.report);
    qcmp::write_measure_file(std::cout, {sol.measure});
  } catch (const qcmp::Error& err) {
    std::cerr << err.what() << "\n";
    return qcmp::exit_code(err.code());
  }
  return 0;
}
