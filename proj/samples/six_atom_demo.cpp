// Reads the six-atom sample, prints W* M(2) W and the recovered measure.

#include <iostream>
#include <string>

#include "qcmp/qcmp.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : std::string(QCMP_SAMPLES_DIR) + "/six_atom_moments.txt";
  try {
    const qcmp::MomentSequence seq = qcmp::read_moment_file(path).to_sequence();
    const qcmp::QuinticAnalysis an = qcmp::analyze(seq);
    if (!an.conditions_hold()) {
      std::cout << "necessary conditions fail\n";
      return 1;
    }
    std::cout << "W* M(2) W =\n" << an.middle->full << "\n\n";
    const qcmp::Solution sol = qcmp::solve(seq);
    qcmp::print_report(std::cout, sol.report);
    qcmp::write_measure_file(std::cout, {sol.measure});
  } catch (const qcmp::Error& err) {
    std::cerr << err.what() << "\n";
    return qcmp::exit_code(err.code());
  }
  return 0;
}
