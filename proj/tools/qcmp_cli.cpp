// qcmp: check, classify, solve and verify quintic moment data.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcmp/io.hpp"

namespace {

qcmp::AtomicMeasure parse_atoms(const std::vector<std::string>& specs) {
  qcmp::AtomicMeasure mu;
  for (const auto& s : specs) {
    std::string line = s;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream in(line);
    const qcmp::MeasureFile f = qcmp::parse_measure_file(in);
    if (f.measure.size() != 1) throw qcmp::Error(qcmp::ErrorCode::BadAtomSpec, "atom '" + s + "' is not RE,IM,WEIGHT");
    mu.atoms.push_back(f.measure.atoms[0]);
    mu.weights.push_back(f.measure.weights[0]);
  }
  return mu;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quintic truncated complex moment problem solver"};
  app.require_subcommand(1);

  qcmp::SolverConfig cfg;
  std::string input, output, measure_path;
  double gamma33 = 0.0;
  double tol_verify = 1e-6;
  std::uint64_t seed = 0;
  int count = 6, degree = 5;
  std::vector<std::string> atom_specs;

  auto add_tols = [&](CLI::App* sub) {
    sub->add_option("--tol-psd", cfg.tol_psd, "PSD tolerance")->capture_default_str();
    sub->add_option("--tol-rank", cfg.tol_rank, "numerical rank tolerance")->capture_default_str();
    sub->add_option("--tol-range", cfg.tol_range, "range inclusion tolerance")->capture_default_str();
    sub->add_option("--tol-sym", cfg.tol_sym, "conjugate symmetry repair tolerance")->capture_default_str();
  };

  auto* check = app.add_subcommand("check", "test M(2) >= 0 and Ran B in Ran M(2); print W* M(2) W");
  check->add_option("input", input, "moment file")->required();
  add_tols(check);

  auto* classify = app.add_subcommand("classify", "print the case and the predicted minimal support");
  classify->add_option("input", input, "moment file")->required();
  add_tols(classify);

  auto* solve = app.add_subcommand("solve", "construct a representing measure");
  solve->add_option("input", input, "moment file")->required();
  solve->add_option("-o,--output", output, "measure file to write (default: stdout)");
  auto* g33 = solve->add_option("--gamma33", gamma33, "fix gamma_33 in Cases II");
  solve->add_option("--gap", cfg.gap_default, "Case II-2 offset of gamma_33 above max(a, e)")->capture_default_str();
  solve->add_option("--slack", cfg.slack_frac, "Case II-1 circle slack fraction")->capture_default_str();
  solve->add_flag("--no-search", [&](std::int64_t) { cfg.flatness_search = false; },
                  "fail instead of searching when the prescribed completion is not flat");
  add_tols(solve);

  auto* verify = app.add_subcommand("verify", "max relative residual of a measure against moments");
  verify->add_option("input", input, "moment file")->required();
  verify->add_option("measure", measure_path, "measure file")->required();
  verify->add_option("--tol", tol_verify, "pass threshold")->capture_default_str();

  auto* generate = app.add_subcommand("generate", "moments of an atomic measure");
  auto* seed_opt = generate->add_option("--seed", seed, "sample a random measure from this seed");
  generate->add_option("--count", count, "atoms to sample with --seed")->capture_default_str();
  auto* atom_opt = generate->add_option("--atom", atom_specs, "atom as RE,IM,WEIGHT (repeatable)");
  auto* file_opt = generate->add_option("--measure", measure_path, "measure file");
  generate->add_option("--degree", degree, "moment degree")->capture_default_str();
  generate->add_option("-o,--output", output, "moment file to write (default: stdout)");
  seed_opt->excludes(atom_opt)->excludes(file_opt);
  atom_opt->excludes(file_opt);

  CLI11_PARSE(app, argc, argv);
  cfg.extraction.tol_rank = cfg.tol_rank;
  if (*g33) cfg.gamma33_override = gamma33;

  if (*check) return qcmp::cmd_check(input, cfg, std::cout);
  if (*classify) return qcmp::cmd_classify(input, cfg, std::cout);
  if (*solve) return qcmp::cmd_solve(input, output, cfg, std::cout);
  if (*verify) return qcmp::cmd_verify(input, measure_path, tol_verify, std::cout);

  qcmp::GenerateRequest req;
  req.count = count;
  req.degree = degree;
  try {
    if (*seed_opt) req.seed = seed;
    else if (*file_opt) req.measure = qcmp::read_measure_file(measure_path).measure;
    else if (*atom_opt) req.measure = parse_atoms(atom_specs);
  } catch (const qcmp::Error& err) {
    std::cout << "error: " << err.what() << "\n";
    return qcmp::exit_code(err.code());
  }
  return qcmp::cmd_generate(req, output, std::cout);
}
