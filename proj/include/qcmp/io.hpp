#ifndef QCMP_IO_HPP
#define QCMP_IO_HPP

///
/// \file io.hpp
///
/// Text formats and the command implementations behind the qcmp tool.
///
/// Moment file:                     Measure file:
///
///   # comment                        # re im weight
///   degree 5                         0 0 1
///   0 0 6 0                          1 0 1
///   1 0 1 -1                         ...
///   ...
///
/// Moment records are `i j re im` for gamma_ij; of a conjugate pair one half
/// may be omitted. Numbers are written in shortest round-trip form.
///

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qcmp/error.hpp"
#include "qcmp/extraction.hpp"
#include "qcmp/moment_core.hpp"
#include "qcmp/quintic_solver.hpp"

namespace qcmp {

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    const std::size_t start = k;
    while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    if (k > start) out.push_back(line.substr(start, k - start));
  }
  return out;
}

inline std::string where(int line_no) { return "line " + std::to_string(line_no) + ": "; }

template <typename T>
T parse_number(std::string_view s, int line_no) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError, where(line_no) + "cannot read number '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline std::string format_complex(Complex z) {
  return "(" + format_double(z.real()) + ", " + format_double(z.imag()) + ")";
}

struct MomentRecord {
  int i = 0;
  int j = 0;
  Complex value;
};

struct MomentFile {
  int degree = 0;
  std::vector<MomentRecord> moments;

  /// Conjugate completion followed by validate_sequence.
  MomentSequence to_sequence(double tol_sym = 1e-9) const {
    std::map<MonomialIndex, Complex> raw;
    for (const auto& r : moments) {
      if (r.i < 0 || r.j < 0 || r.i + r.j > degree)
        throw Error(ErrorCode::ParseError, "record (" + std::to_string(r.i) + ", " + std::to_string(r.j) +
                                               ") lies outside degree " + std::to_string(degree));
      if (!raw.emplace(MonomialIndex{r.i, r.j}, r.value).second)
        throw Error(ErrorCode::ParseError,
                    "duplicate record (" + std::to_string(r.i) + ", " + std::to_string(r.j) + ")");
    }
    for (const auto& m : monomials_up_to(degree))
      if (!raw.contains(m))
        if (auto it = raw.find(m.conjugate()); it != raw.end()) raw[m] = std::conj(it->second);
    return validate_sequence(raw, degree, tol_sym);
  }

  static MomentFile from_sequence(const MomentSequence& seq) {
    MomentFile f;
    f.degree = seq.degree();
    for (const auto& m : monomials_up_to(seq.degree())) f.moments.push_back({m.conj_power, m.power, seq.at(m)});
    return f;
  }
};

inline MomentFile parse_moment_file(std::istream& in) {
  MomentFile f;
  bool have_degree = false;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (!have_degree) {
      if (fields.size() != 2 || fields[0] != "degree")
        throw Error(ErrorCode::ParseError, detail::where(line_no) + "expected 'degree N'");
      f.degree = detail::parse_number<int>(fields[1], line_no);
      if (f.degree < 0) throw Error(ErrorCode::ParseError, detail::where(line_no) + "negative degree");
      have_degree = true;
      continue;
    }
    if (fields.size() != 4) throw Error(ErrorCode::ParseError, detail::where(line_no) + "expected 'i j re im'");
    f.moments.push_back({detail::parse_number<int>(fields[0], line_no), detail::parse_number<int>(fields[1], line_no),
                         {detail::parse_number<double>(fields[2], line_no),
                          detail::parse_number<double>(fields[3], line_no)}});
  }
  if (!have_degree) throw Error(ErrorCode::ParseError, "missing 'degree N' line");
  return f;
}

inline void write_moment_file(std::ostream& out, const MomentFile& f) {
  out << "# i j re im  (gamma_ij = integral of conj(z)^i z^j)\n";
  out << "degree " << f.degree << "\n";
  for (const auto& r : f.moments)
    out << r.i << ' ' << r.j << ' ' << format_double(r.value.real()) << ' ' << format_double(r.value.imag()) << "\n";
}

struct MeasureFile {
  AtomicMeasure measure;
};

inline MeasureFile parse_measure_file(std::istream& in) {
  MeasureFile f;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 3) throw Error(ErrorCode::ParseError, detail::where(line_no) + "expected 're im weight'");
    f.measure.atoms.emplace_back(detail::parse_number<double>(fields[0], line_no),
                                 detail::parse_number<double>(fields[1], line_no));
    f.measure.weights.push_back(detail::parse_number<double>(fields[2], line_no));
  }
  validate_measure(f.measure);
  return f;
}

inline void write_measure_file(std::ostream& out, const MeasureFile& f) {
  out << "# re im weight\n";
  for (std::size_t k = 0; k < f.measure.size(); ++k)
    out << format_double(f.measure.atoms[k].real()) << ' ' << format_double(f.measure.atoms[k].imag()) << ' '
        << format_double(f.measure.weights[k]) << "\n";
}

inline MomentFile read_moment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return parse_moment_file(in);
}

inline MeasureFile read_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return parse_measure_file(in);
}

/// Writes through a string so a failed command leaves no partial file.
template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  std::ofstream out(path);
  if (!out || !(out << buf.str())) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
}

/// Atoms uniform in [-2, 2]^2, weights log-uniform in [0.1, 10].
inline AtomicMeasure sample_measure(std::uint64_t seed, int count) {
  if (count < 1) throw Error(ErrorCode::BadAtomSpec, "atom count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0), logw(std::log(0.1), std::log(10.0));
  AtomicMeasure mu;
  for (int k = 0; k < count; ++k) {
    const double re = coord(rng), im = coord(rng);
    mu.atoms.emplace_back(re, im);
    mu.weights.push_back(std::exp(logw(rng)));
  }
  validate_measure(mu);
  return mu;
}

// ---------------------------------------------------------------------------
// commands; each returns the process exit code
// ---------------------------------------------------------------------------

namespace detail {

template <typename Body>
int guarded(std::ostream& out, Body&& body) {
  try {
    return body();
  } catch (const Error& err) {
    out << "error: " << err.what() << "\n";
    return exit_code(err.code());
  } catch (const std::exception& err) {
    out << "error: " << err.what() << "\n";
    return 2;
  }
}

inline MomentSequence read_sequence(const std::string& path, const SolverConfig& cfg) {
  return read_moment_file(path).to_sequence(cfg.tol_sym);
}

inline void print_middle(std::ostream& out, const MiddleBlock& mb) {
  out << "a = " << format_double(mb.a) << "\n"
      << "b = " << format_complex(mb.b) << "\n"
      << "c = " << format_complex(mb.c) << "\n"
      << "d = " << format_complex(mb.d) << "\n"
      << "e = " << format_double(mb.e) << "\n"
      << "f = " << format_complex(mb.f) << "\n"
      << "persymmetry defect = " << format_double(mb.persymmetry_defect) << "\n";
}

inline const char* open_case_message() {
  return "a = e with b != f is the open case of the quintic moment problem; no construction is known";
}

}  // namespace detail

inline int cmd_check(const std::string& input, const SolverConfig& cfg, std::ostream& out) {
  return detail::guarded(out, [&] {
    const QuinticAnalysis an = analyze(detail::read_sequence(input, cfg), cfg);
    out << "M(2) psd: " << (an.psd.is_psd ? "yes" : "no") << " (min eigenvalue "
        << format_double(an.psd.min_eigenvalue) << ")\n";
    out << "rank M(2) = " << an.rank_m2 << "\n";
    out << "Ran B in Ran M(2): " << (an.range_ok ? "yes" : "no") << " (residual " << format_double(an.range_residual)
        << ")\n";
    if (!an.conditions_hold()) return 1;
    detail::print_middle(out, *an.middle);
    return 0;
  });
}

inline int cmd_classify(const std::string& input, const SolverConfig& cfg, std::ostream& out) {
  return detail::guarded(out, [&] {
    const QuinticAnalysis an = detail::require_conditions(detail::read_sequence(input, cfg), cfg);
    out << "case: " << to_string(*an.label) << "\n";
    if (*an.label == CaseLabel::Unsupported) {
      out << detail::open_case_message() << "\n";
      return 3;
    }
    const int extra = *an.predicted_support - an.rank_m2;
    out << "predicted minimal support: " << *an.predicted_support << " (r" << (extra ? " + " + std::to_string(extra) : "")
        << ", r = " << an.rank_m2 << ")\n";
    return 0;
  });
}

inline void print_report(std::ostream& out, const SolverReport& rep) {
  out << "case: " << to_string(rep.label) << "\n";
  if (rep.completion) {
    out << "gamma_33 = " << format_double(rep.completion->gamma33) << "\n";
    out << "gamma_42 = " << format_complex(rep.completion->gamma42) << "\n";
  }
  if (rep.boundary_phase) out << "boundary phase = " << format_double(*rep.boundary_phase) << "\n";
  if (rep.alpha) out << "alpha = " << format_complex(*rep.alpha) << "\n";
  if (rep.gamma43) out << "gamma_43 = " << format_complex(*rep.gamma43) << "\n";
  out << "rank M(2) = " << rep.rank_m2 << "\n";
  if (rep.rank_m3) out << "rank M(3) = " << *rep.rank_m3 << "\n";
  if (rep.rank_m4) out << "rank M(4) = " << *rep.rank_m4 << "\n";
  out << "support: " << rep.achieved_support << " (predicted " << rep.predicted_support << ")\n";
  if (rep.minimality_not_reached) out << "warning: support exceeds the predicted minimum\n";
  out << "max moment residual = " << format_double(rep.max_moment_residual) << "\n";
  for (const auto& n : rep.notes) out << "note: " << n << "\n";
}

/// Solves and writes the measure to `output` (or prints it when empty).
inline int cmd_solve(const std::string& input, const std::string& output, const SolverConfig& cfg,
                     std::ostream& out) {
  return detail::guarded(out, [&] {
    Solution sol;
    try {
      sol = solve(detail::read_sequence(input, cfg), cfg);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::UnsupportedCase) throw;
      out << "error: " << err.what() << "\n" << detail::open_case_message() << "\n";
      return 3;
    }
    print_report(out, sol.report);
    const MeasureFile mf{sol.measure};
    if (output.empty()) write_measure_file(out, mf);
    else write_file(output, [&](std::ostream& o) { write_measure_file(o, mf); });
    return 0;
  });
}

inline int cmd_verify(const std::string& input, const std::string& measure, double tol, std::ostream& out) {
  return detail::guarded(out, [&] {
    const MomentSequence seq = read_moment_file(input).to_sequence();
    const MeasureFile mf = read_measure_file(measure);
    const double res = verify_measure(seq, mf.measure);
    out << "max relative residual = " << format_double(res) << "\n";
    return res <= tol ? 0 : 1;
  });
}

struct GenerateRequest {
  std::optional<AtomicMeasure> measure;
  std::optional<std::uint64_t> seed;
  int count = 6;
  int degree = 5;
};

inline int cmd_generate(const GenerateRequest& req, const std::string& output, std::ostream& out) {
  return detail::guarded(out, [&] {
    if (req.measure.has_value() == req.seed.has_value())
      throw Error(ErrorCode::InvalidArgument, "give either atoms or a seed");
    if (req.degree < 0) throw Error(ErrorCode::InvalidArgument, "negative degree");
    const AtomicMeasure mu = req.seed ? sample_measure(*req.seed, req.count) : *req.measure;
    validate_measure(mu);
    if (mu.size() == 0) throw Error(ErrorCode::BadAtomSpec, "no atoms");
    const MomentFile mf = MomentFile::from_sequence(generate_moments(mu, req.degree));
    if (output.empty()) write_moment_file(out, mf);
    else write_file(output, [&](std::ostream& o) { write_moment_file(o, mf); });
    return 0;
  });
}

}  // namespace qcmp

#endif  // QCMP_IO_HPP
