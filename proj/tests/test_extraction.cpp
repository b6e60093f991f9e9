#include <random>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace qcmp;

namespace {

using C = Complex;

/// Flat M(n+1) of a measure with at most dim(n) atoms, and the basis of M(n).
std::pair<MomentMatrix, BasisSelection> flat_pair(const AtomicMeasure& mu, int n) {
  const MomentSequence seq = generate_moments(mu, 2 * n + 2);
  return {build_moment_matrix(seq, n + 1), column_space_basis(build_moment_matrix(seq, n))};
}

}  // namespace

TEST(ValidateMeasure, Errors) {
  EXPECT_NO_THROW(validate_measure({{0.0, 1.0}, {1.0, 2.0}}));
  EXPECT_THROW(validate_measure({{0.0}, {1.0, 2.0}}), Error);
  EXPECT_THROW(validate_measure({{0.0}, {-1.0}}), Error);
  EXPECT_THROW(validate_measure({{0.0, 1e-9}, {1.0, 1.0}}), Error);
  EXPECT_THROW(validate_measure({{C(NAN, 0)}, {1.0}}), Error);
}

TEST(GenerateMoments, Examples) {
  EXPECT_EQ(generate_moments({{C(1, 1)}, {1.0}}, 3)(1, 2), C(2, 2));
  const MomentSequence ring = generate_moments({{1.0, -1.0, C(0, 1), C(0, -1)}, {1, 1, 1, 1}}, 2);
  EXPECT_EQ(ring(0, 0), C(4.0));
  EXPECT_EQ(ring(0, 1), C(0.0));
  EXPECT_EQ(ring(1, 0), C(0.0));
  EXPECT_EQ(ring(1, 1), C(4.0));
  EXPECT_EQ(ring(0, 2), C(0.0));
  EXPECT_EQ(ring(2, 0), C(0.0));
  const MomentSequence six = generate_moments(fixtures::six_atom_measure(), 5);
  const MomentSequence reference = fixtures::six_atom_sequence();
  for (const auto& m : monomials_up_to(5)) EXPECT_LT(std::abs(six.at(m) - reference.at(m)), 1e-13);
}

TEST(VerifyMeasure, Examples) {
  EXPECT_LT(verify_measure(fixtures::six_atom_sequence(), fixtures::six_atom_measure()), 1e-14);
  const AtomicMeasure origin{{0.0}, {1.0}};
  EXPECT_EQ(verify_measure(generate_moments(origin, 5), origin), 0.0);
  AtomicMeasure off = fixtures::six_atom_measure();
  off.weights[0] += 1e-3;  // atom at 0 only moves gamma_00
  EXPECT_NEAR(verify_measure(fixtures::six_atom_sequence(), off), 1e-3 / 7.0, 1e-12);
  // empty measure: residual gamma_00 / (1 + gamma_00)
  EXPECT_NEAR(verify_measure(generate_moments(origin, 5), AtomicMeasure{}), 0.5, 1e-15);
}

TEST(VerifyMeasure, ZeroOnOwnMoments) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const AtomicMeasure mu = fixtures::random_measure(rng, 1 + trial % 8);
    EXPECT_LT(verify_measure(generate_moments(mu, 5), mu), 1e-13);
  }
}

TEST(ColumnSpaceBasis, Examples) {
  const BasisSelection full = column_space_basis(build_moment_matrix(fixtures::six_atom_sequence(), 2));
  EXPECT_EQ(full.indices, monomials_up_to(2));
  const BasisSelection one = column_space_basis(build_moment_matrix(generate_moments({{0.0}, {1.0}}, 4), 2));
  EXPECT_EQ(one.indices, (std::vector<MonomialIndex>{{0, 0}}));
  std::mt19937_64 rng(8);
  const AtomicMeasure mu = fixtures::random_measure(rng, 3);
  const MomentMatrix m = build_moment_matrix(generate_moments(mu, 4), 2);
  const BasisSelection b3 = column_space_basis(m);
  ASSERT_EQ(b3.size(), 3u);
  EXPECT_EQ(numeric_rank(m.restricted(b3.indices, b3.indices)), 3);
  EXPECT_EQ(b3.indices, (std::vector<MonomialIndex>{{0, 0}, {0, 1}, {1, 0}}));
  EXPECT_NO_THROW(make_basis(m, b3.indices));
  EXPECT_THROW(make_basis(m, {{0, 0}, {0, 1}, {1, 0}, {0, 2}}), Error);
}

TEST(MultiplicationMatrix, PointMass) {
  const C c(0.4, -1.3);
  const auto [flat, basis] = flat_pair({{c}, {2.0}}, 0);
  const Eigen::MatrixXcd mult = multiplication_matrix(flat, basis);
  ASSERT_EQ(mult.rows(), 1);
  EXPECT_LT(std::abs(mult(0, 0) - c), 1e-14);
}

TEST(MultiplicationMatrix, SixAtomsFromFlatM3) {
  const auto [flat, basis] = flat_pair(fixtures::six_atom_measure(), 2);
  const std::vector<C> atoms = eigen_atoms(multiplication_matrix(flat, basis));
  EXPECT_LT(oracle::match_distance(atoms, fixtures::six_atom_measure().atoms), 1e-10);
}

TEST(MultiplicationMatrix, RandomThreeAtoms) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const AtomicMeasure mu = fixtures::random_measure(rng, 3);
    const auto [flat, basis] = flat_pair(mu, 1);
    const std::vector<C> atoms = eigen_atoms(multiplication_matrix(flat, basis));
    EXPECT_LT(oracle::match_distance(atoms, mu.atoms), 1e-8);
  }
}

TEST(MultiplicationMatrix, NonFlatIsRejected) {
  std::mt19937_64 rng(14);
  const AtomicMeasure mu = fixtures::random_measure(rng, 8);
  const MomentSequence seq = generate_moments(mu, 4);
  const MomentMatrix m2 = build_moment_matrix(seq, 2);
  const BasisSelection b = column_space_basis(build_moment_matrix(seq, 1));
  try {
    multiplication_matrix(m2, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExpressFailure);
  }
  EXPECT_THROW(multiplication_matrix(m2, column_space_basis(m2)), Error);
}

TEST(EigenAtoms, AreIndependentOfTheBasis) {
  // three collinear atoms: 1, Z and Z^2 span, as do 1, Z and Zbar Z
  const AtomicMeasure mu{{C(-1, -1), C(0.5, 0.5), C(2, 2)}, {1.0, 2.0, 0.5}};
  const MomentSequence seq = generate_moments(mu, 6);
  const MomentMatrix m3 = build_moment_matrix(seq, 3), m2 = build_moment_matrix(seq, 2);
  const BasisSelection greedy = column_space_basis(m2);
  ASSERT_EQ(greedy.size(), 3u);
  const BasisSelection other = make_basis(m2, {{0, 0}, {0, 1}, {1, 1}});
  const auto a1 = eigen_atoms(multiplication_matrix(m3, greedy));
  const auto a2 = eigen_atoms(multiplication_matrix(m3, other));
  EXPECT_LT(oracle::match_distance(a1, a2), 1e-8);
}

TEST(EigenAtoms, MergesNearDuplicates) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0 + 1e-10;
  m(2, 2) = 2.0;
  EXPECT_EQ(eigen_atoms(m).size(), 2u);
}

TEST(SolveWeights, Examples) {
  const MomentSequence seq = fixtures::six_atom_sequence();
  const BasisSelection basis{monomials_up_to(2)};
  const std::vector<double> w = solve_weights(fixtures::six_atom_measure().atoms, seq, basis);
  for (double v : w) EXPECT_NEAR(v, 1.0, 1e-12);

  const C c(1.5, 0.2);
  const MomentSequence one = generate_moments({{c}, {3.5}}, 5);
  const std::vector<double> w1 = solve_weights({c}, one, BasisSelection{{{0, 0}}});
  EXPECT_NEAR(w1[0], one(0, 0).real(), 1e-12);

  std::mt19937_64 rng(15);
  const AtomicMeasure mu = fixtures::random_measure(rng, 4);
  const std::vector<double> w4 = solve_weights(mu.atoms, generate_moments(mu, 5), BasisSelection{});
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(w4[k], mu.weights[k], 1e-7 * mu.weights[k]);
}

TEST(SolveWeights, Errors) {
  // atoms that do not carry these moments get a negative weight
  const MomentSequence seq = generate_moments({{0.0, 1.0}, {1.0, 1.0}}, 3);
  EXPECT_THROW(solve_weights({0.0, 1.0, 2.0, 3.0}, generate_moments({{0.0, 1.0, 2.0, 3.0}, {1.0, -0.5, 1.0, 1.0}}, 3),
                             BasisSelection{}),
               Error);
  EXPECT_THROW(solve_weights({0.0, 0.0}, seq, BasisSelection{{{0, 0}, {0, 1}}}), Error);
}

TEST(ExtractMeasure, RoundTripUpToSixAtoms) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    const AtomicMeasure mu = fixtures::random_measure(rng, 1 + trial % 6);
    const auto [flat, basis] = flat_pair(mu, 2);
    const AtomicMeasure got = extract_measure(flat, basis, generate_moments(mu, 5));
    EXPECT_EQ(got.size(), static_cast<std::size_t>(numeric_rank(flat.entries)));
    EXPECT_TRUE(oracle::same_measure(mu, got, 1e-6));
  }
}
