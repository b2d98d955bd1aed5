#include <random>

#include <gtest/gtest.h>

#include "agnorm/bohr.hpp"

using namespace agnorm;

namespace {

std::vector<Matrix> scalar_phases(std::size_t n, std::size_t count) {
  const double tau = 2 * std::acos(-1.0);
  std::vector<Matrix> phi;
  for (std::size_t x = 0; x < n; ++x) {
    Matrix m(1, 1);
    m(0, 0) = std::polar(1.0, tau * double(x % count) / double(count));
    phi.push_back(m);
  }
  return phi;
}

}  // namespace

TEST(UnitaryRep, RejectsBadInput) {
  GroupPtr g = build_group("cyclic:4");
  EXPECT_THROW(UnitaryRep(g, std::vector<Matrix>(3, Matrix::Identity(1, 1))), UsageError);
  std::vector<Matrix> scaled(4, Matrix::Identity(1, 1) * cplx(2.0));
  EXPECT_THROW(UnitaryRep(g, scaled), UsageError);
  // x -> i^x with one matrix replaced: not a homomorphism
  auto mats = character_rep(g, {1}).matrices();
  mats[2] = Matrix::Identity(1, 1);
  EXPECT_THROW(UnitaryRep(g, mats), UsageError);
  std::vector<Matrix> mixed(4, Matrix::Identity(1, 1));
  mixed[1] = Matrix::Identity(2, 2);
  EXPECT_THROW(UnitaryRep(g, mixed), UsageError);
}

TEST(UnitaryRep, RegularRepIsHomomorphism) {
  for (const char* spec : {"symmetric:3", "quaternion:8"}) {
    GroupPtr g = build_group(spec);
    auto rep = regular_rep(g);
    EXPECT_EQ(rep.dim(), g->order());
  }
}

TEST(BohrSet, FullRadiusAndTrivialRep) {
  GroupPtr g = build_group("dihedral:10");
  EXPECT_EQ(bohr_set(regular_rep(g), 2.0), Subset::whole(g));
  auto triv = trivial_rep(g, 3);
  for (double d : {0.0, 0.3, 2.0}) EXPECT_EQ(bohr_set(triv, d), Subset::whole(g));
  EXPECT_THROW(bohr_set(triv, -0.1), UsageError);
  EXPECT_THROW(bohr_set(triv, 2.5), UsageError);
}

TEST(BohrSet, CyclicCharacter) {
  GroupPtr g = build_group("cyclic:12");
  double delta = std::abs(std::polar(1.0, 2 * std::acos(-1.0) / 12) - cplx(1.0));
  EXPECT_EQ(bohr_set(character_rep(g, {1}), delta).members(), (std::vector<elem>{0, 1, 11}));
  EXPECT_EQ(bohr_set(character_rep(g, {1}), 0.99 * delta).members(), (std::vector<elem>{0}));
  // two frequencies: the operator norm takes the worse coordinate
  EXPECT_EQ(bohr_set(character_rep(g, {1, 5}), delta).members(), (std::vector<elem>{0}));
  EXPECT_EQ(bohr_set(character_rep(g, {4}), 0.1).members(), (std::vector<elem>{0, 3, 6, 9}));
}

TEST(BohrSet, RegularRepSeparatesAtSmallRadius) {
  for (const char* spec : {"symmetric:3", "dihedral:8", "cyclic:7"}) {
    GroupPtr g = build_group(spec);
    auto rep = regular_rep(g);
    double least = 2;
    for (elem y = 0; y < g->order(); ++y)
      if (y != g->identity()) least = std::min(least, distance_to_identity(rep(y)));
    EXPECT_EQ(bohr_set(rep, 0.99 * least), Subset::identity(g)) << spec;
  }
}

TEST(BohrSet, NestedSymmetricNeighbourhoods) {
  std::vector<UnitaryRep> reps{character_rep(build_group("cyclic:30"), {1, 7, 12}),
                               regular_rep(build_group("symmetric:3")),
                               regular_rep(build_group("quaternion:8"))};
  for (const auto& rep : reps) {
    Subset prev = Subset::identity(rep.group_ptr());
    for (int k = 0; k <= 40; ++k) {
      Subset b = bohr_set(rep, k / 20.0);
      EXPECT_TRUE(b.is_symmetric());
      EXPECT_TRUE(b.contains_identity());
      EXPECT_TRUE(prev.subset_of(b));
      prev = b;
    }
  }
}

TEST(HaarUnitary, UnitaryAndSeeded) {
  std::mt19937_64 a(7), b(7);
  for (std::size_t d : {1u, 2u, 5u}) {
    Matrix u = haar_unitary(d, a);
    Matrix v = haar_unitary(d, b);
    auto n = Eigen::Index(d);
    EXPECT_LT((u.adjoint() * u - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ((u - v).norm(), 0.0);
  }
}

TEST(UnitaryCover, ConstantMapKeepsEverything) {
  GroupPtr g = build_group("symmetric:4");
  std::mt19937_64 rng(3);
  Matrix u = haar_unitary(3, rng);
  std::vector<Matrix> phi(g->order(), u);
  Subset b = Subset::whole(g);
  EXPECT_EQ(unitary_cover_subset(b, phi, 0.1, 8, 1), b);
}

TEST(UnitaryCover, SeparatedMapGivesSingleton) {
  GroupPtr g = build_group("cyclic:8");
  auto phi = scalar_phases(8, 8);
  Subset out = unitary_cover_subset(Subset::whole(g), phi, 0.5, 16, 2);
  EXPECT_EQ(out.size(), 1u);
}

TEST(UnitaryCover, ArcOracleOnCyclic) {
  GroupPtr g = build_group("cyclic:64");
  auto phi = character_rep(g, {1}).matrices();
  double delta = 0.5;
  // largest run of consecutive phases whose extreme angles differ by at most 2 asin(delta/2)
  double step = 2 * std::acos(-1.0) / 64;
  std::size_t bin = std::size_t(std::floor(2 * std::asin(delta / 2) / step + 1e-12)) + 1;
  EXPECT_EQ(bin, 6u);
  Subset out = unitary_cover_subset(Subset::whole(g), phi, delta, 32, 5);
  EXPECT_GE(out.size(), bin);
  EXPECT_TRUE(pairwise_close(out.members(), phi, delta));
}

TEST(UnitaryCover, PairwiseBoundOnRandomMaps) {
  std::mt19937_64 rng(9);
  GroupPtr g = build_group("dihedral:12");
  for (int t = 0; t < 5; ++t) {
    std::vector<Matrix> phi;
    // a few clusters of nearby unitaries
    std::vector<Matrix> centres{haar_unitary(2, rng), haar_unitary(2, rng), haar_unitary(2, rng)};
    for (elem x = 0; x < g->order(); ++x) {
      Matrix jitter = haar_unitary(2, rng);
      Matrix m = centres[x % 3] * (Matrix::Identity(2, 2) + 0.05 * (jitter - Matrix::Identity(2, 2)));
      Eigen::HouseholderQR<Matrix> qr(m);
      phi.push_back(qr.householderQ() * Matrix::Identity(2, 2));
    }
    Subset b(g, std::vector<elem>{0, 1, 2, 3, 4, 5, 6, 7});
    for (double delta : {0.2, 0.8, 1.5}) {
      Subset out = unitary_cover_subset(b, phi, delta, 16, std::uint64_t(t));
      EXPECT_FALSE(out.empty());
      EXPECT_TRUE(out.subset_of(b));
      EXPECT_TRUE(pairwise_close(out.members(), phi, delta));
      EXPECT_EQ(out, unitary_cover_subset(b, phi, delta, 16, std::uint64_t(t)));
    }
  }
  std::vector<Matrix> bad(g->order(), Matrix::Identity(2, 2) * cplx(1.1));
  EXPECT_THROW(unitary_cover_subset(Subset::whole(g), bad, 0.5, 4, 0), UsageError);
  EXPECT_THROW(unitary_cover_subset(Subset::whole(g), bad, 0.0, 4, 0), UsageError);
}
