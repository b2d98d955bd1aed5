#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "agnorm/function.hpp"

using namespace agnorm;

namespace {

Subset from_mask(const GroupPtr& g, std::uint64_t mask) {
  Subset a(g);
  for (elem x = 0; x < g->order(); ++x)
    if (mask >> x & 1) a.insert(x);
  return a;
}

// Every subset closed under products and containing the identity.
std::set<boost::dynamic_bitset<>> brute_force_subgroups(const GroupPtr& g) {
  std::set<boost::dynamic_bitset<>> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << g->order()); ++mask) {
    Subset a = from_mask(g, mask);
    if (!a.contains_identity()) continue;
    bool closed = true;
    for (elem x : a.members())
      for (elem y : a.members()) closed = closed && a.contains(g->mul(x, y));
    if (closed) out.insert(a.bits());
  }
  return out;
}

}  // namespace

TEST(GroupAxioms, CatalogGroupsPassEveryCheck) {
  for (const auto& spec : catalog_specs()) {
    GroupPtr g = build_group(spec);
    std::size_t n = g->order();
    for (elem x = 0; x < n; ++x) {
      std::vector<bool> row(n), col(n);
      for (elem y = 0; y < n; ++y) {
        row[g->mul(x, y)] = true;
        col[g->mul(y, x)] = true;
      }
      EXPECT_EQ(std::count(row.begin(), row.end(), true), long(n)) << spec;
      EXPECT_EQ(std::count(col.begin(), col.end(), true), long(n)) << spec;
      EXPECT_EQ(g->mul(g->identity(), x), x);
      EXPECT_EQ(g->mul(x, g->inv(x)), g->identity());
    }
    for (elem a = 0; a < n; ++a)
      for (elem b = 0; b < n; ++b)
        for (elem c = 0; c < n; ++c) ASSERT_EQ(g->mul(g->mul(a, b), c), g->mul(a, g->mul(b, c))) << spec;
  }
}

TEST(GroupBuild, TrivialGroup) {
  GroupPtr g = build_group("cyclic:1");
  EXPECT_EQ(g->order(), 1u);
  EXPECT_EQ(subgroups(g).size(), 1u);
}

TEST(GroupBuild, DihedralIsNonAbelian) {
  GroupPtr g = build_group("dihedral:8");
  EXPECT_EQ(g->order(), 8u);
  EXPECT_FALSE(g->is_abelian());
  EXPECT_NE(g->mul(1, 4), g->mul(4, 1));
}

TEST(GroupBuild, OrdersOfFamilies) {
  EXPECT_EQ(build_group("symmetric:4")->order(), 24u);
  EXPECT_EQ(build_group("quaternion:8")->order(), 8u);
  EXPECT_EQ(build_group("quaternion:12")->order(), 12u);
  EXPECT_EQ(build_group("cyclic:2xsymmetric:3")->order(), 12u);
  EXPECT_TRUE(build_group("cyclic:3xcyclic:5")->is_abelian());
}

TEST(GroupBuild, QuaternionHasOneInvolution) {
  GroupPtr g = build_group("quaternion:8");
  int involutions = 0;
  for (elem x = 0; x < 8; ++x)
    if (x != g->identity() && g->mul(x, x) == g->identity()) ++involutions;
  EXPECT_EQ(involutions, 1);
}

TEST(GroupBuild, MalformedSpecsAreRejected) {
  EXPECT_THROW(build_group("cyclic"), UsageError);
  EXPECT_THROW(build_group("cyclic:0"), UsageError);
  EXPECT_THROW(build_group("cyclic:abc"), UsageError);
  EXPECT_THROW(build_group("torus:4"), UsageError);
  EXPECT_THROW(build_group("cyclic:5000"), UsageError);
  EXPECT_THROW(build_group("dihedral:7"), UsageError);
}

TEST(GroupBuild, BadTableReportsViolation) {
  // Latin square on 3 elements that is not associative
  std::vector<elem> t{0, 1, 2, 1, 0, 2, 2, 2, 0};
  EXPECT_THROW(Group::from_table(3, t, {}, "bad", true), UsageError);
  std::vector<elem> nonassoc{0, 1, 2, 3, 4, 1, 0, 3, 4, 2, 2, 4, 0, 1, 3, 3, 2, 4, 0, 1, 4, 3, 1, 2, 0};
  try {
    Group::from_table(5, nonassoc, {}, "loop", true);
    FAIL() << "non-associative table accepted";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("associativ"), std::string::npos) << e.what();
  }
}

TEST(GroupTables, RoundTripThroughText) {
  GroupPtr g = build_group("symmetric:3");
  std::stringstream ss;
  write_cayley_table(ss, *g);
  GroupPtr back = read_cayley_table(ss, "@mem");
  EXPECT_TRUE(g->same_as(*back));
  EXPECT_EQ(back->labels(), g->labels());
}

TEST(GroupTables, ShippedCatalogMatchesBuilders) {
  for (const auto& spec : catalog_specs()) {
    std::filesystem::path p = std::filesystem::path(AGNORM_CATALOG_DIR) / catalog_file_name(spec);
    std::ifstream in(p);
    ASSERT_TRUE(in) << "missing " << p;
    std::stringstream shipped;
    shipped << in.rdbuf();
    std::stringstream fresh;
    write_cayley_table(fresh, *build_group(spec));
    EXPECT_EQ(shipped.str(), fresh.str()) << spec;
    GroupPtr loaded = build_group("@" + p.string());
    EXPECT_TRUE(loaded->same_as(*build_group(spec)));
  }
}

TEST(Subgroups, CyclicFour) {
  auto subs = subgroups(build_group("cyclic:4"));
  ASSERT_EQ(subs.size(), 3u);
  EXPECT_EQ(subs[0].members(), (std::vector<elem>{0}));
  EXPECT_EQ(subs[1].members(), (std::vector<elem>{0, 2}));
  EXPECT_EQ(subs[2].size(), 4u);
}

TEST(Subgroups, SymmetricThreeHasSix) { EXPECT_EQ(subgroups(build_group("symmetric:3")).size(), 6u); }

TEST(Subgroups, MatchBruteForceOnSmallCatalog) {
  for (const auto& spec : catalog_specs()) {
    GroupPtr g = build_group(spec);
    if (g->order() > 16) continue;
    auto oracle = brute_force_subgroups(g);
    auto subs = subgroups(g);
    std::set<boost::dynamic_bitset<>> got;
    for (const auto& h : subs) got.insert(h.bits());
    EXPECT_EQ(got, oracle) << spec;
    EXPECT_EQ(got.size(), subs.size()) << spec << " has duplicates";
    EXPECT_TRUE(std::is_sorted(subs.begin(), subs.end(), [](const Subset& a, const Subset& b) {
      return a.size() < b.size();
    }));
  }
}

TEST(Subgroups, FamilyClosedUnderConjugation) {
  for (const char* spec : {"symmetric:4", "dihedral:12", "quaternion:8", "cyclic:2xsymmetric:3"}) {
    GroupPtr g = build_group(spec);
    auto subs = subgroups(g);
    std::set<boost::dynamic_bitset<>> all;
    for (const auto& h : subs) all.insert(h.bits());
    for (const auto& h : subs)
      for (elem y = 0; y < g->order(); ++y) EXPECT_TRUE(all.count(conjugate(h, y).bits())) << spec;
  }
}

TEST(Subgroups, CapIsEnforced) {
  GroupPtr g = build_group("cyclic:65");
  EXPECT_THROW(subgroups(g), UsageError);
  EXPECT_EQ(subgroups(g, 128).size(), 4u);
}

TEST(GeneratedSubgroup, Examples) {
  GroupPtr c6 = build_group("cyclic:6");
  EXPECT_EQ(generated_subgroup(Subset(c6)).members(), (std::vector<elem>{0}));
  EXPECT_EQ(generated_subgroup(Subset::singleton(c6, 2)).members(), (std::vector<elem>{0, 2, 4}));
  GroupPtr s3 = build_group("symmetric:3");
  // find a transposition and a 3-cycle by element order
  elem t = 0, c = 0;
  for (elem x = 0; x < 6; ++x) {
    if (x == s3->identity()) continue;
    if (s3->mul(x, x) == s3->identity()) t = x;
    else c = x;
  }
  Subset s(s3, std::vector<elem>{t, c});
  EXPECT_EQ(generated_subgroup(s).size(), 6u);
}

TEST(GeneratedSubgroup, IsIdempotent) {
  std::mt19937_64 rng(3);
  GroupPtr g = build_group("symmetric:4");
  for (int i = 0; i < 50; ++i) {
    Subset s = random_subset(g, rng, 0.1);
    Subset h = generated_subgroup(s);
    EXPECT_TRUE(is_subgroup(h));
    EXPECT_TRUE(s.subset_of(h));
    EXPECT_EQ(generated_subgroup(h), h);
  }
}

TEST(Cosets, IdentityCosetAndConjugation) {
  GroupPtr g = build_group("dihedral:8");
  std::mt19937_64 rng(5);
  for (const auto& h : subgroups(g)) EXPECT_EQ(coset(h, g->identity()), h);
  for (int i = 0; i < 40; ++i) {
    Subset a = random_subset(g, rng);
    elem y = elem(rng() % 8);
    EXPECT_EQ(conjugate(a, y).size(), a.size());
  }
  EXPECT_THROW(coset(Subset(g, std::vector<elem>{0, 1}), 2), UsageError);
}

TEST(Cosets, ReflectionSubgroupMovesUnderRotation) {
  GroupPtr g = build_group("dihedral:8");
  Subset h(g, std::vector<elem>{0, 4});  // {e, s}
  ASSERT_TRUE(is_subgroup(h));
  Subset k = conjugate(h, 1);  // r s r^-1
  EXPECT_NE(k, h);
  EXPECT_EQ(k.size(), 2u);
  EXPECT_TRUE(is_subgroup(k));
}

TEST(Cosets, LeftRightInterchange) {
  // xH = (x H x^-1) x
  GroupPtr g = build_group("symmetric:4");
  for (const auto& h : subgroups(g))
    for (elem x = 0; x < g->order(); x += 5) EXPECT_EQ(coset(h, x), right_coset(conjugate(h, x), x));
}

TEST(SubsetOps, ProductAndPowers) {
  GroupPtr c5 = build_group("cyclic:5");
  Subset a(c5, std::vector<elem>{0, 1});
  EXPECT_EQ(power_set(a, 2).members(), (std::vector<elem>{0, 1, 2}));
  EXPECT_EQ(power_set(a, 0), Subset::identity(c5));
  GroupPtr g = build_group("quaternion:8");
  std::mt19937_64 rng(9);
  for (const auto& h : subgroups(g)) EXPECT_EQ(product_set(h, h), h);
  for (int i = 0; i < 30; ++i) {
    Subset b = random_subset(g, rng);
    if (b.empty()) continue;
    EXPECT_TRUE(product_set(b, inverse_set(b)).contains_identity());
    EXPECT_EQ(b.inverse().inverse(), b);
  }
}

TEST(SubsetOps, SymmetryFlagsMatchMembership) {
  GroupPtr g = build_group("dihedral:6");
  for (std::uint64_t mask = 0; mask < 64; ++mask) {
    Subset a = from_mask(g, mask);
    bool sym = true;
    for (elem x : a.members()) sym = sym && a.contains(g->inv(x));
    EXPECT_EQ(a.is_symmetric(), sym);
    EXPECT_EQ(a.contains_identity(), a.contains(g->identity()));
    EXPECT_DOUBLE_EQ(a.measure(), double(a.size()) / 6.0);
  }
}

TEST(SubsetOps, MixedGroupsRejected) {
  Subset a = Subset::whole(build_group("cyclic:4"));
  Subset b = Subset::whole(build_group("cyclic:2xcyclic:2"));
  EXPECT_THROW((void)product_set(a, b), UsageError);
}
