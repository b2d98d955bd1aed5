#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "agnorm/verify.hpp"

using namespace agnorm;

namespace {

// Every distinct left coset of every subgroup.
std::vector<Subset> all_cosets(const GroupPtr& g) {
  std::set<boost::dynamic_bitset<>> seen;
  std::vector<Subset> out;
  for (const auto& h : subgroups(g))
    for (elem x = 0; x < g->order(); ++x) {
      Subset c = coset(h, x);
      if (seen.insert(c.bits()).second) out.push_back(c);
    }
  return out;
}

// Fewest coset indicators (coefficients in ±1, ±2) summing to f, searched up to 3 terms; 0 for f = 0, -1 if none.
int min_terms_oracle(const Function& f, const std::vector<Subset>& cosets) {
  std::size_t n = f.size();
  std::vector<long> target(n);
  for (elem x = 0; x < n; ++x) target[x] = std::lround(f[x].real());
  if (std::all_of(target.begin(), target.end(), [](long v) { return v == 0; })) return 0;
  const int zs[] = {-2, -1, 1, 2};
  std::vector<long> acc(n, 0);
  std::function<bool(int, std::size_t)> search = [&](int left, std::size_t from) {
    if (acc == target) return true;
    if (left == 0) return false;
    for (std::size_t i = from; i < cosets.size(); ++i)
      for (int z : zs) {
        for (elem x : cosets[i].members()) acc[x] += z;
        bool ok = search(left - 1, i + 1);
        for (elem x : cosets[i].members()) acc[x] -= z;
        if (ok) return true;
      }
    return false;
  };
  for (int k = 1; k <= 3; ++k)
    if (search(k, 0)) return k;
  return -1;
}

void expect_valid_decomposition(const Function& f, const CosetDecomposition& d) {
  EXPECT_TRUE(d.exact());
  for (const auto& t : d.terms) {
    EXPECT_TRUE(is_subgroup(t.subgroup));
    EXPECT_NE(t.coefficient, 0);
  }
  for (std::size_t i = 1; i < d.norms.size(); ++i) EXPECT_LE(d.norms[i], d.norms[i - 1] - 0.5 + 1e-6);
  Function sum(f.group_ptr());
  for (const auto& t : d.terms) sum = sum + term_function(t);
  EXPECT_LT(sum.distance(f), 1e-12);
}

}  // namespace

TEST(Rounding, Examples) {
  GroupPtr g = build_group("cyclic:5");
  Function f(g, {1.0, -2.0, 0.0, 3.0, 0.0});
  auto r = round_to_integer(f, 0.1);
  EXPECT_EQ(r.max_deviation, 0.0);
  EXPECT_EQ(r.rounded.distance(f), 0.0);

  Function c = Function::constant(g, 0.4);
  auto rc = round_to_integer(c, 0.45);
  EXPECT_EQ(rc.rounded.sup_norm(), 0.0);
  EXPECT_NEAR(rc.max_deviation, 0.4, 1e-15);
  try {
    round_to_integer(c, 0.3);
    FAIL() << "0.4 accepted as 0.3-almost integer";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("element 0"), std::string::npos) << e.what();
  }
  EXPECT_THROW(round_to_integer(f, 0.5), UsageError);
}

TEST(CosetRounding, SubgroupIndicator) {
  GroupPtr g = build_group("dihedral:8");
  for (const auto& h : subgroups(g)) {
    Function f = Function::indicator(h);
    auto cr = coset_rounding(f, h, 0.1, 1.0, 1.0);
    ASSERT_EQ(cr.terms.size(), 1u);
    EXPECT_EQ(cr.terms[0].coefficient, 1);
    EXPECT_EQ(cr.terms[0].rep, g->identity());
    EXPECT_EQ(cr.terms[0].subgroup, h);
    EXPECT_LT(cr.residual.sup_norm(), 1e-15);
  }
}

TEST(CosetRounding, NestedSubgroupsMatchCosetScan) {
  GroupPtr g = build_group("symmetric:4");
  auto subs = subgroups(g);
  int checked = 0;
  for (const auto& h : subs)
    for (const auto& k : subs) {
      if (!k.subset_of(h) || k == h) continue;
      Function f = Function::indicator(h) * cplx(2.0) - Function::indicator(k);
      double m = a_norm(f);
      double eta = k.measure() / f.l1_norm();
      auto cr = coset_rounding(f, k, 0.01, m + 1e-9, eta);
      // oracle: the mean of f on each left coset of k
      std::map<boost::dynamic_bitset<>, long> expect;
      for (elem x = 0; x < g->order(); ++x) {
        Subset c = coset(k, x);
        double s = 0;
        for (elem y : c.members()) s += f[y].real();
        long z = std::lround(s / double(c.size()));
        if (z != 0) expect[c.bits()] = z;
      }
      std::map<boost::dynamic_bitset<>, long> got;
      for (const auto& t : cr.terms) got[coset(t.subgroup, t.rep).bits()] = t.coefficient;
      EXPECT_EQ(got, expect);
      EXPECT_EQ(got.size(), h.size() / k.size());
      ++checked;
    }
  EXPECT_GT(checked, 10);
}

TEST(CosetRounding, NoisyIndicator) {
  GroupPtr g = build_group("quaternion:12");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> noise(-0.1, 0.1);
  for (const auto& h : subgroups(g)) {
    Function f = Function::indicator(h);
    for (elem x = 0; x < g->order(); ++x) f[x] += noise(rng);
    auto cr = coset_rounding(f, h, 0.15, 1.0, 1.0);
    ASSERT_EQ(cr.terms.size(), 1u);
    EXPECT_EQ(cr.terms[0].subgroup, h);
    EXPECT_LE(cr.residual.integer_defect(), 0.3);
  }
}

TEST(CosetRounding, HypothesisAudits) {
  GroupPtr g = build_group("cyclic:6");
  Subset h(g, std::vector<elem>{0, 3});
  Function f = Function::indicator(h);
  EXPECT_THROW(coset_rounding(f, h, 0.2, 1.0, 1.0), AuditError);
  EXPECT_THROW(coset_rounding(f, h, 0.1, 0.5, 1.0), AuditError);
  EXPECT_THROW(coset_rounding(f, h, 0.1, 1.0, 1.5), AuditError);
  // 1_{0} averaged over {0,3} is 1/2 everywhere on h
  EXPECT_THROW(coset_rounding(Function::indicator(Subset::identity(g)), h, 0.1, 10.0, 0.1), AuditError);
  AuditLog log;
  try {
    coset_rounding(f, h, 0.2, 1.0, 1.0, log);
  } catch (const AuditError& e) {
    EXPECT_EQ(e.stage(), "coset_rounding");
  }
  EXPECT_FALSE(log.entries().back().passed);
}

TEST(LevelSubgroup, IndicatorsOfCosets) {
  for (const char* spec : {"symmetric:3", "dihedral:12", "cyclic:12"}) {
    GroupPtr g = build_group(spec);
    for (const auto& h : subgroups(g)) {
      EXPECT_EQ(find_level_subgroup(Function::indicator(h), 1e-3), h) << spec;
      for (elem x = 0; x < g->order(); x += 3)
        EXPECT_EQ(find_level_subgroup(Function::indicator(coset(h, x)), 1e-3), h) << spec;
    }
  }
}

TEST(LevelSubgroup, NoAdmissibleSubgroup) {
  GroupPtr g = build_group("dihedral:8");
  Function f = Function::indicator(Subset(g, std::vector<elem>{0, 1, 5})) * cplx(0.4);
  EXPECT_FALSE(find_level_subgroup(f, 1e-3, subgroups(g)).has_value());
  EXPECT_THROW(find_level_subgroup(f, 1e-3), AuditError);
}

TEST(LevelSubgroup, TieBreakPrefersLargerThenEarlier) {
  GroupPtr g = build_group("cyclic:12");
  auto subs = subgroups(g);
  Subset h(g, std::vector<elem>{0, 6});
  Function f = Function::indicator(h);
  // {0}, {0,6} both give sup 1; the larger wins regardless of order
  std::vector<Subset> both{Subset::identity(g), h};
  EXPECT_EQ(*find_level_subgroup(f, 1e-3, both), h);
  std::reverse(both.begin(), both.end());
  EXPECT_EQ(*find_level_subgroup(f, 1e-3, both), h);
}

TEST(Decompose, TrivialCases) {
  GroupPtr g = build_group("symmetric:3");
  auto empty = idempotent_decompose(Function(g));
  EXPECT_TRUE(empty.terms.empty());
  EXPECT_TRUE(empty.exact());
  for (const auto& h : subgroups(g)) {
    auto d = idempotent_decompose(Function::indicator(h));
    ASSERT_EQ(d.terms.size(), 1u);
    EXPECT_EQ(d.terms[0].subgroup, h);
    EXPECT_EQ(d.terms[0].coefficient, 1);
    expect_valid_decomposition(Function::indicator(h), d);
  }
  EXPECT_THROW(idempotent_decompose(Function::constant(g, 0.5)), UsageError);
}

TEST(Decompose, UnionOfTwoSubgroups) {
  GroupPtr g = build_group("symmetric:3");
  auto cosets = all_cosets(g);
  std::vector<Subset> order2;
  for (const auto& h : subgroups(g))
    if (h.size() == 2) order2.push_back(h);
  ASSERT_EQ(order2.size(), 3u);
  Subset u = order2[0] | order2[1];
  Function f = Function::indicator(u);
  // 1_H + 1_K - 1_{e} has three terms, but 1_H + 1_{k} with k the involution of K needs only two
  EXPECT_EQ(min_terms_oracle(f, cosets), 2);
  auto d = idempotent_decompose(f);
  expect_valid_decomposition(f, d);
  EXPECT_GE(int(d.terms.size()), 2);
}

TEST(Decompose, DifferenceOfNestedCosets) {
  GroupPtr g = build_group("symmetric:4");
  auto subs = subgroups(g);
  int checked = 0;
  for (const auto& h : subs)
    for (const auto& k : subs) {
      if (!k.subset_of(h) || k == h || k.size() == 1) continue;
      for (elem x : {elem(0), elem(5), elem(17)}) {
        Function f = Function::indicator(coset(h, x)) - Function::indicator(coset(k, x));
        auto d = idempotent_decompose(f);
        expect_valid_decomposition(f, d);
        EXPECT_LE(d.terms.size(), h.size() / k.size() - 1);
        ++checked;
      }
    }
  EXPECT_GT(checked, 10);
}

TEST(Decompose, RandomCosetCombinations) {
  std::mt19937_64 rng(2);
  for (const auto& spec : catalog_specs()) {
    GroupPtr g = build_group(spec);
    if (g->order() > 24) continue;
    auto rep = verify_decomposition(g, 8, rng);
    for (const auto& c : rep.checks) EXPECT_TRUE(c.passed()) << spec << ": " << c.first_failure;
  }
}

TEST(Decompose, StepBudgetReportsPartial) {
  GroupPtr g = build_group("cyclic:12");
  Function f = Function::indicator(Subset(g, std::vector<elem>{0, 1, 5, 7}));
  try {
    idempotent_decompose(f, 0);
    FAIL() << "step budget ignored";
  } catch (const DecompositionError& e) {
    EXPECT_EQ(e.stage(), "idempotent_decompose");
    EXPECT_TRUE(e.partial().terms.empty());
    Function rebuilt = e.residual();
    for (const auto& t : e.partial().terms) rebuilt = rebuilt + term_function(t);
    EXPECT_LT(rebuilt.distance(f), 1e-9);
  }
}

TEST(SmallNorm, Examples) {
  GroupPtr g = build_group("dihedral:8");
  for (const auto& h : subgroups(g))
    for (elem x = 0; x < g->order(); ++x) {
      Subset a = right_coset(h, x);
      auto w = small_norm_coset_test(a);
      ASSERT_TRUE(w.has_value());
      EXPECT_EQ(w->subgroup, h);
      EXPECT_EQ(right_coset(w->subgroup, w->rep), a);
      if (h.size() > 2) {
        Subset p = a;
        p.erase(a.members().back());
        EXPECT_FALSE(small_norm_coset_test(p).has_value());
      }
    }
  auto whole = small_norm_coset_test(Subset::whole(g));
  ASSERT_TRUE(whole.has_value());
  EXPECT_EQ(whole->subgroup, Subset::whole(g));
  EXPECT_EQ(whole->rep, g->identity());
}

TEST(SmallNorm, ExhaustiveDichotomy) {
  for (const auto& spec : catalog_specs()) {
    GroupPtr g = build_group(spec);
    if (g->order() > 8) continue;
    auto rep = verify_small_norm(g);
    for (const auto& c : rep.checks) EXPECT_TRUE(c.passed()) << spec << ": " << c.first_failure;
    EXPECT_GE(rep.notes.at("min non-coset norm"), small_norm_threshold) << spec;
  }
}

TEST(DualMass, IdentityAndWholeGroup) {
  std::mt19937_64 rng(3);
  for (const char* spec : {"symmetric:3", "dihedral:10", "cyclic:9"}) {
    GroupPtr g = build_group(spec);
    Function f = random_function(g, rng);
    EXPECT_NEAR(dual_mass(f, Subset::identity(g)), a_norm(f), 1e-9);
    Function z = f - Function::constant(g, f.mean());
    auto basis = fourier_basis(z);
    double oracle = 0;
    for (std::size_t i = 0; i < basis.values.size(); ++i)
      if (basis.values[i] > 1e-9) oracle += basis.values[i] * std::norm(basis.vectors[i].mean());
    EXPECT_NEAR(dual_mass(z, Subset::whole(g)), oracle, 1e-9);
    EXPECT_NEAR(dual_mass(z, Subset::whole(g)), 0.0, 1e-9);
    for (const auto& h : subgroups(g)) EXPECT_LE(dual_mass(f, h), a_norm(f) + 1e-8);
  }
}

TEST(DualMass, CollectionInequalityOnSubgroupPairs) {
  std::mt19937_64 rng(4);
  for (const char* spec : {"symmetric:3", "dihedral:8", "quaternion:8", "cyclic:12"}) {
    GroupPtr g = build_group(spec);
    auto subs = subgroups(g);
    for (int t = 0; t < 3; ++t) {
      Function f = random_function(g, rng);
      for (const auto& h : subs)
        for (const auto& k : subs) {
          if (!k.subset_of(h)) continue;
          MultiplicativePair p{h, k, h, h, unbounded_r};
          auto c = spectral_collection(f, p);
          EXPECT_GE(c.gain, c.bound - 1e-6) << spec;
          EXPECT_GE(c.gain, -1e-9) << spec;
        }
    }
  }
}

TEST(Continuity, SubgroupWitnesses) {
  GroupPtr g = build_group("cyclic:12");
  Subset h(g, std::vector<elem>{0, 3, 6, 9});
  auto w = continuity_witness(Function::indicator(h), h, 0.0);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->ground, h);
  EXPECT_EQ(w->perturb, h);

  Function f = Function::indicator(h) + Function::indicator(coset(h, 1)) * cplx(2.0) -
               Function::indicator(coset(h, 2));
  Subset gens(g, std::vector<elem>{0, 3, 9});
  auto w2 = continuity_witness(f, gens, 0.0);
  ASSERT_TRUE(w2.has_value());
  EXPECT_EQ(w2->ground, h);
  EXPECT_TRUE(is_subgroup(w2->perturb));
  EXPECT_TRUE(continuity_holds(f, w2->ground, w2->perturb, 0.0));

  std::mt19937_64 rng(5);
  GroupPtr s4 = build_group("symmetric:4");
  Function r = random_function(s4, rng);
  EXPECT_FALSE(continuity_witness(r, Subset::whole(s4), 1e-6).has_value());
  EXPECT_THROW(continuity_witness(r, Subset(s4, std::vector<elem>{0, 1}), 0.1), UsageError);
}

TEST(DenseSubset, Examples) {
  GroupPtr g = build_group("cyclic:24");
  Subset h(g, std::vector<elem>{0, 6, 12, 18});
  auto sh = dense_small_doubling_subset(h, 1.0);
  EXPECT_EQ(sh.set, h);
  EXPECT_DOUBLE_EQ(sh.doubling, 1.0);

  Subset with_point = h;
  with_point.insert(1);
  auto sp = dense_small_doubling_subset(with_point, 0.1);
  EXPECT_EQ(sp.set, h);

  Subset two = h | coset(h, 1);
  auto st = dense_small_doubling_subset(two, 0.1);
  EXPECT_LE(st.doubling, 2.0);
  EXPECT_TRUE(st.set == two || st.set == h || st.set == coset(h, 1));

  EXPECT_THROW(dense_small_doubling_subset(with_point, 1.0), AuditError);
}

TEST(DenseSubset, GreedyOnLargeSets) {
  GroupPtr g = build_group("cyclic:60");
  Subset a(g);
  for (elem x = 0; x < 60; x += 3) a.insert(x);
  a.insert(1);
  a.insert(2);
  auto r = dense_small_doubling_subset(a, 0.01);
  EXPECT_GE(4 * r.set.size(), a.size());
  EXPECT_LE(r.doubling, doubling(a));
  EXPECT_TRUE(r.set.subset_of(a));
}

TEST(Spread, ConclusionsOnCosetFunctions) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  for (const char* spec : {"dihedral:12", "symmetric:4"}) {
    GroupPtr g = build_group(spec);
    for (const auto& h : subgroups(g)) {
      // f constant on left cosets of h, g a small perturbation
      Function f(g);
      std::uniform_int_distribution<int> z(-2, 2);
      Subset done(g);
      for (elem x = 0; x < g->order(); ++x) {
        if (done.contains(x)) continue;
        Subset c = coset(h, x);
        done = done | c;
        f = f + Function::indicator(c) * cplx(double(z(rng)));
      }
      Function gf = f;
      for (elem x = 0; x < g->order(); ++x) gf[x] += noise(rng);
      double eps = 0.05;
      auto s = spread_check(f, gf, h, eps);
      ASSERT_TRUE(s.hypotheses);
      EXPECT_EQ(s.subgroup, h);
      EXPECT_LT(s.defect, 5 * eps);
      EXPECT_GT(s.projected_sup, s.g_sup - 3 * eps);
    }
    Function f = Function::indicator(Subset::identity(g));
    EXPECT_FALSE(spread_check(f, f, Subset::whole(g), 0.05).hypotheses);
  }
  GroupPtr z = build_group("cyclic:4");
  EXPECT_THROW(spread_check(Function::constant(z, 0.5), Function(z), Subset::whole(z), 0.05), UsageError);
}
