#pragma once

#include <deque>
#include <functional>
#include <map>
#include <random>

#include "bohr.hpp"
#include "decompose.hpp"
#include "freiman.hpp"

namespace agnorm {

// Pass/fail counts for one named inequality across many trials.
struct CheckTally {
  std::string name;
  long trials = 0;
  long failures = 0;
  double worst_excess = 0;  // largest lhs - rhs seen, negative when all pass with slack
  std::string first_failure = {};
  bool seen = false;

  void check(bool ok, double excess, const std::string& where) {
    ++trials;
    if (!seen || excess > worst_excess) worst_excess = excess;
    seen = true;
    if (!ok) {
      if (failures == 0) first_failure = where;
      ++failures;
    }
  }
  // lhs <= rhs + tol
  void le(double lhs, double rhs, double tol, const std::string& where) { check(lhs <= rhs + tol, lhs - rhs, where); }
  void near(double a, double b, double tol, const std::string& where) {
    le(std::abs(a - b), 0.0, tol, where);
  }
  bool passed() const { return failures == 0; }
};

struct SuiteReport {
  std::string suite;
  std::string group;
  std::deque<CheckTally> checks = {};  // deque: tally() references stay valid
  std::map<std::string, double> notes = {};

  CheckTally& tally(const std::string& name) {
    for (auto& c : checks)
      if (c.name == name) return c;
    checks.push_back({name});
    return checks.back();
  }
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed()) return false;
    return true;
  }
  long failures() const {
    long n = 0;
    for (const auto& c : checks) n += c.failures;
    return n;
  }
};

namespace detail {

inline std::string trial_tag(const Group& g, long i) { return g.spec() + " trial " + std::to_string(i); }

inline Subset random_nonempty_subset(const GroupPtr& g, std::mt19937_64& rng, double p = 0.5) {
  Subset a = random_subset(g, rng, p);
  if (a.empty()) a.insert(elem(rng() % g->order()));
  return a;
}

// Random symmetric set containing the identity.
inline Subset random_neighbourhood(const GroupPtr& g, std::mt19937_64& rng, double p) {
  Subset a = random_subset(g, rng, p);
  a.insert(g->identity());
  return a | a.inverse();
}

// Random probability density supported on s.
inline Function random_density(const Subset& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Function mu(s.group_ptr());
  double total = 0;
  for (elem x : s.members()) {
    double w = u(rng);
    mu[x] = w;
    total += w;
  }
  return mu * cplx(double(s.group().order()) / total);
}

inline Function random_on(const Subset& s, std::mt19937_64& rng) {
  return restrict_to(random_function(s.group_ptr(), rng), s);
}

}  // namespace detail

// a_norm(f) = a_norm(f - f*mu_H) + a_norm(f*mu_H) for every subgroup H.
// Additivity holds when H is normal. For other subgroups only the triangle
// inequality is checked and the largest additivity gap is recorded as a note.
inline SuiteReport verify_decompmass(const GroupPtr& g, int trials, std::mt19937_64& rng) {
  SuiteReport rep{"decompmass", g->spec()};
  auto& add = rep.tally("mass additivity (normal H)");
  auto& tri = rep.tally("triangle bound (all H)");
  double gap = 0;
  for (const auto& h : subgroups(g)) {
    bool normal = is_normal(h);
    for (int i = 0; i < trials; ++i) {
      Function f = random_function(g, rng);
      Function p = coset_projection(f, h);
      double lhs = a_norm(f), rhs = a_norm(f - p) + a_norm(p);
      std::string where = detail::trial_tag(*g, i) + " |H|=" + std::to_string(h.size());
      if (normal) add.near(lhs, rhs, 1e-8 * std::max(1.0, lhs), where);
      else gap = std::max(gap, rhs - lhs);
      tri.le(lhs, rhs, 1e-8 * std::max(1.0, lhs), where);
    }
  }
  rep.notes["max additivity gap, non-normal H"] = gap;
  return rep;
}

// The global inequalities of the spectral layer, each on `trials` random inputs.
inline SuiteReport verify_spectral(const GroupPtr& g, int trials, std::mt19937_64& rng) {
  SuiteReport rep{"spectral", g->spec()};
  std::uniform_int_distribution<elem> pick(0, elem(g->order() - 1));
  for (int i = 0; i < trials; ++i) {
    std::string tag = detail::trial_tag(*g, i);
    Function f = random_function(g, rng), h = random_function(g, rng);
    double af = a_norm(f), ah = a_norm(h);
    ConvolutionOperator lf(f), lh(h);
    cplx hs = hs_inner(lf, lh);
    rep.tally("parseval").le(std::abs(hs - inner(f, h)), 0, 1e-10, tag);
    rep.tally("hausdorff-young").le(pm_norm(f), f.l1_norm(), 1e-10, tag);
    rep.tally("adjoint invariance").near(a_norm(adjoint(f)), af, 1e-9 * std::max(1.0, af), tag);
    rep.tally("translation invariance").near(a_norm(right_translate(f, pick(rng))), af, 1e-9 * std::max(1.0, af), tag);
    rep.tally("sup domination").le(f.sup_norm(), af, 1e-9, tag);
    rep.tally("algebra norm").le(a_norm(f.pointwise(h)), af * ah, 1e-8, tag);
    rep.tally("a-pm product").le(a_norm(convolve(f, h)), af * pm_norm(h), 1e-8, tag);
    Subset a = detail::random_nonempty_subset(g, rng);
    Function mu = Function::uniform(a);
    Function smooth = convolve(adjoint(mu), mu);
    rep.tally("pm contraction").le(pm_norm(Function::dirac(g, g->identity()) - smooth), 1.0, 1e-9, tag);
    rep.tally("convolution square").near(a_norm(convolve(adjoint(Function::indicator(a)), mu)), 1.0, 1e-9, tag);
  }
  return rep;
}

// a_norm(1_{xH}) = 1 for every subgroup H and every left coset.
inline SuiteReport verify_coset_norms(const GroupPtr& g) {
  SuiteReport rep{"cosetnorm", g->spec()};
  auto& t = rep.tally("coset norm one");
  for (const auto& h : subgroups(g)) {
    Subset done(g);
    for (elem x = 0; x < g->order(); ++x) {
      if (done.contains(x)) continue;
      Subset c = coset(h, x);
      done = done | c;
      t.near(a_norm(Function::indicator(c)), 1.0, 1e-9, g->spec() + " |H|=" + std::to_string(h.size()) + " x=" + std::to_string(x));
    }
  }
  return rep;
}

// Exact coset test by scanning subgroups: A is a left coset xH with x = min A.
inline bool is_coset(const Subset& a, const std::vector<Subset>& subs) {
  if (a.empty()) return false;
  elem x = a.first();
  for (const auto& h : subs)
    if (h.size() == a.size() && coset(h, x) == a) return true;
  return false;
}

// Exhaustive over nonempty subsets: norm below 1 + 1/750 exactly for cosets.
inline SuiteReport verify_small_norm(const GroupPtr& g) {
  if (g->order() > 12) throw UsageError("exhaustive small-norm scan needs order at most 12");
  SuiteReport rep{"smallnorm", g->spec()};
  auto& t = rep.tally("dichotomy");
  auto subs = subgroups(g);
  std::size_t n = g->order();
  double min_noncoset = INFINITY;
  for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask) {
    Subset a(g);
    for (elem x = 0; x < n; ++x)
      if (mask >> x & 1) a.insert(x);
    double norm = a_norm(Function::indicator(a));
    bool small = norm < small_norm_threshold;
    bool cos = is_coset(a, subs);
    if (!cos) min_noncoset = std::min(min_noncoset, norm);
    t.check(small == cos, small == cos ? -1.0 : 1.0, g->spec() + " mask " + std::to_string(mask));
  }
  rep.notes["min non-coset norm"] = min_noncoset;
  return rep;
}

// Nesting, containment, sub-multiplicativity and size bounds of symmetry sets over
// every nonempty subset and thresholds k * step.
inline SuiteReport verify_symmetry_laws(const GroupPtr& g, int grid = 12) {
  if (g->order() > 10) throw UsageError("exhaustive symmetry-set scan needs order at most 10");
  SuiteReport rep{"symsets", g->spec()};
  std::size_t n = g->order();
  for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask) {
    Subset a(g);
    for (elem x = 0; x < n; ++x)
      if (mask >> x & 1) a.insert(x);
    std::string tag = g->spec() + " mask " + std::to_string(mask);
    Subset aa = product_set(a, a.inverse());
    double m = a.measure();
    double c = energy(a) / (m * m * m);
    std::vector<Subset> sym;
    for (int k = 1; k <= grid; ++k) sym.push_back(symmetry_set(a, double(k) / grid));
    for (int k = 1; k <= grid; ++k) {
      const Subset& s = sym[std::size_t(k - 1)];
      double d = double(k) / grid;
      rep.tally("symmetric identity neighbourhood").check(s.is_symmetric() && s.contains_identity(), 0, tag);
      rep.tally("inside AA^-1").check(s.subset_of(aa), 0, tag);
      if (k > 1) rep.tally("nesting").check(s.subset_of(sym[std::size_t(k - 2)]), 0, tag);
      rep.tally("size upper bound").le(s.measure(), std::min(aa.measure(), m / d), 1e-12, tag);
      rep.tally("size lower bound").le((c - d) * m, s.measure(), 1e-12, tag);
      // Sym_d * Sym_{1-e} inside Sym_{d-e} for grid e < d
      for (int j = 1; j < k; ++j) {
        const Subset& big = sym[std::size_t(grid - j - 1)];  // threshold 1 - j/grid
        Subset target = symmetry_set(a, double(k - j) / grid);
        rep.tally("sub-multiplicativity").check(product_set(s, big).subset_of(target), 0,
                                                tag + " d=" + std::to_string(k) + " e=" + std::to_string(j));
      }
    }
  }
  return rep;
}

// Every pair constructor validates; approx Haar defect is at most the closure.
inline SuiteReport verify_pairs(const GroupPtr& g, int trials, std::mt19937_64& rng) {
  SuiteReport rep{"approxhaar", g->spec()};
  auto subs = subgroups(g);
  std::uniform_int_distribution<std::size_t> pick_sub(0, subs.size() - 1);
  std::uniform_int_distribution<elem> pick(0, elem(g->order() - 1));
  std::uniform_int_distribution<int> pick_r(1, 2);
  for (int i = 0; i < trials; ++i) {
    std::string tag = detail::trial_tag(*g, i);
    std::vector<std::pair<std::string, MultiplicativePair>> made;
    const Subset& h = subs[pick_sub(rng)];
    made.emplace_back("subgroup", pair_from_subgroup(h));
    Subset a = detail::random_neighbourhood(g, rng, 2.0 / double(g->order()));
    int r = pick_r(rng);
    made.emplace_back("product set", pair_from_product_set(a, r));
    made.emplace_back("growth", pair_from_growth(a, r, 0.25));
    made.emplace_back("conjugate", conjugate_pair(made.back().second, pick(rng)));
    made.emplace_back("canonical", canonical_pair(power_set(a, 2), a, 1));
    if (is_normal(h)) {
      Subset reps = detail::random_neighbourhood(g, rng, 1.0 / double(g->order()));
      made.emplace_back("coset union", pair_from_coset_union(h, reps));
    }
    for (auto& [name, p] : made) {
      auto v = validate_pair(p);
      rep.tally("valid: " + name).check(v.valid, v.valid ? 0 : 1, tag + (v.valid ? "" : " " + v.failures.front()));
      Function mu = detail::random_density(p.perturb_power(), rng);
      rep.tally("approx haar: " + name).le(approx_haar_defect(p, mu), p.epsilon(), 1e-10, tag);
    }
  }
  return rep;
}

// Local Bessel, local Hausdorff-Young, the Parseval dimension bound and
// eigenvector sup bounds on random pairs with random f supported on B'.
inline SuiteReport verify_local_fourier(const GroupPtr& g, int trials, std::mt19937_64& rng) {
  SuiteReport rep{"local", g->spec()};
  auto subs = subgroups(g);
  std::uniform_int_distribution<std::size_t> pick_sub(0, subs.size() - 1);
  std::uniform_real_distribution<double> pick_delta(0.05, 1.0);
  {
    Function f = random_function(g, rng);
    Subset whole = Subset::whole(g);
    MultiplicativePair full{whole, whole, whole, whole, unbounded_r};
    auto local = local_fourier_basis(full, f).values;
    RealVector global = singular_values(f);
    auto& t = rep.tally("whole-group pair matches global spectrum");
    for (std::size_t i = 0; i < local.size(); ++i) t.near(local[i], global(Eigen::Index(i)), 1e-10, g->spec());
  }
  for (int i = 0; i < trials; ++i) {
    std::string tag = detail::trial_tag(*g, i);
    MultiplicativePair p = i % 2 == 0
                               ? pair_from_subgroup(subs[pick_sub(rng)])
                               : pair_from_product_set(detail::random_neighbourhood(g, rng, 1.5 / double(g->order())), 1);
    Function f = detail::random_on(p.perturb, rng);
    double c = p.thickness();
    double l1 = local_l1(f, p.perturb), l2 = local_l2(f, p.perturb);
    LocalOperator op(p, f);
    double hs = op.matrix().squaredNorm();
    rep.tally("local bessel").le(hs, l2 * l2 / c, 1e-9, tag);
    auto basis = local_fourier_basis(p, f);
    rep.tally("local hausdorff-young").le(basis.values.front(), l1, 1e-8, tag);
    for (std::size_t k = 0; k < basis.values.size(); ++k) {
      double s = basis.values[k];
      if (s <= zero_floor * std::max(1.0, basis.values.front())) continue;
      double bound = l1 * l2 / (s * s * std::sqrt(c));
      rep.tally("eigenvector sup bound").le(local_sup(basis.vectors[k], p.ground), bound, 1e-8 * std::max(1.0, bound), tag);
    }
    double delta = pick_delta(rng);
    SpectrumSlice slice = spectrum(p, f, delta);
    double dim_bound = l2 * l2 / (c * delta * delta * l1 * l1);
    rep.tally("parseval dimension bound").le(double(slice.dim()), dim_bound, 1e-8, tag);
    if (slice.dim() > 0) {
      Function v(g);
      for (const auto& b : slice.basis) {
        std::normal_distribution<double> nd;
        v = v + b * cplx(nd(rng), nd(rng));
      }
      v = v * cplx(1.0 / local_l2(v, p.ground));
      double bound = l2 * l2 / (delta * delta * delta * c * l1 * l1);
      rep.tally("slice sup bound").le(local_sup(v, p.ground), bound, 1e-8 * std::max(1.0, bound), tag);
    }
  }
  return rep;
}

// Random matrices with singular values in [lo, hi].
inline SuiteReport verify_nearest_unitary(int trials, std::size_t d, double lo, double hi, std::mt19937_64& rng) {
  SuiteReport rep{"approxunitary", "matrices"};
  std::uniform_real_distribution<double> u(lo, hi);
  for (int i = 0; i < trials; ++i) {
    std::string tag = "trial " + std::to_string(i);
    Matrix a = haar_unitary(d, rng), b = haar_unitary(d, rng);
    Eigen::VectorXd s(Eigen::Index(d), 1);
    double dev = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      s(k) = u(rng);
      dev = std::max(dev, std::abs(s(k) - 1));
    }
    Matrix m = a * s.cast<cplx>().asDiagonal() * b.adjoint();
    NearestUnitary nu = nearest_unitary(m);
    Matrix id = Matrix::Identity(m.rows(), m.cols());
    rep.tally("unitary").le((nu.u.adjoint() * nu.u - id).cwiseAbs().maxCoeff(), 0, 1e-10, tag);
    rep.tally("distance bound").le(operator_norm(m - nu.u), dev, 1e-9, tag);
  }
  return rep;
}

// recover_from_operator inverts the convolution matrix; a right translation by a
// non-central element is not a convolution operator and is rejected.
inline SuiteReport verify_inversion(const GroupPtr& g, int trials, std::mt19937_64& rng) {
  SuiteReport rep{"inversion", g->spec()};
  for (int i = 0; i < trials; ++i) {
    Function f = random_function(g, rng);
    Function back = recover_from_operator(g, ConvolutionOperator(f).matrix());
    rep.tally("roundtrip").le(back.distance(f), 0, 1e-10, detail::trial_tag(*g, i));
  }
  if (!g->is_abelian()) {
    // right translation by a non-central element does not commute with all right translations
    for (elem y = 0; y < g->order(); ++y) {
      bool central = true;
      for (elem x = 0; x < g->order(); ++x) central = central && g->mul(x, y) == g->mul(y, x);
      if (central) continue;
      bool rejected = false;
      try {
        (void)recover_from_operator(g, right_translation_matrix(*g, y));
      } catch (const UsageError&) {
        rejected = true;
      }
      rep.tally("non-commuting operator rejected").check(rejected, rejected ? 0 : 1, g->spec() + " y=" + std::to_string(y));
      break;
    }
  }
  return rep;
}

// Random integer combinations of up to three coset indicators decompose exactly
// with the per-step norm drop.
inline SuiteReport verify_decomposition(const GroupPtr& g, int trials, std::mt19937_64& rng) {
  SuiteReport rep{"decompose", g->spec()};
  auto subs = subgroups(g);
  std::uniform_int_distribution<std::size_t> pick_sub(0, subs.size() - 1);
  std::uniform_int_distribution<elem> pick(0, elem(g->order() - 1));
  std::uniform_int_distribution<int> pick_z(-2, 2);
  long max_terms = 0, total_steps = 0;
  for (int i = 0; i < trials; ++i) {
    std::string tag = detail::trial_tag(*g, i);
    Function f(g);
    for (int k = 0; k < 3; ++k)
      f = f + Function::indicator(coset(subs[pick_sub(rng)], pick(rng))) * cplx(double(pick_z(rng)));
    bool ok = false;
    std::string why;
    try {
      auto d = idempotent_decompose(f);
      ok = d.exact();
      max_terms = std::max(max_terms, long(d.terms.size()));
      total_steps += long(d.norms.size()) - 1;
    } catch (const Error& e) {
      why = std::string(" ") + e.what();
    }
    rep.tally("exact decomposition with norm drop").check(ok, ok ? 0 : 1, tag + why);
  }
  rep.notes["max terms"] = double(max_terms);
  rep.notes["mean steps"] = trials ? double(total_steps) / trials : 0;
  return rep;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"decompmass", "spectral", "cosetnorm", "smallnorm", "symsets",
                                              "approxhaar", "local",    "approxunitary", "inversion", "decompose"};
  return names;
}

inline SuiteReport run_suite(const std::string& name, const GroupPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (name == "decompmass") return verify_decompmass(g, 20, rng);
  if (name == "spectral") return verify_spectral(g, 50, rng);
  if (name == "cosetnorm") return verify_coset_norms(g);
  if (name == "smallnorm") return verify_small_norm(g);
  if (name == "symsets") return verify_symmetry_laws(g);
  if (name == "approxhaar") return verify_pairs(g, 20, rng);
  if (name == "local") return verify_local_fourier(g, 20, rng);
  if (name == "approxunitary") return verify_nearest_unitary(50, 4, 0.8, 1.2, rng);
  if (name == "inversion") return verify_inversion(g, 20, rng);
  if (name == "decompose") return verify_decomposition(g, 50, rng);
  std::string all;
  for (const auto& n : suite_names()) all += " " + n;
  throw UsageError("unknown suite '" + name + "'; known:" + all);
}

}  // namespace agnorm
