#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "audit.hpp"
#include "pairs.hpp"

namespace agnorm {

struct FournierResult {
  Subset subgroup;
  elem shift;          // A is concentrated on subgroup * shift
  double energy_gap;   // c with energy = (1 - c) mu(A)^3
  double overlap;      // mu(A ∩ H x) / mu(H)
};

inline FournierResult fournier_subgroup(const Subset& a, double eta, AuditLog& log) {
  const std::string stage = "fournier_subgroup";
  require_nonempty(a);
  double alpha = a.measure();
  double c = std::max(0.0, 1.0 - energy(a) / (alpha * alpha * alpha));
  log.require_le(stage, "12c <= eta", 12 * c, eta, 1e-12);
  log.require(stage, "eta < 1/12", eta < 1.0 / 12, eta, 1.0 / 12);
  Subset k = symmetry_set(a, 1 - eta);
  Subset kk = symmetry_set(a, 1 - 2 * eta);
  Subset k2 = product_set(k, k);
  log.require(stage, "K^2 inside Sym_{1-2eta}(A)", k2.subset_of(kk));
  log.require(stage, "mu(K^2) < 3/2 mu(K)", 2 * k2.size() < 3 * k.size(), double(k2.size()), 1.5 * double(k.size()));
  log.require(stage, "K^2 is a subgroup", is_subgroup(k2));
  const Group& g = a.group();
  elem best = 0;
  std::size_t best_count = 0;
  for (elem x = 0; x < g.order(); ++x) {
    std::size_t cnt = (a & right_translate(k2, x)).size();
    if (cnt > best_count) {
      best_count = cnt;
      best = x;
    }
  }
  double mh = k2.measure();
  double overlap = double(best_count) / double(k2.size());
  log.require_le(stage, "mu(H) >= (1 - c/eta) mu(A)", (1 - c / eta) * alpha, mh);
  log.require_le(stage, "mu(A ∩ Hx) >= (1 - 2 eta) mu(H)", 1 - 2 * eta, overlap);
  log.record(stage, "overlap", overlap);
  return {k2, best, c, overlap};
}

inline FournierResult fournier_subgroup(const Subset& a, double eta) {
  AuditLog log;
  return fournier_subgroup(a, eta, log);
}

struct SymWitness {
  Subset witness;   // A' ⊆ A
  Subset sym;       // Sym_{1-eps}(A'A)
  double size = 0;  // mu(sym)
};

// Candidates in order: A, each singleton, greedy growth from the best singleton,
// then `budget` random subsets. A later candidate must be strictly larger to win.
inline SymWitness sym_witness_search(const Subset& a, double eps, int budget = 16, std::uint64_t seed = 0) {
  require_nonempty(a);
  if (!(eps > 0 && eps <= 1)) throw UsageError("witness parameter must lie in (0,1]");
  auto eval = [&](const Subset& w) {
    Subset s = product_set(w, a);
    return count_threshold_set(s, difference_counts(s), std::max(1 - eps, 1e-12));
  };
  SymWitness best{a, eval(a), 0};
  best.size = best.sym.measure();
  auto consider = [&](const Subset& w) {
    Subset s = eval(w);
    if (s.size() > best.sym.size()) best = {w, s, s.measure()};
    return s.size();
  };
  auto members = a.members();
  elem top = members[0];
  std::size_t top_size = 0;
  for (elem x : members) {
    std::size_t s = consider(Subset::singleton(a.group_ptr(), x));
    if (s > top_size) {
      top_size = s;
      top = x;
    }
  }
  Subset grow = Subset::singleton(a.group_ptr(), top);
  std::size_t grow_size = top_size;
  for (std::size_t round = 0; round < members.size(); ++round) {
    std::size_t step_best = grow_size;
    elem pick = 0;
    bool found = false;
    for (elem x : members) {
      if (grow.contains(x)) continue;
      Subset w = grow;
      w.insert(x);
      std::size_t s = eval(w).size();
      if (s > step_best) {
        step_best = s;
        pick = x;
        found = true;
      }
    }
    if (!found) break;
    grow.insert(pick);
    grow_size = step_best;
  }
  consider(grow);
  std::seed_seq seq{seed, std::uint64_t(0x5157)};
  std::mt19937_64 rng(seq);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < budget; ++i) {
    Subset w(a.group_ptr());
    for (elem x : members)
      if (coin(rng)) w.insert(x);
    if (w.empty()) w.insert(members[std::size_t(i) % members.size()]);
    consider(w);
  }
  return best;
}

struct TriplingResult {
  Subset set;        // A' = x^{-1} A_1 x, with x A' ⊆ A
  elem shift;        // x
  Subset witness;    // A''
  double size_ratio;  // |A'| / |A|
  double tripling;    // |A'^3| / |A'|
  double overlap;     // |A_0 ∩ A x^{-1}| / |A_0|
};

inline TriplingResult doubling_to_tripling(const Subset& a, AuditLog& log, int budget = 16, std::uint64_t seed = 0) {
  const std::string stage = "doubling_to_tripling";
  require_nonempty(a);
  SymWitness w = sym_witness_search(a, 1.0 / 6, budget, seed);
  Subset a0 = w.sym;
  const Group& g = a.group();
  elem best = 0;
  std::size_t best_count = 0;
  for (elem x = 0; x < g.order(); ++x) {
    std::size_t cnt = (a0 & right_translate(a, g.inv(x))).size();
    if (cnt > best_count) {
      best_count = cnt;
      best = x;
    }
  }
  log.require(stage, "A_1 nonempty", best_count > 0);
  Subset a1 = a0 & right_translate(a, g.inv(best));
  Subset aa = product_set(w.witness, a);
  Subset a1cube = power_set(a1, 3);
  log.require(stage, "A_1^3 inside Sym_{1/2}(A''A)", a1cube.subset_of(symmetry_set(aa, 0.5)));
  log.require_le(stage, "mu(A_1^3) <= 2 mu(A''A)", double(a1cube.size()), 2.0 * double(aa.size()));
  Subset ap = conjugate(a1, g.inv(best));
  log.require(stage, "x A' inside A", left_translate(ap, best).subset_of(a));
  double overlap = double(best_count) / double(a0.size());
  log.record(stage, "overlap", overlap);
  TriplingResult out{ap, best, w.witness, double(ap.size()) / double(a.size()), tripling(ap), overlap};
  log.record(stage, "tripling", out.tripling);
  return out;
}

inline TriplingResult doubling_to_tripling(const Subset& a) {
  AuditLog log;
  return doubling_to_tripling(a, log);
}

struct WeakFreimanResult {
  MultiplicativePair pair;
  Subset witness;
  double doubling;
  double eta;
  double threshold;  // c'
  double ratio;      // regularity ratio at c'
};

inline WeakFreimanResult weak_freiman(const Subset& a, int r, double eps, AuditLog& log, int budget = 16,
                                      std::uint64_t seed = 0) {
  const std::string stage = "weak_freiman";
  require_nonempty(a);
  if (r < 1) throw UsageError("r must be positive");
  if (!(eps > 0 && eps <= 1)) throw UsageError("eps must lie in (0,1]");
  log.require(stage, "A symmetric", a.is_symmetric());
  double k = doubling(a);
  double k4 = std::pow(k, 4);
  double eta = eps / (1 + std::log(4 * k4));
  log.record(stage, "doubling", k);
  log.record(stage, "eta", eta);
  double narrow = eta / (16 * r * k4);
  SymWitness w = sym_witness_search(a, narrow, budget, seed);
  Subset s = product_set(w.witness, a);
  Subset bp = w.sym;
  log.require(stage, "B'^r inside Sym_{1-eta/16K^4}(A'A)", power_set(bp, r).subset_of(symmetry_set(s, 1 - eta / (16 * k4))));
  double ms = s.measure();
  log.require_le(stage, "energy(A'A) >= mu(A'A)^3 / K^4", ms * ms * ms / k4, energy(s), 1e-15);
  RegularThreshold reg = sym_regular_threshold(s, 1 / k4, eta);
  log.record(stage, "threshold", reg.threshold);
  log.record(stage, "regularity ratio", reg.ratio);
  auto counts = difference_counts(s);
  Subset upper = count_threshold_set(s, counts, reg.threshold);
  Subset lower = count_threshold_set(s, counts, reg.threshold * (1 + eta));
  Subset ground = count_threshold_set(s, counts, reg.threshold * (1 + eta / 2));
  MultiplicativePair p{ground, bp, upper, lower, r};
  auto rep = validate_pair(p);
  log.require(stage, "pair is r-multiplicative", rep.valid, double(rep.valid_r), double(r));
  log.require_le(stage, "mu(B+ \\ B-) <= eps mu(B)", rep.epsilon, eps, 1e-12);
  log.require(stage, "B inside A^4", ground.subset_of(power_set(a, 4)));
  double mb = ground.measure();
  double lo = 1 / k4 - reg.threshold * (1 + eta / 2);
  log.require_le(stage, "mu(B) <= mu(A'A) / (c'(1+eta/2))", mb, ms / (reg.threshold * (1 + eta / 2)));
  log.require_le(stage, "mu(B) >= (1/K^4 - c'(1+eta/2)) mu(A'A)", lo * ms, mb);
  log.record(stage, "thickness", rep.thickness);
  return {p, w.witness, k, eta, reg.threshold, reg.ratio};
}

inline WeakFreimanResult weak_freiman(const Subset& a, int r, double eps) {
  AuditLog log;
  return weak_freiman(a, r, eps, log);
}

// max over x of mu(A ∩ x B^{-1}) / mu(B), i.e. ||1_A * mu_B||_inf.
inline double correlation_sup(const Subset& a, const Subset& b) {
  Function h = convolve(Function::indicator(a), Function::uniform(b));
  return h.sup_norm();
}

struct CorrelationResult {
  MultiplicativePair pair;
  double sup;
  TriplingResult tripling;
  Subset core;  // A''' = Sym_{15/16}(A''A')
};

inline CorrelationResult freiman_correlation(const Subset& a, int r, double eps, AuditLog& log, int budget = 16,
                                             std::uint64_t seed = 0) {
  const std::string stage = "freiman_correlation";
  require_nonempty(a);
  log.record(stage, "doubling", doubling(a));
  TriplingResult t = doubling_to_tripling(a, log, budget, seed);
  SymWitness w = sym_witness_search(t.set, 1.0 / 16, budget, seed);
  Subset s = product_set(w.witness, t.set);
  Subset core = w.sym;
  log.require(stage, "Sym_{15/16}(A''A')^2 inside Sym_{7/8}(A''A')",
              product_set(core, core).subset_of(symmetry_set(s, 7.0 / 8)));
  WeakFreimanResult wf = weak_freiman(core, r, eps, log, budget, seed);
  const Subset& b = wf.pair.ground;
  log.require(stage, "B inside A'''^4", b.subset_of(power_set(core, 4)));
  log.require(stage, "B inside Sym_{1/2}(A''A')", b.subset_of(symmetry_set(s, 0.5)));
  double proj = convolve(Function::uniform(b), Function::indicator(s)).sup_norm();
  log.require_le(stage, "||mu_B * 1_{A''A'}||_inf >= 1/2", 0.5, proj);
  Subset cover = product_set(inverse_set(t.set), w.witness, t.set).inverse();
  log.record(stage, "mu((A'^{-1}A''A')^{-1}) / mu(A')", double(cover.size()) / double(t.set.size()));
  double sup = correlation_sup(a, b);
  log.require(stage, "||1_A * mu_B||_inf > 0", sup > 0, sup, 0);
  log.record(stage, "sup", sup);
  return {wf.pair, sup, t, core};
}

inline CorrelationResult freiman_correlation(const Subset& a, int r, double eps) {
  AuditLog log;
  return freiman_correlation(a, r, eps, log);
}

// Largest ratio mu(A^{s1}...A^{sn}) / mu(A) over sign patterns, for each n = 1..max_len.
inline std::vector<double> covering_ratios(const Subset& a, int max_len) {
  require_nonempty(a);
  Subset inv = a.inverse();
  std::vector<double> out;
  std::vector<Subset> layer{Subset::identity(a.group_ptr())};
  for (int n = 1; n <= max_len; ++n) {
    std::vector<Subset> next;
    double worst = 0;
    for (const auto& s : layer)
      for (const Subset* f : std::initializer_list<const Subset*>{&a, &inv}) {
        next.push_back(product_set(s, *f));
        worst = std::max(worst, double(next.back().size()) / double(a.size()));
      }
    out.push_back(worst);
    layer = std::move(next);
  }
  return out;
}

// Piecewise-constant function of c in (0,1]: the value of the last step whose
// threshold is at most c, or `fallback` below the first threshold.
struct StepTable {
  std::vector<std::pair<double, double>> steps;
  double fallback = 1;
  static StepTable constant(double v) { return {{}, v}; }
  double operator()(double c) const {
    double v = fallback;
    for (auto& [t, val] : steps)
      if (c >= t) v = val;
    return v;
  }
};

struct PairSystem {
  std::vector<Subset> sets;        // B_0 ⊇ B_1 ⊇ ... ⊇ B_J
  std::vector<Subset> cores;       // D_0, ..., D_J
  std::vector<double> thickness;   // c_0, ..., c_J
  std::vector<MultiplicativePair> pairs;  // (B_i, B_j) for i < j, row-major
};

inline PairSystem pair_system(const Subset& a, const StepTable& r_fn, const StepTable& eps_fn, int levels,
                              AuditLog& log, int budget = 8, std::uint64_t seed = 0) {
  const std::string stage = "pair_system";
  if (levels < 1 || levels > 4) throw UsageError("pair_system level count must lie in 1..4");
  require_nonempty(a);
  log.require(stage, "A symmetric", a.is_symmetric());
  auto r_of = [&](double c) { return std::max(1, int(r_fn(c))); };
  const int J = levels;
  std::vector<Subset> d;
  SymWitness w0 = sym_witness_search(a, 1.0 / 13, budget, seed);
  d.push_back(w0.sym);
  Subset d0_12 = power_set(d[0], 12);
  std::vector<double> c(std::size_t(J + 1)), kk(std::size_t(J + 1));
  std::vector<int> kstep(std::size_t(J + 1), 0);
  for (int i = 0;; ++i) {
    c[std::size_t(i)] = double(power_set(d[std::size_t(i)], 4).size()) / double(d0_12.size());
    kk[std::size_t(i)] = double(power_set(d[std::size_t(i)], 12).size()) / double(d[std::size_t(i)].size());
    if (i == J) break;
    double ci = c[std::size_t(i)];
    int k = int(std::ceil((1 + std::log(kk[std::size_t(i)])) / eps_fn(ci))) * (2 * r_of(ci) + 1);
    kstep[std::size_t(i + 1)] = k;
    SymWitness wi = sym_witness_search(d[std::size_t(i)], 1.0 / (12.0 * (k + 1)), budget, seed + std::uint64_t(i + 1));
    Subset next = wi.sym;
    log.require(stage, "D_{i+1}^{12(k+1)} inside D_i^4",
                power_set(next, 12 * (k + 1)).subset_of(power_set(d[std::size_t(i)], 4)));
    d.push_back(next);
  }
  std::vector<Subset> b(std::size_t(J + 1));
  std::vector<std::vector<MultiplicativePair>> pair_at(std::size_t(J + 1), std::vector<MultiplicativePair>(std::size_t(J + 1)));
  b[std::size_t(J)] = power_set(d[std::size_t(J)], 4);
  for (int j = J; j >= 1; --j) {
    // P_{j-1} = D_{j-1}^4, P_i = B_i^{l_i} P_{i-1} B_i^{l_i}; B_{j-1} = P_J.
    Subset core = power_set(d[std::size_t(j - 1)], 4);
    std::vector<std::pair<Subset, Subset>> bounds;
    for (int i = j; i <= J; ++i) {
      double cprev = c[std::size_t(i - 1)];
      int r = r_of(cprev);
      double e = eps_fn(cprev);
      const Subset& bi = b[std::size_t(i)];
      int lo_l = r, hi_l = std::max(r, kstep[std::size_t(i)] - (r + 1));
      bool found = false;
      int chosen = lo_l;
      Subset up, low;
      for (int l = lo_l; l <= hi_l && !found; ++l) {
        Subset pu = power_set(bi, l + r + 1), pl = power_set(bi, l - r);
        Subset u = product_set(pu, core, pu), lw = product_set(pl, core, pl);
        if (double(u.size()) <= (1 + e) * double(lw.size()) + 1e-12) {
          found = true;
          chosen = l;
          up = u;
          low = lw;
        }
      }
      log.require(stage, "pigeonhole exponent found for level " + std::to_string(i), found);
      Subset pl = power_set(bi, chosen);
      core = product_set(pl, core, pl);
      bounds.emplace_back(up, low);
    }
    b[std::size_t(j - 1)] = core;
    for (int i = j; i <= J; ++i) {
      double cprev = c[std::size_t(i - 1)];
      auto& [up, low] = bounds[std::size_t(i - j)];
      MultiplicativePair p{b[std::size_t(j - 1)], b[std::size_t(i)], up, low, r_of(cprev)};
      auto rep = validate_pair(p);
      log.require(stage, "(B_" + std::to_string(j - 1) + ",B_" + std::to_string(i) + ") is multiplicative", rep.valid);
      log.require_le(stage, "(B_" + std::to_string(j - 1) + ",B_" + std::to_string(i) + ") closure", rep.epsilon,
                     eps_fn(cprev), 1e-12);
      pair_at[std::size_t(j - 1)][std::size_t(i)] = p;
    }
  }
  log.require(stage, "B_0 inside A^4", b[0].subset_of(power_set(a, 4)));
  PairSystem out;
  for (int i = 0; i <= J; ++i) {
    log.require(stage, "D_i^4 inside B_i", power_set(d[std::size_t(i)], 4).subset_of(b[std::size_t(i)]));
    log.require(stage, "B_i symmetric neighbourhood", b[std::size_t(i)].is_symmetric() && b[std::size_t(i)].contains_identity());
    if (i > 0) log.require(stage, "B_i nested", b[std::size_t(i)].subset_of(b[std::size_t(i - 1)]));
  }
  for (int i = 0; i < J; ++i)
    for (int j = i + 1; j <= J; ++j) {
      out.pairs.push_back(pair_at[std::size_t(i)][std::size_t(j)]);
      log.record(stage, "thickness B_" + std::to_string(i) + ",B_" + std::to_string(j), out.pairs.back().thickness());
    }
  out.sets = b;
  out.cores = d;
  out.thickness = c;
  return out;
}

}  // namespace agnorm
