#pragma once

#include <cmath>
#include <optional>

#include "audit.hpp"
#include "pairs.hpp"

namespace agnorm {

struct RoundingReport {
  double epsilon;
  Function rounded;
  double max_deviation;
};

inline RoundingReport round_to_integer(const Function& f, double eps) {
  if (!(eps < 0.5)) throw UsageError("rounding tolerance must be below 1/2");
  Function r = f.rounded();
  double worst = 0;
  for (elem x = 0; x < f.size(); ++x) {
    double dev = std::abs(f[x] - r[x]);
    if (!(dev < eps || dev <= 1e-12))
      throw UsageError("not " + std::to_string(eps) + "-almost integer-valued at element " + std::to_string(x));
    worst = std::max(worst, dev);
  }
  return {eps, r, worst};
}

struct CosetTerm {
  long coefficient;
  Subset subgroup;
  elem rep;  // the term is coefficient * 1_{rep H}
};

inline Function term_function(const CosetTerm& t) {
  return Function::indicator(coset(t.subgroup, t.rep)) * cplx(double(t.coefficient));
}

struct CosetDecomposition {
  std::vector<CosetTerm> terms;
  Function source;
  std::vector<double> norms;  // a_norm(f_i) before each step, then the final residual

  std::vector<long> reconstruct() const {
    std::vector<long> out(source.size(), 0);
    const Group& g = source.group();
    for (const auto& t : terms) {
      auto hm = t.subgroup.members();
      for (elem h : hm) out[g.mul(t.rep, h)] += t.coefficient;
    }
    return out;
  }
  bool exact() const {
    auto rec = reconstruct();
    for (elem x = 0; x < source.size(); ++x)
      if (std::abs(source[x] - cplx(double(rec[x]), 0.0)) > 1e-9) return false;
    return true;
  }
};

struct CosetRounding {
  std::vector<CosetTerm> terms;
  Function residual;  // f - f * mu_H
};

// Terms of (f * mu_H)_Z over the left cosets of H, and the residual f - f * mu_H.
inline CosetRounding coset_rounding(const Function& f, const Subset& h, double eps, double m, double eta,
                                    AuditLog& log) {
  const std::string stage = "coset_rounding";
  require_subgroup(h);
  log.require(stage, "eps < 1/6", eps < 1.0 / 6, eps, 1.0 / 6);
  log.require(stage, "f is eps-almost integer-valued", f.is_almost_integer(eps), f.integer_defect(), eps);
  Function fz = f.rounded();
  Function fzh = coset_projection(fz, h);
  log.require(stage, "f_Z * mu_H is eps-almost integer-valued", fzh.is_almost_integer(eps), fzh.integer_defect(), eps);
  log.require_le(stage, "||f_Z||_A <= M", a_norm(fz), m, 1e-9);
  log.require_le(stage, "mu(H) >= eta ||f_Z||_1", eta * fz.l1_norm(), h.measure(), 1e-12);
  Function fh = coset_projection(f, h);
  Function fhz = fh.rounded();
  CosetRounding out{{}, f - fh};
  log.require(stage, "residual is 3eps-almost integer-valued", out.residual.is_almost_integer(3 * eps),
              out.residual.integer_defect(), 3 * eps);
  Subset done(f.group_ptr());
  long cap = long(std::llround(fz.sup_norm())) + 2;
  for (elem x = 0; x < f.size(); ++x) {
    if (done.contains(x)) continue;
    Subset c = coset(h, x);
    done = done | c;
    long z = std::lround(fhz[x].real());
    if (z == 0) continue;
    log.require_le(stage, "|z| <= ||f_Z||_inf + 2", double(std::labs(z)), double(cap));
    out.terms.push_back({z, h, x});
  }
  return out;
}

inline CosetRounding coset_rounding(const Function& f, const Subset& h, double eps, double m, double eta) {
  AuditLog log;
  return coset_rounding(f, h, eps, m, eta, log);
}

// Among the given subgroups, one maximizing ||f * mu_H||_inf subject to f * mu_H being
// eps-almost integer-valued with sup above 1/2. Ties: larger |H|, then earlier in the list.
inline std::optional<Subset> find_level_subgroup(const Function& f, double eps, const std::vector<Subset>& candidates) {
  std::optional<Subset> best;
  double best_sup = 0;
  for (const auto& h : candidates) {
    Function p = coset_projection(f, h);
    double s = p.sup_norm();
    if (!(s > 0.5) || !p.is_almost_integer(eps)) continue;
    bool better = !best || s > best_sup + 1e-12 || (std::abs(s - best_sup) <= 1e-12 && h.size() > best->size());
    if (better) {
      best = h;
      best_sup = s;
    }
  }
  return best;
}

inline Subset find_level_subgroup(const Function& f, double eps) {
  auto h = find_level_subgroup(f, eps, subgroups(f.group_ptr()));
  if (!h) throw AuditError("find_level_subgroup", "no admissible subgroup");
  return *h;
}

// Carries the terms found before the failing step and the residual at that point.
class DecompositionError : public AuditError {
 public:
  DecompositionError(const AuditError& cause, CosetDecomposition partial, Function residual)
      : AuditError(cause.stage(), std::string(cause.what()).substr(cause.stage().size() + 2)),
        partial_(std::move(partial)),
        residual_(std::move(residual)) {}
  const CosetDecomposition& partial() const { return partial_; }
  const Function& residual() const { return residual_; }

 private:
  CosetDecomposition partial_;
  Function residual_;
};

inline CosetDecomposition idempotent_decompose(const Function& f, AuditLog& log, int max_steps = 64) {
  const std::string stage = "idempotent_decompose";
  if (!f.is_integer_valued(1e-9)) throw UsageError("decomposition input must be integer-valued");
  CosetDecomposition out{{}, f, {}};
  Function fi = f.rounded();
  if (fi.sup_norm() == 0) return out;
  auto subs = subgroups(f.group_ptr());
  double m = a_norm(fi);
  double eps = std::min(1e-3, std::exp(-m));
  log.record(stage, "a_norm", m);
  log.record(stage, "eps0", eps);
  double current = m;
  out.norms.push_back(current);
  for (int step = 0;; ++step) {
    Function fz = fi.rounded();
    if (fz.sup_norm() == 0) break;
    try {
      log.require(stage, "step budget", step < max_steps, step, max_steps);
      auto h = find_level_subgroup(fz, eps, subs);
      log.require(stage, "admissible subgroup exists at step " + std::to_string(step), h.has_value());
      Function proj = coset_projection(fi, *h);
      log.require(stage, "||f_i * mu_H||_inf > 1/2", proj.sup_norm() > 0.5, proj.sup_norm(), 0.5);
      double eta = h->measure() / fz.l1_norm();
      CosetRounding cr = coset_rounding(fi, *h, eps, a_norm(fz), eta, log);
      double next = a_norm(cr.residual);
      log.require_le(stage, "a_norm drop >= 1/2 at step " + std::to_string(step), next, current - 0.5, 1e-6);
      for (auto& t : cr.terms) out.terms.push_back(t);
      out.norms.push_back(next);
      current = next;
      fi = cr.residual;
    } catch (const DecompositionError&) {
      throw;
    } catch (const AuditError& e) {
      throw DecompositionError(e, out, fi);
    }
    eps *= 3;
  }
  log.require(stage, "exact reconstruction", out.exact());
  return out;
}

inline CosetDecomposition idempotent_decompose(const Function& f, int max_steps = 64) {
  AuditLog log;
  return idempotent_decompose(f, log, max_steps);
}

inline constexpr double small_norm_threshold = 1.0 + 1.0 / 750.0;

struct CosetWitness {
  Subset subgroup;
  elem rep;  // A = subgroup * rep
};

inline std::optional<CosetWitness> small_norm_coset_test(const Subset& a) {
  require_nonempty(a);
  double norm = a_norm(Function::indicator(a));
  if (!(norm < small_norm_threshold)) return std::nullopt;
  elem x = a.first();
  Subset h = right_translate(a, a.group().inv(x));
  if (!is_subgroup(h)) throw InternalError("norm below 1 + 1/750 but the set is not a coset");
  return CosetWitness{h, x};
}

// sum_i s_i ||mu_B * v_i||^2 over the canonical Fourier basis of f.
inline double dual_mass(const Function& f, const Subset& b) {
  auto basis = fourier_basis(f);
  Function mb = Function::uniform(b);
  double s = 0;
  for (std::size_t i = 0; i < basis.values.size(); ++i) {
    if (basis.values[i] <= zero_floor * std::max(1.0, basis.values.front())) continue;
    double n = convolve(mb, basis.vectors[i]).l2_norm();
    s += basis.values[i] * n * n;
  }
  return s;
}

struct CollectionGain {
  double gain;   // dual_mass(B') - dual_mass(B)
  double bound;  // nu^2 / M - 4 eps M
  double nu;     // ||f * (mu_B~ * mu_B) - f * (mu_B'~ * mu_B')||_inf
};

inline CollectionGain spectral_collection(const Function& f, const MultiplicativePair& p) {
  auto smooth = [&](const Subset& s) {
    Function mu = Function::uniform(s);
    return convolve(f, convolve(adjoint(mu), mu));
  };
  double nu = (smooth(p.ground) - smooth(p.perturb)).sup_norm();
  double m = a_norm(f);
  double gain = dual_mass(f, p.perturb) - dual_mass(f, p.ground);
  return {gain, m > 0 ? nu * nu / m - 4 * p.epsilon() * m : 0.0, nu};
}

struct ContinuityWitness {
  Subset ground;
  Subset perturb;
};

// Both conditions: sup_x ||F - F(x)||_{Linf(xB')} <= nu and sup_x ||f - F||_{L2(xB')} <= nu,
// where F = f * mu_B~ * mu_B.
inline bool continuity_holds(const Function& f, const Subset& b, const Subset& bp, double nu) {
  Function mu = Function::uniform(b);
  Function big = convolve(convolve(f, adjoint(mu)), mu);
  const Group& g = f.group();
  auto pm = bp.members();
  for (elem x = 0; x < g.order(); ++x) {
    double osc = 0, l2 = 0;
    for (elem y : pm) {
      elem xy = g.mul(x, y);
      osc = std::max(osc, std::abs(big[xy] - big[x]));
      l2 += std::norm(f[xy] - big[xy]);
    }
    if (osc > nu + 1e-12 || std::sqrt(l2 / double(pm.size())) > nu + 1e-12) return false;
  }
  return true;
}

// Candidates: subgroup pairs (H, K), K ≤ H ⊆ A^4, H nontrivial, by decreasing |H| then |K|;
// then, when A contains the identity, (A^2, A), (A^4, A), (A^4, A^2). The pair ({e},{e})
// satisfies both conditions for every f and is never returned.
inline std::optional<ContinuityWitness> continuity_witness(const Function& f, const Subset& a, double nu) {
  if (!a.is_symmetric()) throw UsageError("continuity search needs a symmetric set");
  Subset a4 = power_set(a, 4);
  auto subs = subgroups(f.group_ptr());
  std::vector<Subset> inside;
  for (const auto& h : subs)
    if (h.size() > 1 && h.subset_of(a4)) inside.push_back(h);
  std::reverse(inside.begin(), inside.end());
  for (const auto& h : inside)
    for (const auto& k : inside)
      if (k.subset_of(h) && continuity_holds(f, h, k, nu)) return ContinuityWitness{h, k};
  if (a.contains_identity()) {
    Subset a2 = power_set(a, 2);
    for (auto [b, bp] : {std::pair{a2, a}, std::pair{a4, a}, std::pair{a4, a2}})
      if (b.size() > 1 && continuity_holds(f, b, bp, nu)) return ContinuityWitness{b, bp};
  }
  return std::nullopt;
}

struct SmallDoublingSubset {
  Subset set;
  double doubling;
};

// A' ⊆ A with |A'| >= |A|/4 of least doubling: exhaustive for |A| <= 16, otherwise
// greedy removal of the element whose deletion lowers doubling the most.
inline SmallDoublingSubset dense_small_doubling_subset(const Subset& a, double energy_c) {
  require_nonempty(a);
  double m = a.measure();
  if (energy(a) < energy_c * m * m * m * (1 - 1e-12))
    throw AuditError("dense_small_doubling_subset", "energy hypothesis fails");
  auto members = a.members();
  std::size_t k = members.size();
  std::size_t min_size = (k + 3) / 4;
  SmallDoublingSubset best{a, doubling(a)};
  auto better = [&](const Subset& s, double d) {
    if (d < best.doubling - 1e-12) return true;
    if (d > best.doubling + 1e-12) return false;
    if (s.size() != best.set.size()) return s.size() > best.set.size();
    return s.members() < best.set.members();
  };
  if (k <= 16) {
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
      if (std::size_t(__builtin_popcount(mask)) < min_size) continue;
      Subset s(a.group_ptr());
      for (std::size_t i = 0; i < k; ++i)
        if (mask >> i & 1) s.insert(members[i]);
      double d = doubling(s);
      if (better(s, d)) best = {s, d};
    }
    return best;
  }
  Subset cur = a;
  while (cur.size() > min_size) {
    std::optional<Subset> step;
    double step_d = INFINITY;
    for (elem x : cur.members()) {
      Subset s = cur;
      s.erase(x);
      double d = doubling(s);
      if (d < step_d - 1e-12) {
        step_d = d;
        step = s;
      }
    }
    cur = *step;
    if (better(cur, step_d)) best = {cur, step_d};
  }
  return best;
}

struct SpreadCheck {
  bool hypotheses;       // both sup conditions hold with eps < 1/10
  Subset subgroup;       // <B>
  double defect;         // integer defect of f * mu_H (conclusion: < 5 eps)
  double projected_sup;  // ||f * mu_H||_inf (conclusion: > ||g||_inf - 3 eps)
  double g_sup;
};

inline SpreadCheck spread_check(const Function& f, const Function& g, const Subset& b, double eps) {
  if (!f.is_integer_valued()) throw UsageError("spread check needs an integer-valued f");
  const Group& G = f.group();
  auto bm = b.members();
  bool hyp = eps < 0.1 && b.is_symmetric() && !b.empty();
  for (elem x = 0; x < G.order() && hyp; ++x) {
    double osc = 0, l2 = 0;
    for (elem y : bm) {
      elem xy = G.mul(x, y);
      osc = std::max(osc, std::abs(g[xy] - g[x]));
      l2 += std::norm(f[xy] - g[xy]);
    }
    hyp = osc <= eps && std::sqrt(l2 / double(bm.size())) <= eps;
  }
  Subset h = generated_subgroup(b);
  Function p = coset_projection(f, h);
  return {hyp, h, p.integer_defect(), p.sup_norm(), g.sup_norm()};
}

}  // namespace agnorm
