#pragma once

#include <optional>
#include <string>

#include "sets.hpp"
#include "spectral.hpp"

namespace agnorm {

inline constexpr int unbounded_r = -1;
inline constexpr int default_r_cap = 8;

// (B, B', B+, B-, r). r == unbounded_r marks exact pairs, checked up to r_cap.
struct MultiplicativePair {
  Subset ground;
  Subset perturb;
  Subset upper;
  Subset lower;
  int r = 1;

  int effective_r(int cap = default_r_cap) const { return r == unbounded_r ? cap : r; }
  double epsilon() const { return double((upper - lower).size()) / double(ground.size()); }
  double thickness() const { return double(perturb.size()) / double(ground.size()); }
  Subset perturb_power(int cap = default_r_cap) const { return power_set(perturb, effective_r(cap)); }
};

struct PairReport {
  bool valid = false;
  int valid_r = 0;  // largest k <= requested r whose containments hold
  long epsilon_num = 0;
  long epsilon_den = 1;
  double epsilon = 0;
  double thickness = 0;
  std::vector<std::string> failures;
};

inline PairReport validate_pair(const MultiplicativePair& p, int cap = default_r_cap) {
  PairReport rep;
  struct Named {
    const char* name;
    const Subset* set;
  };
  for (auto [name, s] : {Named{"ground", &p.ground}, Named{"perturb", &p.perturb}, Named{"upper", &p.upper},
                         Named{"lower", &p.lower}}) {
    if (!s->is_symmetric()) rep.failures.push_back(std::string(name) + " is not symmetric");
    if (!s->contains_identity()) rep.failures.push_back(std::string(name) + " does not contain the identity");
  }
  if (p.ground.empty()) {
    rep.failures.push_back("ground set is empty");
    return rep;
  }
  rep.epsilon_num = long((p.upper - p.lower).size());
  rep.epsilon_den = long(p.ground.size());
  rep.epsilon = p.epsilon();
  rep.thickness = p.thickness();
  int want = p.effective_r(cap);
  if (want < 1) rep.failures.push_back("r must be positive");
  Subset pw = Subset::identity(p.ground.group_ptr());
  for (int k = 1; k <= want; ++k) {
    pw = product_set(pw, p.perturb);
    bool inner = product_set(pw, p.lower, pw).subset_of(p.ground);
    bool outer = product_set(pw, p.ground, pw).subset_of(p.upper);
    if (!inner || !outer) {
      if (!inner) rep.failures.push_back("B'^" + std::to_string(k) + " B- B'^" + std::to_string(k) + " not inside B");
      if (!outer) rep.failures.push_back("B'^" + std::to_string(k) + " B B'^" + std::to_string(k) + " not inside B+");
      break;
    }
    rep.valid_r = k;
  }
  rep.valid = rep.failures.empty();
  return rep;
}

inline void require_valid(const MultiplicativePair& p, const char* stage) {
  auto rep = validate_pair(p);
  if (!rep.valid) throw AuditError(stage, rep.failures.front());
}

inline void require_identity_neighbourhood(const Subset& a, const char* what) {
  if (!a.is_symmetric() || !a.contains_identity())
    throw UsageError(std::string(what) + " must be symmetric and contain the identity");
}

inline MultiplicativePair pair_from_subgroup(const Subset& h) {
  require_subgroup(h);
  return {h, h, h, h, unbounded_r};
}

// (AH, H) with B+ = B- = AH, for A normalizing H.
inline MultiplicativePair pair_from_coset_union(const Subset& h, const Subset& a) {
  require_subgroup(h);
  require_identity_neighbourhood(a, "coset representatives");
  for (elem x : a.members())
    if (!normalizes(x, h)) throw UsageError("representative does not normalize the subgroup");
  Subset b = product_set(a, h);
  return {b, h, b, b, unbounded_r};
}

// (B, B''^k) inside an existing pair, valid at width floor(r / k) when B'' ⊆ B'.
inline MultiplicativePair subpair(const MultiplicativePair& p, const Subset& inner, int k) {
  if (k < 1) throw UsageError("subpair power must be positive");
  if (!inner.subset_of(p.perturb)) throw UsageError("subpair perturbation must lie inside B'");
  require_identity_neighbourhood(inner, "subpair perturbation");
  int r = p.r == unbounded_r ? unbounded_r : p.r / k;
  if (r == 0) throw UsageError("subpair width would be zero");
  return {p.ground, power_set(inner, k), p.upper, p.lower, r};
}

inline MultiplicativePair conjugate_pair(const MultiplicativePair& p, elem y) {
  return {conjugate(p.ground, y), conjugate(p.perturb, y), conjugate(p.upper, y), conjugate(p.lower, y), p.r};
}

inline MultiplicativePair pair_from_product_set(const Subset& a, int r) {
  require_identity_neighbourhood(a, "product-set generator");
  if (r < 1) throw UsageError("r must be positive");
  return {power_set(a, 2 * r), a, power_set(a, 4 * r), Subset::identity(a.group_ptr()), r};
}

// Scans n = 2r, 2r+1, ... until mu(A^{n+2r}) <= (1+eps) mu(A^{n-2r}).
inline MultiplicativePair pair_from_growth(const Subset& a, int r, double eps) {
  require_identity_neighbourhood(a, "growth generator");
  if (r < 1) throw UsageError("r must be positive");
  if (eps < 0) throw UsageError("eps must be nonnegative");
  std::vector<Subset> pow{Subset::identity(a.group_ptr())};
  auto power = [&](int k) -> const Subset& {
    while (int(pow.size()) <= k) pow.push_back(product_set(pow.back(), a));
    return pow[std::size_t(k)];
  };
  for (int n = 2 * r;; ++n) {
    double hi = double(power(n + 2 * r).size());
    double lo = double(power(n - 2 * r).size());
    if (hi <= (1 + eps) * lo + 1e-12) return {power(n), a, power(n + 2 * r), power(n - 2 * r), r};
  }
}

// Smallest B+ and largest B- making (B, B') an r-multiplicative pair:
// B+ = B'^r B B'^r and B- = {x : B'^r x B'^r ⊆ B}.
inline MultiplicativePair canonical_pair(const Subset& b, const Subset& bp, int r) {
  Subset pw = power_set(bp, r);
  Subset upper = product_set(pw, b, pw);
  Subset lower(b.group_ptr());
  const Group& g = b.group();
  auto pm = pw.members();
  for (elem x = 0; x < g.order(); ++x) {
    bool ok = true;
    for (elem u : pm) {
      elem ux = g.mul(u, x);
      for (elem v : pm)
        if (!b.contains(g.mul(ux, v))) {
          ok = false;
          break;
        }
      if (!ok) break;
    }
    if (ok) lower.insert(x);
  }
  return {b, bp, upper, lower, r};
}

// Total variation of mu_B * mu - mu_B, for a probability density mu on B'^r.
inline double approx_haar_defect(const MultiplicativePair& p, const Function& mu) {
  Subset allowed = p.perturb_power();
  for (elem x = 0; x < mu.size(); ++x)
    if (std::abs(mu[x]) > 0 && !allowed.contains(x))
      throw UsageError("measure is not supported on B'^r (element " + std::to_string(x) + ")");
  Function mb = Function::uniform(p.ground);
  return (convolve(mb, mu) - mb).l1_norm();
}

// Norms relative to the uniform probability on a set.
inline double local_l2(const Function& v, const Subset& b) {
  double s = 0;
  for (elem x : b.members()) s += std::norm(v[x]);
  return std::sqrt(s / double(b.size()));
}
inline double local_l1(const Function& v, const Subset& b) {
  double s = 0;
  for (elem x : b.members()) s += std::abs(v[x]);
  return s / double(b.size());
}
inline double local_sup(const Function& v, const Subset& b) {
  double s = 0;
  for (elem x : b.members()) s = std::max(s, std::abs(v[x]));
  return s;
}
inline cplx local_inner(const Function& v, const Function& w, const Subset& b) {
  cplx s = 0;
  for (elem x : b.members()) s += v[x] * std::conj(w[x]);
  return s / double(b.size());
}
inline Function restrict_to(const Function& v, const Subset& b) {
  Function out(v.group_ptr());
  for (elem x : b.members()) out[x] = v[x];
  return out;
}

// f dmu_S as a density: f (n/|S|) 1_S.
inline Function weighted_measure(const Function& f, const Subset& s) {
  return restrict_to(f, s) * cplx(double(f.size()) / double(s.size()));
}

// v -> ((f dmu_B') * v)|_B on L2(mu_B); matrix indexed by the members of B.
class LocalOperator {
 public:
  LocalOperator(const MultiplicativePair& p, const Function& f)
      : ground_(p.ground), perturb_(p.perturb), cache_(std::make_shared<Cache>()) {
    for (elem x = 0; x < f.size(); ++x)
      if (std::abs(f[x]) > 0 && !perturb_.contains(x))
        throw UsageError("local function must be supported on B'");
    const Group& g = p.ground.group();
    members_ = ground_.members();
    auto d = Eigen::Index(members_.size());
    m_ = Matrix::Zero(d, d);
    double w = 1.0 / double(perturb_.size());
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        elem y = g.mul(members_[std::size_t(i)], g.inv(members_[std::size_t(j)]));
        if (perturb_.contains(y)) m_(i, j) = f[y] * w;
      }
  }

  const Matrix& matrix() const { return m_; }
  const std::vector<elem>& members() const { return members_; }
  const Subset& ground() const { return ground_; }

  const Svd& svd() const {
    std::call_once(cache_->once, [this] { cache_->full = full_svd(m_); });
    return cache_->full;
  }

  Function apply(const Function& v) const {
    Vector in(m_.cols());
    for (std::size_t i = 0; i < members_.size(); ++i) in(Eigen::Index(i)) = v[members_[i]];
    Vector out = m_ * in;
    Function r(ground_.group_ptr());
    for (std::size_t i = 0; i < members_.size(); ++i) r[members_[i]] = out(Eigen::Index(i));
    return r;
  }

  Function column_function(const Matrix& basis, Eigen::Index j) const {
    Function w(ground_.group_ptr());
    double scale = std::sqrt(double(members_.size()));
    for (std::size_t i = 0; i < members_.size(); ++i) w[members_[i]] = basis(Eigen::Index(i), j) * scale;
    return w;
  }

 private:
  struct Cache {
    std::once_flag once;
    Svd full;
  };
  Subset ground_, perturb_;
  std::vector<elem> members_;
  Matrix m_;
  std::shared_ptr<Cache> cache_;
};

// Basis vectors are functions supported on B with unit L2(mu_B) norm.
inline FourierBasis local_fourier_basis(const MultiplicativePair& p, const Function& f) {
  LocalOperator op(p, f);
  const Svd& svd = op.svd();
  Matrix v = svd.v;
  auto order = detail::canonical_order(svd.values, v);
  FourierBasis out;
  for (auto j : order) {
    out.vectors.push_back(op.column_function(v, j));
    out.values.push_back(svd.values(j));
  }
  return out;
}

struct SpectrumSlice {
  double delta = 0;
  std::vector<Function> basis;
  std::vector<double> values;
  double l1 = 0;     // ||f||_{L1(mu_B')}
  double width = 0;  // ||f||_{L1(mu_B')} / ||f||_{Linf(mu_B')}
  std::size_t dim() const { return basis.size(); }
};

inline bool in_spectrum(double s, double top, double delta, double l1) {
  double floor = zero_floor * std::max(1.0, top);
  return s > floor && s >= delta * l1 - floor;
}

inline std::size_t spectrum_dimension(const std::vector<double>& values, double delta, double l1) {
  std::size_t d = 0;
  double top = values.empty() ? 0.0 : values.front();
  for (double s : values)
    if (in_spectrum(s, top, delta, l1)) ++d;
  return d;
}

inline SpectrumSlice spectrum(const MultiplicativePair& p, const Function& f, double delta) {
  if (!(delta > 0)) throw UsageError("delta must be positive");
  auto basis = local_fourier_basis(p, f);
  SpectrumSlice out;
  out.delta = delta;
  out.l1 = local_l1(f, p.perturb);
  double sup = local_sup(f, p.perturb);
  out.width = sup > 0 ? out.l1 / sup : 0.0;
  double top = basis.values.empty() ? 0.0 : basis.values.front();
  for (std::size_t i = 0; i < basis.values.size(); ++i)
    if (in_spectrum(basis.values[i], top, delta, out.l1)) {
      out.basis.push_back(basis.vectors[i]);
      out.values.push_back(basis.values[i]);
    }
  return out;
}

struct RegularDelta {
  double delta;  // delta' in (delta/2, delta]
  double eta;
  int k;
  std::size_t dim;
};

// Dimension pigeonhole over delta - j delta/(2k+2), j = 0..k+1.
inline RegularDelta regular_delta_from_values(const std::vector<double>& values, double l1, double delta, int k) {
  if (k < 0) throw UsageError("dimension budget must be nonnegative");
  double step = delta / double(2 * k + 2);
  std::size_t prev = spectrum_dimension(values, delta, l1);
  for (int j = 0; j <= k; ++j) {
    std::size_t next = spectrum_dimension(values, delta - (j + 1) * step, l1);
    if (next == prev) return {delta - j * step, step, k, prev};
    prev = next;
  }
  throw NumericalError("no spectral plateau found; dimension budget exceeded");
}

inline RegularDelta regular_delta(const MultiplicativePair& p, const Function& f, double delta) {
  if (!(delta > 0 && delta <= 1)) throw UsageError("delta must lie in (0,1]");
  double l1 = local_l1(f, p.perturb), l2 = local_l2(f, p.perturb);
  if (l1 == 0) throw UsageError("function must not vanish on B'");
  double c = p.thickness();
  int k = int(std::floor(4.0 / (delta * delta * c) * (l2 * l2) / (l1 * l1) + 1e-9));
  auto basis = local_fourier_basis(p, f);
  return regular_delta_from_values(basis.values, l1, delta, k);
}

// T_y on Spec_delta: project (rho_y v)|_B back onto the slice, in the slice basis.
inline Matrix translation_operator(const MultiplicativePair& p, const SpectrumSlice& slice, elem y) {
  auto d = Eigen::Index(slice.dim());
  Matrix t(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Function moved = restrict_to(right_translate(slice.basis[std::size_t(j)], y), p.ground);
    for (Eigen::Index i = 0; i < d; ++i) t(i, j) = local_inner(moved, slice.basis[std::size_t(i)], p.ground);
  }
  return t;
}

inline Matrix translation_operator(const MultiplicativePair& p, const Function& f, double delta, elem y) {
  return translation_operator(p, spectrum(p, f, delta), y);
}

struct NearestUnitary {
  Matrix u;
  double bound;
};

// U v_i = M v_i / s_i; null directions take the orthonormal completion from the SVD.
inline NearestUnitary nearest_unitary(const Matrix& m) {
  if (m.rows() != m.cols()) throw UsageError("nearest_unitary needs a square matrix");
  if (m.rows() == 0) return {m, 0.0};
  Svd svd = full_svd(m);
  double bound = 0;
  bool degenerate = false;
  double floor = zero_floor * std::max(1.0, svd.values(0));
  for (Eigen::Index i = 0; i < svd.values.size(); ++i) {
    bound = std::max(bound, std::abs(svd.values(i) - 1.0));
    if (svd.values(i) <= floor) degenerate = true;
  }
  if (degenerate) bound = std::max(1.0, bound);
  return {svd.u * svd.v.adjoint(), bound};
}


struct NormalizedSet {
  Subset set;    // B3
  Subset cover;  // X ⊆ B1 with B1 ⊆ B2^2 X
};

// B3 = ∩_{x∈X} x^{-1} B2^2 x, where X ⊆ B1 is a maximal set with the translates
// B2 x pairwise disjoint. Checks x B3 x^{-1} ⊆ B2^6 for every x ∈ B1.
inline NormalizedSet normalize_pair(const Subset& b0, const Subset& b1, const Subset& b2) {
  const char* stage = "normalize_pair";
  for (const Subset* s : {&b0, &b1, &b2})
    if (!s->is_symmetric() || !s->contains_identity())
      throw AuditError(stage, "inputs must be symmetric and contain the identity");
  if (!product_set(b1, b1).subset_of(b0)) throw AuditError(stage, "(B0,B1) is not 1-multiplicative");
  if (!product_set(b2, b2).subset_of(b1)) throw AuditError(stage, "(B1,B2) is not 1-multiplicative");
  auto closed = canonical_pair(b1, b2, 1);
  if ((closed.upper - closed.lower).size() > b1.size()) throw AuditError(stage, "(B1,B2) is not 1-closed");
  Subset b2sq = product_set(b2, b2);
  Subset used(b1.group_ptr());
  Subset cover(b1.group_ptr());
  for (elem x : b1.members()) {
    Subset t = right_translate(b2, x);
    if ((t & used).empty()) {
      cover.insert(x);
      used = used | t;
    }
  }
  Subset b3 = Subset::whole(b1.group_ptr());
  for (elem x : cover.members()) b3 = b3 & conjugate(b2sq, b1.group().inv(x));
  if (!b1.subset_of(product_set(b2sq, cover))) throw InternalError("covering of B1 by B2^2 X failed");
  Subset b2_6 = power_set(b2, 6);
  for (elem x : b1.members())
    if (!conjugate(b3, x).subset_of(b2_6)) throw InternalError("conjugation containment fails");
  return {b3, cover};
}

// sup over x in G, y in B'^r of |f*mu_B(xy) - f*mu_B(x)|.
inline double continuity_defect(const MultiplicativePair& p, const Function& f) {
  Function h = convolve(f, Function::uniform(p.ground));
  const Group& g = f.group();
  double worst = 0;
  for (elem y : p.perturb_power().members())
    for (elem x = 0; x < g.order(); ++x) worst = std::max(worst, std::abs(h[g.mul(x, y)] - h[x]));
  return worst;
}

// ||v||^2 - ||(rho_y v)|_B||^2 in L2(mu_B), for v supported on B.
inline double unitarity_defect(const MultiplicativePair& p, const Function& v, elem y) {
  Function vb = restrict_to(v, p.ground);
  Function moved = restrict_to(right_translate(vb, y), p.ground);
  double a = local_l2(vb, p.ground), b = local_l2(moved, p.ground);
  return a * a - b * b;
}

struct TruncationComparison {
  double difference;  // | ||fdmu_B' * g|_B||^2 - ||fdmu_B' * g||^2 |, norms in L2(mu_B)
  double bound;       // 2 sqrt(eps) ||f||_{L1(mu_B')}^2 ||g||_{Linf(mu_{B B'^r})}^2
};

inline TruncationComparison truncation_comparison(const MultiplicativePair& p, const Function& f,
                                                  const Function& g) {
  Function fm = weighted_measure(f, p.perturb);
  double a = local_l2(convolve(fm, restrict_to(g, p.ground)), p.ground);
  double b = local_l2(convolve(fm, g), p.ground);
  Subset reach = product_set(p.ground, p.perturb_power());
  double l1 = local_l1(f, p.perturb), gs = local_sup(g, reach);
  return {std::abs(a * a - b * b), 2 * std::sqrt(p.epsilon()) * l1 * l1 * gs * gs};
}

struct CommutatorDefect {
  double defect;  // ||rho_{B'',y} L v - L rho_{B'',y} v||^2 in L2(mu_B)
  double bound;   // 2 c^{-2} ||v||_inf^2 ||f||_inf^2 (eps' + eps'^2)
};

// outer = (B, B'') supplies the translation; inner = (B, B') supplies the operator.
inline CommutatorDefect commutator_defect(const MultiplicativePair& inner, const MultiplicativePair& outer,
                                          const Function& f, const Function& v, elem y) {
  LocalOperator op(inner, f);
  auto trans = [&](const Function& w) { return restrict_to(right_translate(restrict_to(w, inner.ground), y), inner.ground); };
  Function lhs = trans(op.apply(v));
  Function rhs = op.apply(trans(v));
  double d = local_l2(lhs - rhs, inner.ground);
  double c = inner.thickness(), e = outer.epsilon();
  double vs = local_sup(v, inner.ground), fs = local_sup(f, inner.perturb);
  return {d * d, 2 / (c * c) * vs * vs * fs * fs * (e + e * e)};
}

struct ChopupResult {
  elem translate;
  double energy_ratio;  // ||fdmu_B2 * (rho_x' g)|_B0||^2 / (||f||_inf^2 ||rho_x' g||^2)
  double sup_ratio;     // ||rho_x' g||_inf / ||rho_x' g||_2, both over B0
};

// Scans x' in G for a translate meeting both conclusions of the localisation
// inequality; lambda is the eigenvalue of g divided by ||h||_inf^2 and c1 the
// thickness of (B0, B1).
inline std::optional<ChopupResult> chopup_search(const Subset& b0, const Subset& b2, const Function& f,
                                                 const Function& g, double eta, double lambda, double c1) {
  Function fm = weighted_measure(f, b2);
  double fs = local_sup(f, b2);
  double cap = 4 / std::sqrt(eta) / std::abs(lambda) / c1;
  for (elem x = 0; x < g.size(); ++x) {
    Function moved = restrict_to(right_translate(g, x), b0);
    double l2 = local_l2(moved, b0);
    if (l2 <= 0) continue;
    double e = local_l2(convolve(fm, moved), b0);
    double energy_ratio = e * e / (fs * fs * l2 * l2);
    double sup_ratio = local_sup(moved, b0) / l2;
    if (energy_ratio > eta / 4 && sup_ratio <= cap * (1 + 1e-12)) return ChopupResult{x, energy_ratio, sup_ratio};
  }
  return std::nullopt;
}

}  // namespace agnorm
