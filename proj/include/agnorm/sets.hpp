#pragma once

#include <cmath>
#include <optional>

#include "function.hpp"

namespace agnorm {

inline void require_nonempty(const Subset& a) {
  if (a.empty()) throw UsageError("set must be nonempty");
}

inline double doubling(const Subset& a) {
  require_nonempty(a);
  return double(product_set(a, a).size()) / double(a.size());
}

inline double tripling(const Subset& a) {
  require_nonempty(a);
  return double(power_set(a, 3).size()) / double(a.size());
}

// counts[x] = |A ∩ xA| = #{(a,b) in A^2 : a b^{-1} = x}, so 1_A*1_{A^{-1}}(x) = counts[x]/n.
inline std::vector<long> difference_counts(const Subset& a) {
  const Group& g = a.group();
  std::vector<long> c(g.order(), 0);
  auto m = a.members();
  for (elem x : m)
    for (elem y : m) ++c[g.mul(x, g.inv(y))];
  return c;
}

// ||1_A * 1_{A^{-1}}||_2^2 from exact counts.
inline double energy(const Subset& a) {
  require_nonempty(a);
  long double s = 0;
  for (long c : difference_counts(a)) s += (long double)c * c;
  long double n = a.group().order();
  return double(s / (n * n * n));
}

// Threshold set {x : |A ∩ xA| >= t |A|} for any t > 0; equality is included.
inline Subset count_threshold_set(const Subset& a, const std::vector<long>& counts, double t) {
  Subset out(a.group_ptr());
  double bar = t * double(a.size()) - 1e-9;
  for (elem x = 0; x < counts.size(); ++x)
    if (counts[x] > 0 && double(counts[x]) >= bar) out.insert(x);
  return out;
}

inline Subset symmetry_set(const Subset& a, double eta) {
  require_nonempty(a);
  if (!(eta > 0.0 && eta <= 1.0)) throw UsageError("symmetry threshold must lie in (0,1]");
  return count_threshold_set(a, difference_counts(a), eta);
}

struct RegularThreshold {
  double threshold;
  double ratio;  // |mu(Sym_{c'(1+eta)}) / mu(Sym_{c'}) - 1|
};

// Scans c' = c / 2^{1 + j/64}, j = 0..63, and keeps the first minimizer of the ratio.
inline RegularThreshold sym_regular_threshold(const Subset& a, double c, double eta_max) {
  require_nonempty(a);
  if (!(c > 0.0 && c <= 1.0)) throw UsageError("energy constant must lie in (0,1]");
  if (!(eta_max > 0.0)) throw UsageError("eta_max must be positive");
  double m = a.measure();
  if (energy(a) < c * m * m * m * (1 - 1e-12))
    throw AuditError("sym_regular_threshold", "energy hypothesis fails");
  auto counts = difference_counts(a);
  RegularThreshold best{0, INFINITY};
  for (int j = 0; j < 64; ++j) {
    double cp = c / std::pow(2.0, 1.0 + j / 64.0);
    double lo = double(count_threshold_set(a, counts, cp).size());
    double hi = double(count_threshold_set(a, counts, cp * (1 + eta_max)).size());
    double ratio = std::abs(hi / lo - 1.0);
    if (ratio < best.ratio) best = {cp, ratio};
  }
  return best;
}

// ∫ |1 - mu * 1_A| dmu_A for a probability density mu.
inline double approx_projection_defect(const Subset& a, const Function& mu) {
  require_nonempty(a);
  Function conv = convolve(mu, Function::indicator(a));
  double s = 0;
  for (elem x : a.members()) s += std::abs(1.0 - conv[x]);
  return s / double(a.size());
}

// For symmetric K containing the identity with mu(K^2) < 1.5 mu(K), returns K^2
// after checking it is a subgroup; nullopt when the doubling hypothesis fails.
inline std::optional<Subset> kneser_subgroup(const Subset& k) {
  if (!k.is_symmetric() || !k.contains_identity())
    throw UsageError("kneser criterion needs a symmetric set containing the identity");
  Subset k2 = product_set(k, k);
  if (2 * k2.size() >= 3 * k.size()) return std::nullopt;
  if (!is_subgroup(k2)) throw InternalError("K^2 has doubling below 3/2 but is not a subgroup");
  return k2;
}

}  // namespace agnorm
