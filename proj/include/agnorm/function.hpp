#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "group.hpp"

namespace agnorm {

using cplx = std::complex<double>;

// Complex function on a finite group. Norms use the uniform probability measure.
class Function {
 public:
  Function() = default;
  explicit Function(GroupPtr g) : g_(std::move(g)), v_(g_->order(), 0.0) {}
  Function(GroupPtr g, std::vector<cplx> values) : g_(std::move(g)), v_(std::move(values)) {
    if (v_.size() != g_->order()) throw UsageError("function has " + std::to_string(v_.size()) +
                                                   " values for a group of order " + std::to_string(g_->order()));
  }

  static Function constant(GroupPtr g, cplx c) {
    Function f(std::move(g));
    for (auto& x : f.v_) x = c;
    return f;
  }
  static Function indicator(const Subset& a) {
    Function f(a.group_ptr());
    for (elem x : a.members()) f.v_[x] = 1.0;
    return f;
  }
  // Uniform probability on A as a density: (n/|A|) 1_A.
  static Function uniform(const Subset& a) {
    if (a.empty()) throw UsageError("uniform measure on empty set");
    Function f = indicator(a);
    f *= double(a.group().order()) / double(a.size());
    return f;
  }
  static Function dirac(GroupPtr g, elem y) {
    Function f(g);
    f.v_.at(y) = double(g->order());
    return f;
  }

  const GroupPtr& group_ptr() const { return g_; }
  const Group& group() const { return *g_; }
  std::size_t size() const { return v_.size(); }
  const std::vector<cplx>& values() const { return v_; }
  std::vector<cplx>& values() { return v_; }
  cplx operator[](elem x) const { return v_[x]; }
  cplx& operator[](elem x) { return v_[x]; }

  double lp_norm(double p) const {
    double s = 0;
    for (auto z : v_) s += std::pow(std::abs(z), p);
    return std::pow(s / double(v_.size()), 1.0 / p);
  }
  double l1_norm() const { return lp_norm(1); }
  double l2_norm() const {
    double s = 0;
    for (auto z : v_) s += std::norm(z);
    return std::sqrt(s / double(v_.size()));
  }
  double sup_norm() const {
    double m = 0;
    for (auto z : v_) m = std::max(m, std::abs(z));
    return m;
  }
  cplx mean() const {
    cplx s = 0;
    for (auto z : v_) s += z;
    return s / double(v_.size());
  }

  Subset support(double tol = 0.0) const {
    Subset s(g_);
    for (std::size_t i = 0; i < v_.size(); ++i)
      if (std::abs(v_[i]) > tol) s.insert(elem(i));
    return s;
  }

  // Largest distance from a value to its nearest integer (real part rounded).
  double integer_defect() const {
    double d = 0;
    for (auto z : v_) d = std::max(d, std::abs(z - cplx(std::round(z.real()), 0.0)));
    return d;
  }
  bool is_integer_valued(double tol = 1e-9) const { return integer_defect() <= tol; }
  // Every value within eps of an integer (strict), exact integers always accepted.
  bool is_almost_integer(double eps) const {
    double d = integer_defect();
    return d < eps || d <= 1e-12;
  }
  Function rounded() const {
    Function f(g_);
    for (std::size_t i = 0; i < v_.size(); ++i) f.v_[i] = std::round(v_[i].real());
    return f;
  }

  Function& operator+=(const Function& o) {
    require_same(*g_, *o.g_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Function& operator-=(const Function& o) {
    require_same(*g_, *o.g_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Function& operator*=(cplx c) {
    for (auto& z : v_) z *= c;
    return *this;
  }
  friend Function operator+(Function a, const Function& b) { return a += b; }
  friend Function operator-(Function a, const Function& b) { return a -= b; }
  friend Function operator*(Function a, cplx c) { return a *= c; }
  friend Function operator*(cplx c, Function a) { return a *= c; }

  // Pointwise product.
  Function pointwise(const Function& o) const {
    require_same(*g_, *o.g_);
    Function f(g_);
    for (std::size_t i = 0; i < v_.size(); ++i) f.v_[i] = v_[i] * o.v_[i];
    return f;
  }

  double distance(const Function& o) const {
    require_same(*g_, *o.g_);
    double d = 0;
    for (std::size_t i = 0; i < v_.size(); ++i) d = std::max(d, std::abs(v_[i] - o.v_[i]));
    return d;
  }

 private:
  GroupPtr g_;
  std::vector<cplx> v_;
};

// <f, g> = (1/n) sum f conj(g)
inline cplx inner(const Function& f, const Function& g) {
  require_same(f.group(), g.group());
  cplx s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[elem(i)] * std::conj(g[elem(i)]);
  return s / double(f.size());
}

// (f*g)(x) = (1/n) sum_y f(y) g(y^{-1}x)
inline Function convolve(const Function& f, const Function& g) {
  require_same(f.group(), g.group());
  const Group& G = f.group();
  std::size_t n = G.order();
  Function out(f.group_ptr());
  for (elem y = 0; y < n; ++y) {
    cplx fy = f[y];
    if (fy == cplx(0)) continue;
    elem yi = G.inv(y);
    for (elem x = 0; x < n; ++x) out[x] += fy * g[G.mul(yi, x)];
  }
  out *= 1.0 / double(n);
  return out;
}

// x -> conj(f(x^{-1}))
inline Function adjoint(const Function& f) {
  Function out(f.group_ptr());
  for (elem x = 0; x < f.size(); ++x) out[x] = std::conj(f[f.group().inv(x)]);
  return out;
}

// (rho_y f)(x) = f(xy)
inline Function right_translate(const Function& f, elem y) {
  Function out(f.group_ptr());
  for (elem x = 0; x < f.size(); ++x) out[x] = f[f.group().mul(x, y)];
  return out;
}

// (lambda_y f)(x) = f(y^{-1}x)
inline Function left_translate(const Function& f, elem y) {
  Function out(f.group_ptr());
  elem yi = f.group().inv(y);
  for (elem x = 0; x < f.size(); ++x) out[x] = f[f.group().mul(yi, x)];
  return out;
}

// f * mu_H: the average of f over each left coset xH.
inline Function coset_projection(const Function& f, const Subset& h) {
  require_subgroup(h);
  require_same(f.group(), h.group());
  const Group& G = f.group();
  auto hm = h.members();
  Function out(f.group_ptr());
  for (elem x = 0; x < f.size(); ++x) {
    cplx s = 0;
    for (elem k : hm) s += f[G.mul(x, k)];
    out[x] = s / double(hm.size());
  }
  return out;
}

// Standard complex Gaussian values.
inline Function random_function(const GroupPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Function f(g);
  for (auto& z : f.values()) {
    double re = nd(rng);
    double im = nd(rng);
    z = cplx(re, im);
  }
  return f;
}

inline Subset random_subset(const GroupPtr& g, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution b(p);
  Subset s(g);
  for (elem x = 0; x < g->order(); ++x)
    if (b(rng)) s.insert(x);
  return s;
}

}  // namespace agnorm
