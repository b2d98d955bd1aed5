#pragma once

#include <algorithm>
#include <memory>
#include <mutex>

#include <Eigen/Dense>

#include "function.hpp"

namespace agnorm {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double zero_floor = 1e-12;

struct Svd {
  RealVector values;  // descending
  Matrix u;
  Matrix v;
};

// Two-sided Jacobi. Eigen 3.4.0's divide-and-conquer SVD loses singular values
// on the heavily degenerate spectra that convolution operators produce.
inline Svd full_svd(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed to converge");
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

// Singular values as the non-negative eigenvalues of [[0, M], [M*, 0]], which are
// +-s_i. Accurate to machine precision relative to s_1 and much faster than Jacobi.
// The symmetric spectrum occasionally stalls the shifted QR iteration; Jacobi
// takes over then.
inline RealVector singular_values_of(const Matrix& m) {
  Eigen::Index r = m.rows(), c = m.cols(), k = std::min(r, c);
  Matrix h = Matrix::Zero(r + c, r + c);
  h.topRightCorner(r, c) = m;
  h.bottomLeftCorner(c, r) = m.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    Eigen::JacobiSVD<Matrix> svd(m);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD failed to converge");
    return svd.singularValues();
  }
  const RealVector& ev = es.eigenvalues();  // ascending
  RealVector s(k);
  for (Eigen::Index i = 0; i < k; ++i) s(i) = std::max(0.0, ev(r + c - 1 - i));
  return s;
}

// Sum of singular values above the relative noise floor.
inline double nuclear_sum(const RealVector& s) {
  if (s.size() == 0) return 0.0;
  double cut = zero_floor * s(0), t = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) t += s(i);
  return t;
}

inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values_of(m)(0);
}

// L_f : v -> f*v as the matrix M[x][z] = f(x z^{-1}) / n, with a lazily computed SVD.
class ConvolutionOperator {
 public:
  explicit ConvolutionOperator(const Function& f) : g_(f.group_ptr()), cache_(std::make_shared<Cache>()) {
    const Group& G = *g_;
    std::size_t n = G.order();
    m_.resize(Eigen::Index(n), Eigen::Index(n));
    for (elem x = 0; x < n; ++x)
      for (elem z = 0; z < n; ++z) m_(x, z) = f[G.mul(x, G.inv(z))] / double(n);
  }

  const Matrix& matrix() const { return m_; }
  const GroupPtr& group_ptr() const { return g_; }

  const Svd& svd() const {
    std::call_once(cache_->full_once, [this] { cache_->full = full_svd(m_); });
    return cache_->full;
  }
  const RealVector& singular_values() const {
    std::call_once(cache_->values_once, [this] { cache_->values = singular_values_of(m_); });
    return cache_->values;
  }

 private:
  struct Cache {
    std::once_flag full_once, values_once;
    Svd full;
    RealVector values;
  };
  GroupPtr g_;
  Matrix m_;
  std::shared_ptr<Cache> cache_;
};

inline RealVector singular_values(const Function& f) { return ConvolutionOperator(f).singular_values(); }

inline double a_norm(const Function& f) { return nuclear_sum(singular_values(f)); }

inline double pm_norm(const Function& f) {
  auto s = singular_values(f);
  return s.size() ? s(0) : 0.0;
}

// Orthonormal eigenbasis of L_f* L_f. Vectors are functions of unit L2 norm.
struct FourierBasis {
  std::vector<Function> vectors;
  std::vector<double> values;
};

namespace detail {

// Rotates a vector so its first non-negligible entry is real and positive.
inline void fix_phase(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-9) {
      v *= std::conj(v(i)) / std::abs(v(i));
      return;
    }
}

inline bool rounded_less(const Vector& a, const Vector& b) {
  auto r = [](double x) { return std::round(x * 1e8) / 1e8; };
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double ar = r(a(i).real()), br = r(b(i).real());
    if (ar != br) return ar < br;
    double ai = r(a(i).imag()), bi = r(b(i).imag());
    if (ai != bi) return ai < bi;
  }
  return false;
}

// Columns of v sorted by descending singular value; within a cluster of equal
// values, by rounded entries after phase normalization.
inline std::vector<Eigen::Index> canonical_order(const RealVector& s, Matrix& v) {
  std::vector<Eigen::Index> idx(std::size_t(s.size()));
  std::iota(idx.begin(), idx.end(), 0);
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Vector c = v.col(j);
    fix_phase(c);
    v.col(j) = c;
  }
  double tol = 1e-9 * std::max(1.0, s.size() ? s(0) : 0.0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(s(a) - s(b)) > tol) return s(a) > s(b);
    return rounded_less(v.col(a), v.col(b));
  });
  return idx;
}

}  // namespace detail

inline FourierBasis fourier_basis(const Function& f) {
  ConvolutionOperator op(f);
  const Svd& svd = op.svd();
  Matrix v = svd.v;
  auto order = detail::canonical_order(svd.values, v);
  double scale = std::sqrt(double(f.size()));
  FourierBasis out;
  for (auto j : order) {
    Function w(f.group_ptr());
    for (elem x = 0; x < f.size(); ++x) w[x] = v(x, j) * scale;
    out.vectors.push_back(std::move(w));
    out.values.push_back(svd.values(j));
  }
  return out;
}

// Normalized Hilbert-Schmidt inner product of L_f and L_g.
inline cplx hs_inner(const ConvolutionOperator& a, const ConvolutionOperator& b) {
  return (b.matrix().adjoint() * a.matrix()).trace();
}

inline Matrix right_translation_matrix(const Group& g, elem y) {
  std::size_t n = g.order();
  Matrix p = Matrix::Zero(Eigen::Index(n), Eigen::Index(n));
  for (elem x = 0; x < n; ++x) p(x, g.mul(x, y)) = 1.0;
  return p;
}

// Inverts f -> L_f. M must commute with every right translation.
inline Function recover_from_operator(const GroupPtr& g, const Matrix& m, double tol = 1e-8) {
  const Group& G = *g;
  std::size_t n = G.order();
  if (std::size_t(m.rows()) != n || std::size_t(m.cols()) != n)
    throw UsageError("operator matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (elem y = 0; y < n; ++y)
    for (elem x = 0; x < n; ++x)
      for (elem z = 0; z < n; ++z)
        if (std::abs(m(G.mul(x, y), z) - m(x, G.mul(z, G.inv(y)))) > tol * scale)
          throw UsageError("not a convolution operator: fails to commute with right translation by " +
                           std::to_string(y));
  Function f(g);
  for (elem x = 0; x < n; ++x) f[x] = m(x, G.identity()) * double(n);
  return f;
}

}  // namespace agnorm
