#pragma once

#include <random>

#include "spectral.hpp"

namespace agnorm {

// A homomorphism from G into the d x d unitaries, one matrix per element.
class UnitaryRep {
 public:
  UnitaryRep(GroupPtr g, std::vector<Matrix> mats) : g_(std::move(g)), mats_(std::move(mats)) {
    if (mats_.size() != g_->order()) throw UsageError("representation needs one matrix per element");
    d_ = mats_.empty() ? 0 : std::size_t(mats_[0].rows());
    for (const auto& m : mats_)
      if (std::size_t(m.rows()) != d_ || std::size_t(m.cols()) != d_)
        throw UsageError("representation matrices must all be square of equal size");
    Matrix id = Matrix::Identity(Eigen::Index(d_), Eigen::Index(d_));
    for (std::size_t x = 0; x < mats_.size(); ++x)
      if ((mats_[x].adjoint() * mats_[x] - id).cwiseAbs().maxCoeff() > 1e-10)
        throw UsageError("matrix for element " + std::to_string(x) + " is not unitary");
    if ((mats_[g_->identity()] - id).cwiseAbs().maxCoeff() > 1e-9)
      throw UsageError("identity element must map to the identity matrix");
    for (elem x = 0; x < g_->order(); ++x)
      for (elem y = 0; y < g_->order(); ++y)
        if ((mats_[x] * mats_[y] - mats_[g_->mul(x, y)]).cwiseAbs().maxCoeff() > 1e-9)
          throw UsageError("not a homomorphism at (" + std::to_string(x) + "," + std::to_string(y) + ")");
  }

  const Group& group() const { return *g_; }
  const GroupPtr& group_ptr() const { return g_; }
  std::size_t dim() const { return d_; }
  const Matrix& operator()(elem x) const { return mats_[x]; }
  const std::vector<Matrix>& matrices() const { return mats_; }

 private:
  GroupPtr g_;
  std::vector<Matrix> mats_;
  std::size_t d_ = 0;
};

inline UnitaryRep trivial_rep(const GroupPtr& g, std::size_t d = 1) {
  return UnitaryRep(g, std::vector<Matrix>(g->order(), Matrix::Identity(Eigen::Index(d), Eigen::Index(d))));
}

// Right regular representation: x -> matrix of v -> rho_x v.
inline UnitaryRep regular_rep(const GroupPtr& g) {
  std::vector<Matrix> mats;
  for (elem x = 0; x < g->order(); ++x) mats.push_back(right_translation_matrix(*g, x));
  return UnitaryRep(g, std::move(mats));
}

// Diagonal sum of characters x -> exp(2 pi i k x / n) on cyclic:n.
inline UnitaryRep character_rep(const GroupPtr& g, const std::vector<long>& freqs) {
  std::size_t n = g->order();
  const double tau = 2 * std::acos(-1.0);
  std::vector<Matrix> mats;
  for (elem x = 0; x < n; ++x) {
    Matrix m = Matrix::Zero(Eigen::Index(freqs.size()), Eigen::Index(freqs.size()));
    for (std::size_t i = 0; i < freqs.size(); ++i)
      m(Eigen::Index(i), Eigen::Index(i)) = std::polar(1.0, tau * double((freqs[i] * long(x)) % long(n)) / double(n));
    mats.push_back(m);
  }
  return UnitaryRep(g, std::move(mats));
}

inline double distance_to_identity(const Matrix& m) {
  return operator_norm(m - Matrix::Identity(m.rows(), m.cols()));
}

inline constexpr double bohr_tolerance = 1e-9;

inline Subset bohr_set(const UnitaryRep& rep, double delta) {
  if (!(delta >= 0 && delta <= 2)) throw UsageError("bohr radius must lie in [0,2]");
  Subset out(rep.group_ptr());
  for (elem x = 0; x < rep.group().order(); ++x)
    if (distance_to_identity(rep(x)) <= delta + bohr_tolerance) out.insert(x);
  return out;
}

// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases of R's diagonal removed.
inline Matrix haar_unitary(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const auto dim = Eigen::Index(d);
  Matrix z(dim, dim);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      double re = nd(rng);
      double im = nd(rng);
      z(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    cplx dj = r(j, j);
    if (std::abs(dj) > 0) q.col(j) *= dj / std::abs(dj);
  }
  return q;
}

// Checks ||phi(x)^{-1} phi(x') - I|| <= delta over all pairs in S.
inline bool pairwise_close(const std::vector<elem>& s, const std::vector<Matrix>& phi, double delta) {
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (distance_to_identity(phi[s[i]].adjoint() * phi[s[j]]) > delta + bohr_tolerance) return false;
  return true;
}

// phi is indexed by group element; only entries for members of B are read.
inline Subset unitary_cover_subset(const Subset& b, const std::vector<Matrix>& phi, double delta, int samples,
                                   std::uint64_t seed) {
  if (!(delta > 0 && delta <= 2)) throw UsageError("cover radius must lie in (0,2]");
  if (phi.size() != b.group().order()) throw UsageError("phi needs one matrix per group element");
  auto members = b.members();
  if (members.empty()) return b;
  std::size_t d = std::size_t(phi[members[0]].rows());
  for (elem x : members) {
    Matrix id = Matrix::Identity(Eigen::Index(d), Eigen::Index(d));
    if ((phi[x].adjoint() * phi[x] - id).cwiseAbs().maxCoeff() > 1e-10)
      throw UsageError("phi value at " + std::to_string(x) + " is not unitary");
  }
  std::vector<elem> best{members[0]};
  auto consider = [&](std::vector<elem> cand) {
    // keep a greedy pairwise-close subfamily in the given order
    std::vector<elem> kept;
    for (elem x : cand) {
      bool ok = true;
      for (elem k : kept)
        if (distance_to_identity(phi[k].adjoint() * phi[x]) > delta + bohr_tolerance) {
          ok = false;
          break;
        }
      if (ok) kept.push_back(x);
    }
    if (!pairwise_close(kept, phi, delta)) throw InternalError("cover subset lost the pairwise bound");
    std::sort(kept.begin(), kept.end());
    if (kept.size() > best.size()) best = kept;
  };
  for (int s = 0; s < samples; ++s) {
    std::seed_seq seq{seed, std::uint64_t(s)};
    std::mt19937_64 rng(seq);
    Matrix n = haar_unitary(d, rng);
    std::vector<elem> cand;
    for (elem x : members)
      if (distance_to_identity(n.adjoint() * phi[x]) <= delta / 2 + bohr_tolerance) cand.push_back(x);
    consider(cand);
  }
  for (elem centre : members) {
    std::vector<std::pair<double, elem>> near;
    for (elem x : members) {
      double dist = distance_to_identity(phi[centre].adjoint() * phi[x]);
      if (dist <= delta + bohr_tolerance) near.emplace_back(dist, x);
    }
    std::stable_sort(near.begin(), near.end());
    std::vector<elem> cand;
    for (auto& [dist, x] : near) cand.push_back(x);
    consider(cand);
  }
  return Subset(b.group_ptr(), best);
}

}  // namespace agnorm
