#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "error.hpp"

namespace agnorm {

using elem = std::uint32_t;

inline constexpr std::size_t max_dense_order = 4096;
inline constexpr std::size_t default_subgroup_cap = 64;

class Group;
using GroupPtr = std::shared_ptr<const Group>;

class Group {
 public:
  // Validates the table; throws UsageError naming the first violated axiom.
  static GroupPtr from_table(std::size_t n, std::vector<elem> table,
                             std::vector<std::string> labels = {},
                             std::string spec = "", bool check_assoc = true) {
    auto g = std::shared_ptr<Group>(new Group());
    g->n_ = n;
    g->mul_ = std::move(table);
    g->spec_ = std::move(spec);
    g->validate(check_assoc);
    if (labels.empty()) {
      for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    }
    if (labels.size() != n) throw UsageError("label line must have " + std::to_string(n) + " entries");
    g->labels_ = std::move(labels);
    return g;
  }

  std::size_t order() const { return n_; }
  elem mul(elem a, elem b) const { return mul_[a * n_ + b]; }
  elem inv(elem a) const { return inv_[a]; }
  elem identity() const { return id_; }
  const std::string& label(elem a) const { return labels_[a]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& spec() const { return spec_; }
  const std::vector<elem>& table() const { return mul_; }

  bool is_abelian() const {
    for (elem a = 0; a < n_; ++a)
      for (elem b = a + 1; b < n_; ++b)
        if (mul(a, b) != mul(b, a)) return false;
    return true;
  }

  bool same_as(const Group& o) const { return this == &o || (n_ == o.n_ && mul_ == o.mul_); }

 private:
  Group() = default;

  void validate(bool check_assoc) {
    if (n_ == 0) throw UsageError("group order must be positive");
    if (n_ > max_dense_order) throw UsageError("group order exceeds hard cap " + std::to_string(max_dense_order));
    if (mul_.size() != n_ * n_) throw UsageError("table has wrong number of entries");
    std::vector<char> seen(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      std::fill(seen.begin(), seen.end(), 0);
      for (std::size_t j = 0; j < n_; ++j) {
        elem v = mul_[i * n_ + j];
        if (v >= n_) throw UsageError("table entry out of range at row " + std::to_string(i));
        if (seen[v]) throw UsageError("row " + std::to_string(i) + " is not a permutation");
        seen[v] = 1;
      }
      std::fill(seen.begin(), seen.end(), 0);
      for (std::size_t j = 0; j < n_; ++j) {
        elem v = mul_[j * n_ + i];
        if (seen[v]) throw UsageError("column " + std::to_string(i) + " is not a permutation");
        seen[v] = 1;
      }
    }
    bool found = false;
    for (elem e = 0; e < n_ && !found; ++e) {
      bool ok = true;
      for (elem x = 0; x < n_ && ok; ++x) ok = mul(e, x) == x && mul(x, e) == x;
      if (ok) {
        id_ = e;
        found = true;
      }
    }
    if (!found) throw UsageError("table has no identity element");
    inv_.assign(n_, 0);
    for (elem x = 0; x < n_; ++x) {
      elem y = 0;
      while (y < n_ && mul(x, y) != id_) ++y;
      if (y == n_ || mul(y, x) != id_)
        throw UsageError("element " + std::to_string(x) + " has no two-sided inverse");
      inv_[x] = y;
    }
    if (check_assoc && n_ <= 256) {
      for (elem a = 0; a < n_; ++a)
        for (elem b = 0; b < n_; ++b) {
          elem ab = mul(a, b);
          for (elem c = 0; c < n_; ++c)
            if (mul(ab, c) != mul(a, mul(b, c)))
              throw UsageError("associativity fails for triple (" + std::to_string(a) + "," +
                               std::to_string(b) + "," + std::to_string(c) + ")");
        }
    }
  }

  std::size_t n_ = 0;
  std::vector<elem> mul_;
  std::vector<elem> inv_;
  elem id_ = 0;
  std::vector<std::string> labels_;
  std::string spec_;
};

inline void require_same(const Group& a, const Group& b) {
  if (!a.same_as(b)) throw UsageError("group mismatch");
}

// Subset of a group stored as a bitset over element indices.
class Subset {
 public:
  Subset() = default;
  explicit Subset(GroupPtr g) : g_(std::move(g)), bits_(g_->order()) {}
  Subset(GroupPtr g, const std::vector<elem>& members) : Subset(std::move(g)) {
    for (elem x : members) {
      if (x >= g_->order()) throw UsageError("element index out of range: " + std::to_string(x));
      bits_.set(x);
    }
  }
  Subset(GroupPtr g, boost::dynamic_bitset<> bits) : g_(std::move(g)), bits_(std::move(bits)) {}

  static Subset whole(GroupPtr g) {
    Subset s(std::move(g));
    s.bits_.set();
    return s;
  }
  static Subset singleton(GroupPtr g, elem x) { return Subset(std::move(g), std::vector<elem>{x}); }
  static Subset identity(GroupPtr g) {
    elem e = g->identity();
    return singleton(std::move(g), e);
  }

  const GroupPtr& group_ptr() const { return g_; }
  const Group& group() const { return *g_; }
  const boost::dynamic_bitset<>& bits() const { return bits_; }

  bool contains(elem x) const { return bits_.test(x); }
  void insert(elem x) { bits_.set(x); }
  void erase(elem x) { bits_.reset(x); }
  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }
  double measure() const { return double(size()) / double(g_->order()); }

  std::vector<elem> members() const {
    std::vector<elem> out;
    out.reserve(size());
    for (auto i = bits_.find_first(); i != boost::dynamic_bitset<>::npos; i = bits_.find_next(i))
      out.push_back(static_cast<elem>(i));
    return out;
  }

  elem first() const {
    auto i = bits_.find_first();
    if (i == boost::dynamic_bitset<>::npos) throw UsageError("empty set has no element");
    return static_cast<elem>(i);
  }

  bool contains_identity() const { return contains(g_->identity()); }

  Subset inverse() const {
    Subset out(g_);
    for (elem x : members()) out.insert(g_->inv(x));
    return out;
  }
  bool is_symmetric() const { return inverse() == *this; }

  bool subset_of(const Subset& o) const { return bits_.is_subset_of(o.bits_); }

  Subset operator|(const Subset& o) const { return {g_, bits_ | o.bits_}; }
  Subset operator&(const Subset& o) const { return {g_, bits_ & o.bits_}; }
  Subset operator-(const Subset& o) const { return {g_, bits_ - o.bits_}; }

  bool operator==(const Subset& o) const { return bits_ == o.bits_; }
  bool operator!=(const Subset& o) const { return !(*this == o); }
  // Orders by size, then by sorted member list.
  bool operator<(const Subset& o) const {
    auto a = size(), b = o.size();
    if (a != b) return a < b;
    return members() < o.members();
  }

 private:
  GroupPtr g_;
  boost::dynamic_bitset<> bits_;
};

inline Subset product_set(const Subset& a, const Subset& b) {
  require_same(a.group(), b.group());
  const Group& g = a.group();
  Subset out(a.group_ptr());
  auto bm = b.members();
  for (elem x : a.members())
    for (elem y : bm) out.insert(g.mul(x, y));
  return out;
}

inline Subset product_set(const Subset& a, const Subset& b, const Subset& c) {
  return product_set(product_set(a, b), c);
}

inline Subset inverse_set(const Subset& a) { return a.inverse(); }

// A^k for k >= 0, with A^0 = {identity}.
inline Subset power_set(const Subset& a, int k) {
  if (k < 0) throw UsageError("power must be nonnegative");
  Subset out = Subset::identity(a.group_ptr());
  for (int i = 0; i < k; ++i) {
    Subset next = product_set(out, a);
    if (next == out && a.contains_identity()) break;
    out = std::move(next);
  }
  return out;
}

inline bool is_subgroup(const Subset& h) {
  if (!h.contains_identity()) return false;
  const Group& g = h.group();
  auto m = h.members();
  for (elem x : m) {
    if (!h.contains(g.inv(x))) return false;
    for (elem y : m)
      if (!h.contains(g.mul(x, y))) return false;
  }
  return true;
}

inline void require_subgroup(const Subset& h) {
  if (!is_subgroup(h)) throw UsageError("set is not a subgroup");
}

inline Subset generated_subgroup(const Subset& s) {
  const Group& g = s.group();
  auto gens = s.members();
  Subset out = Subset::identity(s.group_ptr());
  std::vector<elem> frontier{g.identity()};
  while (!frontier.empty()) {
    std::vector<elem> next;
    for (elem x : frontier)
      for (elem y : gens) {
        elem z = g.mul(x, y);
        if (!out.contains(z)) {
          out.insert(z);
          next.push_back(z);
        }
      }
    frontier = std::move(next);
  }
  return out;
}

// Left coset xH.
inline Subset coset(const Subset& h, elem x) {
  require_subgroup(h);
  return product_set(Subset::singleton(h.group_ptr(), x), h);
}

inline Subset right_coset(const Subset& h, elem x) {
  require_subgroup(h);
  return product_set(h, Subset::singleton(h.group_ptr(), x));
}

inline Subset left_translate(const Subset& a, elem x) {
  return product_set(Subset::singleton(a.group_ptr(), x), a);
}

inline Subset right_translate(const Subset& a, elem x) {
  return product_set(a, Subset::singleton(a.group_ptr(), x));
}

// yAy^{-1}
inline Subset conjugate(const Subset& a, elem y) {
  const Group& g = a.group();
  Subset out(a.group_ptr());
  elem yi = g.inv(y);
  for (elem x : a.members()) out.insert(g.mul(g.mul(y, x), yi));
  return out;
}

inline std::size_t subgroup_cap() {
  if (const char* env = std::getenv("AGNORM_CAP_N")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
    throw UsageError("AGNORM_CAP_N must be a positive integer");
  }
  return default_subgroup_cap;
}

// All subgroups, sorted by size then members. Grows the family of cyclic
// subgroups by joins with single cyclic subgroups until nothing new appears.
inline std::vector<Subset> subgroups(const GroupPtr& g, std::size_t cap = subgroup_cap()) {
  if (g->order() > cap)
    throw UsageError("subgroup enumeration limit exceeded (order " + std::to_string(g->order()) + " > " +
                     std::to_string(cap) + ")");
  std::set<boost::dynamic_bitset<>> seen;
  std::vector<Subset> cyclic;
  for (elem x = 0; x < g->order(); ++x) {
    Subset c = generated_subgroup(Subset::singleton(g, x));
    if (seen.insert(c.bits()).second) cyclic.push_back(c);
  }
  std::vector<Subset> all = cyclic;
  std::vector<Subset> work = cyclic;
  while (!work.empty()) {
    std::vector<Subset> next;
    for (const auto& h : work)
      for (const auto& c : cyclic) {
        if (c.subset_of(h)) continue;
        Subset j = generated_subgroup(h | c);
        if (seen.insert(j.bits()).second) {
          all.push_back(j);
          next.push_back(j);
        }
      }
    work = std::move(next);
  }
  std::sort(all.begin(), all.end());
  return all;
}

inline bool normalizes(elem x, const Subset& h) { return conjugate(h, x) == h; }

inline bool is_normal(const Subset& h) {
  for (elem x = 0; x < h.group().order(); ++x)
    if (!normalizes(x, h)) return false;
  return true;
}

namespace detail {

inline GroupPtr make_cyclic(std::size_t n, const std::string& spec) {
  std::vector<elem> t(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) t[a * n + b] = elem((a + b) % n);
  return Group::from_table(n, std::move(t), {}, spec, false);
}

// Order n = 2m: index k < m is the rotation r^k, index m + k is r^k s.
inline GroupPtr make_dihedral(std::size_t n, const std::string& spec) {
  if (n < 2 || n % 2) throw UsageError("dihedral order must be even and at least 2");
  std::size_t m = n / 2;
  std::vector<elem> t(n * n);
  std::vector<std::string> labels(n);
  for (std::size_t a = 0; a < n; ++a) {
    labels[a] = a < m ? "r" + std::to_string(a) : "r" + std::to_string(a - m) + "s";
    for (std::size_t b = 0; b < n; ++b) {
      std::size_t i = a % m, j = b % m;
      bool fa = a >= m, fb = b >= m;
      std::size_t k = fa ? (i + m - j) % m : (i + j) % m;
      t[a * n + b] = elem(k + ((fa != fb) ? m : 0));
    }
  }
  return Group::from_table(n, std::move(t), std::move(labels), spec, false);
}

// Dicyclic group of order n = 4m: a^k at index k < 2m, a^k x at 2m + k, x^2 = a^m.
inline GroupPtr make_quaternion(std::size_t n, const std::string& spec) {
  if (n < 8 || n % 4) throw UsageError("quaternion order must be a multiple of 4 and at least 8");
  std::size_t m = n / 4, h = 2 * m;
  std::vector<elem> t(n * n);
  std::vector<std::string> labels(n);
  for (std::size_t a = 0; a < n; ++a) {
    labels[a] = a < h ? "a" + std::to_string(a) : "a" + std::to_string(a - h) + "x";
    for (std::size_t b = 0; b < n; ++b) {
      std::size_t i = a % h, j = b % h;
      bool xa = a >= h, xb = b >= h;
      std::size_t k = xa ? (i + h - j) % h : (i + j) % h;
      if (xa && xb) k = (k + m) % h;
      t[a * n + b] = elem(k + ((xa != xb) ? h : 0));
    }
  }
  return Group::from_table(n, std::move(t), std::move(labels), spec, false);
}

// Even permutations first, each half in lexicographic order, so the alternating
// group is the initial block; (p q)(i) = p(q(i)).
inline GroupPtr make_symmetric(std::size_t k, const std::string& spec) {
  if (k < 1 || k > 6) throw UsageError("symmetric degree must be in 1..6");
  std::vector<std::vector<int>> perms;
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  auto odd = [](const std::vector<int>& q) {
    int inversions = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t j = i + 1; j < q.size(); ++j) inversions += q[i] > q[j];
    return inversions % 2;
  };
  std::stable_partition(perms.begin(), perms.end(), [&](const std::vector<int>& q) { return !odd(q); });
  std::map<std::vector<int>, elem> index;
  for (std::size_t i = 0; i < perms.size(); ++i) index[perms[i]] = elem(i);
  std::size_t n = perms.size();
  std::vector<elem> t(n * n);
  std::vector<std::string> labels(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (int v : perms[a]) labels[a] += char('1' + v);
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<int> c(k);
      for (std::size_t i = 0; i < k; ++i) c[i] = perms[a][perms[b][i]];
      t[a * n + b] = index[c];
    }
  }
  return Group::from_table(n, std::move(t), std::move(labels), spec, false);
}

inline GroupPtr make_product(const Group& a, const Group& b, const std::string& spec) {
  std::size_t n1 = a.order(), n2 = b.order(), n = n1 * n2;
  if (n > max_dense_order) throw UsageError("group order exceeds hard cap " + std::to_string(max_dense_order));
  std::vector<elem> t(n * n);
  std::vector<std::string> labels(n);
  for (std::size_t x = 0; x < n; ++x) {
    labels[x] = "(" + a.label(elem(x / n2)) + "," + b.label(elem(x % n2)) + ")";
    for (std::size_t y = 0; y < n; ++y)
      t[x * n + y] = elem(a.mul(elem(x / n2), elem(y / n2)) * n2 + b.mul(elem(x % n2), elem(y % n2)));
  }
  return Group::from_table(n, std::move(t), std::move(labels), spec, false);
}

inline std::size_t parse_size(const std::string& s, const std::string& spec) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw UsageError("malformed group spec: " + spec);
  return std::stoul(s);
}

}  // namespace detail

inline GroupPtr read_cayley_table(std::istream& in, const std::string& spec) {
  std::size_t n = 0;
  if (!(in >> n) || n == 0) throw UsageError("cayley table: missing or invalid order");
  if (n > max_dense_order) throw UsageError("group order exceeds hard cap " + std::to_string(max_dense_order));
  std::vector<elem> t(n * n);
  for (auto& v : t) {
    long long x;
    if (!(in >> x)) throw UsageError("cayley table: expected " + std::to_string(n * n) + " entries");
    if (x < 0 || std::size_t(x) >= n) throw UsageError("cayley table: entry out of range");
    v = elem(x);
  }
  std::vector<std::string> labels;
  std::string tok;
  while (in >> tok) labels.push_back(tok);
  return Group::from_table(n, std::move(t), std::move(labels), spec, true);
}

inline void write_cayley_table(std::ostream& out, const Group& g) {
  std::size_t n = g.order();
  out << n << '\n';
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) out << (b ? " " : "") << g.mul(elem(a), elem(b));
    out << '\n';
  }
  for (std::size_t a = 0; a < n; ++a) out << (a ? " " : "") << g.label(elem(a));
  out << '\n';
}

// Specs: cyclic:n, dihedral:n (order n), symmetric:k, quaternion:n (order n),
// products joined with 'x' (e.g. cyclic:2xsymmetric:3), or @path to a table file.
inline GroupPtr build_group(const std::string& spec) {
  if (spec.empty()) throw UsageError("empty group spec");
  if (spec[0] == '@') {
    std::ifstream in(spec.substr(1));
    if (!in) throw UsageError("cannot open group table file: " + spec.substr(1));
    return read_cayley_table(in, spec);
  }
  auto cross = spec.find('x');
  if (cross != std::string::npos) {
    auto left = build_group(spec.substr(0, cross));
    auto right = build_group(spec.substr(cross + 1));
    return detail::make_product(*left, *right, spec);
  }
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("malformed group spec: " + spec);
  std::string fam = spec.substr(0, colon);
  std::size_t n = detail::parse_size(spec.substr(colon + 1), spec);
  if (n == 0) throw UsageError("group order must be positive: " + spec);
  if (n > max_dense_order) throw UsageError("group order exceeds hard cap " + std::to_string(max_dense_order));
  if (fam == "cyclic") return detail::make_cyclic(n, spec);
  if (fam == "dihedral") return detail::make_dihedral(n, spec);
  if (fam == "quaternion") return detail::make_quaternion(n, spec);
  if (fam == "symmetric") return detail::make_symmetric(n, spec);
  throw UsageError("unknown group family '" + fam + "' (expected cyclic, dihedral, symmetric, quaternion)");
}

// The named groups shipped as table files and used by exhaustive suites.
inline const std::vector<std::string>& catalog_specs() {
  static const std::vector<std::string> specs = [] {
    std::vector<std::string> s;
    for (int n = 1; n <= 24; ++n) s.push_back("cyclic:" + std::to_string(n));
    for (int n = 4; n <= 24; n += 2) s.push_back("dihedral:" + std::to_string(n));
    for (int n = 8; n <= 24; n += 4) s.push_back("quaternion:" + std::to_string(n));
    s.push_back("symmetric:3");
    s.push_back("symmetric:4");
    for (const char* p : {"cyclic:2xcyclic:4", "cyclic:2xcyclic:2xcyclic:2", "cyclic:3xcyclic:3",
                          "cyclic:2xcyclic:6", "cyclic:2xsymmetric:3", "cyclic:4xcyclic:4",
                          "cyclic:2xcyclic:8", "cyclic:2xcyclic:2xcyclic:4", "cyclic:2xdihedral:8",
                          "cyclic:2xquaternion:8", "cyclic:2xcyclic:2xcyclic:2xcyclic:2",
                          "cyclic:3xsymmetric:3", "cyclic:3xcyclic:6", "cyclic:2xcyclic:10",
                          "cyclic:2xcyclic:12", "cyclic:2xcyclic:2xcyclic:6", "cyclic:3xquaternion:8",
                          "cyclic:2xdihedral:12", "cyclic:4xsymmetric:3", "cyclic:3xdihedral:8",
                          "cyclic:2xcyclic:2xsymmetric:3"})
      s.push_back(p);
    return s;
  }();
  return specs;
}

inline std::string catalog_file_name(const std::string& spec) {
  std::string out = spec;
  for (char& c : out)
    if (c == ':') c = '_';
  return out + ".tbl";
}

}  // namespace agnorm
