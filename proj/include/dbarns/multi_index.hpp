/// @file multi_index.hpp
/// @brief Strictly increasing index tuples J ⊂ {1..n} labelling the components
/// of a (0,q)-form, with the sign algebra of dz̄_j ∧ dz̄_J.
#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dbarns/common.hpp"

namespace dbarns {

class MultiIndex {
 public:
  MultiIndex() = default;

  /// Validates that `indices` is strictly increasing with entries in [1, n].
  MultiIndex(std::vector<int> indices, int n) : idx_(std::move(indices)) {
    for (std::size_t a = 0; a < idx_.size(); ++a) {
      if (idx_[a] < 1 || idx_[a] > n)
        throw ParameterError("multi-index entry " + std::to_string(idx_[a]) + " outside [1, " +
                             std::to_string(n) + "]");
      if (a > 0 && idx_[a] <= idx_[a - 1]) throw DuplicateIndexError("multi-index not strictly increasing");
    }
  }

  int degree() const { return static_cast<int>(idx_.size()); }
  const std::vector<int>& indices() const { return idx_; }
  int operator[](std::size_t a) const { return idx_[a]; }
  bool contains(int j) const { return std::binary_search(idx_.begin(), idx_.end(), j); }

  /// The index with its a-th entry (0-based) removed.
  MultiIndex without(std::size_t a) const {
    MultiIndex r;
    r.idx_ = idx_;
    r.idx_.erase(r.idx_.begin() + static_cast<index_t>(a));
    return r;
  }

  std::string str() const {
    std::string s = "(";
    for (std::size_t a = 0; a < idx_.size(); ++a) s += (a ? "," : "") + std::to_string(idx_[a]);
    return s + ")";
  }

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> idx_;
};

inline std::ostream& operator<<(std::ostream& os, const MultiIndex& J) { return os << J.str(); }

/// All multi-indices of length q from {1..n}, in lexicographic order.
inline std::vector<MultiIndex> enumerate(int n, int q) {
  if (n < 1 || q < 0 || q > n) throw ParameterError("enumerate: need 0 <= q <= n, n >= 1");
  std::vector<MultiIndex> out;
  out.reserve(binomial(n, q));
  std::vector<int> cur(static_cast<std::size_t>(q));
  for (int a = 0; a < q; ++a) cur[static_cast<std::size_t>(a)] = a + 1;
  while (true) {
    out.emplace_back(cur, n);
    int a = q - 1;
    while (a >= 0 && cur[static_cast<std::size_t>(a)] == n - q + a + 1) --a;
    if (a < 0) break;
    ++cur[static_cast<std::size_t>(a)];
    for (int b = a + 1; b < q; ++b) cur[static_cast<std::size_t>(b)] = cur[static_cast<std::size_t>(b - 1)] + 1;
  }
  return out;
}

/// Position of J in enumerate(n, J.degree()); computed by the combinatorial
/// number system, no table lookups.
inline std::size_t index_of(const MultiIndex& J, int n) {
  const int q = J.degree();
  std::size_t rank = 0;
  int prev = 0;
  for (int a = 0; a < q; ++a) {
    for (int v = prev + 1; v < J[static_cast<std::size_t>(a)]; ++v) rank += binomial(n - v, q - a - 1);
    prev = J[static_cast<std::size_t>(a)];
  }
  return rank;
}

struct SignedIndex {
  int sign;
  MultiIndex index;
};

/// dz̄_j ∧ dz̄_J = sign · dz̄_K with K = sorted(J ∪ {j}) and
/// sign = (-1)^{#{i ∈ J : i < j}}.
inline SignedIndex insert_sign(int j, const MultiIndex& J, int n) {
  if (j < 1 || j > n) throw ParameterError("insert_sign: index " + std::to_string(j) + " outside [1, n]");
  if (J.contains(j)) throw DuplicateIndexError("insert_sign: index " + std::to_string(j) + " already in " + J.str());
  std::vector<int> k = J.indices();
  const auto pos = std::lower_bound(k.begin(), k.end(), j);
  const auto before = pos - k.begin();
  k.insert(pos, j);
  return {before % 2 == 0 ? 1 : -1, MultiIndex(std::move(k), n)};
}

}  // namespace dbarns
