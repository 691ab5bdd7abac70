#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "chiral/error.hpp"

namespace chiral {

/// |J, M> state of a linear rigid rotor.
struct RotorLabel {
  int j = 0;
  int m = 0;

  friend bool operator==(const RotorLabel &, const RotorLabel &) = default;
};

/// |J, N, M> Hund's case (b) state with S = 1 and Lambda = 0.
struct CaseBLabel {
  int j = 0;
  int n = 0;
  int m = 0;

  friend bool operator==(const CaseBLabel &, const CaseBLabel &) = default;
};

namespace detail {

inline bool is_even(int x) { return (x & 1) == 0; }

// M parity as 0/1 for either sign of M.
inline int parity_of(int x) { return std::abs(x) & 1; }

inline std::uint64_t pack(int a, int b, int c = 0) {
  auto u = [](int v) { return static_cast<std::uint64_t>(static_cast<std::uint32_t>(v + (1 << 20))); };
  return (u(a) << 42) | (u(b) << 21) | u(c);
}

} // namespace detail

/// Ordered set of |J,M> states. States are sorted by (J, M) so that shells are
/// contiguous.
class RotorBasis {
public:
  using Label = RotorLabel;

  RotorBasis() = default;

  explicit RotorBasis(std::vector<RotorLabel> states) : states_(std::move(states)) {
    for (const auto &s : states_) {
      if (s.j < 0 || std::abs(s.m) > s.j)
        throw ConfigError("invalid rotor state |" + std::to_string(s.j) + "," + std::to_string(s.m) + ">");
    }
    std::sort(states_.begin(), states_.end(), [](const auto &a, const auto &b) {
      return a.j != b.j ? a.j < b.j : a.m < b.m;
    });
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    index_.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
      index_.emplace(detail::pack(states_[i].j, states_[i].m), i);
  }

  /// Every |J,M> with J <= j_max.
  static RotorBasis full(int j_max) {
    std::vector<RotorLabel> s;
    for (int j = 0; j <= j_max; ++j)
      for (int m = -j; m <= j; ++m)
        s.push_back({j, m});
    return RotorBasis(std::move(s));
  }

  /// The lattice reachable from a state with the given J and M parities via
  /// Delta J, Delta M in {0, +-2}.
  static RotorBasis lattice(int j_max, int j_parity, int m_parity) {
    std::vector<RotorLabel> s;
    for (int j = j_parity & 1; j <= j_max; j += 2)
      for (int m = -j; m <= j; ++m)
        if (detail::parity_of(m) == (m_parity & 1))
          s.push_back({j, m});
    return RotorBasis(std::move(s));
  }

  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const RotorLabel &operator[](std::size_t i) const { return states_[i]; }
  std::span<const RotorLabel> states() const { return states_; }

  /// Index of a state or -1 when absent.
  std::ptrdiff_t find(int j, int m) const {
    auto it = index_.find(detail::pack(j, m));
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }
  std::ptrdiff_t find(const RotorLabel &l) const { return find(l.j, l.m); }

  int m_of(std::size_t i) const { return states_[i].m; }
  /// Truncation shell (J).
  int shell_of(std::size_t i) const { return states_[i].j; }
  /// Reported level (J).
  int level_of(std::size_t i) const { return states_[i].j; }
  int max_shell() const { return states_.empty() ? -1 : states_.back().j; }

private:
  std::vector<RotorLabel> states_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Ordered set of |J,N,M> case (b) states (S = 1, odd N). Sorted by (N, J, M).
class CaseBBasis {
public:
  using Label = CaseBLabel;

  CaseBBasis() = default;

  explicit CaseBBasis(std::vector<CaseBLabel> states) : states_(std::move(states)) {
    for (const auto &s : states_) {
      if (detail::is_even(s.n))
        throw ConfigError("case (b) basis requires odd N, got N=" + std::to_string(s.n));
      if (s.j < 0 || std::abs(s.j - s.n) > 1 || std::abs(s.m) > s.j)
        throw ConfigError("invalid case (b) state J=" + std::to_string(s.j) + " N=" + std::to_string(s.n) +
                          " M=" + std::to_string(s.m));
    }
    std::sort(states_.begin(), states_.end(), [](const auto &a, const auto &b) {
      if (a.n != b.n) return a.n < b.n;
      return a.j != b.j ? a.j < b.j : a.m < b.m;
    });
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    index_.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
      index_.emplace(detail::pack(states_[i].j, states_[i].n, states_[i].m), i);
  }

  /// Every state with odd N <= n_max.
  static CaseBBasis full(int n_max) {
    std::vector<CaseBLabel> s;
    for (int n = 1; n <= n_max; n += 2)
      for (int j = n - 1; j <= n + 1; ++j)
        for (int m = -j; m <= j; ++m)
          s.push_back({j, n, m});
    return CaseBBasis(std::move(s));
  }

  /// States with odd N <= n_max and M of the given parity.
  static CaseBBasis lattice(int n_max, int m_parity) {
    std::vector<CaseBLabel> s;
    for (int n = 1; n <= n_max; n += 2)
      for (int j = n - 1; j <= n + 1; ++j)
        for (int m = -j; m <= j; ++m)
          if (detail::parity_of(m) == (m_parity & 1))
            s.push_back({j, n, m});
    return CaseBBasis(std::move(s));
  }

  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const CaseBLabel &operator[](std::size_t i) const { return states_[i]; }
  std::span<const CaseBLabel> states() const { return states_; }

  std::ptrdiff_t find(int j, int n, int m) const {
    auto it = index_.find(detail::pack(j, n, m));
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }
  std::ptrdiff_t find(const CaseBLabel &l) const { return find(l.j, l.n, l.m); }

  int m_of(std::size_t i) const { return states_[i].m; }
  int shell_of(std::size_t i) const { return states_[i].n; }
  int level_of(std::size_t i) const { return states_[i].n; }
  int max_shell() const { return states_.empty() ? -1 : states_.back().n; }

private:
  std::vector<CaseBLabel> states_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

} // namespace chiral
