#ifndef SHUBIN_MULTI_INDEX_HPP
#define SHUBIN_MULTI_INDEX_HPP

#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace shubin {

/// Exponent vector on phase space, length 2n, ordered x_1..x_n, p_1..p_n.
struct MultiIndex {
  std::vector<int> entries;

  MultiIndex() = default;
  explicit MultiIndex(std::size_t len) : entries(len, 0) {}
  MultiIndex(std::initializer_list<int> e) : entries(e) { validate(); }
  explicit MultiIndex(std::vector<int> e) : entries(std::move(e)) { validate(); }

  void validate() const {
    for (int v : entries)
      if (v < 0) throw std::invalid_argument("MultiIndex: negative entry");
  }

  std::size_t size() const { return entries.size(); }
  int operator[](std::size_t k) const { return entries[k]; }
  int& operator[](std::size_t k) { return entries[k]; }

  int weight() const { return std::accumulate(entries.begin(), entries.end(), 0); }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.entries == b.entries;
  }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    return a.entries < b.entries;
  }

  MultiIndex plus(std::size_t axis, int delta = 1) const {
    MultiIndex r = *this;
    r.entries[axis] += delta;
    if (r.entries[axis] < 0) throw std::invalid_argument("MultiIndex: negative entry");
    return r;
  }

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) throw std::invalid_argument("MultiIndex: size mismatch");
    MultiIndex r = a;
    for (std::size_t k = 0; k < b.size(); ++k) r.entries[k] += b.entries[k];
    return r;
  }
};

/// Iterates all multi-indices of the given length with weight exactly w.
inline void for_each_multi_index(std::size_t len, int w,
                                 const std::function<void(const MultiIndex&)>& fn) {
  MultiIndex idx(len);
  // Lexicographic enumeration by recursion on the first coordinate.
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int rem) {
    if (pos + 1 == len) {
      idx[pos] = rem;
      fn(idx);
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      idx[pos] = v;
      rec(pos + 1, rem - v);
    }
  };
  if (len == 0) {
    if (w == 0) fn(idx);
    return;
  }
  rec(0, w);
}

}  // namespace shubin

#endif
