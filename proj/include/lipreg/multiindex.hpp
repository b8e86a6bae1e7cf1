#pragma once

// Graded enumeration of multi-indices of total degree <= m in d variables.
// The ordering is part of the file format: degree blocks in increasing
// order; within a block, the first coordinate's exponent decreases first
// (so for d=2, m=2: (0,0),(1,0),(0,1),(2,0),(1,1),(0,2)).

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lipreg/common.hpp"

namespace lipreg {

inline constexpr std::uint64_t kDefaultIndexCap = 10'000'000;

// C(d+m, m), saturating at 2^64-1 on overflow.
inline std::uint64_t total_degree_cardinality(int d, int m) {
  unsigned __int128 acc = 1;
  for (int i = 1; i <= m; ++i) {
    acc = acc * static_cast<unsigned __int128>(d + i);
    acc /= static_cast<unsigned __int128>(i);
    if (acc > static_cast<unsigned __int128>(UINT64_MAX)) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(acc);
}

class MultiIndexSet {
 public:
  static MultiIndexSet total_degree(int d, int m,
                                    std::uint64_t cap = kDefaultIndexCap) {
    require(d >= 1, "MultiIndexSet: dimension must be >= 1");
    require(m >= 0, "MultiIndexSet: degree must be >= 0");
    require(m <= 255, "MultiIndexSet: degree must fit in one byte");
    const std::uint64_t count = total_degree_cardinality(d, m);
    if (count > cap)
      throw CapacityError("MultiIndexSet: C(d+m,m) = " + std::to_string(count) +
                          " exceeds cap " + std::to_string(cap));
    MultiIndexSet set;
    set.d_ = d;
    set.m_ = m;
    set.flat_.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(d));
    std::vector<std::uint8_t> idx(static_cast<std::size_t>(d), 0);
    for (int deg = 0; deg <= m; ++deg) set.emit(idx, 0, deg);
    set.build_terms();
    return set;
  }

  int dimension() const { return d_; }
  int max_degree() const { return m_; }
  std::size_t size() const { return flat_.size() / static_cast<std::size_t>(d_); }

  std::span<const std::uint8_t> operator[](std::size_t i) const {
    return {flat_.data() + i * static_cast<std::size_t>(d_),
            static_cast<std::size_t>(d_)};
  }

  int degree_of(std::size_t i) const {
    const auto a = (*this)[i];
    int s = 0;
    for (auto v : a) s += v;
    return s;
  }

  // Position of the first index of each degree block; block for degree g is
  // [offset(g), offset(g+1)).
  std::size_t degree_offset(int degree) const {
    return degree_offsets_[static_cast<std::size_t>(degree)];
  }

  // Nonzero entries of index i, as (coordinate, exponent) pairs in CSR form.
  struct Term {
    std::uint16_t coord;
    std::uint8_t exponent;
  };
  std::span<const Term> terms(std::size_t i) const {
    return {terms_.data() + term_offsets_[i], term_offsets_[i + 1] - term_offsets_[i]};
  }

  // Linear search for an explicit multi-index; returns size() when absent.
  std::size_t find(std::span<const std::uint8_t> alpha) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = (*this)[i];
      bool eq = true;
      for (int j = 0; j < d_; ++j)
        if (a[static_cast<std::size_t>(j)] != alpha[static_cast<std::size_t>(j)]) {
          eq = false;
          break;
        }
      if (eq) return i;
    }
    return n;
  }

 private:
  void emit(std::vector<std::uint8_t>& idx, int coord, int remaining) {
    if (coord == d_ - 1) {
      idx[static_cast<std::size_t>(coord)] = static_cast<std::uint8_t>(remaining);
      flat_.insert(flat_.end(), idx.begin(), idx.end());
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      idx[static_cast<std::size_t>(coord)] = static_cast<std::uint8_t>(v);
      emit(idx, coord + 1, remaining - v);
    }
  }

  void build_terms() {
    const std::size_t n = size();
    term_offsets_.assign(n + 1, 0);
    degree_offsets_.assign(static_cast<std::size_t>(m_) + 2, 0);
    int prev_deg = -1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = (*this)[i];
      const int deg = degree_of(i);
      while (prev_deg < deg) degree_offsets_[static_cast<std::size_t>(++prev_deg)] = i;
      for (int j = 0; j < d_; ++j)
        if (a[static_cast<std::size_t>(j)] != 0)
          terms_.push_back(Term{static_cast<std::uint16_t>(j),
                                a[static_cast<std::size_t>(j)]});
      term_offsets_[i + 1] = terms_.size();
    }
    while (prev_deg <= m_) degree_offsets_[static_cast<std::size_t>(++prev_deg)] = n;
  }

  int d_ = 0;
  int m_ = 0;
  std::vector<std::uint8_t> flat_;
  std::vector<Term> terms_;
  std::vector<std::size_t> term_offsets_;
  std::vector<std::size_t> degree_offsets_;
};

inline std::shared_ptr<const MultiIndexSet> enumerate_indices(
    int d, int m, std::uint64_t cap = kDefaultIndexCap) {
  return std::make_shared<const MultiIndexSet>(MultiIndexSet::total_degree(d, m, cap));
}

}  // namespace lipreg
