#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parfilter/errors.hpp"

namespace parfilter {

/// Ground interval [1..n]. Bounds outside [1, kMax] are rejected, never
/// clamped.
class Bound {
 public:
  static constexpr int kMax = 4096;

  explicit Bound(int n) : n_(n) {
    if (n < 1 || n > kMax)
      throw BoundError("bound must be in [1.." + std::to_string(kMax) +
                       "], got " + std::to_string(n));
  }

  int n() const { return n_; }
  int words() const { return (n_ + 63) / 64; }
  bool operator==(const Bound& o) const = default;

 private:
  int n_;
};

/// Bit-packed subset of [1..bound.n]. Element e lives at bit (e-1).
class ElemSet {
 public:
  explicit ElemSet(Bound bound) : bound_(bound), words_(bound.words(), 0) {}
  ElemSet(Bound bound, std::initializer_list<int> elems) : ElemSet(bound) {
    for (int e : elems) insert(e);
  }
  ElemSet(Bound bound, std::span<const int> elems) : ElemSet(bound) {
    for (int e : elems) insert(e);
  }

  static ElemSet interval(Bound bound, int lo, int hi);
  static ElemSet full(Bound bound) { return interval(bound, 1, bound.n()); }

  Bound bound() const { return bound_; }
  std::span<const uint64_t> words() const { return words_; }

  bool contains(int e) const {
    check_element(e);
    return (words_[static_cast<size_t>(e - 1) >> 6] >> ((e - 1) & 63)) & 1u;
  }
  void insert(int e) {
    check_element(e);
    words_[static_cast<size_t>(e - 1) >> 6] |= uint64_t{1} << ((e - 1) & 63);
  }
  void erase(int e) {
    check_element(e);
    words_[static_cast<size_t>(e - 1) >> 6] &= ~(uint64_t{1} << ((e - 1) & 63));
  }

  int cardinality() const;
  bool empty() const;
  int min() const;  // requires nonempty
  int max() const;  // requires nonempty

  bool subset_of(const ElemSet& o) const;
  bool intersects(const ElemSet& o) const;
  ElemSet set_union(const ElemSet& o) const;
  ElemSet set_intersection(const ElemSet& o) const;
  ElemSet set_difference(const ElemSet& o) const;

  std::vector<int> elements() const;

  template <typename F>
  void for_each(F&& f) const {
    for (size_t w = 0; w < words_.size(); ++w) {
      uint64_t bits = words_[w];
      while (bits) {
        int b = __builtin_ctzll(bits);
        f(static_cast<int>(w * 64) + b + 1);
        bits &= bits - 1;
      }
    }
  }

  bool operator==(const ElemSet& o) const {
    return bound_ == o.bound_ && words_ == o.words_;
  }

 private:
  void check_element(int e) const {
    if (e < 1 || e > bound_.n())
      throw BoundError("element " + std::to_string(e) + " outside [1.." +
                       std::to_string(bound_.n()) + "]");
  }

  Bound bound_;
  std::vector<uint64_t> words_;
};

/// True when a precedes b as ascending element sequences.
bool lex_less(const ElemSet& a, const ElemSet& b);

/// Canonical generator order: ascending minimum, then cardinality, then
/// lexicographic.
bool canonical_less(const ElemSet& a, const ElemSet& b);

void require_same_bound(const ElemSet& a, const ElemSet& b);

/// Minimal-generator encoding of an upward-closed family over [1..n]:
/// the family is { A : some generator G satisfies G ⊆ A }. Generators are
/// pairwise incomparable, nonempty, and kept in canonical order, so equal
/// families serialize identically. A generator-free Antichain is the empty
/// family sentinel.
class Antichain {
 public:
  static Antichain empty(Bound bound) { return Antichain(bound, {}); }

  /// Reduces an arbitrary generator presentation to its ⊆-minimal elements
  /// in canonical order. Throws EmptyInputError when no set is supplied or
  /// any supplied set is empty; BoundMismatchError on mixed bounds.
  static Antichain normalize(const std::vector<ElemSet>& sets);

  Bound bound() const { return bound_; }
  const std::vector<ElemSet>& generators() const { return gens_; }
  size_t size() const { return gens_.size(); }
  bool is_empty_family() const { return gens_.empty(); }

  /// True iff some generator is contained in a.
  bool member(const ElemSet& a) const;

  /// Keeps exactly the generators lying inside [1..new_bound.n].
  Antichain restrict_to(Bound new_bound) const;

  /// Header `antichain n=<bound> g=<count>`, then one generator per line as
  /// ascending space-separated integers.
  std::string serialize() const;
  static Antichain parse(std::string_view text);

  /// FNV-1a hash of the serialized form, as 16 hex digits.
  std::string content_digest() const;

  bool operator==(const Antichain& o) const {
    return bound_ == o.bound_ && gens_ == o.gens_;
  }

 private:
  Antichain(Bound bound, std::vector<ElemSet> gens)
      : bound_(bound), gens_(std::move(gens)) {}

  Bound bound_;
  std::vector<ElemSet> gens_;
};

uint64_t fnv1a64(std::string_view s);
std::string hex64(uint64_t v);

}  // namespace parfilter
