#include "parfilter/core.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <sstream>

namespace parfilter {

ElemSet ElemSet::interval(Bound bound, int lo, int hi) {
  ElemSet s(bound);
  for (int e = std::max(lo, 1); e <= std::min(hi, bound.n()); ++e) s.insert(e);
  return s;
}

int ElemSet::cardinality() const {
  int c = 0;
  for (uint64_t w : words_) c += std::popcount(w);
  return c;
}

bool ElemSet::empty() const {
  for (uint64_t w : words_)
    if (w) return false;
  return true;
}

int ElemSet::min() const {
  for (size_t w = 0; w < words_.size(); ++w)
    if (words_[w]) return static_cast<int>(w * 64) + std::countr_zero(words_[w]) + 1;
  throw Error("min of empty set");
}

int ElemSet::max() const {
  for (size_t w = words_.size(); w-- > 0;)
    if (words_[w]) return static_cast<int>(w * 64) + 63 - std::countl_zero(words_[w]) + 1;
  throw Error("max of empty set");
}

bool ElemSet::subset_of(const ElemSet& o) const {
  require_same_bound(*this, o);
  for (size_t w = 0; w < words_.size(); ++w)
    if (words_[w] & ~o.words_[w]) return false;
  return true;
}

bool ElemSet::intersects(const ElemSet& o) const {
  require_same_bound(*this, o);
  for (size_t w = 0; w < words_.size(); ++w)
    if (words_[w] & o.words_[w]) return true;
  return false;
}

ElemSet ElemSet::set_union(const ElemSet& o) const {
  require_same_bound(*this, o);
  ElemSet r(bound_);
  for (size_t w = 0; w < words_.size(); ++w) r.words_[w] = words_[w] | o.words_[w];
  return r;
}

ElemSet ElemSet::set_intersection(const ElemSet& o) const {
  require_same_bound(*this, o);
  ElemSet r(bound_);
  for (size_t w = 0; w < words_.size(); ++w) r.words_[w] = words_[w] & o.words_[w];
  return r;
}

ElemSet ElemSet::set_difference(const ElemSet& o) const {
  require_same_bound(*this, o);
  ElemSet r(bound_);
  for (size_t w = 0; w < words_.size(); ++w) r.words_[w] = words_[w] & ~o.words_[w];
  return r;
}

std::vector<int> ElemSet::elements() const {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(cardinality()));
  for_each([&](int e) { out.push_back(e); });
  return out;
}

void require_same_bound(const ElemSet& a, const ElemSet& b) {
  if (!(a.bound() == b.bound()))
    throw BoundMismatchError("sets have different bounds: " +
                             std::to_string(a.bound().n()) + " vs " +
                             std::to_string(b.bound().n()));
}

bool lex_less(const ElemSet& a, const ElemSet& b) {
  require_same_bound(a, b);
  auto aw = a.words(), bw = b.words();
  for (size_t w = 0; w < aw.size(); ++w) {
    uint64_t diff = aw[w] ^ bw[w];
    if (!diff) continue;
    int bit = std::countr_zero(diff);
    bool a_has_m = (aw[w] >> bit) & 1u;
    // The set holding the least differing element precedes, unless the other
    // set has nothing at or beyond it (then the other is a strict prefix).
    for (size_t w2 = w; w2 < aw.size(); ++w2) {
      uint64_t rest = a_has_m ? bw[w2] : aw[w2];
      if (w2 == w) rest &= ~((uint64_t{1} << bit) - 1);
      if (rest) return a_has_m;
    }
    return !a_has_m;
  }
  return false;
}

bool canonical_less(const ElemSet& a, const ElemSet& b) {
  if (a == b) return false;
  int amin = a.min(), bmin = b.min();
  if (amin != bmin) return amin < bmin;
  int ac = a.cardinality(), bc = b.cardinality();
  if (ac != bc) return ac < bc;
  return lex_less(a, b);
}

Antichain Antichain::normalize(const std::vector<ElemSet>& sets) {
  if (sets.empty()) throw EmptyInputError("no generator sets supplied");
  Bound bound = sets.front().bound();
  for (const ElemSet& s : sets) {
    if (!(s.bound() == bound))
      throw BoundMismatchError("generator sets have mixed bounds");
    if (s.empty())
      throw EmptyInputError("empty generator set supplied");
  }
  // Minimal elements: scan by ascending cardinality so kept sets can only be
  // absorbed by earlier (smaller) ones.
  std::vector<ElemSet> sorted = sets;
  std::sort(sorted.begin(), sorted.end(), [](const ElemSet& a, const ElemSet& b) {
    return a.cardinality() < b.cardinality();
  });
  std::vector<ElemSet> kept;
  for (const ElemSet& s : sorted) {
    bool absorbed = false;
    for (const ElemSet& k : kept)
      if (k.subset_of(s)) {
        absorbed = true;
        break;
      }
    if (!absorbed) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end(), canonical_less);
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return Antichain(bound, std::move(kept));
}

bool Antichain::member(const ElemSet& a) const {
  if (!(a.bound() == bound_))
    throw BoundMismatchError("member query set bound differs from family bound");
  for (const ElemSet& g : gens_)
    if (g.subset_of(a)) return true;
  return false;
}

Antichain Antichain::restrict_to(Bound new_bound) const {
  if (new_bound.n() > bound_.n())
    throw BoundMismatchError("restriction bound exceeds family bound");
  std::vector<ElemSet> kept;
  for (const ElemSet& g : gens_) {
    if (g.max() > new_bound.n()) continue;
    ElemSet moved(new_bound);
    g.for_each([&](int e) { moved.insert(e); });
    kept.push_back(moved);
  }
  // Filtering preserves incomparability and canonical order.
  return Antichain(new_bound, std::move(kept));
}

std::string Antichain::serialize() const {
  std::ostringstream os;
  os << "antichain n=" << bound_.n() << " g=" << gens_.size() << "\n";
  for (const ElemSet& g : gens_) {
    bool first = true;
    g.for_each([&](int e) {
      if (!first) os << ' ';
      os << e;
      first = false;
    });
    os << '\n';
  }
  return os.str();
}

Antichain Antichain::parse(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line))
    throw InputError("antichain: empty input");
  ++lineno;
  int n = 0;
  size_t g = 0;
  if (std::sscanf(line.c_str(), "antichain n=%d g=%zu", &n, &g) != 2)
    throw InputError("antichain: bad header at line 1: '" + line + "'");
  Bound bound(n);
  std::vector<ElemSet> gens;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() && gens.size() == g) continue;  // trailing blank
    ElemSet s(bound);
    std::istringstream ls(line);
    int e;
    while (ls >> e) {
      if (e < 1 || e > n)
        throw InputError("antichain: element out of range at line " +
                         std::to_string(lineno));
      s.insert(e);
    }
    if (!ls.eof())
      throw InputError("antichain: malformed integer at line " +
                       std::to_string(lineno));
    if (s.empty())
      throw InputError("antichain: empty generator at line " +
                       std::to_string(lineno));
    gens.push_back(s);
  }
  if (gens.size() != g)
    throw InputError("antichain: header declares " + std::to_string(g) +
                     " generators, found " + std::to_string(gens.size()));
  if (gens.empty()) return Antichain::empty(bound);
  Antichain a = normalize(gens);
  if (a.generators().size() != gens.size())
    throw InputError("antichain: generators are not an antichain in canonical order");
  return a;
}

std::string Antichain::content_digest() const { return hex64(fnv1a64(serialize())); }

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace parfilter
