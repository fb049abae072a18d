#include "parfilter/extract.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace parfilter {

BlockSequence BlockSequence::of(std::vector<ElemSet> blocks) {
  if (blocks.empty()) throw InputError("block sequence: no blocks");
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].empty())
      throw InputError("block sequence: block " + std::to_string(i + 1) +
                       " is empty");
    for (size_t j = 0; j < i; ++j)
      if (blocks[i].intersects(blocks[j]))
        throw NotDisjointError("block sequence: blocks " + std::to_string(j + 1) +
                               " and " + std::to_string(i + 1) + " overlap");
  }
  BlockSequence bs;
  bs.blocks = std::move(blocks);
  return bs;
}

namespace {

uint64_t binomial(uint64_t n, uint64_t r) {
  if (r > n) return 0;
  uint64_t c = 1;
  for (uint64_t f = 1; f <= r; ++f) c = c * (n - r + f) / f;
  return c;
}

}  // namespace

uint64_t colex_rank(std::span<const int> subset) {
  uint64_t rank = 0;
  for (size_t i = 0; i < subset.size(); ++i)
    rank += binomial(static_cast<uint64_t>(subset[i]) - 1, i + 1);
  return rank;
}

uint64_t subset_count(int n, int r) {
  return binomial(static_cast<uint64_t>(n), static_cast<uint64_t>(r));
}

PairColoring PairColoring::dense(Bound bound, int arity, int k,
                                 std::vector<uint8_t> colors) {
  if (arity < 1 || arity > 3)
    throw InputError("dense pair coloring supports arity 1..3");
  if (k < 1 || k > 255) throw InputError("pair coloring: k out of range");
  uint64_t expect = subset_count(bound.n(), arity);
  if (expect > (uint64_t{1} << 26))
    throw InputError("pair coloring too large to store densely");
  if (colors.size() != expect)
    throw InputError("pair coloring: expected " + std::to_string(expect) +
                     " colors, got " + std::to_string(colors.size()));
  for (uint8_t q : colors)
    if (q < 1 || q > k) throw InputError("pair coloring: color out of range");
  PairColoring pc(bound, arity, k);
  pc.dense_ = std::move(colors);
  return pc;
}

PairColoring PairColoring::from_elements(const Coloring& c) {
  return dense(c.bound, 1, c.k, c.color);
}

PairColoring PairColoring::from_query(Bound bound, int arity, int k, Query q) {
  if (arity < 1) throw InputError("pair coloring: arity must be >= 1");
  if (k < 1 || k > 255) throw InputError("pair coloring: k out of range");
  PairColoring pc(bound, arity, k);
  pc.query_ = std::move(q);
  return pc;
}

int PairColoring::color_of(std::span<const int> subset) const {
  if (static_cast<int>(subset.size()) != arity_)
    throw InputError("pair coloring: queried subset has wrong size");
  for (size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 1 || subset[i] > bound_.n())
      throw BoundError("pair coloring: element out of bound");
    if (i > 0 && subset[i] <= subset[i - 1])
      throw InputError("pair coloring: subset must be strictly ascending");
  }
  if (!dense_.empty()) {
    uint64_t rank = colex_rank(subset);
    return dense_[rank];
  }
  int q = query_(subset);
  if (q < 1 || q > k_) throw InputError("pair coloring: callback color out of range");
  return q;
}

PairColoring PairColoring::parse(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line)) throw InputError("pcoloring: empty input");
  int n = 0, r = 0, k = 0;
  if (std::sscanf(line.c_str(), "pcoloring n=%d r=%d k=%d", &n, &r, &k) != 3)
    throw InputError("pcoloring: bad header at line 1: '" + line + "'");
  Bound bound(n);
  if (r < 1 || r > 3) throw InputError("pcoloring: arity must be 1..3");
  uint64_t expect = subset_count(n, r);
  std::vector<uint8_t> colors;
  colors.reserve(expect);
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int q;
    if (!(ls >> q) || q < 1 || q > k)
      throw InputError("pcoloring: bad color at line " + std::to_string(lineno));
    std::string rest;
    if (ls >> rest)
      throw InputError("pcoloring: trailing content at line " +
                       std::to_string(lineno));
    colors.push_back(static_cast<uint8_t>(q));
  }
  if (colors.size() != expect)
    throw InputError("pcoloring: expected " + std::to_string(expect) +
                     " colors, found " + std::to_string(colors.size()));
  return dense(bound, r, k, std::move(colors));
}

std::string PairColoring::serialize() const {
  if (dense_.empty()) throw InputError("pcoloring: cannot serialize a callback coloring");
  std::ostringstream os;
  os << "pcoloring n=" << bound_.n() << " r=" << arity_ << " k=" << k_ << "\n";
  for (uint8_t q : dense_) os << static_cast<int>(q) << "\n";
  return os.str();
}

BlockSequence fw_blocks(int t) {
  if (t < 1) throw InputError("block count must be >= 1");
  // Compute the block intervals first so the shared bound is known.
  std::vector<std::pair<int, int>> spans;  // [lo, hi]
  int prev_max = 1;
  spans.emplace_back(1, 1);
  for (int i = 2; i <= t; ++i) {
    long long m = 2LL * prev_max;
    long long hi = m + i;
    if (hi > Bound::kMax)
      throw BoundError("block construction exceeds the supported bound at step " +
                       std::to_string(i));
    spans.emplace_back(static_cast<int>(m) + 1, static_cast<int>(hi));
    prev_max = static_cast<int>(hi);
  }
  Bound bound(prev_max);
  std::vector<ElemSet> blocks;
  blocks.reserve(spans.size());
  for (auto [lo, hi] : spans) blocks.push_back(ElemSet::interval(bound, lo, hi));
  return BlockSequence::of(std::move(blocks));
}

bool fw_verify(const BlockSequence& bs) {
  size_t t = bs.blocks.size();
  std::vector<std::vector<int>> elems(t);
  for (size_t i = 0; i < t; ++i) elems[i] = bs.blocks[i].elements();
  for (size_t a = 0; a < t; ++a)
    for (size_t b = a + 1; b < t; ++b)
      for (size_t c = b + 1; c < t; ++c)
        for (int x : elems[a])
          for (int y : elems[b])
            for (int z : elems[c]) {
              int lo = std::min({x, y, z});
              int hi = std::max({x, y, z});
              int mid = x + y + z - lo - hi;
              if (mid - lo == hi - mid) return false;
            }
  return true;
}

std::vector<ElemSet> sfin_select(const std::vector<ElemSet>& members,
                                 const std::vector<GeneratorSource>& sources,
                                 Bound bound) {
  if (members.size() != sources.size())
    throw InputError("member and source counts differ");
  std::vector<ElemSet> out;
  out.reserve(members.size());
  for (size_t i = 0; i < members.size(); ++i) {
    if (!(members[i].bound() == bound))
      throw BoundMismatchError("member set bound differs");
    Antichain fam = generate(sources[i], bound);
    const ElemSet* pick = nullptr;
    for (const ElemSet& g : fam.generators())
      if (g.subset_of(members[i])) {
        pick = &g;
        break;
      }
    if (!pick)
      throw NoGeneratorError(static_cast<int>(i),
                             "member " + std::to_string(i) +
                                 " contains no generator at this bound");
    out.push_back(*pick);
  }
  return out;
}

namespace {

struct BlockSearch {
  const PairColoring& pc;
  const std::vector<std::vector<ElemSet>>& candidates;
  uint64_t budget;
  uint64_t nodes = 0;
  bool budget_hit = false;

  std::vector<ElemSet> chosen;
  ElemSet taken;
  int color = 0;  // 0 = not yet constrained

  explicit BlockSearch(const PairColoring& coloring,
                       const std::vector<std::vector<ElemSet>>& cand,
                       uint64_t b)
      : pc(coloring), candidates(cand), budget(b), taken(coloring.bound()) {}

  // Checks every transversal r-subset using at least one element of the new
  // block against the running color; adopts the color on first contact.
  bool consistent(const ElemSet& g, int& adopted) {
    int r = pc.arity();
    adopted = color;
    std::vector<int> ge = g.elements();
    if (r == 1) {
      for (int e : ge) {
        int q = pc.color_of(std::array<int, 1>{e});
        if (adopted == 0) adopted = q;
        if (q != adopted) return false;
      }
      return true;
    }
    size_t t = chosen.size();
    if (r == 2) {
      for (size_t j = 0; j < t; ++j)
        for (int x : chosen[j].elements())
          for (int e : ge) {
            std::array<int, 2> s{std::min(x, e), std::max(x, e)};
            int q = pc.color_of(s);
            if (adopted == 0) adopted = q;
            if (q != adopted) return false;
          }
      return true;
    }
    // r == 3: one element from each of two distinct earlier blocks.
    for (size_t j = 0; j < t; ++j)
      for (size_t l = j + 1; l < t; ++l)
        for (int x : chosen[j].elements())
          for (int y : chosen[l].elements())
            for (int e : ge) {
              std::array<int, 3> s{x, y, e};
              std::sort(s.begin(), s.end());
              int q = pc.color_of(s);
              if (adopted == 0) adopted = q;
              if (q != adopted) return false;
            }
    return true;
  }

  bool rec(size_t i) {
    if (i == candidates.size()) return true;
    for (const ElemSet& g : candidates[i]) {
      if (nodes == budget) {
        budget_hit = true;
        return false;
      }
      ++nodes;
      if (g.intersects(taken)) continue;
      int adopted = 0;
      if (!consistent(g, adopted)) continue;
      int saved_color = color;
      color = adopted;
      chosen.push_back(g);
      ElemSet saved_taken = taken;
      taken = taken.set_union(g);
      if (rec(i + 1)) return true;
      taken = saved_taken;
      chosen.pop_back();
      color = saved_color;
      if (budget_hit) return false;
    }
    return false;
  }
};

// Constructive arity-1 route: one monochromatic progression of the summed
// length cut into consecutive slices, each a progression of its own length.
std::optional<BlockExtraction> consecutive_split(
    const PairColoring& pc, const std::vector<GeneratorSource>& sources) {
  long long total = 0;
  for (const GeneratorSource& s : sources) {
    if (s.kind != GeneratorSource::Kind::ap) return std::nullopt;
    total += s.length;
  }
  if (total < 2 || total > pc.bound().n()) return std::nullopt;
  Antichain fam = generate(GeneratorSource::ap(static_cast<int>(total)), pc.bound());
  std::vector<uint8_t> colors(static_cast<size_t>(pc.bound().n()));
  for (int e = 1; e <= pc.bound().n(); ++e)
    colors[static_cast<size_t>(e - 1)] =
        static_cast<uint8_t>(pc.color_of(std::array<int, 1>{e}));
  Coloring c(pc.bound(), pc.k(), std::move(colors));
  auto w = mono_witness(c, fam);
  if (!w) return std::nullopt;
  std::vector<int> run = w->first.elements();  // ascending progression
  std::vector<ElemSet> blocks;
  size_t off = 0;
  for (const GeneratorSource& s : sources) {
    ElemSet b(pc.bound());
    for (int j = 0; j < s.length; ++j) b.insert(run[off + static_cast<size_t>(j)]);
    off += static_cast<size_t>(s.length);
    blocks.push_back(b);
  }
  BlockExtraction x;
  x.blocks = BlockSequence::of(blocks);
  x.memberships = blocks;
  x.color = w->second;
  x.arity = 1;
  return x;
}

}  // namespace

ExtractResult bh_extract(const PairColoring& pc,
                         const std::vector<GeneratorSource>& sources,
                         uint64_t budget, bool allow_fast_path) {
  if (sources.empty()) throw InputError("extraction needs at least one block source");
  ExtractResult res;
  if (allow_fast_path && pc.arity() == 1) {
    auto x = consecutive_split(pc, sources);
    if (x) {
      res.status = ExtractStatus::found;
      res.extraction = std::move(x);
      res.used_fast_path = true;
      return res;
    }
  }
  std::vector<std::vector<ElemSet>> candidates;
  candidates.reserve(sources.size());
  for (const GeneratorSource& s : sources)
    candidates.push_back(generate(s, pc.bound()).generators());
  BlockSearch search(pc, candidates, budget);
  bool found = search.rec(0);
  res.nodes = search.nodes;
  if (found) {
    BlockExtraction x;
    x.blocks = BlockSequence::of(search.chosen);
    x.memberships = search.chosen;
    x.color = search.color;
    x.arity = pc.arity();
    res.status = ExtractStatus::found;
    res.extraction = std::move(x);
  } else if (search.budget_hit) {
    res.status = ExtractStatus::budget;
  } else {
    res.status = ExtractStatus::absent;
  }
  return res;
}

bool verify_extraction(const PairColoring& pc, const BlockExtraction& x) {
  if (x.arity != pc.arity()) return false;
  size_t t = x.blocks.blocks.size();
  if (t == 0 || x.memberships.size() != t) return false;
  for (size_t i = 0; i < t; ++i) {
    const ElemSet& b = x.blocks.blocks[i];
    if (!(b.bound() == pc.bound())) return false;
    if (b.empty()) return false;
    for (size_t j = 0; j < i; ++j)
      if (b.intersects(x.blocks.blocks[j])) return false;
    if (x.memberships[i].empty()) return false;
    if (!(x.memberships[i].bound() == pc.bound())) return false;
    if (!x.memberships[i].subset_of(b)) return false;
  }
  // Every r-subset taking at most one element per block must have the color.
  int r = pc.arity();
  std::vector<std::vector<int>> elems(t);
  for (size_t i = 0; i < t; ++i) elems[i] = x.blocks.blocks[i].elements();
  std::vector<int> subset(static_cast<size_t>(r));
  bool ok = true;
  bool any = false;
  auto rec = [&](auto&& self, int depth, size_t from) -> void {
    if (!ok) return;
    if (depth == r) {
      std::vector<int> s = subset;
      std::sort(s.begin(), s.end());
      any = true;
      if (pc.color_of(s) != x.color) ok = false;
      return;
    }
    for (size_t b = from; b < t && t - b >= static_cast<size_t>(r - depth); ++b) {
      for (int e : elems[b]) {
        subset[static_cast<size_t>(depth)] = e;
        self(self, depth + 1, b + 1);
        if (!ok) return;
      }
    }
  };
  rec(rec, 0, 0);
  if (!any) return true;  // no transversal subset exists; vacuously constant
  return ok;
}

bool verify_extraction(const PairColoring& pc, const BlockExtraction& x,
                       const std::vector<GeneratorSource>& sources) {
  if (!verify_extraction(pc, x)) return false;
  if (sources.size() != x.memberships.size()) return false;
  for (size_t i = 0; i < sources.size(); ++i) {
    Antichain fam = generate(sources[i], pc.bound());
    bool is_gen = false;
    for (const ElemSet& g : fam.generators())
      if (g == x.memberships[i]) {
        is_gen = true;
        break;
      }
    if (!is_gen) return false;
  }
  return true;
}

}  // namespace parfilter
