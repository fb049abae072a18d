#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parfilter/core.hpp"
#include "parfilter/search.hpp"
#include "parfilter/witnesses.hpp"

namespace parfilter {

/// Ordered list of pairwise disjoint nonempty sets over one bound.
struct BlockSequence {
  std::vector<ElemSet> blocks;

  static BlockSequence of(std::vector<ElemSet> blocks);  // validates
  Bound bound() const { return blocks.front().bound(); }
};

/// Total coloring of the r-subsets of [1..n]. Dense storage (colex order)
/// for small instances, or an arbitrary query callback.
class PairColoring {
 public:
  using Query = std::function<int(std::span<const int>)>;

  static PairColoring dense(Bound bound, int arity, int k,
                            std::vector<uint8_t> colors);
  static PairColoring from_elements(const Coloring& c);  // arity 1
  static PairColoring from_query(Bound bound, int arity, int k, Query q);

  /// Header `pcoloring n=<N> r=<r> k=<k>`, then one color per line for every
  /// r-subset in colex order.
  static PairColoring parse(std::string_view text);
  std::string serialize() const;  // dense form required

  Bound bound() const { return bound_; }
  int arity() const { return arity_; }
  int k() const { return k_; }
  bool is_dense() const { return !dense_.empty() || query_ == nullptr; }
  const std::vector<uint8_t>& dense_colors() const { return dense_; }

  /// Color of an ascending r-subset within the bound.
  int color_of(std::span<const int> subset) const;

 private:
  PairColoring(Bound b, int r, int k) : bound_(b), arity_(r), k_(k) {}

  Bound bound_;
  int arity_;
  int k_;
  std::vector<uint8_t> dense_;
  Query query_;
};

/// Colex rank of an ascending r-subset (r <= 3), and the subset count.
uint64_t colex_rank(std::span<const int> subset);
uint64_t subset_count(int n, int r);

/// Disjoint blocks, a witnessed family generator inside each, and the single
/// color taken by every r-subset meeting each block at most once.
struct BlockExtraction {
  BlockSequence blocks;
  std::vector<ElemSet> memberships;  // memberships[i] inside blocks[i]
  int color = 0;                     // 0 when no transversal r-subset exists
  int arity = 1;
};

/// A_1 = {1}; for n > 1, A_n = {m+1, ..., m+n} with m twice the previous
/// block's maximum. Throws BoundError when the construction leaves the
/// supported ground interval.
BlockSequence fw_blocks(int t);

/// True iff no 3-term arithmetic progression picks at most one element from
/// each block; decided by exhaustive enumeration of transversal triples.
bool fw_verify(const BlockSequence& blocks);

/// Picks, for each i, the first generator (canonical order) of sources[i]
/// lying inside members[i]. Throws NoGeneratorError(i) when none exists.
std::vector<ElemSet> sfin_select(const std::vector<ElemSet>& members,
                                 const std::vector<GeneratorSource>& sources,
                                 Bound bound);

enum class ExtractStatus { found, absent, budget };

struct ExtractResult {
  ExtractStatus status = ExtractStatus::absent;
  std::optional<BlockExtraction> extraction;
  uint64_t nodes = 0;
  bool used_fast_path = false;
};

/// Searches for disjoint blocks, block i a generator of sources[i], with all
/// transversal r-subsets one color. Backtracks over candidate generators per
/// block in canonical order with incremental color checks. For arity 1 over
/// progression sources it first tries the constructive route: find one
/// monochromatic progression of the summed length and cut it into consecutive
/// slices. `absent` means the search space at this bound is exhausted, which
/// refutes nothing beyond the bound; `budget` is reported separately.
ExtractResult bh_extract(const PairColoring& pc,
                         const std::vector<GeneratorSource>& sources,
                         uint64_t budget = kNoBudget,
                         bool allow_fast_path = true);

/// Exhaustively re-checks an extraction against the coloring: disjointness,
/// membership containment, and the transversal color. Independent of how the
/// extraction was found.
bool verify_extraction(const PairColoring& pc, const BlockExtraction& x);

/// Additionally requires memberships[i] to be an exact generator of
/// sources[i] at the coloring's bound.
bool verify_extraction(const PairColoring& pc, const BlockExtraction& x,
                       const std::vector<GeneratorSource>& sources);

}  // namespace parfilter
