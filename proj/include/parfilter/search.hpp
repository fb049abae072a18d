#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parfilter/core.hpp"
#include "parfilter/witnesses.hpp"

namespace parfilter {

inline constexpr uint64_t kNoBudget = std::numeric_limits<uint64_t>::max();

/// Total map [1..bound.n] -> {1..k}.
struct Coloring {
  Bound bound;
  int k = 1;
  std::vector<uint8_t> color;  // color[e-1]

  Coloring(Bound b, int k_, std::vector<uint8_t> c)
      : bound(b), k(k_), color(std::move(c)) {
    validate();
  }
  static Coloring constant(Bound b, int k, int q = 1) {
    return Coloring(b, k, std::vector<uint8_t>(static_cast<size_t>(b.n()),
                                               static_cast<uint8_t>(q)));
  }
  void validate() const;
  ElemSet color_class(int q) const;
};

/// Coloring of an explicit domain; elements outside carry color 0.
struct SubsetColoring {
  ElemSet domain;
  int k = 0;  // 0 allowed only for an empty domain
  std::vector<uint8_t> color;  // full length, 0 outside domain

  SubsetColoring(ElemSet dom, int k_, std::vector<uint8_t> c)
      : domain(std::move(dom)), k(k_), color(std::move(c)) {
    validate();
  }
  static SubsetColoring empty(Bound b) {
    return SubsetColoring(ElemSet(b), 0,
                          std::vector<uint8_t>(static_cast<size_t>(b.n()), 0));
  }
  void validate() const;
  ElemSet color_class(int q) const;
};

enum class Verdict { refuted, established, budget };

enum class Strategy { backtracking, exhaustive };

struct SearchOptions {
  Strategy strategy = Strategy::backtracking;
  uint64_t budget = kNoBudget;
  int workers = 1;
  bool deterministic = false;
};

/// Evidence for a Par_k decision over [1..n]. A refuted certificate carries a
/// coloring with no monochromatic generator; an established one is emitted
/// only after a provably exhaustive search.
struct ParCertificate {
  explicit ParCertificate(Bound b) : bound(b) {}

  Verdict verdict = Verdict::budget;
  std::optional<Coloring> refutation;
  uint64_t nodes = 0;
  bool exhaustive = false;
  std::string family_digest;  // content hash of the antichain
  int k = 1;
  Bound bound;
};

/// First generator (canonical order) lying inside one color class, with that
/// color; absent when every generator meets two classes.
std::optional<std::pair<ElemSet, int>> mono_witness(const Coloring& c,
                                                    const Antichain& family);
std::optional<std::pair<ElemSet, int>> mono_witness(const SubsetColoring& c,
                                                    const Antichain& family);

/// Decides whether every k-coloring of [1..n] leaves some generator
/// monochromatic. Backtracking prunes an assignment exactly when it completes
/// a generator monochromatically, so the leaves it reaches are precisely the
/// refuting colorings; the exhaustive strategy enumerates all k^n colorings.
/// Verdicts agree between strategies; budget exhaustion is a third outcome,
/// never coerced to a verdict. The refuting coloring is the lexicographically
/// least one (element-major, color-minor) whenever racing is disabled
/// (workers == 1 or the deterministic option).
ParCertificate is_par_member(const Antichain& family, int k,
                             const SearchOptions& opts = {});

/// Same search over an explicit sub-domain of the ground interval.
struct DomainSearchResult {
  Verdict verdict = Verdict::budget;
  std::optional<SubsetColoring> refutation;
  uint64_t nodes = 0;
};
DomainSearchResult par_search_on(const Antichain& family, const ElemSet& domain,
                                 int k, const SearchOptions& opts = {});

struct ThresholdResult {
  int threshold = 0;   // minimal established N (when resolved)
  bool resolved = false;
  std::optional<ParCertificate> established;
  std::optional<ParCertificate> refutation;  // at threshold-1; absent when threshold == 1
  int largest_refuted = 0;                   // best refuted N when unresolved
  uint64_t budget_spent = 0;
};

/// Scans N upward; established-at-N is monotone for generated sources, so the
/// first established N is the threshold. The budget is shared across scans.
ThresholdResult min_threshold(const GeneratorSource& src, int k, Bound n_max,
                              const SearchOptions& opts = {});

/// All subset-minimal A within [1..n], |A| <= max_size, such that every
/// k-coloring of A leaves some generator (inside A) monochromatic. Decided by
/// the exhaustive per-subset oracle. Throws BudgetExhaustedError.
Antichain minimal_par_members(const Antichain& family, int k, int max_size,
                              uint64_t budget = kNoBudget);

/// Glues a k_b-refutation on b and a k_c-refutation on c into a
/// (k_b + k_c)-refutation on the disjoint union; the inputs are re-checked and
/// the output is verified against the family before returning.
SubsetColoring split_refutation(const Antichain& family, const SubsetColoring& rb,
                                const SubsetColoring& rc);

}  // namespace parfilter
