#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parfilter/core.hpp"
#include "parfilter/rational.hpp"

namespace parfilter {

/// Integer matrix with homogeneous semantics Ax = 0.
struct LinearSystem {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<long long>> a;  // row-major, rows x cols

  /// Text format: first line `rows cols`, then one row per line.
  static LinearSystem parse(std::string_view text);
  /// Inline form `[1 1 -1]` or `[1 -1 0; 0 1 -1]`; rows split on ';'.
  static LinearSystem parse_inline(std::string_view text);

  std::string inline_form() const;  // canonical `[..; ..]` rendering
  std::vector<long long> column(int j) const;
  bool has_zero_column() const;
  void validate() const;  // shape checks
};

/// Parametric rule producing a named witness family's antichain at any bound.
struct GeneratorSource {
  enum class Kind { ap, schur, folkman, linear, custom };

  Kind kind = Kind::ap;
  int length = 2;          // ap: progression length l >= 2; folkman: |B| = m >= 1
  bool distinct = false;   // see generate() for the per-kind meaning
  std::optional<LinearSystem> system;
  std::optional<Antichain> custom;

  static GeneratorSource ap(int l);
  static GeneratorSource schur(bool distinct = false);
  static GeneratorSource folkman(int m, bool distinct = false);
  static GeneratorSource linear(LinearSystem sys, bool distinct = false);
  static GeneratorSource custom_family(Antichain a);

  /// CLI syntax: `ap:<l>`, `schur[:distinct]`, `folkman:<m>[:distinct]`,
  /// `linear:<file-or-[inline]>[:distinct]`, `custom:<file>`.
  static GeneratorSource parse(const std::string& text);

  /// Canonical descriptor; linear systems render inline and custom families
  /// by content digest, so the string is location-independent.
  std::string descriptor() const;
};

/// Builds the generator antichain of the family at the given bound.
///
///   ap(l)      value sets {a, a+d, ..., a+(l-1)d}, d >= 1, inside [1..n].
///   schur      value sets of x+y=z solutions, x <= y (x < y when distinct).
///   folkman(m) FS(B) for |B| = m with max(FS(B)) <= n; when distinct, B is
///              rejected unless |FS(B)| = 2^m - 1.
///   linear     value sets of solutions in [1..n]^c of Ax = 0; when distinct,
///              coordinates must be pairwise distinct (in particular the
///              all-equal solution is excluded).
///   custom     the stored antichain restricted to the bound.
///
/// An unsatisfiable family yields the empty antichain, not an error.
Antichain generate(const GeneratorSource& src, Bound bound);

/// Count of the raw enumeration before antichain reduction; for ap(l) the
/// closed form sum_{d>=1} max(0, n-(l-1)d).
unsigned long long expected_generator_count(const GeneratorSource& src, Bound bound);

enum class ColumnsVariant { paper, classical };

/// Witnessed partition P_1..P_k of column indices (0-based):
/// sum of P_1 columns is zero, and later columns lie in the rational span of
/// earlier parts. `paper` witnesses each column of P_i individually;
/// `classical` witnesses the column sum of each P_i. Coefficient lists are
/// aligned with the concatenation of earlier parts' columns in part order.
struct ColumnsPartition {
  ColumnsVariant variant = ColumnsVariant::paper;
  std::vector<std::vector<int>> parts;
  // paper: column_witnesses[i][j] reproduces column parts[i+1][j].
  std::vector<std::vector<std::vector<Rational>>> column_witnesses;
  // classical: part_witnesses[i] reproduces the column sum of parts[i+1].
  std::vector<std::vector<Rational>> part_witnesses;
};

/// Decides the columns condition by exhaustive search over nonempty zero-sum
/// column subsets for P_1 followed by greedy span closure. All arithmetic is
/// exact; capacity overstep throws OverflowError.
std::optional<ColumnsPartition> columns_condition(
    const LinearSystem& sys, ColumnsVariant variant = ColumnsVariant::paper);

/// Re-multiplies every stored witness against the matrix columns.
bool verify_columns(const LinearSystem& sys, const ColumnsPartition& cp);

}  // namespace parfilter
