#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parfilter/core.hpp"
#include "parfilter/extract.hpp"
#include "parfilter/search.hpp"
#include "parfilter/witnesses.hpp"

namespace parfilter {

using Json = nlohmann::ordered_json;

/// Digest binding a certificate to its claim context: the canonical source
/// descriptor is the preimage prefix, followed by k, n and the antichain text.
std::string claim_digest(const std::string& descriptor, int k, int n,
                         const Antichain& family);

// ---- certificate JSON ----

Json par_certificate_json(const std::string& descriptor, const Antichain& family,
                          const ParCertificate& cert);
Json threshold_json(const GeneratorSource& src, int k, int n_max,
                    const ThresholdResult& res);
Json extraction_json(const PairColoring& pc,
                     const std::vector<std::string>& source_descriptors,
                     const BlockExtraction& x);
Json fw_json(int t, const BlockSequence& blocks, bool verified);
Json columns_json(const LinearSystem& sys, ColumnsVariant variant,
                  const std::optional<ColumnsPartition>& cp);

struct VerifyOutcome {
  bool accepted = false;
  bool budget_hit = false;
  std::string detail;
};

/// Re-validates a certificate with the independent checkers; stored verdicts
/// are never trusted. Established claims are re-searched (bounded by
/// `budget`), refuted claims re-checked with mono_witness, extractions with
/// verify_extraction, block constructions re-derived, and columns witnesses
/// re-multiplied.
VerifyOutcome verify_certificate(const Json& cert, uint64_t budget = kNoBudget,
                                 int workers = 1);

// ---- DIMACS bridge ----

/// Encodes "a refuting k-coloring of [1..n] exists" as CNF: variables
/// x_{e,q} = (e-1)*k + q, exactly-one clauses per element, and one all-negative
/// clause per (generator, color). SAT iff a refutation exists.
void export_cnf(std::ostream& os, const Antichain& family, int k,
                const std::string& descriptor);

struct CnfFile {
  int vars = 0;
  std::vector<std::vector<int>> clauses;
  std::vector<std::string> comments;
};
CnfFile parse_cnf(std::string_view text);

/// Structural check that a CNF file is exactly the encoding of (family, k).
bool cnf_matches(const CnfFile& cnf, const Antichain& family, int k);

/// Turns a satisfying assignment (positive/negative literals for every
/// variable) back into the coloring it encodes.
Coloring decode_model(const std::vector<int>& literals, Bound bound, int k);

// ---- external SAT solver ----

struct SatRun {
  enum class Status { sat, unsat, unknown } status = Status::unknown;
  std::vector<int> literals;
};

/// Runs the executable named by the PARFILTER_SAT environment variable on a
/// CNF file and parses competition-format output (`s ...` / `v ...` lines).
/// Absent when the variable is unset.
std::optional<SatRun> run_external_solver(const std::string& cnf_path);

// ---- threshold cache ----

struct CacheEntry {
  std::string source;
  int k = 0;
  int threshold = 0;
  std::string established_digest;
  std::string refuted_digest;  // empty when threshold == 1
  std::string version;
  uint64_t nodes = 0;
};

/// Append-only JSONL keyed by (source, k). A key collision with a different
/// threshold throws CacheConflictError; equal re-appends are permitted.
std::optional<CacheEntry> cache_lookup(const std::string& path,
                                       const std::string& source, int k);
void cache_append(const std::string& path, const CacheEntry& entry);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace parfilter
