// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Expensive searches run through the CLI binary exactly as a user
// would invoke them; property suites drive the library against the
// independent plain-loop oracles in oracles.hpp.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "parfilter/cert_io.hpp"

using namespace parfilter;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::filesystem::path g_dir;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
  if (!detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << "\n";
  if (!ok) ++g_failures;
}

std::string tmpfile(const std::string& name) { return (g_dir / name).string(); }

struct CliRun {
  int exit_code = -1;
  std::string out;
  double seconds = 0.0;
};

CliRun cli(const std::string& args) {
  std::string out_path = tmpfile("cli-out.txt");
  std::string cmd = std::string(PARFILTER_BIN) + " " + args + " > " + out_path +
                    " 2>" + tmpfile("cli-err.txt");
  auto t0 = Clock::now();
  int status = std::system(cmd.c_str());
  auto t1 = Clock::now();
  CliRun r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.seconds = std::chrono::duration<double>(t1 - t0).count();
  std::ifstream in(out_path);
  std::ostringstream os;
  os << in.rdbuf();
  r.out = os.str();
  return r;
}

std::vector<oracle::Set> gens_of(const Antichain& a) {
  std::vector<oracle::Set> out;
  for (const ElemSet& g : a.generators()) out.push_back(g.elements());
  return out;
}

std::vector<int> domain_1_to(int n) {
  std::vector<int> d(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)] = i + 1;
  return d;
}

Antichain random_family(std::mt19937_64& rng, int n, int max_gens) {
  auto raw = oracle::random_sets(rng, n, 1 + static_cast<int>(rng() % max_gens));
  std::vector<ElemSet> sets;
  for (const auto& s : raw) sets.push_back(ElemSet(Bound(n), s));
  return Antichain::normalize(sets);
}

// One CLI threshold measurement plus verification of the refutation side.
struct ThresholdCheck {
  bool ok = false;
  double seconds = 0.0;
  std::string detail;
};

ThresholdCheck cli_threshold(const std::string& src, int k, int expect,
                             double limit_s) {
  ThresholdCheck res;
  std::string cert = tmpfile("threshold-cert.json");
  CliRun r = cli("threshold \"" + src + "\" " + std::to_string(k) +
                 " --json --cache \"\" --out " + cert);
  res.seconds = r.seconds;
  if (r.exit_code != 0) {
    res.detail = "exit " + std::to_string(r.exit_code);
    return res;
  }
  Json j = Json::parse(r.out);
  if (j["threshold"] != expect) {
    res.detail = "threshold " + j["threshold"].dump() + " != " +
                 std::to_string(expect);
    return res;
  }
  if (r.seconds > limit_s) {
    res.detail = "took " + std::to_string(r.seconds) + "s > " +
                 std::to_string(limit_s) + "s";
    return res;
  }
  // The refutation certificate must pass the independent verifier.
  write_file(tmpfile("refutation.json"), j["refutation"].dump());
  CliRun v = cli("verify " + tmpfile("refutation.json"));
  if (v.exit_code != 0) {
    res.detail = "refutation failed verify";
    return res;
  }
  res.ok = true;
  res.detail = "t=" + std::to_string(res.seconds).substr(0, 5) + "s";
  return res;
}

void criterion_1_vdw_thresholds() {
  ThresholdCheck a = cli_threshold("ap:3", 2, 9, 1.0);
  ThresholdCheck b = cli_threshold("ap:3", 3, 27, 60.0);
  ThresholdCheck c = cli_threshold("ap:4", 2, 35, 60.0);

  // Exhaustive confirmation where feasible (k = 2, small n): the full
  // 2^n scan and the plain-loop oracle agree with the backtracking verdicts.
  bool oracle_ok = true;
  for (int n : {8, 9}) {
    Antichain fam = generate(GeneratorSource::ap(3), Bound(n));
    SearchOptions ex;
    ex.strategy = Strategy::exhaustive;
    ParCertificate cert = is_par_member(fam, 2, ex);
    bool expect_refuted = n == 8;
    if ((cert.verdict == Verdict::refuted) != expect_refuted) oracle_ok = false;
    auto scan = oracle::refutation_scan(domain_1_to(n), 2, gens_of(fam), n);
    if (scan.refutation_exists != expect_refuted) oracle_ok = false;
  }
  report("criterion-1 progression thresholds (9, 27, 35) with verified refutations",
         a.ok && b.ok && c.ok && oracle_ok,
         a.detail + ", " + b.detail + ", " + c.detail);
}

void criterion_2_schur_thresholds() {
  ThresholdCheck a = cli_threshold("schur", 2, 5, 60.0);
  ThresholdCheck b = cli_threshold("schur", 3, 14, 60.0);

  // The two-color refutation at n=4 must be {1,4}/{2,3} up to color swap.
  ThresholdResult res = min_threshold(GeneratorSource::schur(false), 2, Bound(10));
  bool classes_ok = false;
  if (res.resolved && res.refutation && res.refutation->refutation) {
    const auto& c = res.refutation->refutation->color;
    classes_ok = c.size() == 4 && c[0] == c[3] && c[1] == c[2] && c[0] != c[1];
  }
  report("criterion-2 sum-family thresholds (5, 14) with the {1,4}/{2,3} split",
         a.ok && b.ok && classes_ok, a.detail + ", " + b.detail);
}

void criterion_3_linear_schur_coherence() {
  bool ok = true;
  std::string detail;
  LinearSystem sys = LinearSystem::parse_inline("[1 1 -1]");
  for (bool distinct : {false, true}) {
    for (int k : {2, 3}) {
      ThresholdResult lin = min_threshold(
          GeneratorSource::linear(sys, distinct), k, Bound(40));
      ThresholdResult sch = min_threshold(GeneratorSource::schur(distinct), k,
                                          Bound(40));
      if (!lin.resolved || !sch.resolved || lin.threshold != sch.threshold) {
        ok = false;
        detail = "threshold mismatch at k=" + std::to_string(k) +
                 " distinct=" + std::to_string(distinct);
      }
    }
    for (int n = 1; n <= 32; ++n) {
      if (!(generate(GeneratorSource::linear(sys, distinct), Bound(n)) ==
            generate(GeneratorSource::schur(distinct), Bound(n)))) {
        ok = false;
        detail = "antichain mismatch at n=" + std::to_string(n);
      }
    }
  }
  report("criterion-3 one-row system x+y=z coheres with the sum family", ok, detail);
}

void criterion_4_columns_condition() {
  bool ok = true;
  std::string detail;
  LinearSystem schur_sys = LinearSystem::parse_inline("[1 1 -1]");
  LinearSystem gap = LinearSystem::parse_inline("[1 2 -4]");
  LinearSystem zero = LinearSystem::parse_inline("[0]");
  for (auto variant : {ColumnsVariant::paper, ColumnsVariant::classical}) {
    auto a = columns_condition(schur_sys, variant);
    if (!a || !verify_columns(schur_sys, *a)) {
      ok = false;
      detail = "x+y=z should satisfy both variants";
    }
    if (columns_condition(gap, variant)) {
      ok = false;
      detail = "{1,2,-4} has no zero-sum subset";
    }
    auto z = columns_condition(zero, variant);
    if (!z || !verify_columns(zero, *z)) {
      ok = false;
      detail = "zero column is its own first part";
    }
  }
  // CLI surface agrees.
  CliRun r = cli("columns \"[1 1 -1]\" --json");
  if (r.exit_code != 0 || Json::parse(r.out)["satisfied"] != true) {
    ok = false;
    detail = "cli columns failed";
  }
  report("criterion-4 columns condition on the three pinned systems", ok, detail);
}

void criterion_5_fw_construction() {
  bool ok = true;
  std::string detail;
  for (int t = 1; t <= 10; ++t) {
    if (!fw_verify(fw_blocks(t))) {
      ok = false;
      detail = "construction fails verification at t=" + std::to_string(t);
    }
  }
  // Mutating a block so consecutive integers line up across blocks creates a
  // transversal progression and must flip verification.
  BlockSequence mutated = fw_blocks(3);  // {1},{3,4},{9,10,11}
  Bound b = mutated.bound();
  mutated.blocks[1] = ElemSet(b, {2, 4});  // transversal 1,2,3 appears
  mutated.blocks[1] = ElemSet(b, {5, 6});  // 1,5,9 is a transversal progression
  if (fw_verify(mutated)) {
    ok = false;
    detail = "mutated blocks still verify";
  }
  CliRun r = cli("fw 10 --json");
  if (r.exit_code != 0 || Json::parse(r.out)["verified"] != true) {
    ok = false;
    detail = "cli fw 10 failed";
  }
  report("criterion-5 progression-free blocks verify up to t=10, mutations flip", ok,
         detail);
}

void criterion_6_par_soundness_suite() {
  std::mt19937_64 rng(20260809);
  std::mt19937_64 sample_rng(6060);
  bool ok = true;
  std::string detail;
  int established_seen = 0, refuted_seen = 0;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    int k = 2 + static_cast<int>(rng() % 2);
    int n = 4 + static_cast<int>(rng() % (k == 3 ? 9 : 9));  // up to 12
    Antichain fam = random_family(rng, n, 7);
    SearchOptions ex;
    ex.strategy = Strategy::exhaustive;
    ParCertificate exhaustive = is_par_member(fam, k, ex);
    ParCertificate backtrack = is_par_member(fam, k);
    if (exhaustive.verdict != backtrack.verdict) {
      ok = false;
      detail = "strategy disagreement at trial " + std::to_string(trial);
      break;
    }
    if (backtrack.verdict == Verdict::refuted) {
      ++refuted_seen;
      if (mono_witness(*backtrack.refutation, fam)) {
        ok = false;
        detail = "refutation certificate is unsound";
      }
    } else {
      ++established_seen;
      // 10^5 random colorings may not contradict an established verdict.
      std::vector<uint8_t> colors(static_cast<size_t>(n));
      for (int attempt = 0; attempt < 100000; ++attempt) {
        for (auto& c : colors) c = static_cast<uint8_t>(1 + sample_rng() % k);
        Coloring c(Bound(n), k, colors);
        if (!mono_witness(c, fam)) {
          ok = false;
          detail = "random coloring contradicts an established verdict";
          break;
        }
      }
    }
  }
  report("criterion-6 backtracking matches exhaustive on 200 random families",
         ok && established_seen > 0 && refuted_seen > 0,
         detail.empty() ? std::to_string(established_seen) + " established, " +
                              std::to_string(refuted_seen) + " refuted"
                        : detail);
}

void criterion_7_split_glue() {
  std::mt19937_64 rng(3535);
  bool ok = true;
  std::string detail;
  int done = 0;
  while (done < 50 && ok) {
    int n = 6 + static_cast<int>(rng() % 7);  // 6..12
    Antichain fam = random_family(rng, n, 6);
    // Random disjoint domains.
    ElemSet b{Bound(n)};
    ElemSet c{Bound(n)};
    for (int e = 1; e <= n; ++e) {
      switch (rng() % 3) {
        case 0: b.insert(e); break;
        case 1: c.insert(e); break;
        default: break;
      }
    }
    if (b.empty() || c.empty()) continue;
    int kb = 1 + static_cast<int>(rng() % 2);
    int kc = 1 + static_cast<int>(rng() % 2);
    DomainSearchResult rb = par_search_on(fam, b, kb);
    DomainSearchResult rc = par_search_on(fam, c, kc);
    if (rb.verdict != Verdict::refuted || rc.verdict != Verdict::refuted)
      continue;  // forced on a part; not a glue instance
    SubsetColoring glued = split_refutation(fam, *rb.refutation, *rc.refutation);
    if (glued.k != kb + kc || mono_witness(glued, fam)) {
      ok = false;
      detail = "glued coloring has a monochromatic generator";
    }
    ++done;
  }
  report("criterion-7 refutation glue stays monochromatic-free on 50 instances", ok,
         detail);
}

void criterion_8_minimal_members() {
  bool ok = true;
  std::string detail;
  // Triangle family: the whole triple is the unique minimal forced set.
  Bound b3(3);
  Antichain triangle = Antichain::normalize(
      {ElemSet(b3, {1, 2}), ElemSet(b3, {1, 3}), ElemSet(b3, {2, 3})});
  Antichain tri_min = minimal_par_members(triangle, 2, 3);
  if (!(tri_min.size() == 1 &&
        tri_min.generators()[0].elements() == std::vector<int>{1, 2, 3})) {
    ok = false;
    detail = "triangle family";
  }
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 25 && ok; ++trial) {
    int n = 5 + static_cast<int>(rng() % 4);  // 5..8
    int k = 2 + static_cast<int>(rng() % 2);
    int max_size = 4 + static_cast<int>(rng() % 3);  // 4..6
    Antichain fam = random_family(rng, n, 6);
    Antichain minimal = minimal_par_members(fam, k, max_size);
    auto gens = gens_of(fam);
    // Confirm membership of every returned set and non-membership of every
    // proper subset by exhaustive partition enumeration.
    for (const ElemSet& m : minimal.generators()) {
      auto elems = m.elements();
      if (!oracle::par_member(elems, k, gens, n)) {
        ok = false;
        detail = "returned set is not a member";
      }
      for (uint32_t mask = 1; ok && mask + 1 < (1u << elems.size()); ++mask) {
        oracle::Set sub;
        for (size_t i = 0; i < elems.size(); ++i)
          if (mask & (1u << i)) sub.push_back(elems[i]);
        if (oracle::par_member(sub, k, gens, n)) {
          ok = false;
          detail = "a proper subset is already a member";
        }
      }
    }
    // Completeness: every oracle member up to max_size contains a returned one.
    for (uint32_t mask = 1; ok && mask < (1u << n); ++mask) {
      oracle::Set a;
      for (int e = 1; e <= n; ++e)
        if (mask & (1u << (e - 1))) a.push_back(e);
      if (static_cast<int>(a.size()) > max_size) continue;
      if (!oracle::par_member(a, k, gens, n)) continue;
      bool covered = false;
      for (const ElemSet& m : minimal.generators())
        if (oracle::subset(m.elements(), a)) covered = true;
      if (!covered) {
        ok = false;
        detail = "oracle member missed by the minimal list";
      }
    }
  }
  report("criterion-8 minimal forced sets match exhaustive partition oracle", ok,
         detail);
}

void criterion_9_extraction_singletons() {
  bool ok = true;
  std::string detail;
  // Every 2-coloring of [1..9] admits a one-block extraction of length 3.
  Bound b9(9);
  for (uint32_t mask = 0; mask < (1u << 9) && ok; ++mask) {
    std::vector<uint8_t> colors(9);
    for (int e = 0; e < 9; ++e)
      colors[static_cast<size_t>(e)] = (mask >> e) & 1 ? 2 : 1;
    PairColoring pc = PairColoring::from_elements(Coloring(b9, 2, colors));
    ExtractResult r = bh_extract(pc, {GeneratorSource::ap(3)});
    if (r.status != ExtractStatus::found ||
        !verify_extraction(pc, *r.extraction, {GeneratorSource::ap(3)})) {
      ok = false;
      detail = "coloring mask " + std::to_string(mask);
    }
  }
  if (ok) {
    // Spot-check the CLI surface on one of the 512 colorings.
    std::ostringstream col;
    col << "pcoloring n=9 r=1 k=2\n";
    for (int e = 1; e <= 9; ++e) col << (e % 2 ? 1 : 2) << "\n";
    write_file(tmpfile("c9.pc"), col.str());
    CliRun r = cli("extract " + tmpfile("c9.pc") + " ap 3 --json");
    if (r.exit_code != 0) {
      ok = false;
      detail = "cli extract failed";
    }
  }
  // Lengths (3,3) on 100 random 2-colorings of [1..200].
  std::mt19937_64 rng(808);
  std::vector<GeneratorSource> srcs{GeneratorSource::ap(3), GeneratorSource::ap(3)};
  int successes = 0, fast_successes = 0;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    std::vector<uint8_t> colors(200);
    for (auto& c : colors) c = static_cast<uint8_t>(1 + rng() % 2);
    PairColoring pc = PairColoring::from_elements(Coloring(Bound(200), 2, colors));
    ExtractResult fast = bh_extract(pc, srcs, kNoBudget, true);
    ExtractResult generic = bh_extract(pc, srcs, kNoBudget, false);
    for (const ExtractResult* r : {&fast, &generic}) {
      if (r->status == ExtractStatus::found &&
          !verify_extraction(pc, *r->extraction, srcs)) {
        ok = false;
        detail = "unsound extraction at trial " + std::to_string(trial);
      }
    }
    // The constructive split never succeeds where backtracking cannot.
    if (fast.used_fast_path && generic.status != ExtractStatus::found) {
      ok = false;
      detail = "fast path succeeded but generic search failed";
    }
    if (fast.status == ExtractStatus::found) ++successes;
    if (fast.used_fast_path) ++fast_successes;
  }
  report("criterion-9 singleton-arity extraction: all 512 colorings at n=9, "
         "random pairs at n=200",
         ok,
         detail.empty() ? std::to_string(successes) + "/100 found, " +
                              std::to_string(fast_successes) + " via split"
                        : detail);
}

void criterion_10_extraction_pairs() {
  bool ok = true;
  std::string detail;
  // All pair 2-colorings of [1..6]; blocks are 2-subsets (every 2-subset is a
  // 2-term progression). Oracle: brute force over unordered block pairs.
  Bound b6(6);
  std::vector<std::pair<int, int>> pairs;
  for (int x = 1; x <= 6; ++x)
    for (int y = x + 1; y <= 6; ++y) pairs.emplace_back(x, y);
  std::vector<GeneratorSource> srcs{GeneratorSource::ap(2), GeneratorSource::ap(2)};
  for (uint32_t mask = 0; mask < (1u << 15) && ok; ++mask) {
    std::vector<uint8_t> colors(15);
    for (int i = 0; i < 15; ++i)
      colors[static_cast<size_t>(i)] = (mask >> i) & 1 ? 2 : 1;
    PairColoring pc = PairColoring::dense(b6, 2, 2, colors);
    // Brute force: two disjoint pairs whose four cross pairs share one color.
    bool oracle_exists = false;
    for (size_t i = 0; i < pairs.size() && !oracle_exists; ++i) {
      for (size_t j = 0; j < pairs.size() && !oracle_exists; ++j) {
        if (i == j) continue;
        auto [a1, a2] = pairs[i];
        auto [b1, b2] = pairs[j];
        if (a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2) continue;
        int expect = -1;
        bool constant = true;
        for (int x : {a1, a2})
          for (int y : {b1, b2}) {
            std::array<int, 2> s{std::min(x, y), std::max(x, y)};
            int q = pc.color_of(s);
            if (expect < 0) expect = q;
            if (q != expect) constant = false;
          }
        if (constant) oracle_exists = true;
      }
    }
    ExtractResult r = bh_extract(pc, srcs);
    if ((r.status == ExtractStatus::found) != oracle_exists) {
      ok = false;
      detail = "existence mismatch at mask " + std::to_string(mask);
    }
    if (r.status == ExtractStatus::found &&
        !verify_extraction(pc, *r.extraction, srcs)) {
      ok = false;
      detail = "unsound extraction at mask " + std::to_string(mask);
    }
  }
  report("criterion-10 pair-arity extraction agrees with brute force on all "
         "32768 colorings",
         ok, detail);
}

void criterion_11_cnf_bridge() {
  std::mt19937_64 rng(112233);
  bool ok = true;
  std::string detail;
  bool external = std::getenv("PARFILTER_SAT") && *std::getenv("PARFILTER_SAT");
  for (int trial = 0; trial < 20 && ok; ++trial) {
    int n = 4 + static_cast<int>(rng() % 9);  // 4..12
    int k = 2 + static_cast<int>(rng() % 2);
    Antichain fam = random_family(rng, n, 6);
    std::ostringstream os;
    export_cnf(os, fam, k, "fuzz");
    CnfFile cnf = parse_cnf(os.str());
    if (!cnf_matches(cnf, fam, k)) {
      ok = false;
      detail = "structural mismatch at trial " + std::to_string(trial);
      break;
    }
    ParCertificate internal = is_par_member(fam, k);
    oracle::Dpll dpll;
    dpll.vars = cnf.vars;
    dpll.clauses = cnf.clauses;
    auto model = dpll.solve();
    if (model.has_value() != (internal.verdict == Verdict::refuted)) {
      ok = false;
      detail = "sat/unsat disagrees with the internal verdict";
      break;
    }
    if (model) {
      Coloring decoded = decode_model(*model, Bound(n), k);
      if (mono_witness(decoded, fam)) {
        ok = false;
        detail = "decoded model is not a refutation";
        break;
      }
    }
    if (external) {
      write_file(tmpfile("bridge.cnf"), os.str());
      auto run = run_external_solver(tmpfile("bridge.cnf"));
      bool solver_sat = run && run->status == SatRun::Status::sat;
      bool solver_unsat = run && run->status == SatRun::Status::unsat;
      if ((internal.verdict == Verdict::refuted && !solver_sat) ||
          (internal.verdict == Verdict::established && !solver_unsat)) {
        ok = false;
        detail = "external solver disagrees";
      }
    }
  }
  report("criterion-11 cnf bridge: structure, sat equivalence, model decoding",
         ok, detail + (external ? " (external solver active)" : ""));
}

}  // namespace

int main() {
  g_dir = std::filesystem::temp_directory_path() /
          ("parfilter-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(g_dir);

  criterion_1_vdw_thresholds();
  criterion_2_schur_thresholds();
  criterion_3_linear_schur_coherence();
  criterion_4_columns_condition();
  criterion_5_fw_construction();
  criterion_6_par_soundness_suite();
  criterion_7_split_glue();
  criterion_8_minimal_members();
  criterion_9_extraction_singletons();
  criterion_10_extraction_pairs();
  criterion_11_cnf_bridge();

  std::filesystem::remove_all(g_dir);
  if (g_failures) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
