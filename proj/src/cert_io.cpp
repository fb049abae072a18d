#include "parfilter/cert_io.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "parfilter/version.hpp"

namespace parfilter {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("short write: " + path);
}

std::string claim_digest(const std::string& descriptor, int k, int n,
                         const Antichain& family) {
  std::string preimage = descriptor + ":k=" + std::to_string(k) +
                         ":n=" + std::to_string(n) + "\n" + family.serialize();
  return hex64(fnv1a64(preimage));
}

namespace {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::refuted:
      return "refuted";
    case Verdict::established:
      return "established";
    case Verdict::budget:
      return "budget";
  }
  return "budget";
}

Json elemset_json(const ElemSet& s) {
  Json arr = Json::array();
  s.for_each([&](int e) { arr.push_back(e); });
  return arr;
}

ElemSet elemset_from_json(const Json& arr, Bound bound) {
  ElemSet s(bound);
  for (const auto& v : arr) s.insert(v.get<int>());
  return s;
}

}  // namespace

Json par_certificate_json(const std::string& descriptor, const Antichain& family,
                          const ParCertificate& cert) {
  Json j;
  j["type"] = "par";
  j["source"] = descriptor;
  j["family"] = claim_digest(descriptor, cert.k, cert.bound.n(), family);
  j["k"] = cert.k;
  j["n"] = cert.bound.n();
  j["verdict"] = verdict_name(cert.verdict);
  if (cert.verdict == Verdict::refuted) {
    Json arr = Json::array();
    for (uint8_t q : cert.refutation->color) arr.push_back(static_cast<int>(q));
    j["coloring"] = arr;
  }
  j["nodes"] = cert.nodes;
  if (descriptor.rfind("custom:", 0) == 0) j["antichain"] = family.serialize();
  return j;
}

Json threshold_json(const GeneratorSource& src, int k, int n_max,
                    const ThresholdResult& res) {
  Json j;
  j["type"] = "threshold";
  j["source"] = src.descriptor();
  j["k"] = k;
  j["nmax"] = n_max;
  j["resolved"] = res.resolved;
  if (res.resolved) {
    j["threshold"] = res.threshold;
    j["established"] =
        par_certificate_json(src.descriptor(),
                             generate(src, Bound(res.threshold)), *res.established);
    if (res.refutation)
      j["refutation"] = par_certificate_json(
          src.descriptor(), generate(src, Bound(res.threshold - 1)), *res.refutation);
  } else {
    j["largest_refuted"] = res.largest_refuted;
    if (res.refutation)
      j["refutation"] = par_certificate_json(
          src.descriptor(), generate(src, Bound(res.largest_refuted)), *res.refutation);
  }
  j["budget_spent"] = res.budget_spent;
  return j;
}

Json extraction_json(const PairColoring& pc,
                     const std::vector<std::string>& source_descriptors,
                     const BlockExtraction& x) {
  Json j;
  j["type"] = "extraction";
  Json blocks = Json::array();
  for (const ElemSet& b : x.blocks.blocks) blocks.push_back(elemset_json(b));
  j["blocks"] = blocks;
  Json gens = Json::array();
  for (const ElemSet& g : x.memberships) gens.push_back(elemset_json(g));
  j["generators"] = gens;
  j["color"] = x.color;
  j["arity"] = x.arity;
  j["sources"] = source_descriptors;
  Json pcj;
  pcj["n"] = pc.bound().n();
  pcj["r"] = pc.arity();
  pcj["k"] = pc.k();
  Json colors = Json::array();
  for (uint8_t q : pc.dense_colors()) colors.push_back(static_cast<int>(q));
  pcj["colors"] = colors;
  j["pcoloring"] = pcj;
  return j;
}

Json fw_json(int t, const BlockSequence& blocks, bool verified) {
  Json j;
  j["type"] = "fw";
  j["t"] = t;
  Json arr = Json::array();
  for (const ElemSet& b : blocks.blocks) arr.push_back(elemset_json(b));
  j["blocks"] = arr;
  j["verified"] = verified;
  return j;
}

Json columns_json(const LinearSystem& sys, ColumnsVariant variant,
                  const std::optional<ColumnsPartition>& cp) {
  Json j;
  j["type"] = "columns";
  Json matrix = Json::array();
  for (const auto& row : sys.a) {
    Json r = Json::array();
    for (long long v : row) r.push_back(v);
    matrix.push_back(r);
  }
  j["matrix"] = matrix;
  j["variant"] = variant == ColumnsVariant::paper ? "paper" : "classical";
  j["satisfied"] = cp.has_value();
  if (cp) {
    Json parts = Json::array();
    for (const auto& part : cp->parts) {
      Json p = Json::array();
      for (int col : part) p.push_back(col + 1);  // 1-based for display
      parts.push_back(p);
    }
    j["parts"] = parts;
    if (variant == ColumnsVariant::paper) {
      Json wits = Json::array();
      for (const auto& per_part : cp->column_witnesses) {
        Json pw = Json::array();
        for (const auto& coeffs : per_part) {
          Json cs = Json::array();
          for (const Rational& c : coeffs) cs.push_back(c.str());
          pw.push_back(cs);
        }
        wits.push_back(pw);
      }
      j["witnesses"] = wits;
    } else {
      Json wits = Json::array();
      for (const auto& coeffs : cp->part_witnesses) {
        Json cs = Json::array();
        for (const Rational& c : coeffs) cs.push_back(c.str());
        wits.push_back(cs);
      }
      j["witnesses"] = wits;
    }
  }
  return j;
}

namespace {

VerifyOutcome reject(const std::string& why) { return {false, false, why}; }
VerifyOutcome accept(const std::string& what) { return {true, false, what}; }

Antichain family_for_certificate(const Json& cert, int n) {
  std::string desc = cert.at("source").get<std::string>();
  if (desc.rfind("custom:", 0) == 0) {
    if (!cert.contains("antichain"))
      throw InputError("custom-source certificate lacks the antichain text");
    Antichain embedded = Antichain::parse(cert.at("antichain").get<std::string>());
    std::string expect = "custom:" + embedded.content_digest();
    if (expect != desc)
      throw InputError("embedded antichain does not match the source digest");
    if (embedded.bound().n() != n)
      throw InputError("embedded antichain bound differs from n");
    return embedded;
  }
  GeneratorSource src = GeneratorSource::parse(desc);
  if (src.descriptor() != desc)
    throw InputError("source descriptor is not canonical: " + desc);
  return generate(src, Bound(n));
}

VerifyOutcome verify_par(const Json& cert, uint64_t budget, int workers) {
  int k = cert.at("k").get<int>();
  int n = cert.at("n").get<int>();
  if (k < 1) return reject("k out of range");
  Antichain family = family_for_certificate(cert, n);
  std::string digest =
      claim_digest(cert.at("source").get<std::string>(), k, n, family);
  if (digest != cert.at("family").get<std::string>())
    return reject("family digest mismatch (source, k, n, or family mutated)");
  std::string verdict = cert.at("verdict").get<std::string>();
  if (verdict == "refuted") {
    if (!cert.contains("coloring")) return reject("refuted certificate lacks a coloring");
    const Json& arr = cert.at("coloring");
    if (arr.size() != static_cast<size_t>(n))
      return reject("coloring length differs from n");
    std::vector<uint8_t> colors;
    for (const auto& v : arr) {
      int q = v.get<int>();
      if (q < 1 || q > k) return reject("coloring value out of range");
      colors.push_back(static_cast<uint8_t>(q));
    }
    Coloring c(Bound(n), k, std::move(colors));
    if (auto w = mono_witness(c, family)) {
      std::ostringstream os;
      os << "coloring leaves a monochromatic generator in color " << w->second;
      return reject(os.str());
    }
    return accept("refutation re-checked: no monochromatic generator");
  }
  if (verdict == "established") {
    if (cert.contains("coloring"))
      return reject("established certificate carries a coloring");
    SearchOptions opts;
    opts.budget = budget;
    opts.workers = workers;
    ParCertificate re = is_par_member(family, k, opts);
    if (re.verdict == Verdict::established)
      return accept("established claim re-searched exhaustively");
    if (re.verdict == Verdict::refuted)
      return reject("re-search found a refutation; certificate is unsound");
    return {false, true, "re-search exceeded the verification budget"};
  }
  if (verdict == "budget")
    return {false, true, "certificate records budget exhaustion, not a verdict"};
  return reject("unknown verdict '" + verdict + "'");
}

VerifyOutcome verify_extraction_cert(const Json& cert) {
  const Json& pcj = cert.at("pcoloring");
  Bound bound(pcj.at("n").get<int>());
  int r = pcj.at("r").get<int>();
  int k = pcj.at("k").get<int>();
  std::vector<uint8_t> colors;
  for (const auto& v : pcj.at("colors")) {
    int q = v.get<int>();
    if (q < 1 || q > k) return reject("pcoloring color out of range");
    colors.push_back(static_cast<uint8_t>(q));
  }
  PairColoring pc = PairColoring::dense(bound, r, k, std::move(colors));
  BlockExtraction x;
  std::vector<ElemSet> blocks;
  for (const auto& b : cert.at("blocks")) blocks.push_back(elemset_from_json(b, bound));
  x.blocks = BlockSequence::of(std::move(blocks));
  for (const auto& g : cert.at("generators"))
    x.memberships.push_back(elemset_from_json(g, bound));
  x.color = cert.at("color").get<int>();
  x.arity = cert.at("arity").get<int>();
  std::vector<GeneratorSource> sources;
  for (const auto& d : cert.at("sources"))
    sources.push_back(GeneratorSource::parse(d.get<std::string>()));
  if (!verify_extraction(pc, x, sources))
    return reject("extraction fails exhaustive transversal re-check");
  return accept("extraction re-checked transversal-exhaustively");
}

VerifyOutcome verify_fw(const Json& cert) {
  int t = cert.at("t").get<int>();
  BlockSequence expected = fw_blocks(t);
  const Json& arr = cert.at("blocks");
  if (arr.size() != static_cast<size_t>(t)) return reject("block count differs from t");
  std::vector<ElemSet> blocks;
  for (const auto& b : arr) blocks.push_back(elemset_from_json(b, expected.bound()));
  for (int i = 0; i < t; ++i)
    if (!(blocks[static_cast<size_t>(i)] == expected.blocks[static_cast<size_t>(i)]))
      return reject("block " + std::to_string(i + 1) +
                    " differs from the recurrence construction");
  bool verified = fw_verify(expected);
  if (verified != cert.at("verified").get<bool>())
    return reject("stored verification flag contradicts the transversal check");
  return accept("block construction and transversal check reproduced");
}

VerifyOutcome verify_columns_cert(const Json& cert) {
  LinearSystem sys;
  for (const auto& row : cert.at("matrix")) {
    std::vector<long long> r;
    for (const auto& v : row) r.push_back(v.get<long long>());
    sys.a.push_back(std::move(r));
  }
  sys.rows = static_cast<int>(sys.a.size());
  sys.cols = sys.a.empty() ? 0 : static_cast<int>(sys.a.front().size());
  sys.validate();
  std::string variant_s = cert.at("variant").get<std::string>();
  ColumnsVariant variant =
      variant_s == "classical" ? ColumnsVariant::classical : ColumnsVariant::paper;
  if (variant_s != "classical" && variant_s != "paper")
    return reject("unknown variant '" + variant_s + "'");
  bool satisfied = cert.at("satisfied").get<bool>();
  if (!satisfied) {
    if (columns_condition(sys, variant))
      return reject("re-decision finds a partition; negative certificate is unsound");
    return accept("negative answer re-decided");
  }
  ColumnsPartition cp;
  cp.variant = variant;
  for (const auto& part : cert.at("parts")) {
    std::vector<int> p;
    for (const auto& v : part) p.push_back(v.get<int>() - 1);
    cp.parts.push_back(std::move(p));
  }
  const Json& wits = cert.at("witnesses");
  if (variant == ColumnsVariant::paper) {
    for (const auto& per_part : wits) {
      std::vector<std::vector<Rational>> pw;
      for (const auto& coeffs : per_part) {
        std::vector<Rational> cs;
        for (const auto& c : coeffs) cs.push_back(Rational::parse(c.get<std::string>()));
        pw.push_back(std::move(cs));
      }
      cp.column_witnesses.push_back(std::move(pw));
    }
  } else {
    for (const auto& coeffs : wits) {
      std::vector<Rational> cs;
      for (const auto& c : coeffs) cs.push_back(Rational::parse(c.get<std::string>()));
      cp.part_witnesses.push_back(std::move(cs));
    }
  }
  if (!verify_columns(sys, cp))
    return reject("witness re-multiplication fails");
  return accept("columns partition re-multiplied exactly");
}

VerifyOutcome verify_threshold(const Json& cert, uint64_t budget, int workers) {
  bool resolved = cert.at("resolved").get<bool>();
  if (!resolved) {
    if (!cert.contains("refutation"))
      return {false, true, "unresolved threshold carries no definitive claim"};
    VerifyOutcome r = verify_par(cert.at("refutation"), budget, workers);
    if (!r.accepted) return r;
    return {false, true,
            "largest refuted bound re-checked; threshold itself unresolved"};
  }
  int threshold = cert.at("threshold").get<int>();
  const Json& est = cert.at("established");
  if (est.at("n").get<int>() != threshold)
    return reject("established bound differs from threshold");
  VerifyOutcome r1 = verify_par(est, budget, workers);
  if (!r1.accepted) return r1;
  if (threshold > 1) {
    if (!cert.contains("refutation"))
      return reject("threshold > 1 requires a refutation at threshold-1");
    const Json& ref = cert.at("refutation");
    if (ref.at("n").get<int>() != threshold - 1)
      return reject("refutation bound is not threshold-1");
    VerifyOutcome r2 = verify_par(ref, budget, workers);
    if (!r2.accepted) return r2;
  }
  return accept("threshold pair re-checked on both sides");
}

}  // namespace

VerifyOutcome verify_certificate(const Json& cert, uint64_t budget, int workers) {
  try {
    if (!cert.contains("type")) return reject("certificate lacks a type field");
    std::string type = cert.at("type").get<std::string>();
    if (type == "par") return verify_par(cert, budget, workers);
    if (type == "threshold") return verify_threshold(cert, budget, workers);
    if (type == "extraction") return verify_extraction_cert(cert);
    if (type == "fw") return verify_fw(cert);
    if (type == "columns") return verify_columns_cert(cert);
    return reject("unknown certificate type '" + type + "'");
  } catch (const std::exception& e) {
    return reject(std::string("malformed certificate: ") + e.what());
  }
}

void export_cnf(std::ostream& os, const Antichain& family, int k,
                const std::string& descriptor) {
  if (family.is_empty_family())
    throw InputError("cnf export requires a nonempty family");
  int n = family.bound().n();
  size_t clause_count = static_cast<size_t>(n) +
                        static_cast<size_t>(n) * static_cast<size_t>(k) *
                            static_cast<size_t>(k - 1) / 2 +
                        family.size() * static_cast<size_t>(k);
  os << "c refutation-existence encoding: satisfiable iff some " << k
     << "-coloring of [1.." << n << "] leaves no generator monochromatic\n";
  os << "c n=" << n << " k=" << k << " source=" << descriptor
     << " family=" << claim_digest(descriptor, k, n, family) << "\n";
  os << "c var x(e,q) = (e-1)*" << k << " + q\n";
  os << "p cnf " << n * k << " " << clause_count << "\n";
  auto var = [&](int e, int q) { return (e - 1) * k + q; };
  for (int e = 1; e <= n; ++e) {
    for (int q = 1; q <= k; ++q) os << var(e, q) << " ";
    os << "0\n";
    for (int q = 1; q <= k; ++q)
      for (int q2 = q + 1; q2 <= k; ++q2)
        os << -var(e, q) << " " << -var(e, q2) << " 0\n";
  }
  for (const ElemSet& g : family.generators())
    for (int q = 1; q <= k; ++q) {
      g.for_each([&](int e) { os << -var(e, q) << " "; });
      os << "0\n";
    }
}

CnfFile parse_cnf(std::string_view text) {
  CnfFile cnf;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  long long declared_clauses = -1;
  std::vector<int> current;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == 'c') {
      cnf.comments.push_back(line);
      continue;
    }
    if (line[0] == 'p') {
      std::istringstream ps(line);
      std::string p, fmt;
      if (!(ps >> p >> fmt >> cnf.vars >> declared_clauses) || fmt != "cnf")
        throw InputError("cnf: bad problem line at line " + std::to_string(lineno));
      continue;
    }
    std::istringstream ls(line);
    int lit;
    while (ls >> lit) {
      if (lit == 0) {
        cnf.clauses.push_back(current);
        current.clear();
      } else {
        if (std::abs(lit) > cnf.vars)
          throw InputError("cnf: literal out of range at line " +
                           std::to_string(lineno));
        current.push_back(lit);
      }
    }
    if (!ls.eof())
      throw InputError("cnf: malformed literal at line " + std::to_string(lineno));
  }
  if (!current.empty()) throw InputError("cnf: unterminated final clause");
  if (declared_clauses >= 0 &&
      cnf.clauses.size() != static_cast<size_t>(declared_clauses))
    throw InputError("cnf: clause count differs from the problem line");
  return cnf;
}

bool cnf_matches(const CnfFile& cnf, const Antichain& family, int k) {
  std::ostringstream os;
  export_cnf(os, family, k, "structural-check");
  CnfFile expect = parse_cnf(os.str());
  if (cnf.vars != expect.vars) return false;
  auto canon = [](const CnfFile& f) {
    std::vector<std::vector<int>> cs = f.clauses;
    for (auto& c : cs) std::sort(c.begin(), c.end());
    std::sort(cs.begin(), cs.end());
    return cs;
  };
  return canon(cnf) == canon(expect);
}

Coloring decode_model(const std::vector<int>& literals, Bound bound, int k) {
  int n = bound.n();
  std::vector<uint8_t> assigned(static_cast<size_t>(n) * static_cast<size_t>(k) + 1, 0);
  for (int lit : literals) {
    int v = std::abs(lit);
    if (v < 1 || v > n * k) continue;  // solvers may emit auxiliaries
    assigned[static_cast<size_t>(v)] = lit > 0 ? 1 : 2;
  }
  std::vector<uint8_t> colors(static_cast<size_t>(n), 0);
  for (int e = 1; e <= n; ++e) {
    int chosen = 0;
    for (int q = 1; q <= k; ++q) {
      if (assigned[static_cast<size_t>((e - 1) * k + q)] == 1) {
        if (chosen) throw InputError("model assigns two colors to element " +
                                     std::to_string(e));
        chosen = q;
      }
    }
    if (!chosen)
      throw InputError("model assigns no color to element " + std::to_string(e));
    colors[static_cast<size_t>(e - 1)] = static_cast<uint8_t>(chosen);
  }
  return Coloring(bound, k, std::move(colors));
}

std::optional<SatRun> run_external_solver(const std::string& cnf_path) {
  const char* exe = std::getenv("PARFILTER_SAT");
  if (!exe || !*exe) return std::nullopt;
  std::string cmd = std::string(exe) + " " + cnf_path + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw IoError("cannot run external solver: " + cmd);
  std::string output;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  pclose(pipe);  // solver exit codes are conventional (10/20); output decides
  SatRun run;
  std::istringstream is(output);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("s ", 0) == 0) {
      if (line.find("UNSATISFIABLE") != std::string::npos)
        run.status = SatRun::Status::unsat;
      else if (line.find("SATISFIABLE") != std::string::npos)
        run.status = SatRun::Status::sat;
    } else if (line.rfind("v ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      int lit;
      while (ls >> lit)
        if (lit != 0) run.literals.push_back(lit);
    }
  }
  return run;
}

namespace {

Json cache_entry_json(const CacheEntry& e) {
  Json j;
  j["source"] = e.source;
  j["k"] = e.k;
  j["threshold"] = e.threshold;
  j["digests"] = Json{{"established", e.established_digest},
                      {"refuted", e.refuted_digest}};
  j["version"] = e.version.empty() ? kVersion : e.version;
  j["nodes"] = e.nodes;
  return j;
}

CacheEntry cache_entry_parse(const Json& j) {
  CacheEntry e;
  e.source = j.at("source").get<std::string>();
  e.k = j.at("k").get<int>();
  e.threshold = j.at("threshold").get<int>();
  e.established_digest = j.at("digests").at("established").get<std::string>();
  e.refuted_digest = j.at("digests").at("refuted").get<std::string>();
  e.version = j.at("version").get<std::string>();
  e.nodes = j.at("nodes").get<uint64_t>();
  return e;
}

// Whole-file advisory lock shared by concurrent invocations.
struct FileLock {
  int fd = -1;
  explicit FileLock(const std::string& path, bool exclusive) {
    fd = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd < 0) throw IoError("cannot open cache file: " + path);
    if (flock(fd, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      ::close(fd);
      throw IoError("cannot lock cache file: " + path);
    }
  }
  ~FileLock() {
    if (fd >= 0) {
      flock(fd, LOCK_UN);
      ::close(fd);
    }
  }
};

std::vector<CacheEntry> cache_read_all(const std::string& path) {
  std::vector<CacheEntry> entries;
  std::ifstream in(path);
  if (!in) return entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      entries.push_back(cache_entry_parse(Json::parse(line)));
    } catch (const std::exception& e) {
      throw InputError("cache: bad entry at line " + std::to_string(lineno) +
                       ": " + e.what());
    }
  }
  return entries;
}

}  // namespace

std::optional<CacheEntry> cache_lookup(const std::string& path,
                                       const std::string& source, int k) {
  std::ifstream probe(path);
  if (!probe) return std::nullopt;
  probe.close();
  FileLock lock(path, false);
  std::optional<CacheEntry> hit;
  for (const CacheEntry& e : cache_read_all(path))
    if (e.source == source && e.k == k) hit = e;  // later lines supersede
  return hit;
}

void cache_append(const std::string& path, const CacheEntry& entry) {
  FileLock lock(path, true);
  for (const CacheEntry& e : cache_read_all(path)) {
    if (e.source == entry.source && e.k == entry.k && e.threshold != entry.threshold)
      throw CacheConflictError(
          "cache conflict for (" + entry.source + ", k=" + std::to_string(entry.k) +
          "): stored threshold " + std::to_string(e.threshold) + " vs new " +
          std::to_string(entry.threshold) + "; this signals a soundness bug");
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to cache file: " + path);
  out << cache_entry_json(entry).dump() << "\n";
  if (!out) throw IoError("short write to cache file: " + path);
}

}  // namespace parfilter
