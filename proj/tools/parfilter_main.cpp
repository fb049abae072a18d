#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parfilter/cert_io.hpp"
#include "parfilter/core.hpp"
#include "parfilter/extract.hpp"
#include "parfilter/search.hpp"
#include "parfilter/version.hpp"
#include "parfilter/witnesses.hpp"

namespace {

using namespace parfilter;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBudget = 2;

struct GlobalOpts {
  uint64_t budget = kNoBudget;
  int workers = 1;
  bool deterministic = false;
  bool json = false;
  std::string cache = "./parfilter-cache.jsonl";
  std::string out;
};

SearchOptions search_options(const GlobalOpts& g) {
  SearchOptions o;
  o.budget = g.budget;
  o.workers = g.workers;
  o.deterministic = g.deterministic;
  return o;
}

void emit(const GlobalOpts& g, const Json& cert, const std::string& human) {
  if (g.json)
    std::cout << cert.dump(2) << "\n";
  else
    std::cout << human;
  if (!g.out.empty()) write_file(g.out, cert.dump(2) + "\n");
}

std::string coloring_line(const Coloring& c) {
  std::string s;
  for (size_t i = 0; i < c.color.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(static_cast<int>(c.color[i]));
  }
  return s;
}

std::string par_human(const ParCertificate& cert, const std::string& desc) {
  std::string s = "verdict=";
  s += cert.verdict == Verdict::refuted      ? "refuted"
       : cert.verdict == Verdict::established ? "established"
                                               : "budget";
  s += " source=" + desc + " k=" + std::to_string(cert.k) +
       " n=" + std::to_string(cert.bound.n()) + "\n";
  if (cert.refutation) s += "coloring: " + coloring_line(*cert.refutation) + "\n";
  s += "nodes=" + std::to_string(cert.nodes) + "\n";
  return s;
}

int cmd_threshold(const GlobalOpts& g, const std::string& src_text, int k, int nmax) {
  GeneratorSource src = GeneratorSource::parse(src_text);
  std::string desc = src.descriptor();
  if (!g.cache.empty()) {
    auto hit = cache_lookup(g.cache, desc, k);
    if (hit) {
      Json j;
      j["type"] = "threshold";
      j["source"] = desc;
      j["k"] = k;
      j["resolved"] = true;
      j["threshold"] = hit->threshold;
      j["cached"] = true;
      emit(g, j, "threshold=" + std::to_string(hit->threshold) + " (cached)\n");
      return kExitOk;
    }
  }
  ThresholdResult res = min_threshold(src, k, Bound(nmax), search_options(g));
  Json j = threshold_json(src, k, nmax, res);
  if (!res.resolved) {
    std::string human = "unresolved within nmax=" + std::to_string(nmax) +
                        " budget_spent=" + std::to_string(res.budget_spent) +
                        " largest_refuted=" + std::to_string(res.largest_refuted) + "\n";
    emit(g, j, human);
    return kExitBudget;
  }
  std::string human = "threshold=" + std::to_string(res.threshold) + "\n";
  if (res.refutation)
    human += "refutation at n=" + std::to_string(res.threshold - 1) + ": " +
             coloring_line(*res.refutation->refutation) + "\n";
  human += "nodes=" + std::to_string(res.budget_spent) + "\n";
  emit(g, j, human);
  if (!g.cache.empty()) {
    CacheEntry e;
    e.source = desc;
    e.k = k;
    e.threshold = res.threshold;
    e.established_digest = claim_digest(desc, k, res.threshold,
                                        generate(src, Bound(res.threshold)));
    if (res.refutation)
      e.refuted_digest = claim_digest(desc, k, res.threshold - 1,
                                      generate(src, Bound(res.threshold - 1)));
    e.version = kVersion;
    e.nodes = res.budget_spent;
    cache_append(g.cache, e);
  }
  return kExitOk;
}

int cmd_check(const GlobalOpts& g, const std::string& src_text, int k, int n,
              bool refute_mode) {
  GeneratorSource src = GeneratorSource::parse(src_text);
  Antichain family = generate(src, Bound(n));
  ParCertificate cert = is_par_member(family, k, search_options(g));
  Json j = par_certificate_json(src.descriptor(), family, cert);
  std::string human;
  if (refute_mode) {
    if (cert.verdict == Verdict::refuted)
      human = "refuting coloring: " + coloring_line(*cert.refutation) + "\n";
    else if (cert.verdict == Verdict::established)
      human = "no refuting coloring exists (established)\n";
    else
      human = "budget exhausted after " + std::to_string(cert.nodes) + " nodes\n";
  } else {
    human = par_human(cert, src.descriptor());
  }
  emit(g, j, human);
  return cert.verdict == Verdict::budget ? kExitBudget : kExitOk;
}

int cmd_columns(const GlobalOpts& g, const std::string& what, const std::string& variant_s) {
  LinearSystem sys = what.size() && what.front() == '['
                         ? LinearSystem::parse_inline(what)
                         : LinearSystem::parse(read_file(what));
  ColumnsVariant variant =
      variant_s == "classical" ? ColumnsVariant::classical : ColumnsVariant::paper;
  auto cp = columns_condition(sys, variant);
  Json j = columns_json(sys, variant, cp);
  std::string human;
  if (cp) {
    human = "satisfied variant=" + variant_s + "\n";
    for (size_t i = 0; i < cp->parts.size(); ++i) {
      human += "P_" + std::to_string(i + 1) + "={";
      for (size_t t = 0; t < cp->parts[i].size(); ++t) {
        if (t) human += ",";
        human += std::to_string(cp->parts[i][t] + 1);
      }
      human += "}";
      human += i + 1 < cp->parts.size() ? " " : "\n";
    }
  } else {
    human = "unsatisfied variant=" + variant_s + "\n";
  }
  emit(g, j, human);
  return kExitOk;
}

int cmd_minimal(const GlobalOpts& g, const std::string& src_text, int k, int n,
                int max_size) {
  GeneratorSource src = GeneratorSource::parse(src_text);
  Antichain family = generate(src, Bound(n));
  Antichain minimal = minimal_par_members(family, k, max_size, g.budget);
  Json j;
  j["type"] = "minimal";
  j["source"] = src.descriptor();
  j["k"] = k;
  j["n"] = n;
  j["max_size"] = max_size;
  Json arr = Json::array();
  for (const ElemSet& m : minimal.generators()) {
    Json s = Json::array();
    m.for_each([&](int e) { s.push_back(e); });
    arr.push_back(s);
  }
  j["members"] = arr;
  emit(g, j, minimal.serialize());
  return kExitOk;
}

int cmd_extract(const GlobalOpts& g, const std::string& coloring_file,
                const std::string& src_text, const std::vector<int>& lengths) {
  PairColoring pc = PairColoring::parse(read_file(coloring_file));
  if (lengths.empty()) throw InputError("extract needs at least one length");
  std::vector<GeneratorSource> sources;
  for (int m : lengths) {
    if (src_text == "ap") {
      sources.push_back(GeneratorSource::ap(m));
    } else if (src_text == "folkman" || src_text == "folkman:distinct") {
      sources.push_back(GeneratorSource::folkman(m, src_text != "folkman"));
    } else {
      sources.push_back(GeneratorSource::parse(src_text));
    }
  }
  ExtractResult res = bh_extract(pc, sources, g.budget);
  if (res.status == ExtractStatus::found) {
    std::vector<std::string> descs;
    for (const auto& s : sources) descs.push_back(s.descriptor());
    Json j = extraction_json(pc, descs, *res.extraction);
    std::string human = "extraction found color=" +
                        std::to_string(res.extraction->color) + " blocks:";
    for (const ElemSet& b : res.extraction->blocks.blocks) {
      human += " {";
      bool first = true;
      b.for_each([&](int e) {
        if (!first) human += ",";
        human += std::to_string(e);
        first = false;
      });
      human += "}";
    }
    human += "\n";
    emit(g, j, human);
    return kExitOk;
  }
  Json j;
  j["type"] = "extraction";
  j["found"] = false;
  j["exhausted"] = res.status == ExtractStatus::absent;
  j["nodes"] = res.nodes;
  if (res.status == ExtractStatus::absent) {
    emit(g, j, "no extraction at this bound (search space exhausted)\n");
    return kExitOk;
  }
  emit(g, j, "budget exhausted after " + std::to_string(res.nodes) + " nodes\n");
  return kExitBudget;
}

int cmd_fw(const GlobalOpts& g, int t) {
  BlockSequence blocks = fw_blocks(t);
  bool verified = fw_verify(blocks);
  Json j = fw_json(t, blocks, verified);
  std::string human;
  for (const ElemSet& b : blocks.blocks) {
    human += "{";
    bool first = true;
    b.for_each([&](int e) {
      if (!first) human += ",";
      human += std::to_string(e);
      first = false;
    });
    human += "} ";
  }
  human += verified ? "verified\n" : "NOT verified\n";
  emit(g, j, human);
  return kExitOk;
}

int cmd_export_cnf(const GlobalOpts& g, const std::string& src_text, int k, int n,
                   const std::string& out_path) {
  GeneratorSource src = GeneratorSource::parse(src_text);
  Antichain family = generate(src, Bound(n));
  std::ostringstream os;
  export_cnf(os, family, k, src.descriptor());
  write_file(out_path, os.str());
  Json j;
  j["type"] = "cnf";
  j["source"] = src.descriptor();
  j["k"] = k;
  j["n"] = n;
  j["vars"] = n * k;
  j["file"] = out_path;
  emit(g, j, "wrote " + out_path + " vars=" + std::to_string(n * k) + "\n");
  return kExitOk;
}

int cmd_verify(const GlobalOpts& g, const std::string& cert_file) {
  Json cert = Json::parse(read_file(cert_file));
  VerifyOutcome outcome = verify_certificate(cert, g.budget, g.workers);
  Json j;
  j["type"] = "verify";
  j["accepted"] = outcome.accepted;
  j["detail"] = outcome.detail;
  std::string human = (outcome.accepted ? "ACCEPTED: " : "REJECTED: ") +
                      outcome.detail + "\n";
  emit(g, j, human);
  if (outcome.accepted) return kExitOk;
  return outcome.budget_hit ? kExitBudget : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partition-regularity engine: witness families, certified Par "
               "search, Rado-type thresholds, block extraction"};
  app.set_version_flag("--version", parfilter::kVersion);
  GlobalOpts g;
  app.add_option("--budget", g.budget, "node-count ceiling for searches");
  app.add_option("--workers", g.workers, "worker threads for the search tree")
      ->check(CLI::Range(1, 256));
  app.add_flag("--deterministic", g.deterministic,
               "reproducible certificates and node counts across worker counts");
  app.add_flag("--json", g.json, "structured output");
  app.add_option("--cache", g.cache,
                 "threshold cache path (empty string disables)");
  app.add_option("--out", g.out, "also write the certificate JSON to this file");
  app.require_subcommand(1);
  // Global flags may follow subcommand arguments (inherited by subcommands).
  app.fallthrough();

  std::string src_text, file_a, file_b, variant = "paper";
  int k = 2, n = 1, nmax = 64, max_size = 1, t = 1;
  std::vector<int> lengths;

  auto* c_threshold = app.add_subcommand("threshold", "minimal N with [1..N] forced");
  c_threshold->add_option("src", src_text)->required();
  c_threshold->add_option("k", k)->required();
  c_threshold->add_option("--nmax", nmax, "scan ceiling")->check(CLI::Range(1, 4096));

  auto* c_check = app.add_subcommand("check", "decide Par membership at a bound");
  c_check->add_option("src", src_text)->required();
  c_check->add_option("k", k)->required();
  c_check->add_option("n", n)->required();

  auto* c_refute = app.add_subcommand("refute", "search a refuting coloring at a bound");
  c_refute->add_option("src", src_text)->required();
  c_refute->add_option("k", k)->required();
  c_refute->add_option("n", n)->required();

  auto* c_columns = app.add_subcommand("columns", "decide the columns condition");
  c_columns->add_option("matrix", file_a, "file, or inline like '[1 1 -1]'")->required();
  c_columns->add_option("--variant", variant)->check(CLI::IsMember({"paper", "classical"}));

  auto* c_minimal = app.add_subcommand("minimal", "minimal forced sets up to a size");
  c_minimal->add_option("src", src_text)->required();
  c_minimal->add_option("k", k)->required();
  c_minimal->add_option("n", n)->required();
  c_minimal->add_option("max-size", max_size)->required();

  auto* c_extract = app.add_subcommand("extract", "monochromatic block extraction");
  c_extract->add_option("coloring-file", file_a)->required();
  c_extract->add_option("src", src_text)->required();
  c_extract->add_option("lengths", lengths)->required();

  auto* c_fw = app.add_subcommand("fw", "progression-free block construction");
  c_fw->add_option("t", t)->required();

  auto* c_cnf = app.add_subcommand("export-cnf", "refutation existence as DIMACS CNF");
  c_cnf->add_option("src", src_text)->required();
  c_cnf->add_option("k", k)->required();
  c_cnf->add_option("n", n)->required();
  c_cnf->add_option("out", file_b)->required();

  auto* c_verify = app.add_subcommand("verify", "re-check a certificate file");
  c_verify->add_option("certificate", file_a)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand(c_threshold)) return cmd_threshold(g, src_text, k, nmax);
    if (app.got_subcommand(c_check)) return cmd_check(g, src_text, k, n, false);
    if (app.got_subcommand(c_refute)) return cmd_check(g, src_text, k, n, true);
    if (app.got_subcommand(c_columns)) return cmd_columns(g, file_a, variant);
    if (app.got_subcommand(c_minimal)) return cmd_minimal(g, src_text, k, n, max_size);
    if (app.got_subcommand(c_extract)) return cmd_extract(g, file_a, src_text, lengths);
    if (app.got_subcommand(c_fw)) return cmd_fw(g, t);
    if (app.got_subcommand(c_cnf)) return cmd_export_cnf(g, src_text, k, n, file_b);
    if (app.got_subcommand(c_verify)) return cmd_verify(g, file_a);
  } catch (const BudgetExhaustedError& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
