#include "parfilter/search.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <mutex>
#include <thread>

namespace parfilter {

void Coloring::validate() const {
  if (k < 1 || k > 255) throw InputError("coloring: k must be in [1..255]");
  if (color.size() != static_cast<size_t>(bound.n()))
    throw InputError("coloring: expected " + std::to_string(bound.n()) +
                     " entries, got " + std::to_string(color.size()));
  for (uint8_t q : color)
    if (q < 1 || q > k) throw InputError("coloring: color out of range");
}

ElemSet Coloring::color_class(int q) const {
  ElemSet s(bound);
  for (int e = 1; e <= bound.n(); ++e)
    if (color[static_cast<size_t>(e - 1)] == q) s.insert(e);
  return s;
}

void SubsetColoring::validate() const {
  if (color.size() != static_cast<size_t>(domain.bound().n()))
    throw InputError("subset coloring: entry count differs from bound");
  if (k < 0 || k > 255) throw InputError("subset coloring: k out of range");
  if (k == 0 && !domain.empty())
    throw InputError("subset coloring: nonempty domain needs k >= 1");
  for (int e = 1; e <= domain.bound().n(); ++e) {
    uint8_t q = color[static_cast<size_t>(e - 1)];
    if (domain.contains(e)) {
      if (q < 1 || q > k)
        throw InputError("subset coloring: element " + std::to_string(e) +
                         " has color out of range");
    } else if (q != 0) {
      throw InputError("subset coloring: element " + std::to_string(e) +
                       " outside domain is colored");
    }
  }
}

ElemSet SubsetColoring::color_class(int q) const {
  ElemSet s(domain.bound());
  domain.for_each([&](int e) {
    if (color[static_cast<size_t>(e - 1)] == q) s.insert(e);
  });
  return s;
}

namespace {

std::optional<std::pair<ElemSet, int>> mono_witness_classes(
    const std::vector<ElemSet>& classes, const Antichain& family) {
  for (const ElemSet& g : family.generators())
    for (size_t q = 0; q < classes.size(); ++q)
      if (g.subset_of(classes[q]))
        return std::make_pair(g, static_cast<int>(q) + 1);
  return std::nullopt;
}

}  // namespace

std::optional<std::pair<ElemSet, int>> mono_witness(const Coloring& c,
                                                    const Antichain& family) {
  if (!(c.bound == family.bound()))
    throw BoundMismatchError("coloring bound differs from family bound");
  std::vector<ElemSet> classes;
  classes.reserve(static_cast<size_t>(c.k));
  for (int q = 1; q <= c.k; ++q) classes.push_back(c.color_class(q));
  return mono_witness_classes(classes, family);
}

std::optional<std::pair<ElemSet, int>> mono_witness(const SubsetColoring& c,
                                                    const Antichain& family) {
  if (!(c.domain.bound() == family.bound()))
    throw BoundMismatchError("coloring bound differs from family bound");
  std::vector<ElemSet> classes;
  classes.reserve(static_cast<size_t>(c.k));
  for (int q = 1; q <= c.k; ++q) classes.push_back(c.color_class(q));
  return mono_witness_classes(classes, family);
}

namespace {

// Search instance over an explicit domain: domain elements ascending become
// positions 0..m-1, and only generators fully inside the domain matter.
struct Problem {
  int m = 0;
  int k = 1;
  int words = 0;
  std::vector<int> elems;                 // position -> element
  std::vector<uint64_t> gen_words;        // flat position masks, stride words
  std::vector<std::vector<int>> gens_at;  // last position -> generator index
  size_t gen_count = 0;
};

Problem build_problem(const Antichain& family, const ElemSet& domain, int k) {
  Problem p;
  p.k = k;
  p.elems = domain.elements();
  p.m = static_cast<int>(p.elems.size());
  p.words = std::max(1, (p.m + 63) / 64);
  p.gens_at.resize(static_cast<size_t>(p.m));
  std::vector<int> pos_of(static_cast<size_t>(family.bound().n()) + 1, -1);
  for (int i = 0; i < p.m; ++i) pos_of[static_cast<size_t>(p.elems[static_cast<size_t>(i)])] = i;
  for (const ElemSet& g : family.generators()) {
    if (!g.subset_of(domain)) continue;
    std::vector<uint64_t> mask(static_cast<size_t>(p.words), 0);
    int last = -1;
    g.for_each([&](int e) {
      int pos = pos_of[static_cast<size_t>(e)];
      mask[static_cast<size_t>(pos) >> 6] |= uint64_t{1} << (pos & 63);
      last = std::max(last, pos);
    });
    size_t gi = p.gen_count++;
    p.gen_words.insert(p.gen_words.end(), mask.begin(), mask.end());
    p.gens_at[static_cast<size_t>(last)].push_back(static_cast<int>(gi));
  }
  return p;
}

enum class Outcome { established, refuted, budget, aborted };

struct Dfs {
  const Problem& p;
  uint64_t budget;
  const std::atomic<bool>* abort_flag = nullptr;

  std::vector<uint64_t> classes;  // (k+1) x words, color 0 unused
  std::vector<uint8_t> color;     // per position, 0 = unassigned
  uint64_t nodes = 0;

  explicit Dfs(const Problem& prob, uint64_t budget_limit)
      : p(prob),
        budget(budget_limit),
        classes(static_cast<size_t>(prob.k + 1) * static_cast<size_t>(prob.words), 0),
        color(static_cast<size_t>(prob.m), 0) {}

  bool completes_mono(int pos, int q) const {
    const uint64_t* cls = &classes[static_cast<size_t>(q) * static_cast<size_t>(p.words)];
    for (int gi : p.gens_at[static_cast<size_t>(pos)]) {
      const uint64_t* g = &p.gen_words[static_cast<size_t>(gi) * static_cast<size_t>(p.words)];
      bool inside = true;
      for (int w = 0; w < p.words; ++w)
        if (g[w] & ~cls[w]) {
          inside = false;
          break;
        }
      if (inside) return true;
    }
    return false;
  }

  // Element-ascending, color-ascending search; the color cap keeps classes in
  // first-use order, which contains the lexicographically least refutation.
  // On `refuted` the full assignment is left in `color`.
  Outcome run(int pos, int max_used) {
    if (pos == p.m) return Outcome::refuted;
    int cap = std::min(p.k, max_used + 1);
    for (int q = 1; q <= cap; ++q) {
      if (nodes == budget) return Outcome::budget;
      ++nodes;
      if (abort_flag && (nodes & 8191) == 0 &&
          abort_flag->load(std::memory_order_relaxed))
        return Outcome::aborted;
      uint64_t& word =
          classes[static_cast<size_t>(q) * static_cast<size_t>(p.words) +
                  (static_cast<size_t>(pos) >> 6)];
      uint64_t bit = uint64_t{1} << (pos & 63);
      word |= bit;
      if (!completes_mono(pos, q)) {
        color[static_cast<size_t>(pos)] = static_cast<uint8_t>(q);
        Outcome r = run(pos + 1, std::max(max_used, q));
        if (r != Outcome::established) return r;
        color[static_cast<size_t>(pos)] = 0;
      }
      word &= ~bit;
    }
    return Outcome::established;
  }
};

struct CoreResult {
  Verdict verdict = Verdict::budget;
  std::vector<uint8_t> position_colors;  // when refuted
  uint64_t nodes = 0;
};

CoreResult search_sequential(const Problem& p, uint64_t budget) {
  Dfs dfs(p, budget);
  Outcome out = dfs.run(0, 0);
  CoreResult r;
  r.nodes = dfs.nodes;
  switch (out) {
    case Outcome::refuted:
      r.verdict = Verdict::refuted;
      r.position_colors = dfs.color;
      break;
    case Outcome::established:
      r.verdict = Verdict::established;
      break;
    default:
      r.verdict = Verdict::budget;
      break;
  }
  return r;
}

struct Job {
  std::vector<uint8_t> prefix;  // colors of positions 0..depth-1
  int max_used = 0;
  uint64_t prefix_delta = 0;  // attempts since the previous emitted job
};

// Enumerates the surviving prefixes of the first `depth` positions in search
// order, with the same node accounting the sequential engine uses, so a
// job-wise merge reproduces sequential node counts exactly.
struct PrefixEnumerator {
  const Problem& p;
  int depth;
  std::vector<Job> jobs;
  uint64_t trailing_delta = 0;

  void enumerate() {
    Dfs dfs(p, kNoBudget);
    uint64_t last_mark = 0;
    rec(dfs, 0, 0, last_mark);
    trailing_delta = dfs.nodes - last_mark;
  }

  void rec(Dfs& dfs, int pos, int max_used, uint64_t& last_mark) {
    if (pos == depth) {
      Job j;
      j.prefix.assign(dfs.color.begin(), dfs.color.begin() + depth);
      j.max_used = max_used;
      j.prefix_delta = dfs.nodes - last_mark;
      last_mark = dfs.nodes;
      jobs.push_back(std::move(j));
      return;
    }
    int cap = std::min(p.k, max_used + 1);
    for (int q = 1; q <= cap; ++q) {
      ++dfs.nodes;
      uint64_t& word =
          dfs.classes[static_cast<size_t>(q) * static_cast<size_t>(p.words) +
                      (static_cast<size_t>(pos) >> 6)];
      uint64_t bit = uint64_t{1} << (pos & 63);
      word |= bit;
      if (!dfs.completes_mono(pos, q)) {
        dfs.color[static_cast<size_t>(pos)] = static_cast<uint8_t>(q);
        rec(dfs, pos + 1, std::max(max_used, q), last_mark);
        dfs.color[static_cast<size_t>(pos)] = 0;
      }
      word &= ~bit;
    }
  }
};

struct JobResult {
  Outcome outcome = Outcome::aborted;
  std::vector<uint8_t> colors;  // full assignment when refuted
  uint64_t nodes = 0;           // to completion, or to the refutation
};

JobResult run_job(const Problem& p, const Job& job, int depth, uint64_t budget,
                  const std::atomic<bool>* abort_flag) {
  Dfs dfs(p, budget);
  dfs.abort_flag = abort_flag;
  for (int pos = 0; pos < depth; ++pos) {
    int q = job.prefix[static_cast<size_t>(pos)];
    dfs.color[static_cast<size_t>(pos)] = static_cast<uint8_t>(q);
    dfs.classes[static_cast<size_t>(q) * static_cast<size_t>(p.words) +
                (static_cast<size_t>(pos) >> 6)] |= uint64_t{1} << (pos & 63);
  }
  JobResult r;
  r.outcome = dfs.run(depth, job.max_used);
  r.nodes = dfs.nodes;
  if (r.outcome == Outcome::refuted) r.colors = dfs.color;
  return r;
}

CoreResult search_parallel(const Problem& p, const SearchOptions& opts) {
  int depth = 0;
  uint64_t breadth = 1;
  while (depth < p.m - 1 && depth < 12 &&
         breadth < 4ull * static_cast<uint64_t>(opts.workers)) {
    breadth *= static_cast<uint64_t>(std::max(p.k, 2));
    ++depth;
  }
  if (depth == 0 || p.m <= depth || p.k == 1)
    return search_sequential(p, opts.budget);

  PrefixEnumerator pe{p, depth, {}, 0};
  pe.enumerate();
  const auto& jobs = pe.jobs;
  std::vector<JobResult> results(jobs.size());
  std::atomic<size_t> next{0};
  std::atomic<size_t> min_found{SIZE_MAX};
  std::atomic<bool> abort{false};
  bool racing = !opts.deterministic && opts.budget == kNoBudget;

  auto worker = [&]() {
    for (;;) {
      size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      if (j > min_found.load()) {
        results[j].outcome = Outcome::aborted;
        continue;
      }
      JobResult r = run_job(p, jobs[j], depth, opts.budget, racing ? &abort : nullptr);
      if (r.outcome == Outcome::refuted) {
        size_t prev = min_found.load();
        while (j < prev && !min_found.compare_exchange_weak(prev, j)) {
        }
        if (racing) abort.store(true, std::memory_order_relaxed);
      }
      results[j] = std::move(r);
    }
  };
  std::vector<std::thread> pool;
  int nthreads = std::max(1, opts.workers);
  pool.reserve(static_cast<size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  CoreResult out;
  if (racing) {
    size_t j = min_found.load();
    uint64_t total = 0;
    for (size_t i = 0; i < jobs.size(); ++i) total += jobs[i].prefix_delta;
    total += pe.trailing_delta;
    for (const JobResult& r : results)
      if (r.outcome != Outcome::aborted) total += r.nodes;
    if (j != SIZE_MAX) {
      out.verdict = Verdict::refuted;
      out.position_colors = results[j].colors;
      out.nodes = total;
      return out;
    }
    out.verdict = Verdict::established;
    out.nodes = total;
    return out;
  }

  // Sequential-equivalent merge: walk jobs in emission order, replaying the
  // node budget exactly as a single-threaded search would consume it.
  uint64_t cum = 0;
  auto overflows = [&](uint64_t delta) {
    return opts.budget != kNoBudget && (cum > opts.budget - delta);
  };
  for (size_t j = 0; j < jobs.size(); ++j) {
    if (overflows(jobs[j].prefix_delta)) {
      out.verdict = Verdict::budget;
      out.nodes = opts.budget;
      return out;
    }
    cum += jobs[j].prefix_delta;
    const JobResult& r = results[j];
    if (r.outcome == Outcome::refuted) {
      if (overflows(r.nodes)) {
        out.verdict = Verdict::budget;
        out.nodes = opts.budget;
        return out;
      }
      out.verdict = Verdict::refuted;
      out.position_colors = r.colors;
      out.nodes = cum + r.nodes;
      return out;
    }
    if (r.outcome == Outcome::budget || r.outcome == Outcome::aborted ||
        overflows(r.nodes)) {
      out.verdict = Verdict::budget;
      out.nodes = opts.budget;
      return out;
    }
    cum += r.nodes;
  }
  if (overflows(pe.trailing_delta)) {
    out.verdict = Verdict::budget;
    out.nodes = opts.budget;
    return out;
  }
  cum += pe.trailing_delta;
  out.verdict = Verdict::established;
  out.nodes = cum;
  return out;
}

CoreResult search_exhaustive(const Problem& p, uint64_t budget) {
  CoreResult out;
  std::vector<uint8_t> colors(static_cast<size_t>(p.m), 1);
  std::vector<uint64_t> classes(
      static_cast<size_t>(p.k + 1) * static_cast<size_t>(p.words), 0);
  for (;;) {
    if (out.nodes == budget) {
      out.verdict = Verdict::budget;
      return out;
    }
    ++out.nodes;
    std::fill(classes.begin(), classes.end(), 0);
    for (int pos = 0; pos < p.m; ++pos)
      classes[static_cast<size_t>(colors[static_cast<size_t>(pos)]) *
                  static_cast<size_t>(p.words) +
              (static_cast<size_t>(pos) >> 6)] |= uint64_t{1} << (pos & 63);
    bool mono = false;
    for (size_t gi = 0; gi < p.gen_count && !mono; ++gi) {
      const uint64_t* g = &p.gen_words[gi * static_cast<size_t>(p.words)];
      for (int q = 1; q <= p.k && !mono; ++q) {
        const uint64_t* cls =
            &classes[static_cast<size_t>(q) * static_cast<size_t>(p.words)];
        bool inside = true;
        for (int w = 0; w < p.words; ++w)
          if (g[w] & ~cls[w]) {
            inside = false;
            break;
          }
        mono = inside;
      }
    }
    if (!mono) {
      out.verdict = Verdict::refuted;
      out.position_colors = colors;
      return out;
    }
    // Odometer step in element-major lexicographic order.
    int pos = p.m - 1;
    while (pos >= 0 && colors[static_cast<size_t>(pos)] == p.k) {
      colors[static_cast<size_t>(pos)] = 1;
      --pos;
    }
    if (pos < 0) {
      out.verdict = Verdict::established;
      return out;
    }
    ++colors[static_cast<size_t>(pos)];
  }
}

CoreResult search_core(const Antichain& family, const ElemSet& domain, int k,
                       const SearchOptions& opts) {
  Problem p = build_problem(family, domain, k);
  if (p.gen_count == 0) {
    // No generator fits inside the domain: the constant coloring refutes.
    CoreResult r;
    r.verdict = Verdict::refuted;
    r.position_colors.assign(static_cast<size_t>(p.m), 1);
    r.nodes = 0;
    return r;
  }
  if (opts.strategy == Strategy::exhaustive) return search_exhaustive(p, opts.budget);
  if (opts.workers > 1) return search_parallel(p, opts);
  return search_sequential(p, opts.budget);
}

}  // namespace

ParCertificate is_par_member(const Antichain& family, int k,
                             const SearchOptions& opts) {
  if (k < 1) throw InputError("k must be >= 1");
  ElemSet domain = ElemSet::full(family.bound());
  CoreResult core = search_core(family, domain, k, opts);
  ParCertificate cert(family.bound());
  cert.verdict = core.verdict;
  cert.nodes = core.nodes;
  cert.exhaustive = core.verdict == Verdict::established;
  cert.family_digest = family.content_digest();
  cert.k = k;
  cert.bound = family.bound();
  if (core.verdict == Verdict::refuted) {
    std::vector<uint8_t> full(static_cast<size_t>(family.bound().n()), 1);
    for (size_t pos = 0; pos < core.position_colors.size(); ++pos)
      full[pos] = core.position_colors[pos];
    cert.refutation = Coloring(family.bound(), k, std::move(full));
  }
  return cert;
}

DomainSearchResult par_search_on(const Antichain& family, const ElemSet& domain,
                                 int k, const SearchOptions& opts) {
  if (k < 1) throw InputError("k must be >= 1");
  if (!(domain.bound() == family.bound()))
    throw BoundMismatchError("domain bound differs from family bound");
  CoreResult core = search_core(family, domain, k, opts);
  DomainSearchResult r;
  r.verdict = core.verdict;
  r.nodes = core.nodes;
  if (core.verdict == Verdict::refuted) {
    std::vector<uint8_t> full(static_cast<size_t>(family.bound().n()), 0);
    std::vector<int> elems = domain.elements();
    for (size_t pos = 0; pos < elems.size(); ++pos)
      full[static_cast<size_t>(elems[pos] - 1)] = core.position_colors[pos];
    r.refutation = SubsetColoring(domain, k, std::move(full));
  }
  return r;
}

ThresholdResult min_threshold(const GeneratorSource& src, int k, Bound n_max,
                              const SearchOptions& opts) {
  if (k < 1) throw InputError("k must be >= 1");
  ThresholdResult res;
  uint64_t remaining = opts.budget;
  for (int n = 1; n <= n_max.n(); ++n) {
    Antichain family = generate(src, Bound(n));
    SearchOptions scan = opts;
    scan.budget = remaining;
    ParCertificate cert = is_par_member(family, k, scan);
    res.budget_spent += cert.nodes;
    if (remaining != kNoBudget)
      remaining = remaining > cert.nodes ? remaining - cert.nodes : 0;
    switch (cert.verdict) {
      case Verdict::refuted:
        res.largest_refuted = n;
        res.refutation = std::move(cert);
        break;
      case Verdict::established:
        res.resolved = true;
        res.threshold = n;
        res.established = std::move(cert);
        if (n == 1) res.refutation.reset();
        return res;
      case Verdict::budget:
        return res;  // unresolved; keeps the best refutation so far
    }
  }
  return res;
}

Antichain minimal_par_members(const Antichain& family, int k, int max_size,
                              uint64_t budget) {
  if (k < 1) throw InputError("k must be >= 1");
  if (max_size < 1) return Antichain::empty(family.bound());
  int n = family.bound().n();
  max_size = std::min(max_size, n);
  std::vector<ElemSet> found;
  uint64_t remaining = budget;
  SearchOptions oracle;
  oracle.strategy = Strategy::exhaustive;
  for (int size = 1; size <= max_size; ++size) {
    // Combinations of [1..n] in ascending lexicographic order.
    std::vector<int> comb(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) comb[static_cast<size_t>(i)] = i + 1;
    for (;;) {
      ElemSet a(family.bound(), comb);
      bool superset = false;
      for (const ElemSet& f : found)
        if (f.subset_of(a)) {
          superset = true;
          break;
        }
      if (!superset && family.member(a)) {
        oracle.budget = remaining;
        DomainSearchResult r = par_search_on(family, a, k, oracle);
        if (remaining != kNoBudget)
          remaining = remaining > r.nodes ? remaining - r.nodes : 0;
        if (r.verdict == Verdict::budget)
          throw BudgetExhaustedError("minimal member search exceeded its budget");
        if (r.verdict == Verdict::established) found.push_back(a);
      }
      // Next combination.
      int i = size - 1;
      while (i >= 0 && comb[static_cast<size_t>(i)] == n - (size - 1 - i)) --i;
      if (i < 0) break;
      ++comb[static_cast<size_t>(i)];
      for (int j = i + 1; j < size; ++j)
        comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
    }
  }
  if (found.empty()) return Antichain::empty(family.bound());
  return Antichain::normalize(found);
}

SubsetColoring split_refutation(const Antichain& family, const SubsetColoring& rb,
                                const SubsetColoring& rc) {
  if (!(rb.domain.bound() == family.bound()) ||
      !(rc.domain.bound() == family.bound()))
    throw BoundMismatchError("refutation bounds differ from family bound");
  if (rb.domain.intersects(rc.domain))
    throw NotDisjointError("refutation domains overlap");
  auto check = [&](const SubsetColoring& r, const char* which) {
    for (int q = 1; q <= r.k; ++q)
      if (family.member(r.color_class(q)))
        throw InvalidRefutationError(std::string(which) +
                                     " coloring has a monochromatic generator");
  };
  check(rb, "first");
  check(rc, "second");
  ElemSet dom = rb.domain.set_union(rc.domain);
  std::vector<uint8_t> colors(static_cast<size_t>(family.bound().n()), 0);
  rb.domain.for_each([&](int e) {
    colors[static_cast<size_t>(e - 1)] = rb.color[static_cast<size_t>(e - 1)];
  });
  rc.domain.for_each([&](int e) {
    colors[static_cast<size_t>(e - 1)] =
        static_cast<uint8_t>(rc.color[static_cast<size_t>(e - 1)] + rb.k);
  });
  SubsetColoring out(dom, rb.k + rc.k, std::move(colors));
  if (mono_witness(out, family))
    throw Error("internal: glued refutation has a monochromatic generator");
  return out;
}

}  // namespace parfilter
