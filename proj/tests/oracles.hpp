// Test-only oracles, written independently of the library's search and
// generation paths: plain loops over element vectors, no bitsets, no pruning.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Set = std::vector<int>;  // ascending elements

inline bool subset(const Set& a, const Set& b) {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) == b.end()) return false;
  return true;
}

inline std::vector<Set> aps(int n, int l) {
  std::vector<Set> out;
  for (int d = 1; (l - 1) * d <= n - 1; ++d)
    for (int a = 1; a + (l - 1) * d <= n; ++a) {
      Set s;
      for (int j = 0; j < l; ++j) s.push_back(a + j * d);
      out.push_back(s);
    }
  return out;
}

inline std::vector<Set> schur_sets(int n, bool distinct) {
  std::vector<Set> out;
  for (int x = 1; x <= n; ++x)
    for (int y = x + (distinct ? 1 : 0); x + y <= n; ++y) {
      std::set<int> s{x, y, x + y};
      out.emplace_back(s.begin(), s.end());
    }
  return out;
}

// Subset-minimal elements of a list of sets, by pairwise comparison.
inline std::vector<Set> minimal_sets(std::vector<Set> sets) {
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  std::vector<Set> out;
  for (const Set& s : sets) {
    bool has_smaller = false;
    for (const Set& t : sets)
      if (t != s && subset(t, s)) has_smaller = true;
    if (!has_smaller) out.push_back(s);
  }
  return out;
}

// True when some generator lies inside one color class of the coloring
// (colors indexed by element value; 0 = uncolored / outside domain).
inline bool has_mono(const std::vector<int>& color_of, const std::vector<Set>& gens) {
  for (const Set& g : gens) {
    int q = color_of[static_cast<size_t>(g.front())];
    if (q == 0) continue;
    bool mono = true;
    for (int e : g)
      if (color_of[static_cast<size_t>(e)] != q) mono = false;
    if (mono) return true;
  }
  return false;
}

struct ScanResult {
  bool refutation_exists = false;
  std::vector<int> first;  // lexicographically least refutation, per element
  uint64_t refutation_count = 0;
};

// Full odometer over the k^|domain| colorings of the domain, ascending
// lexicographically (element-major).
inline ScanResult refutation_scan(const std::vector<int>& domain, int k,
                                  const std::vector<Set>& gens, int bound_n) {
  ScanResult res;
  size_t m = domain.size();
  std::vector<int> c(m, 1);
  std::vector<int> color_of(static_cast<size_t>(bound_n) + 1, 0);
  for (;;) {
    for (size_t i = 0; i < m; ++i) color_of[static_cast<size_t>(domain[i])] = c[i];
    bool mono = has_mono(color_of, gens);
    if (!mono) {
      ++res.refutation_count;
      if (!res.refutation_exists) {
        res.refutation_exists = true;
        res.first = c;
      }
    }
    size_t i = m;
    while (i > 0 && c[i - 1] == k) c[--i] = 1;
    if (i == 0) break;
    ++c[i - 1];
    for (size_t j = 0; j < m; ++j) color_of[static_cast<size_t>(domain[j])] = 0;
  }
  return res;
}

// Every k-coloring of the domain leaves some generator monochromatic.
inline bool par_member(const std::vector<int>& domain, int k,
                       const std::vector<Set>& gens, int bound_n) {
  return !refutation_scan(domain, k, gens, bound_n).refutation_exists;
}

// Minimal DPLL for the CNF bridge tests; decides the parsed file on its own.
struct Dpll {
  int vars = 0;
  std::vector<std::vector<int>> clauses;

  std::optional<std::vector<int>> solve() {
    std::vector<int> assign(static_cast<size_t>(vars) + 1, 0);  // 0 free, +-1
    if (!dfs(assign)) return std::nullopt;
    std::vector<int> lits;
    for (int v = 1; v <= vars; ++v)
      lits.push_back(assign[static_cast<size_t>(v)] >= 0 ? v : -v);
    return lits;
  }

 private:
  bool dfs(std::vector<int>& assign) {
    // Unit propagation.
    for (;;) {
      bool changed = false;
      for (const auto& cl : clauses) {
        int unassigned = 0, last = 0;
        bool sat = false;
        for (int lit : cl) {
          int v = assign[static_cast<size_t>(std::abs(lit))];
          if (v == 0) {
            ++unassigned;
            last = lit;
          } else if ((v > 0) == (lit > 0)) {
            sat = true;
            break;
          }
        }
        if (sat) continue;
        if (unassigned == 0) return false;
        if (unassigned == 1) {
          assign[static_cast<size_t>(std::abs(last))] = last > 0 ? 1 : -1;
          changed = true;
        }
      }
      if (!changed) break;
    }
    int branch = 0;
    for (int v = 1; v <= vars && !branch; ++v)
      if (assign[static_cast<size_t>(v)] == 0) branch = v;
    if (!branch) return true;
    for (int sign : {1, -1}) {
      std::vector<int> saved = assign;
      assign[static_cast<size_t>(branch)] = sign;
      if (dfs(assign)) return true;
      assign = saved;
    }
    return false;
  }
};

// Random nonempty antichain input material: sets of size 1..4 within [1..n].
inline std::vector<Set> random_sets(std::mt19937_64& rng, int n, int count) {
  std::uniform_int_distribution<int> size_dist(1, std::min(4, n));
  std::uniform_int_distribution<int> elem_dist(1, n);
  std::vector<Set> out;
  for (int i = 0; i < count; ++i) {
    std::set<int> s;
    int size = size_dist(rng);
    while (static_cast<int>(s.size()) < size) s.insert(elem_dist(rng));
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

}  // namespace oracle
