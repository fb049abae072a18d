#include "parfilter/witnesses.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>

namespace parfilter {

namespace {

long long checked_add_ll(long long a, long long b) {
  long long r;
  if (__builtin_add_overflow(a, b, &r))
    throw OverflowError("exact arithmetic overflow (add)");
  return r;
}

long long checked_mul_ll(long long a, long long b) {
  long long r;
  if (__builtin_mul_overflow(a, b, &r))
    throw OverflowError("exact arithmetic overflow (mul)");
  return r;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// The source text may carry a typographic minus; accept it as '-'.
std::string normalize_minus(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x88 &&
        static_cast<unsigned char>(text[i + 2]) == 0x92) {
      out.push_back('-');
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

}  // namespace

LinearSystem LinearSystem::parse(std::string_view text) {
  std::istringstream is(normalize_minus(text));
  std::string line;
  if (!std::getline(is, line))
    throw InputError("linear system: empty input");
  LinearSystem sys;
  {
    std::istringstream hs(line);
    if (!(hs >> sys.rows >> sys.cols))
      throw InputError("linear system: bad header at line 1: '" + line + "'");
  }
  if (sys.rows < 1 || sys.cols < 1)
    throw InputError("linear system: rows and cols must be positive");
  int lineno = 1;
  for (int i = 0; i < sys.rows; ++i) {
    if (!std::getline(is, line))
      throw InputError("linear system: missing row at line " +
                       std::to_string(lineno + 1));
    ++lineno;
    std::istringstream ls(line);
    std::vector<long long> row;
    long long v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof())
      throw InputError("linear system: malformed integer at line " +
                       std::to_string(lineno));
    if (static_cast<int>(row.size()) != sys.cols)
      throw InputError("linear system: expected " + std::to_string(sys.cols) +
                       " entries at line " + std::to_string(lineno) + ", got " +
                       std::to_string(row.size()));
    sys.a.push_back(std::move(row));
  }
  sys.validate();
  return sys;
}

LinearSystem LinearSystem::parse_inline(std::string_view text) {
  std::string t = normalize_minus(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw InputError("inline linear system must be bracketed: " + t);
  std::string body = t.substr(1, t.size() - 2);
  LinearSystem sys;
  std::istringstream rows(body);
  std::string rowtext;
  while (std::getline(rows, rowtext, ';')) {
    std::istringstream ls(rowtext);
    std::vector<long long> row;
    long long v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw InputError("inline linear system: malformed integer");
    if (row.empty()) throw InputError("inline linear system: empty row");
    sys.a.push_back(std::move(row));
  }
  if (sys.a.empty()) throw InputError("inline linear system: no rows");
  sys.rows = static_cast<int>(sys.a.size());
  sys.cols = static_cast<int>(sys.a.front().size());
  sys.validate();
  return sys;
}

std::string LinearSystem::inline_form() const {
  std::ostringstream os;
  os << '[';
  for (int i = 0; i < rows; ++i) {
    if (i) os << "; ";
    for (int j = 0; j < cols; ++j) {
      if (j) os << ' ';
      os << a[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  os << ']';
  return os.str();
}

std::vector<long long> LinearSystem::column(int j) const {
  std::vector<long long> v(static_cast<size_t>(rows));
  for (int i = 0; i < rows; ++i)
    v[static_cast<size_t>(i)] = a[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return v;
}

bool LinearSystem::has_zero_column() const {
  for (int j = 0; j < cols; ++j) {
    bool all_zero = true;
    for (int i = 0; i < rows; ++i)
      if (a[static_cast<size_t>(i)][static_cast<size_t>(j)] != 0) all_zero = false;
    if (all_zero) return true;
  }
  return false;
}

void LinearSystem::validate() const {
  if (rows < 1 || cols < 1)
    throw InputError("linear system: rows and cols must be positive");
  if (static_cast<int>(a.size()) != rows)
    throw InputError("linear system: row count mismatch");
  for (const auto& row : a)
    if (static_cast<int>(row.size()) != cols)
      throw InputError("linear system: ragged rows");
}

GeneratorSource GeneratorSource::ap(int l) {
  if (l < 2 || l > Bound::kMax)
    throw InputError("ap length must be in [2.." + std::to_string(Bound::kMax) + "]");
  GeneratorSource s;
  s.kind = Kind::ap;
  s.length = l;
  return s;
}

GeneratorSource GeneratorSource::schur(bool distinct) {
  GeneratorSource s;
  s.kind = Kind::schur;
  s.distinct = distinct;
  return s;
}

GeneratorSource GeneratorSource::folkman(int m, bool distinct) {
  if (m < 1 || m > Bound::kMax)
    throw InputError("folkman size must be in [1.." + std::to_string(Bound::kMax) + "]");
  GeneratorSource s;
  s.kind = Kind::folkman;
  s.length = m;
  s.distinct = distinct;
  return s;
}

GeneratorSource GeneratorSource::linear(LinearSystem sys, bool distinct) {
  sys.validate();
  GeneratorSource s;
  s.kind = Kind::linear;
  s.system = std::move(sys);
  s.distinct = distinct;
  return s;
}

GeneratorSource GeneratorSource::custom_family(Antichain a) {
  GeneratorSource s;
  s.kind = Kind::custom;
  s.custom = std::move(a);
  return s;
}

GeneratorSource GeneratorSource::parse(const std::string& raw) {
  std::string text = normalize_minus(raw);
  auto take_distinct = [](std::string& s) {
    const std::string suffix = ":distinct";
    if (s.size() >= suffix.size() &&
        s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.erase(s.size() - suffix.size());
      return true;
    }
    return false;
  };
  if (text.rfind("ap:", 0) == 0) {
    try {
      return ap(std::stoi(text.substr(3)));
    } catch (const std::logic_error&) {
      throw InputError("bad ap length in source '" + text + "'");
    }
  }
  if (text == "schur" || text == "schur:distinct")
    return schur(text != "schur");
  if (text.rfind("folkman:", 0) == 0) {
    std::string rest = text.substr(8);
    bool d = take_distinct(rest);
    try {
      return folkman(std::stoi(rest), d);
    } catch (const std::logic_error&) {
      throw InputError("bad folkman size in source '" + text + "'");
    }
  }
  if (text.rfind("linear:", 0) == 0) {
    std::string rest = text.substr(7);
    bool d = take_distinct(rest);
    if (!rest.empty() && rest.front() == '[')
      return linear(LinearSystem::parse_inline(rest), d);
    return linear(LinearSystem::parse(read_text_file(rest)), d);
  }
  if (text.rfind("custom:", 0) == 0)
    return custom_family(Antichain::parse(read_text_file(text.substr(7))));
  throw InputError("unknown generator source '" + text + "'");
}

std::string GeneratorSource::descriptor() const {
  switch (kind) {
    case Kind::ap:
      return "ap:" + std::to_string(length);
    case Kind::schur:
      return distinct ? "schur:distinct" : "schur";
    case Kind::folkman:
      return "folkman:" + std::to_string(length) + (distinct ? ":distinct" : "");
    case Kind::linear:
      return "linear:" + system->inline_form() + (distinct ? ":distinct" : "");
    case Kind::custom:
      return "custom:" + custom->content_digest();
  }
  throw Error("unreachable");
}

namespace {

void enumerate_ap(int l, Bound bound, const std::function<void(const ElemSet&)>& sink) {
  int n = bound.n();
  for (int d = 1; (l - 1) * d <= n - 1; ++d) {
    for (int a = 1; a + (l - 1) * d <= n; ++a) {
      ElemSet s(bound);
      for (int j = 0; j < l; ++j) s.insert(a + j * d);
      sink(s);
    }
  }
}

void enumerate_schur(bool distinct, Bound bound,
                     const std::function<void(const ElemSet&)>& sink) {
  int n = bound.n();
  for (int x = 1; x <= n; ++x) {
    for (int y = x + (distinct ? 1 : 0); x + y <= n; ++y) {
      ElemSet s(bound, {x, y, x + y});
      sink(s);
    }
  }
}

// FS(B) = all nonempty subset sums of B, as a set within the bound.
ElemSet subset_sums(const std::vector<int>& b, Bound bound) {
  ElemSet fs(bound);
  for (int v : b) {
    ElemSet shifted(bound);
    fs.for_each([&](int e) {
      if (e + v <= bound.n()) shifted.insert(e + v);
    });
    fs = fs.set_union(shifted);
    fs.insert(v);
  }
  return fs;
}

void enumerate_folkman(int m, bool distinct, Bound bound,
                       const std::function<void(const ElemSet&)>& sink) {
  int n = bound.n();
  std::vector<int> b;
  // B = {b_1 < ... < b_m}, sum(B) <= n, so FS(B) fits inside the bound.
  auto rec = [&](auto&& self, int next_min, int remaining, long long sum) -> void {
    if (remaining == 0) {
      ElemSet fs = subset_sums(b, bound);
      if (distinct) {
        long long expected = (m < 62) ? ((1LL << m) - 1) : -1;
        if (expected < 0 || fs.cardinality() != expected) return;
      }
      sink(fs);
      return;
    }
    for (int v = next_min;; ++v) {
      // Cheapest completion uses v, v+1, ..., v+remaining-1.
      long long tail = static_cast<long long>(remaining) * v +
                       static_cast<long long>(remaining) * (remaining - 1) / 2;
      if (sum + tail > n) break;
      b.push_back(v);
      self(self, v + 1, remaining - 1, sum + v);
      b.pop_back();
    }
  };
  rec(rec, 1, m, 0);
}

void enumerate_linear(const LinearSystem& sys, bool distinct, Bound bound,
                      const std::function<void(const ElemSet&)>& sink) {
  if (sys.has_zero_column())
    throw InputError(
        "linear witness generation requires every column to be nonzero "
        "(a free variable makes every value set a solution carrier)");
  int n = bound.n();
  int c = sys.cols, r = sys.rows;
  // Reachability window of each row over coordinates j..c-1.
  std::vector<std::vector<long long>> min_rem(static_cast<size_t>(r)),
      max_rem(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) {
    min_rem[static_cast<size_t>(i)].assign(static_cast<size_t>(c) + 1, 0);
    max_rem[static_cast<size_t>(i)].assign(static_cast<size_t>(c) + 1, 0);
    for (int j = c - 1; j >= 0; --j) {
      long long coef = sys.a[static_cast<size_t>(i)][static_cast<size_t>(j)];
      long long lo = coef > 0 ? coef : checked_mul_ll(coef, n);
      long long hi = coef > 0 ? checked_mul_ll(coef, n) : coef;
      if (coef == 0) lo = hi = 0;
      min_rem[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          checked_add_ll(min_rem[static_cast<size_t>(i)][static_cast<size_t>(j) + 1], lo);
      max_rem[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          checked_add_ll(max_rem[static_cast<size_t>(i)][static_cast<size_t>(j) + 1], hi);
    }
  }
  std::vector<int> x(static_cast<size_t>(c));
  std::vector<long long> sums(static_cast<size_t>(r), 0);
  auto rec = [&](auto&& self, int j) -> void {
    if (j == c) {
      ElemSet s(bound);
      for (int v : x) s.insert(v);
      sink(s);
      return;
    }
    for (int v = 1; v <= n; ++v) {
      if (distinct) {
        bool dup = false;
        for (int jj = 0; jj < j; ++jj)
          if (x[static_cast<size_t>(jj)] == v) dup = true;
        if (dup) continue;
      }
      bool feasible = true;
      std::vector<long long> next(static_cast<size_t>(r));
      for (int i = 0; i < r; ++i) {
        next[static_cast<size_t>(i)] = checked_add_ll(
            sums[static_cast<size_t>(i)],
            checked_mul_ll(sys.a[static_cast<size_t>(i)][static_cast<size_t>(j)], v));
        long long lo = min_rem[static_cast<size_t>(i)][static_cast<size_t>(j) + 1];
        long long hi = max_rem[static_cast<size_t>(i)][static_cast<size_t>(j) + 1];
        if (next[static_cast<size_t>(i)] + lo > 0 || next[static_cast<size_t>(i)] + hi < 0)
          feasible = false;
      }
      if (!feasible) continue;
      x[static_cast<size_t>(j)] = v;
      std::swap(sums, next);
      self(self, j + 1);
      std::swap(sums, next);
    }
  };
  rec(rec, 0);
}

void enumerate_source(const GeneratorSource& src, Bound bound,
                      const std::function<void(const ElemSet&)>& sink) {
  switch (src.kind) {
    case GeneratorSource::Kind::ap:
      enumerate_ap(src.length, bound, sink);
      return;
    case GeneratorSource::Kind::schur:
      enumerate_schur(src.distinct, bound, sink);
      return;
    case GeneratorSource::Kind::folkman:
      enumerate_folkman(src.length, src.distinct, bound, sink);
      return;
    case GeneratorSource::Kind::linear:
      enumerate_linear(*src.system, src.distinct, bound, sink);
      return;
    case GeneratorSource::Kind::custom: {
      // At a larger bound the stored generators carry over unchanged; at a
      // smaller one only those that fit survive.
      for (const ElemSet& g : src.custom->generators()) {
        if (g.max() > bound.n()) continue;
        ElemSet moved(bound);
        g.for_each([&](int e) { moved.insert(e); });
        sink(moved);
      }
      return;
    }
  }
}

}  // namespace

Antichain generate(const GeneratorSource& src, Bound bound) {
  std::vector<ElemSet> raw;
  enumerate_source(src, bound, [&](const ElemSet& s) { raw.push_back(s); });
  if (raw.empty()) return Antichain::empty(bound);
  return Antichain::normalize(raw);
}

unsigned long long expected_generator_count(const GeneratorSource& src, Bound bound) {
  if (src.kind == GeneratorSource::Kind::ap) {
    unsigned long long total = 0;
    int n = bound.n(), l = src.length;
    for (int d = 1; (l - 1) * d <= n - 1; ++d)
      total += static_cast<unsigned long long>(n - (l - 1) * d);
    return total;
  }
  unsigned long long count = 0;
  enumerate_source(src, bound, [&](const ElemSet&) { ++count; });
  return count;
}

namespace {

// Solves sum_j coeffs[j] * column(idx[j]) = target exactly; absent when target
// is outside the span. Free variables are fixed to zero, so the witness is
// deterministic.
std::optional<std::vector<Rational>> solve_span(const LinearSystem& sys,
                                                const std::vector<int>& idx,
                                                const std::vector<Rational>& target) {
  int r = sys.rows;
  int m = static_cast<int>(idx.size());
  std::vector<std::vector<Rational>> aug(
      static_cast<size_t>(r), std::vector<Rational>(static_cast<size_t>(m) + 1));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < m; ++j)
      aug[static_cast<size_t>(i)][static_cast<size_t>(j)] = Rational(
          sys.a[static_cast<size_t>(i)][static_cast<size_t>(idx[static_cast<size_t>(j)])]);
    aug[static_cast<size_t>(i)][static_cast<size_t>(m)] = target[static_cast<size_t>(i)];
  }
  std::vector<int> pivot_col;
  int row = 0;
  for (int col = 0; col < m && row < r; ++col) {
    int p = -1;
    for (int i = row; i < r; ++i)
      if (!aug[static_cast<size_t>(i)][static_cast<size_t>(col)].is_zero()) {
        p = i;
        break;
      }
    if (p < 0) continue;
    std::swap(aug[static_cast<size_t>(p)], aug[static_cast<size_t>(row)]);
    Rational inv = Rational(1) / aug[static_cast<size_t>(row)][static_cast<size_t>(col)];
    for (int j = col; j <= m; ++j)
      aug[static_cast<size_t>(row)][static_cast<size_t>(j)] =
          aug[static_cast<size_t>(row)][static_cast<size_t>(j)] * inv;
    for (int i = 0; i < r; ++i) {
      if (i == row) continue;
      Rational f = aug[static_cast<size_t>(i)][static_cast<size_t>(col)];
      if (f.is_zero()) continue;
      for (int j = col; j <= m; ++j)
        aug[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            aug[static_cast<size_t>(i)][static_cast<size_t>(j)] -
            f * aug[static_cast<size_t>(row)][static_cast<size_t>(j)];
    }
    pivot_col.push_back(col);
    ++row;
  }
  for (int i = row; i < r; ++i)
    if (!aug[static_cast<size_t>(i)][static_cast<size_t>(m)].is_zero())
      return std::nullopt;  // inconsistent
  std::vector<Rational> coeffs(static_cast<size_t>(m), Rational(0));
  for (int i = 0; i < row; ++i)
    coeffs[static_cast<size_t>(pivot_col[static_cast<size_t>(i)])] =
        aug[static_cast<size_t>(i)][static_cast<size_t>(m)];
  return coeffs;
}

std::vector<Rational> column_rational(const LinearSystem& sys, int j) {
  std::vector<Rational> v(static_cast<size_t>(sys.rows));
  for (int i = 0; i < sys.rows; ++i)
    v[static_cast<size_t>(i)] =
        Rational(sys.a[static_cast<size_t>(i)][static_cast<size_t>(j)]);
  return v;
}

std::vector<Rational> columns_sum(const LinearSystem& sys, const std::vector<int>& js) {
  std::vector<Rational> v(static_cast<size_t>(sys.rows), Rational(0));
  for (int j : js)
    for (int i = 0; i < sys.rows; ++i)
      v[static_cast<size_t>(i)] =
          v[static_cast<size_t>(i)] +
          Rational(sys.a[static_cast<size_t>(i)][static_cast<size_t>(j)]);
  return v;
}

// Greedy closure from P_1. Completeness: any column (paper) or column group
// (classical) usable later stays usable after earlier absorptions, so taking
// the first valid step never loses a solution.
std::optional<ColumnsPartition> close_partition(const LinearSystem& sys,
                                                std::vector<int> p1,
                                                ColumnsVariant variant) {
  int c = sys.cols;
  ColumnsPartition cp;
  cp.variant = variant;
  cp.parts.push_back(p1);
  std::vector<int> processed = p1;
  std::vector<bool> used(static_cast<size_t>(c), false);
  for (int j : p1) used[static_cast<size_t>(j)] = true;
  while (static_cast<int>(processed.size()) < c) {
    std::vector<int> remaining;
    for (int j = 0; j < c; ++j)
      if (!used[static_cast<size_t>(j)]) remaining.push_back(j);
    if (variant == ColumnsVariant::paper) {
      std::vector<int> part;
      std::vector<std::vector<Rational>> wits;
      for (int j : remaining) {
        auto w = solve_span(sys, processed, column_rational(sys, j));
        if (w) {
          part.push_back(j);
          wits.push_back(std::move(*w));
        }
      }
      if (part.empty()) return std::nullopt;
      cp.parts.push_back(part);
      cp.column_witnesses.push_back(std::move(wits));
      for (int j : part) used[static_cast<size_t>(j)] = true;
      processed.insert(processed.end(), part.begin(), part.end());
    } else {
      int rc = static_cast<int>(remaining.size());
      bool advanced = false;
      for (int size = 1; size <= rc && !advanced; ++size) {
        for (uint32_t mask = 1; mask < (1u << rc) && !advanced; ++mask) {
          if (std::popcount(mask) != size) continue;
          std::vector<int> part;
          for (int t = 0; t < rc; ++t)
            if (mask & (1u << t)) part.push_back(remaining[static_cast<size_t>(t)]);
          auto w = solve_span(sys, processed, columns_sum(sys, part));
          if (!w) continue;
          cp.parts.push_back(part);
          cp.part_witnesses.push_back(std::move(*w));
          for (int j : part) used[static_cast<size_t>(j)] = true;
          processed.insert(processed.end(), part.begin(), part.end());
          advanced = true;
        }
      }
      if (!advanced) return std::nullopt;
    }
  }
  return cp;
}

}  // namespace

std::optional<ColumnsPartition> columns_condition(const LinearSystem& sys,
                                                  ColumnsVariant variant) {
  sys.validate();
  if (sys.cols > 20)
    throw InputError("columns condition: exhaustive subset search capped at 20 columns");
  int c = sys.cols;
  for (uint32_t mask = 1; mask < (1u << c); ++mask) {
    std::vector<long long> sum(static_cast<size_t>(sys.rows), 0);
    std::vector<int> p1;
    for (int j = 0; j < c; ++j) {
      if (!(mask & (1u << j))) continue;
      p1.push_back(j);
      for (int i = 0; i < sys.rows; ++i)
        sum[static_cast<size_t>(i)] = checked_add_ll(
            sum[static_cast<size_t>(i)],
            sys.a[static_cast<size_t>(i)][static_cast<size_t>(j)]);
    }
    bool zero = std::all_of(sum.begin(), sum.end(), [](long long v) { return v == 0; });
    if (!zero) continue;
    auto cp = close_partition(sys, p1, variant);
    if (cp) return cp;
  }
  return std::nullopt;
}

bool verify_columns(const LinearSystem& sys, const ColumnsPartition& cp) {
  int c = sys.cols;
  std::vector<int> seen(static_cast<size_t>(c), 0);
  for (const auto& part : cp.parts) {
    if (part.empty()) return false;
    for (int j : part) {
      if (j < 0 || j >= c) return false;
      seen[static_cast<size_t>(j)]++;
    }
  }
  for (int j = 0; j < c; ++j)
    if (seen[static_cast<size_t>(j)] != 1) return false;
  if (cp.parts.empty()) return false;
  // P_1 sums to the zero vector.
  auto s = columns_sum(sys, cp.parts.front());
  for (const Rational& v : s)
    if (!v.is_zero()) return false;
  auto remultiply = [&](const std::vector<int>& earlier,
                        const std::vector<Rational>& coeffs,
                        const std::vector<Rational>& target) {
    if (coeffs.size() != earlier.size()) return false;
    std::vector<Rational> acc(static_cast<size_t>(sys.rows), Rational(0));
    for (size_t t = 0; t < earlier.size(); ++t)
      for (int i = 0; i < sys.rows; ++i)
        acc[static_cast<size_t>(i)] =
            acc[static_cast<size_t>(i)] +
            coeffs[t] * Rational(sys.a[static_cast<size_t>(i)]
                                      [static_cast<size_t>(earlier[t])]);
    return acc == target;
  };
  std::vector<int> earlier = cp.parts.front();
  for (size_t i = 1; i < cp.parts.size(); ++i) {
    const auto& part = cp.parts[i];
    if (cp.variant == ColumnsVariant::paper) {
      if (cp.column_witnesses.size() < i) return false;
      const auto& wits = cp.column_witnesses[i - 1];
      if (wits.size() != part.size()) return false;
      for (size_t j = 0; j < part.size(); ++j)
        if (!remultiply(earlier, wits[j], column_rational(sys, part[j])))
          return false;
    } else {
      if (cp.part_witnesses.size() < i) return false;
      if (!remultiply(earlier, cp.part_witnesses[i - 1], columns_sum(sys, part)))
        return false;
    }
    earlier.insert(earlier.end(), part.begin(), part.end());
  }
  if (cp.variant == ColumnsVariant::paper &&
      cp.column_witnesses.size() != cp.parts.size() - 1)
    return false;
  if (cp.variant == ColumnsVariant::classical &&
      cp.part_witnesses.size() != cp.parts.size() - 1)
    return false;
  return true;
}

}  // namespace parfilter
