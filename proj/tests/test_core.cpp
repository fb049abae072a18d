#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "parfilter/core.hpp"

using namespace parfilter;

namespace {

ElemSet make(Bound b, std::initializer_list<int> elems) { return ElemSet(b, elems); }

Antichain normalize_of(Bound b, std::initializer_list<std::initializer_list<int>> sets) {
  std::vector<ElemSet> v;
  for (auto s : sets) v.push_back(ElemSet(b, s));
  return Antichain::normalize(v);
}

}  // namespace

TEST_CASE("bound validation rejects out-of-range values") {
  CHECK_NOTHROW(Bound(1));
  CHECK_NOTHROW(Bound(4096));
  CHECK_THROWS_AS(Bound(0), BoundError);
  CHECK_THROWS_AS(Bound(-3), BoundError);
  CHECK_THROWS_AS(Bound(4097), BoundError);
}

TEST_CASE("elemset algebra is exact") {
  Bound b(100);
  ElemSet a = make(b, {1, 50, 64, 65, 100});
  CHECK(a.cardinality() == 5);
  CHECK(a.min() == 1);
  CHECK(a.max() == 100);
  CHECK(a.contains(64));
  CHECK(!a.contains(63));
  CHECK_THROWS_AS(a.contains(101), BoundError);
  CHECK_THROWS_AS((void)make(b, {0}), BoundError);

  ElemSet c = make(b, {50, 64});
  CHECK(c.subset_of(a));
  CHECK(!a.subset_of(c));
  CHECK(a.set_intersection(c) == c);
  CHECK(a.set_difference(c) == make(b, {1, 65, 100}));
  CHECK(c.set_union(make(b, {2})) == make(b, {2, 50, 64}));
  CHECK(a.elements() == std::vector<int>{1, 50, 64, 65, 100});

  Bound other(50);
  CHECK_THROWS_AS((void)a.subset_of(ElemSet(other)), BoundMismatchError);
}

TEST_CASE("set order: lexicographic on ascending sequences") {
  Bound b(10);
  CHECK(lex_less(make(b, {1, 2, 3}), make(b, {1, 3, 5})));
  CHECK(!lex_less(make(b, {1, 3, 5}), make(b, {1, 2, 3})));
  // A strict prefix precedes its extensions.
  CHECK(lex_less(make(b, {1, 2}), make(b, {1, 2, 3})));
  CHECK(!lex_less(make(b, {1, 2, 3}), make(b, {1, 2})));
  CHECK(!lex_less(make(b, {4}), make(b, {4})));
  // Canonical: min, then cardinality, then lex.
  CHECK(canonical_less(make(b, {1, 9}), make(b, {2})));
  CHECK(canonical_less(make(b, {2}), make(b, {2, 3})));
  CHECK(canonical_less(make(b, {2, 4}), make(b, {2, 5})));
}

TEST_CASE("normalize keeps exactly the subset-minimal generators") {
  Bound b(7);
  SUBCASE("superset absorbed") {
    Antichain a = normalize_of(b, {{1, 2}, {1, 2, 3}, {4}});
    REQUIRE(a.size() == 2);
    CHECK(a.generators()[0] == make(b, {1, 2}));
    CHECK(a.generators()[1] == make(b, {4}));
  }
  SUBCASE("singleton identity") {
    Antichain a = normalize_of(b, {{5}});
    REQUIRE(a.size() == 1);
    CHECK(a.generators()[0] == make(b, {5}));
  }
  SUBCASE("incomparable pair survives, common superset absorbed") {
    Antichain a = normalize_of(b, {{1, 3}, {2, 3}, {1, 2, 3}});
    REQUIRE(a.size() == 2);
    CHECK(a.generators()[0] == make(b, {1, 3}));
    CHECK(a.generators()[1] == make(b, {2, 3}));
  }
  SUBCASE("duplicates collapse") {
    Antichain a = normalize_of(b, {{2, 3}, {2, 3}});
    CHECK(a.size() == 1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS((void)Antichain::normalize({}), EmptyInputError);
    CHECK_THROWS_AS((void)normalize_of(b, {{1}, {}}), EmptyInputError);
    std::vector<ElemSet> mixed{ElemSet(Bound(7), {1}), ElemSet(Bound(8), {1})};
    CHECK_THROWS_AS((void)Antichain::normalize(mixed), BoundMismatchError);
  }
}

TEST_CASE("membership means some generator fits inside") {
  Bound b(7);
  Antichain fam = normalize_of(b, {{1, 2}, {4}});
  CHECK(fam.member(make(b, {1, 2, 7})));
  CHECK(!fam.member(make(b, {2, 3, 5})));
  Antichain eq = normalize_of(Bound(5), {{1, 3, 5}});
  CHECK(eq.member(ElemSet(Bound(5), {1, 3, 5})));
  CHECK_THROWS_AS((void)fam.member(ElemSet(Bound(9), {1, 2})), BoundMismatchError);
  CHECK(!Antichain::empty(b).member(ElemSet::full(b)));
}

TEST_CASE("restriction keeps the generators that fit") {
  Bound b(8);
  Antichain fam = normalize_of(b, {{1, 2}, {4, 6}});
  Antichain small = fam.restrict_to(Bound(5));
  REQUIRE(small.size() == 1);
  CHECK(small.bound().n() == 5);
  CHECK(small.generators()[0] == ElemSet(Bound(5), {1, 2}));

  Antichain pair = normalize_of(Bound(2), {{1, 2}});
  CHECK(pair.restrict_to(Bound(2)) == pair);
  CHECK_THROWS_AS((void)pair.restrict_to(Bound(3)), BoundMismatchError);
}

TEST_CASE("normalize properties on random inputs") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 3 + static_cast<int>(rng() % 10);
    Bound b(n);
    auto raw = oracle::random_sets(rng, n, 1 + static_cast<int>(rng() % 8));
    std::vector<ElemSet> sets;
    for (const auto& s : raw) sets.push_back(ElemSet(b, s));
    Antichain a = Antichain::normalize(sets);

    // Idempotence.
    CHECK(Antichain::normalize(a.generators()) == a);

    // Minimal elements agree with the pairwise oracle.
    auto expect = oracle::minimal_sets(raw);
    REQUIRE(a.size() == expect.size());
    for (const ElemSet& g : a.generators()) {
      CHECK(std::find(expect.begin(), expect.end(), g.elements()) != expect.end());
    }

    // Membership of the closure matches the raw presentation.
    for (int probe = 0; probe < 20; ++probe) {
      auto ps = oracle::random_sets(rng, n, 1).front();
      ElemSet p(b, ps);
      bool raw_member = false;
      for (const auto& s : raw)
        if (oracle::subset(s, ps)) raw_member = true;
      CHECK(a.member(p) == raw_member);
      // Monotonicity: grow the probe, membership cannot drop.
      ElemSet grown = p;
      grown.insert(1 + static_cast<int>(rng() % n));
      if (a.member(p)) CHECK(a.member(grown));
    }

    // Restrict-then-member equals member for small sets.
    int nn = 1 + static_cast<int>(rng() % n);
    Antichain r = a.restrict_to(Bound(nn));
    for (int probe = 0; probe < 10; ++probe) {
      auto ps = oracle::random_sets(rng, nn, 1).front();
      CHECK(r.member(ElemSet(Bound(nn), ps)) == a.member(ElemSet(b, ps)));
    }
  }
}

TEST_CASE("serialization is canonical and round-trips") {
  Bound b(6);
  Antichain a = normalize_of(b, {{4}, {1, 3, 5}, {1, 2}});
  CHECK(a.serialize() == "antichain n=6 g=3\n1 2\n1 3 5\n4\n");
  CHECK(Antichain::parse(a.serialize()) == a);

  Antichain none = Antichain::empty(b);
  CHECK(none.serialize() == "antichain n=6 g=0\n");
  CHECK(Antichain::parse(none.serialize()) == none);

  CHECK(a.content_digest().size() == 16);
  CHECK(a.content_digest() != none.content_digest());

  CHECK_THROWS_WITH_AS((void)Antichain::parse("antichain n=6 g=2\n1 2\n"),
                       doctest::Contains("declares 2"), InputError);
  CHECK_THROWS_WITH_AS((void)Antichain::parse("antichain n=6 g=1\n1 x\n"),
                       doctest::Contains("line 2"), InputError);
  CHECK_THROWS_WITH_AS((void)Antichain::parse("antichain n=6 g=1\n7\n"),
                       doctest::Contains("line 2"), InputError);
  CHECK_THROWS_AS((void)Antichain::parse("nonsense\n"), InputError);
}
