#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "classdeg/class_degree.hpp"
#include "support.hpp"

using namespace classdeg;
using namespace testsupport;

namespace {

// Independent routability oracle: enumerate every X-word of the right
// length and check image, endpoints, and the symbol at n directly.
bool routable_brute(const FactorTriple& t, const Word& u, Sym a, int n) {
  Word w = apply_code(t, u);
  for (const Word& v : enumerate_blocks(t.x, static_cast<int>(u.size()))) {
    if (apply_code(t, v) != w) continue;
    if (v.front() != u.front() || v.back() != u.back()) continue;
    if (v[static_cast<std::size_t>(n)] == a) return true;
  }
  return false;
}

bool is_tb_brute(const FactorTriple& t, const Word& w, int n, const std::vector<Sym>& m) {
  for (const Word& u : enumerate_blocks(t.x, static_cast<int>(w.size()))) {
    if (apply_code(t, u) != w) continue;
    bool ok = false;
    for (Sym a : m) ok = ok || routable_brute(t, u, a, n);
    if (!ok) return false;
  }
  return true;
}

PushforwardMeasure nu_t1() {
  FactorTriple tri = t1();
  return PushforwardMeasure{bernoulli(tri.x, 0.5), tri};
}

PushforwardMeasure nu_identity() {
  FactorTriple tri = identity_goldenmean();
  return PushforwardMeasure{parry_measure(tri.x), tri};
}

PushforwardMeasure nu_t3() {
  FactorTriple tri = t3();
  return PushforwardMeasure{t3_symmetric_measure(tri.x), tri};
}

}  // namespace

TEST_CASE("routable on the corpus examples") {
  FactorTriple tri = t1();
  Word aba = tri.x.parse_word({"A", "B", "A"});
  REQUIRE(routable(tri, aba, tri.x.alphabet.index_of("A"), 1));

  FactorTriple id = identity_goldenmean();
  Word u = id.x.parse_word({"0", "1", "0"});
  REQUIRE(routable(id, u, id.x.alphabet.index_of("1"), 1));  // self-routing

  FactorTriple three = t3();
  Word a1b1a1 = three.x.parse_word({"a1", "b1", "a1"});
  // cross-component reroutes do not exist
  REQUIRE_FALSE(routable(three, a1b1a1, three.x.alphabet.index_of("b2"), 1));
  REQUIRE_FALSE(routable(three, a1b1a1, three.x.alphabet.index_of("a2"), 0));
  REQUIRE_FALSE(routable_brute(three, a1b1a1, three.x.alphabet.index_of("b2"), 1));
}

TEST_CASE("routable agrees with the brute-force oracle") {
  Rng rng(808);
  for (const auto& tri : {t1(), identity_goldenmean(), t3()}) {
    for (int len = 1; len <= 5; ++len) {
      for (const Word& u : enumerate_blocks(tri.x, len)) {
        for (int n = 0; n < len; ++n) {
          for (Sym a : tri.preimages(tri.code_of(u[static_cast<std::size_t>(n)]))) {
            REQUIRE(routable(tri, u, a, n) == routable_brute(tri, u, a, n));
          }
        }
      }
    }
  }
  (void)rng;
}

TEST_CASE("routable precondition failures") {
  FactorTriple tri = t3();
  Word u = tri.x.parse_word({"a1", "b1", "a1"});
  REQUIRE_THROWS_AS(routable(tri, u, tri.x.alphabet.index_of("a2"), 1), SymbolMismatch);
  REQUIRE_THROWS_AS(routable(tri, u, tri.x.alphabet.index_of("a1"), 5), IndexOutOfRange);
}

TEST_CASE("transition block checks on the corpus examples") {
  FactorTriple tri = t1();
  Sym a = tri.x.alphabet.index_of("A");
  Sym b = tri.x.alphabet.index_of("B");
  Word bbb(3, 0);
  REQUIRE(is_transition_block(tri, bbb, 1, {a}));
  REQUIRE(is_tb_brute(tri, bbb, 1, {a}));
  Word single_b(1, 0);
  REQUIRE_FALSE(is_transition_block(tri, single_b, 0, {a}));  // u=B cannot route
  REQUIRE(is_transition_block(tri, single_b, 0, {a, b}));

  FactorTriple three = t3();
  Word aba = three.parse_y_word({"a", "b", "a"});
  Sym b1 = three.x.alphabet.index_of("b1");
  Sym b2 = three.x.alphabet.index_of("b2");
  REQUIRE_FALSE(is_transition_block(three, aba, 1, {b1}));
  REQUIRE(is_transition_block(three, aba, 1, {b1, b2}));
  REQUIRE(is_tb_brute(three, aba, 1, {b1, b2}));
}

TEST_CASE("monotonicity: enlarging M preserves transition blocks") {
  Rng rng(9001);
  for (const auto& tri : {t1(), identity_goldenmean(), t3()}) {
    for (int len = 1; len <= 4; ++len) {
      for (const Word& w : enumerate_y_blocks(tri, len)) {
        for (int n = 0; n < len; ++n) {
          const auto& pre = tri.preimages(w[static_cast<std::size_t>(n)]);
          // random subset M, then a superset
          std::vector<Sym> m, sup;
          for (Sym s : pre) {
            bool in_m = rng.next_bernoulli(0.5);
            if (in_m) m.push_back(s);
            if (in_m || rng.next_bernoulli(0.5)) sup.push_back(s);
          }
          if (m.empty()) continue;
          if (is_transition_block(tri, w, n, m))
            REQUIRE(is_transition_block(tri, w, n, sup));
        }
      }
    }
  }
}

TEST_CASE("minimal transition blocks match the corpus") {
  auto r1 = minimal_transition_block(t1(), nu_t1(), 3);
  REQUIRE(r1.block.depth() == 1);
  REQUIRE(r1.block.w == Word(3, 0));  // bbb
  REQUIRE(r1.block.n == 1);
  REQUIRE(r1.block.m == std::vector<Sym>{0});  // lexicographic tie-break picks A

  auto rid = minimal_transition_block(identity_goldenmean(), nu_identity(), 1);
  REQUIRE(rid.block.depth() == 1);
  REQUIRE(rid.block.w.size() == 1);

  auto r3 = minimal_transition_block(t3(), nu_t3(), 4);
  REQUIRE(r3.block.depth() == 2);
}

TEST_CASE("minimal search is deterministic across worker counts") {
  auto one = minimal_transition_block(t3(), nu_t3(), 4, 1);
  auto four = minimal_transition_block(t3(), nu_t3(), 4, 4);
  REQUIRE(one.block.w == four.block.w);
  REQUIRE(one.block.n == four.block.n);
  REQUIRE(one.block.m == four.block.m);
}

TEST_CASE("class degrees of the corpus") {
  REQUIRE(class_degree_of_measure(t1(), nu_t1(), 6) == 1);
  REQUIRE(class_degree_of_measure(identity_goldenmean(), nu_identity(), 6) == 1);
  REQUIRE(class_degree_of_measure(t3(), nu_t3(), 6) == 2);
}

TEST_CASE("routing certificate covers every preimage") {
  auto r1 = minimal_transition_block(t1(), nu_t1(), 3);
  REQUIRE(r1.certificate.entries.size() == 8);  // all of {A,B}^3
  for (const auto& [u, routes] : r1.certificate.entries) {
    REQUIRE(routes.size() == 1);
    REQUIRE(routes[0] == 0);
  }
}

TEST_CASE("periodic-point oracle on the corpus") {
  FactorTriple tri = t1();
  REQUIRE(count_transition_classes_periodic(tri, Word{0}) == 1);       // y = b
  REQUIRE(count_transition_classes_periodic(tri, Word{0, 0}) == 1);    // y = bb

  FactorTriple id = identity_goldenmean();
  Word y01 = id.parse_y_word({"0", "1"});
  REQUIRE(count_transition_classes_periodic(id, y01) == 1);
  REQUIRE(count_transition_classes_periodic(id, id.parse_y_word({"0"})) == 1);

  FactorTriple three = t3();
  REQUIRE(count_transition_classes_periodic(three, three.parse_y_word({"a", "b"})) == 2);
  REQUIRE(count_transition_classes_periodic(three, three.parse_y_word({"b", "a"})) == 2);
}

TEST_CASE("periodic-point oracle rejects illegal periods") {
  FactorTriple id = identity_goldenmean();
  REQUIRE_THROWS_AS(count_transition_classes_periodic(id, id.parse_y_word({"1"})),
                    IllegalWord);  // 11 forbidden, so 1^inf is not a point
}

TEST_CASE("oracle count bounds the class degree with equality somewhere") {
  struct Case {
    FactorTriple tri;
    PushforwardMeasure nu;
    std::vector<Word> periods;
    int expected;
  };
  std::vector<Case> cases;
  {
    FactorTriple tri = t1();
    cases.push_back({tri, nu_t1(), {Word{0}, Word{0, 0}, Word{0, 0, 0}}, 1});
  }
  {
    FactorTriple tri = identity_goldenmean();
    cases.push_back({tri, nu_identity(),
                     {tri.parse_y_word({"0"}), tri.parse_y_word({"0", "1"}),
                      tri.parse_y_word({"0", "0", "1"})},
                     1});
  }
  {
    FactorTriple tri = t3();
    cases.push_back({tri, nu_t3(),
                     {tri.parse_y_word({"a", "b"}), tri.parse_y_word({"b", "a"})},
                     2});
  }
  for (const auto& c : cases) {
    int degree = class_degree_of_measure(c.tri, c.nu, 6);
    REQUIRE(degree == c.expected);
    bool equality = false;
    for (const Word& y : c.periods) {
      if (!c.nu.positive(y)) continue;
      int classes = count_transition_classes_periodic(c.tri, y);
      REQUIRE(classes >= degree);
      equality = equality || classes == degree;
    }
    REQUIRE(equality);
  }
}

TEST_CASE("extending w preserves the transition-block property") {
  struct Case {
    FactorTriple tri;
    PushforwardMeasure nu;
  };
  std::vector<Case> cases{{t1(), nu_t1()}, {identity_goldenmean(), nu_identity()},
                          {t3(), nu_t3()}};
  for (const auto& c : cases) {
    auto res = minimal_transition_block(c.tri, c.nu, 4);
    const Word& w = res.block.w;
    for (int len = static_cast<int>(w.size()); len <= static_cast<int>(w.size()) + 2; ++len) {
      for (const Word& wbar : enumerate_y_blocks(c.tri, len)) {
        if (!c.nu.positive(wbar)) continue;
        for (std::size_t off = 0; off + w.size() <= wbar.size(); ++off) {
          if (!std::equal(w.begin(), w.end(), wbar.begin() + static_cast<std::ptrdiff_t>(off)))
            continue;
          REQUIRE(is_transition_block(c.tri, wbar, static_cast<int>(off) + res.block.n,
                                      res.block.m));
        }
      }
    }
  }
}

TEST_CASE("unique routing symbol on the corpus") {
  FactorTriple tri = t1();
  MarkovMeasure b03 = bernoulli(tri.x, 0.3);
  TransitionBlock tb{Word(3, 0), 1, {tri.x.alphabet.index_of("A")}};
  Word bbb_word = tri.x.parse_word({"B", "B", "B"});
  REQUIRE(unique_routing_symbol(tri, b03, tb, bbb_word) == tri.x.alphabet.index_of("A"));

  FactorTriple three = t3();
  MarkovMeasure sym = t3_symmetric_measure(three.x);
  TransitionBlock tb3{three.parse_y_word({"a", "b", "a"}), 1,
                      {three.x.alphabet.index_of("b1"), three.x.alphabet.index_of("b2")}};
  REQUIRE(unique_routing_symbol(three, sym, tb3, three.x.parse_word({"a1", "b1", "a1"})) ==
          three.x.alphabet.index_of("b1"));
  REQUIRE(unique_routing_symbol(three, sym, tb3, three.x.parse_word({"a2", "b2", "a2"})) ==
          three.x.alphabet.index_of("b2"));
}

TEST_CASE("routing uniqueness holds exhaustively over short minimal blocks") {
  struct Case {
    FactorTriple tri;
    PushforwardMeasure nu;
    MarkovMeasure mu;
  };
  std::vector<Case> cases;
  {
    FactorTriple tri = t1();
    cases.push_back({tri, nu_t1(), bernoulli(tri.x, 0.3)});
  }
  {
    FactorTriple tri = identity_goldenmean();
    cases.push_back({tri, nu_identity(), parry_measure(tri.x)});
  }
  {
    FactorTriple tri = t3();
    cases.push_back({tri, nu_t3(), t3_symmetric_measure(tri.x)});
  }
  for (const auto& c : cases) {
    auto res = minimal_transition_block(c.tri, c.nu, 4);
    REQUIRE(res.block.w.size() <= 4);
    for (const Word& u : enumerate_preimages(c.tri, res.block.w)) {
      if (!(word_probability(c.mu, u) > 0.0)) continue;
      REQUIRE_NOTHROW(unique_routing_symbol(c.tri, c.mu, res.block, u));
    }
  }
}

TEST_CASE("non-unique and non-routable outcomes raise") {
  FactorTriple tri = t1();
  MarkovMeasure b03 = bernoulli(tri.x, 0.3);
  TransitionBlock both{Word(3, 0), 1, {0, 1}};  // not minimal: both symbols route
  REQUIRE_THROWS_AS(unique_routing_symbol(tri, b03, both, tri.x.parse_word({"B", "B", "B"})),
                    NotUnique);
  TransitionBlock bad{Word(2, 0), 0, {tri.x.alphabet.index_of("A")}};
  REQUIRE_THROWS_AS(unique_routing_symbol(tri, b03, bad, tri.x.parse_word({"B", "B"})),
                    NotRoutable);
}
