#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "classdeg/joinings.hpp"
#include "support.hpp"

using namespace classdeg;
using namespace testsupport;
using Catch::Approx;

namespace {

RijSampler t1_sampler() {
  FactorTriple tri = t1();
  return make_rij_sampler(bernoulli(tri.x, 0.3), bernoulli(tri.x, 0.7), tri);
}

RijSampler identity_sampler() {
  FactorTriple tri = identity_goldenmean();
  MarkovMeasure parry = parry_measure(tri.x);
  return make_rij_sampler(parry, parry, tri);
}

RijSampler t3_sampler() {
  FactorTriple tri = t3();
  MarkovMeasure sym = t3_symmetric_measure(tri.x);
  return make_rij_sampler(sym, sym, tri);
}

}  // namespace

TEST_CASE("sampler construction rejects mismatched pushforwards") {
  FactorTriple id = identity_goldenmean();
  MarkovMeasure parry = parry_measure(id.x);
  MarkovMeasure other = make_markov_measure(
      id.x, {{0.5, 0.5}, {1.0, 0.0}}, {2.0 / 3.0, 1.0 / 3.0});
  REQUIRE_THROWS_AS(make_rij_sampler(parry, other, id), IllegalMeasure);
}

TEST_CASE("pair paths are valid and reproducible") {
  RijSampler s = t1_sampler();
  PairPath p = rij_sample(s, 500, 42);
  p.validate(s.triple);
  PairPath q = rij_sample(s, 500, 42);
  REQUIRE(p.x == q.x);
  REQUIRE(p.x2 == q.x2);
}

TEST_CASE("T1 coordinates are independent with exact marginals") {
  RijSampler s = t1_sampler();
  const long len = 200000;
  PairPath p = rij_sample(s, len, 7);
  long a_x = 0, a_x2 = 0, both = 0;
  for (long i = 0; i < len; ++i) {
    a_x += p.x[static_cast<std::size_t>(i)] == 0;
    a_x2 += p.x2[static_cast<std::size_t>(i)] == 0;
    both += (p.x[static_cast<std::size_t>(i)] == 0) && (p.x2[static_cast<std::size_t>(i)] == 0);
  }
  double sig3 = std::sqrt(0.3 * 0.7 * len);
  double sig7 = std::sqrt(0.7 * 0.3 * len);
  REQUIRE(std::abs(a_x - 0.3 * len) < 4 * sig3);
  REQUIRE(std::abs(a_x2 - 0.7 * len) < 4 * sig7);
  // correlation of the two indicator sequences is 0 within 4 sigma
  double cov = both / double(len) - (a_x / double(len)) * (a_x2 / double(len));
  REQUIRE(std::abs(cov) < 4 * std::sqrt(0.3 * 0.7 * 0.7 * 0.3 / len));
}

TEST_CASE("identity code forces x = x' = y") {
  RijSampler s = identity_sampler();
  PairPath p = rij_sample(s, 1000, 3);
  REQUIRE(p.x == p.y);
  REQUIRE(p.x2 == p.y);
}

TEST_CASE("marginal k-block frequencies match the sources") {
  RijSampler s = t1_sampler();
  const long len = 100000;
  PairPath p = rij_sample(s, len, 11);
  for (int k = 1; k <= 4; ++k) {
    std::map<Word, long> counts_x, counts_x2;
    for (long i = 0; i + k <= len; ++i) {
      counts_x[Word(p.x.begin() + i, p.x.begin() + i + k)]++;
      counts_x2[Word(p.x2.begin() + i, p.x2.begin() + i + k)]++;
    }
    long positions = len - k + 1;
    for (const auto& [w, c] : counts_x) {
      double expect = word_probability(s.mu1, w) * positions;
      REQUIRE(std::abs(c - expect) < 4 * std::sqrt(expect) + 1);
    }
    for (const auto& [w, c] : counts_x2) {
      double expect = word_probability(s.mu2, w) * positions;
      REQUIRE(std::abs(c - expect) < 4 * std::sqrt(expect) + 1);
    }
  }
}

TEST_CASE("T3 component choices are uniform over the four combinations") {
  RijSampler s = t3_sampler();
  int combos[2][2] = {{0, 0}, {0, 0}};
  const int trials = 4000;
  Sym a1 = s.triple.x.alphabet.index_of("a1");
  Sym b1 = s.triple.x.alphabet.index_of("b1");
  for (int t = 0; t < trials; ++t) {
    PairPath p = rij_sample(s, 40, Rng::derive(1234, static_cast<std::uint64_t>(t)));
    int cx = (p.x[0] == a1 || p.x[0] == b1) ? 0 : 1;
    int cx2 = (p.x2[0] == a1 || p.x2[0] == b1) ? 0 : 1;
    combos[cx][cx2]++;
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double sigma = std::sqrt(trials * 0.25 * 0.75);
      REQUIRE(std::abs(combos[i][j] - trials / 4.0) < 4 * sigma);
    }
}

TEST_CASE("d2 membership on the corpus examples") {
  RijSampler s1 = t1_sampler();
  PairPath p1 = rij_sample(s1, 64, 5);
  REQUIRE(d2_membership(s1.triple, p1));  // (bbb, 1, {A}) routes both

  RijSampler sid = identity_sampler();
  PairPath pid = rij_sample(sid, 64, 6);
  REQUIRE(d2_membership(sid.triple, pid));  // x = x'

  // cross-component pair in T3
  FactorTriple three = t3();
  Word y;
  Word x, x2;
  Sym a1 = three.x.alphabet.index_of("a1"), b1 = three.x.alphabet.index_of("b1");
  Sym a2 = three.x.alphabet.index_of("a2"), b2 = three.x.alphabet.index_of("b2");
  for (int i = 0; i < 16; ++i) {
    x.push_back(i % 2 ? b1 : a1);
    x2.push_back(i % 2 ? b2 : a2);
    y.push_back(i % 2 ? 1 : 0);
  }
  PairPath cross{x, x2, y};
  REQUIRE_FALSE(d2_membership(three, cross));
  PairPath same{x, x, y};
  REQUIRE(d2_membership(three, same));
}

TEST_CASE("bridgeable pairs") {
  FactorTriple tri = t1();
  Word u = tri.x.parse_word({"A", "B", "B"});
  Word v = tri.x.parse_word({"B", "B", "A"});
  REQUIRE(bridgeable_pair(tri, u, u));
  REQUIRE(bridgeable_pair(tri, u, v));  // full shift is unconstrained

  FactorTriple three = t3();
  Word c1 = three.x.parse_word({"a1", "b1", "a1"});
  Word c2 = three.x.parse_word({"a2", "b2", "a2"});
  REQUIRE(bridgeable_pair(three, c1, c1));
  REQUIRE_FALSE(bridgeable_pair(three, c1, c2));
  REQUIRE_THROWS_AS(bridgeable_pair(three, c1, three.x.parse_word({"b1", "a1", "b1"})),
                    SymbolMismatch);
}

TEST_CASE("d2 witnesses come with bridgeable subwords") {
  // D2 membership implies the D3 bridging witnesses at finite scale
  RijSampler s = t1_sampler();
  for (int t = 0; t < 10000; ++t) {
    PairPath p = rij_sample(s, 48, Rng::derive(99, static_cast<std::uint64_t>(t)));
    auto witness = find_d2_witness(s.triple, p, 4);
    REQUIRE(witness.has_value());
    Word u(p.x.begin() + witness->start, p.x.begin() + witness->start + witness->length);
    Word v(p.x2.begin() + witness->start, p.x2.begin() + witness->start + witness->length);
    REQUIRE(bridgeable_pair(s.triple, u, v));
  }
}

TEST_CASE("class-diagonal mass estimates") {
  RijSampler sid = identity_sampler();
  TransitionBlock tb_id{Word{0}, 0, {0}};
  DiagonalReport rid = estimate_class_diagonal_mass(sid, tb_id, 300, 64, 17);
  REQUIRE(rid.estimate == Approx(1.0));

  RijSampler s1 = t1_sampler();
  TransitionBlock tb1{Word(3, 0), 1, {0}};
  DiagonalReport r1 = estimate_class_diagonal_mass(s1, tb1, 300, 64, 18);
  REQUIRE(r1.estimate == Approx(1.0));

  // T3 with independent component choice: one a-run per window, match
  // probability 1/2
  RijSampler s3 = t3_sampler();
  TransitionBlock tb3{s3.triple.parse_y_word({"a"}), 0,
                      {s3.triple.x.alphabet.index_of("a1"), s3.triple.x.alphabet.index_of("a2")}};
  DiagonalReport r3 = estimate_class_diagonal_mass(s3, tb3, 4000, 64, 19);
  REQUIRE(r3.estimate == Approx(0.5).margin(4 * std::sqrt(0.25 / 4000)));
  REQUIRE(r3.wilson_low < 0.5);
  REQUIRE(r3.wilson_high > 0.5);
}

TEST_CASE("diagonal mass estimation is reproducible and worker independent") {
  RijSampler s = t3_sampler();
  TransitionBlock tb{s.triple.parse_y_word({"a"}), 0,
                     {s.triple.x.alphabet.index_of("a1"), s.triple.x.alphabet.index_of("a2")}};
  DiagonalReport a = estimate_class_diagonal_mass(s, tb, 500, 64, 7, 1);
  DiagonalReport b = estimate_class_diagonal_mass(s, tb, 500, 64, 7, 4);
  REQUIRE(a.d2_hits == b.d2_hits);
}

TEST_CASE("pointwise routing check is clean on diagonal joinings") {
  RijSampler s1 = t1_sampler();
  TransitionBlock tb1{Word(3, 0), 1, {0}};
  for (int t = 0; t < 20; ++t) {
    PairPath p = rij_sample(s1, 2000, Rng::derive(5, static_cast<std::uint64_t>(t)));
    REQUIRE(common_routing_check(s1.triple, tb1, p).empty());
  }
  RijSampler sid = identity_sampler();
  TransitionBlock tb_id{Word{0}, 0, {0}};
  for (int t = 0; t < 20; ++t) {
    PairPath p = rij_sample(sid, 2000, Rng::derive(6, static_cast<std::uint64_t>(t)));
    REQUIRE(common_routing_check(sid.triple, tb_id, p).empty());
  }
}

TEST_CASE("the corrupted-pair detector fires on T3") {
  FactorTriple three = t3();
  TransitionBlock tb{three.parse_y_word({"a", "b", "a"}), 1,
                     {three.x.alphabet.index_of("b1"), three.x.alphabet.index_of("b2")}};
  Word x, x2, y;
  Sym a1 = three.x.alphabet.index_of("a1"), b1 = three.x.alphabet.index_of("b1");
  Sym a2 = three.x.alphabet.index_of("a2"), b2 = three.x.alphabet.index_of("b2");
  for (int i = 0; i < 20; ++i) {
    x.push_back(i % 2 ? b1 : a1);
    x2.push_back(i % 2 ? b2 : a2);  // deliberately cross-component
    y.push_back(i % 2 ? 1 : 0);
  }
  PairPath corrupted{x, x2, y};
  REQUIRE_FALSE(common_routing_check(three, tb, corrupted).empty());
}
