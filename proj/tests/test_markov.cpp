#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "classdeg/markov.hpp"
#include "support.hpp"

using namespace classdeg;
using namespace testsupport;
using Catch::Approx;

TEST_CASE("parry measure of the full 2-shift is uniform") {
  MarkovMeasure mu = parry_measure(full_shift({"A", "B"}));
  REQUIRE(mu.prob(0, 0) == Approx(0.5).margin(1e-12));
  REQUIRE(mu.stationary[0] == Approx(0.5).margin(1e-12));
  REQUIRE(entropy(mu) == Approx(std::log(2.0)).margin(1e-12));
}

TEST_CASE("parry measure of the golden mean hits log phi") {
  MarkovMeasure mu = parry_measure(goldenmean());
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  REQUIRE(entropy(mu) == Approx(std::log(phi)).margin(1e-11));
  REQUIRE(entropy(mu) == Approx(0.48121182505960347).margin(1e-11));
  REQUIRE(mu.prob(0, 0) == Approx(1.0 / phi).margin(1e-11));
  REQUIRE(mu.stationary[0] == Approx(phi * phi / (1.0 + phi * phi)).margin(1e-11));
}

TEST_CASE("parry measure of the full 3-shift hits log 3") {
  MarkovMeasure mu = parry_measure(full_shift({"0", "1", "2"}));
  REQUIRE(entropy(mu) == Approx(std::log(3.0)).margin(1e-12));
}

TEST_CASE("parry rejects reducible and periodic graphs") {
  REQUIRE_THROWS_AS(parry_measure(t3().x), NotIrreducible);
  Sft two_cycle = build_sft({"a", "b"}, {{"a", "b"}, {"b", "a"}});
  REQUIRE_THROWS_AS(parry_measure(two_cycle), NotIrreducible);
}

TEST_CASE("entropy of bernoulli and deterministic measures") {
  Sft full = full_shift({"A", "B"});
  REQUIRE(entropy(bernoulli(full, 0.5)) == Approx(std::log(2.0)));
  REQUIRE(entropy(bernoulli(full, 0.3)) == Approx(0.61086430205489355).margin(1e-12));
  Sft cyc = build_sft({"a", "b"}, {{"a", "b"}, {"b", "a"}});
  MarkovMeasure det = make_markov_measure(cyc, {{0, 1}, {1, 0}}, {0.5, 0.5});
  REQUIRE(entropy(det) == Approx(0.0).margin(1e-15));
}

TEST_CASE("equilibrium state of V=0 is the parry measure") {
  for (const Sft& sft : {full_shift({"A", "B"}), goldenmean(), full_shift({"0", "1", "2"})}) {
    Potential zero = make_potential(sft, 1, {});
    EquilibriumState eq = equilibrium_state(sft, zero);
    MarkovMeasure parry = parry_measure(sft);
    double max_diff = 0.0;
    for (int i = 0; i < sft.size(); ++i)
      for (int j = 0; j < sft.size(); ++j)
        max_diff = std::max(max_diff, std::abs(eq.measure.prob(i, j) - parry.prob(i, j)));
    REQUIRE(max_diff < 1e-10);
    REQUIRE(eq.pressure == Approx(entropy(parry)).margin(1e-10));
  }
}

TEST_CASE("constant potentials shift pressure only") {
  Sft full = full_shift({"A", "B"});
  const double c = 0.37;
  Potential v = make_potential(full, 1, {{Word{0}, c}, {Word{1}, c}});
  EquilibriumState eq = equilibrium_state(full, v);
  MarkovMeasure parry = parry_measure(full);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      REQUIRE(eq.measure.prob(i, j) == Approx(parry.prob(i, j)).margin(1e-10));
  REQUIRE(eq.pressure == Approx(std::log(2.0) + c).margin(1e-10));
}

TEST_CASE("golden mean equilibrium pressure matches the closed-form eigenvalue") {
  // V(u) = 1 if u_0 = 0 else 0 weights the transfer matrix to
  // [[e, e], [1, 0]], whose Perron root solves x^2 - e x - e = 0.
  Sft gm = goldenmean();
  Potential v = make_potential(gm, 1, {{Word{0}, 1.0}});
  EquilibriumState eq = equilibrium_state(gm, v);
  const double e = std::exp(1.0);
  const double rho = (e + std::sqrt(e * e + 4.0 * e)) / 2.0;
  REQUIRE(eq.pressure == Approx(std::log(rho)).margin(1e-11));
}

TEST_CASE("range-2 potential equilibrium maximizes pressure") {
  Sft gm = goldenmean();
  Potential v = make_potential(gm, 2, {{Word{0, 1}, 0.8}, {Word{0, 0}, -0.25}});
  EquilibriumState eq = equilibrium_state(gm, v);
  REQUIRE(eq.block_len == 1);
  double best = pressure_value(eq.measure, v);
  REQUIRE(best == Approx(eq.pressure).margin(1e-9));
  Rng rng(5150);
  for (int trial = 0; trial < 100; ++trial) {
    MarkovMeasure mu = random_markov_measure(gm, rng);
    REQUIRE(pressure_value(mu, v) <= best + 1e-9);
  }
}

TEST_CASE("variational dominance on random measures") {
  Rng rng(2310);
  for (const Sft& sft : {full_shift({"A", "B"}), goldenmean()}) {
    Potential v = make_potential(sft, 1, {{Word{0}, 0.4}});
    double best = pressure_value(equilibrium_state(sft, v).measure, v);
    for (int trial = 0; trial < 100; ++trial) {
      MarkovMeasure mu = random_markov_measure(sft, rng);
      REQUIRE(pressure_value(mu, v) <= best + 1e-9);
    }
  }
}

TEST_CASE("pressure of V=0 is the entropy") {
  Sft full = full_shift({"A", "B"});
  Potential zero = make_potential(full, 1, {});
  REQUIRE(pressure_value(parry_measure(full), zero) == Approx(std::log(2.0)).margin(1e-12));
  MarkovMeasure b03 = bernoulli(full, 0.3);
  Potential ind = make_potential(full, 1, {{Word{0}, 1.0}});
  REQUIRE(pressure_value(b03, ind) == Approx(0.61086430205489355 + 0.3).margin(1e-12));
}

TEST_CASE("word probabilities multiply along transitions") {
  Sft full = full_shift({"A", "B"});
  MarkovMeasure b03 = bernoulli(full, 0.3);
  REQUIRE(word_probability(b03, Word{0, 1}) == Approx(0.3 * 0.7));
  REQUIRE_THROWS_AS(word_probability(b03, Word{0, 7}), UnknownSymbol);
  Sft gm = goldenmean();
  MarkovMeasure parry = parry_measure(gm);
  REQUIRE_THROWS_AS(word_probability(parry, Word{1, 1}), IllegalWord);
}

TEST_CASE("pushforward word probabilities") {
  FactorTriple tri = t1();
  PushforwardMeasure nu{bernoulli(tri.x, 0.3), tri};
  REQUIRE(nu.word_probability(Word{0, 0, 0}) == Approx(1.0).margin(1e-12));

  FactorTriple id = identity_goldenmean();
  MarkovMeasure parry = parry_measure(id.x);
  PushforwardMeasure nu_id{parry, id};
  for (int len = 1; len <= 5; ++len)
    for (const Word& w : enumerate_blocks(id.x, len))
      REQUIRE(nu_id.word_probability(w) == Approx(word_probability(parry, w)).margin(1e-12));
}

TEST_CASE("pushforward mass of each length sums to one") {
  std::vector<std::pair<FactorTriple, MarkovMeasure>> corpus;
  {
    FactorTriple tri = t1();
    MarkovMeasure mu = bernoulli(tri.x, 0.3);
    corpus.emplace_back(tri, mu);
  }
  {
    FactorTriple tri = identity_goldenmean();
    MarkovMeasure mu = parry_measure(tri.x);
    corpus.emplace_back(tri, mu);
  }
  {
    FactorTriple tri = t3();
    MarkovMeasure mu = t3_symmetric_measure(tri.x);
    corpus.emplace_back(tri, mu);
  }
  for (const auto& [tri, mu] : corpus) {
    PushforwardMeasure nu{mu, tri};
    for (int len = 1; len <= 6; ++len) {
      double total = 0.0;
      for (const Word& w : enumerate_y_blocks(tri, len)) total += nu.word_probability(w);
      REQUIRE(total == Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("pushforward support decision is exact") {
  FactorTriple tri = t3();
  PushforwardMeasure nu{t3_symmetric_measure(tri.x), tri};
  REQUIRE(nu.positive(tri.parse_y_word({"a", "b", "a"})));
  REQUIRE_FALSE(y_word_legal(tri, tri.parse_y_word({"a", "a"})));
}

TEST_CASE("sample_path is reproducible and hits stationary frequencies") {
  Sft full = full_shift({"A", "B"});
  MarkovMeasure b03 = bernoulli(full, 0.3);
  Word p1 = sample_path(b03, 1000, 77);
  Word p2 = sample_path(b03, 1000, 77);
  REQUIRE(p1 == p2);

  const long n = 1'000'000;
  Word big = sample_path(b03, n, 1234);
  long count_a = 0;
  for (Sym s : big) count_a += (s == 0);
  double sigma = std::sqrt(0.3 * 0.7 * n);
  REQUIRE(std::abs(count_a - 0.3 * n) < 3 * sigma);

  Sft cyc = build_sft({"a", "b"}, {{"a", "b"}, {"b", "a"}});
  MarkovMeasure det = make_markov_measure(cyc, {{0, 1}, {1, 0}}, {0.5, 0.5});
  Word per = sample_path(det, 10, 5);
  for (std::size_t i = 2; i < per.size(); ++i) REQUIRE(per[i] == per[i - 2]);
}

TEST_CASE("conditional sampling matches enumerated posteriors") {
  // T3 over aba: the two preimages have equal posterior mass
  FactorTriple tri = t3();
  MarkovMeasure mu = t3_symmetric_measure(tri.x);
  Word aba = tri.parse_y_word({"a", "b", "a"});
  Rng rng(404);
  int comp1 = 0;
  const int trials = 100000;
  Sym a1 = tri.x.alphabet.index_of("a1");
  for (int i = 0; i < trials; ++i) {
    Word u = conditional_sample(mu, tri, aba, rng);
    REQUIRE(apply_code(tri, u) == aba);
    comp1 += (u[0] == a1);
  }
  double sigma = std::sqrt(0.25 * trials);
  REQUIRE(std::abs(comp1 - trials / 2.0) < 4 * sigma);
}

TEST_CASE("conditional sampling through the identity code returns y") {
  FactorTriple id = identity_goldenmean();
  MarkovMeasure parry = parry_measure(id.x);
  Rng rng(11);
  Word y = sample_path(parry, 50, 8);
  Word x = conditional_sample(parry, id, y, rng);
  REQUIRE(x == y);
}

TEST_CASE("conditional sampling for T1 reproduces the unconditional law") {
  FactorTriple tri = t1();
  MarkovMeasure b03 = bernoulli(tri.x, 0.3);
  Word y(4, 0);  // bbbb
  std::map<Word, int> counts;
  Rng rng(2025);
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) counts[conditional_sample(b03, tri, y, rng)]++;
  for (const auto& [u, c] : counts) {
    double expect = word_probability(b03, u) * trials;
    double sigma = std::sqrt(expect * (1.0 - word_probability(b03, u)));
    REQUIRE(std::abs(c - expect) < 4 * sigma + 1);
  }
}

TEST_CASE("conditional sampling rejects zero-mass words") {
  FactorTriple tri = t3();
  MarkovMeasure mu = t3_symmetric_measure(tri.x);
  // ba has positive mass; build a measure with no mass on component 2
  MarkovMeasure comp1 = make_markov_measure(
      tri.x, {{0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}},
      {0.5, 0.0, 0.5, 0.0});
  Rng rng(6);
  Word aba = tri.parse_y_word({"a", "b", "a"});
  Word got = conditional_sample(comp1, tri, aba, rng);
  REQUIRE(got[0] == tri.x.alphabet.index_of("a1"));
  (void)mu;
}

TEST_CASE("hp formula values") {
  REQUIRE(hp(0.0) == 0.0);
  REQUIRE(hp(1.0) == 0.0);
  REQUIRE(hp(0.5) == Approx(std::log(2.0)));
  REQUIRE(hp(0.25) == Approx(0.5623351446188083).margin(1e-15));
  REQUIRE_THROWS_AS(hp(-0.1), DomainError);
  REQUIRE_THROWS_AS(hp(1.1), DomainError);
}

TEST_CASE("goodE and badE bound values") {
  REQUIRE(bound_good(1, 0.7) == 0.0);
  REQUIRE(bound_good(2, 0.0) == 0.0);
  REQUIRE(bound_bad(2, 0.0) == 0.0);
  REQUIRE(bound_good(2, 0.1) == Approx(0.06931471805599453));
  REQUIRE(bound_bad(2, 0.1) == Approx(0.06931471805599453 + 0.32508297339144827));
  REQUIRE_THROWS_AS(bound_good(0, 0.5), DomainError);
}

TEST_CASE("stationarity holds for every constructed measure") {
  Rng rng(31337);
  for (int trial = 0; trial < 30; ++trial) {
    Sft s = random_sft(rng, 2 + static_cast<int>(rng.next_below(4)));
    MarkovMeasure mu = random_markov_measure(s, rng);
    for (int j = 0; j < s.size(); ++j) {
      double acc = 0.0;
      for (int i = 0; i < s.size(); ++i)
        acc += mu.stationary[static_cast<std::size_t>(i)] * mu.prob(i, j);
      REQUIRE(acc == Approx(mu.stationary[static_cast<std::size_t>(j)]).margin(1e-9));
    }
  }
}
