#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "classdeg/entropy_est.hpp"
#include "classdeg/markov.hpp"
#include "support.hpp"

using namespace classdeg;
using namespace testsupport;
using Catch::Approx;

namespace {

Word iid_word(int alphabet, long n, std::uint64_t seed) {
  Rng rng(seed);
  Word w;
  w.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    w.push_back(static_cast<Sym>(rng.next_below(static_cast<std::uint64_t>(alphabet))));
  return w;
}

}  // namespace

TEST_CASE("periodic words have zero conditional entropy") {
  Word w;
  for (int i = 0; i < 5000; ++i) w.push_back(i % 3);
  EntropyOptions opts;
  EntropyEstimate est = empirical_entropy(w, 3, opts);
  REQUIRE(est.value == Approx(0.0).margin(1e-12));
  REQUIRE(est.k >= 4);
}

TEST_CASE("iid uniform bits estimate log 2") {
  Word w = iid_word(2, 1'000'000, 99);
  EntropyOptions opts;
  opts.k_schedule = {4, 6, 8};
  EntropyEstimate est = empirical_entropy(w, 2, opts);
  REQUIRE(est.k == 8);
  REQUIRE(std::abs(est.value - std::log(2.0)) < 0.01);
  REQUIRE(est.stderr_value > 0.0);
  REQUIRE(est.stderr_value < 0.01);
}

TEST_CASE("parry path on the golden mean estimates log phi") {
  Sft gm = goldenmean();
  MarkovMeasure parry = parry_measure(gm);
  Word w = sample_path(parry, 1'000'000, 4242);
  EntropyOptions opts;  // schedule up to k=10
  EntropyEstimate est = empirical_entropy(w, 2, opts);
  REQUIRE(est.k == 10);
  REQUIRE(std::abs(est.value - 0.48121182505960347) < 0.01);
}

TEST_CASE("bernoulli(0.3) path estimates its entropy") {
  Sft full = full_shift({"A", "B"});
  Word w = sample_path(bernoulli(full, 0.3), 500'000, 7);
  EntropyEstimate est = empirical_entropy(w, 2);
  REQUIRE(std::abs(est.value - 0.61086430205489355) < 0.01);
}

TEST_CASE("too-short words raise InsufficientData") {
  Word w = iid_word(2, 60, 5);
  EntropyOptions opts;
  opts.k_schedule = {8};
  REQUIRE_THROWS_AS(empirical_entropy(w, 2, opts), InsufficientData);
}

TEST_CASE("symbols outside the alphabet are rejected") {
  Word w{0, 1, 2};
  REQUIRE_THROWS_AS(empirical_entropy(w, 2), UnknownSymbol);
}

TEST_CASE("the admissibility rule tracks observed contexts, not alphabet size") {
  // a sparse process over a nominally huge alphabet: symbols 0 and 9 only
  Word w;
  Rng rng(17);
  for (int i = 0; i < 20000; ++i) w.push_back(rng.next_bernoulli(0.5) ? 9 : 0);
  EntropyOptions opts;
  opts.k_schedule = {4};
  EntropyEstimate est = empirical_entropy(w, 10, opts);  // 10^4 contexts nominally
  REQUIRE(est.k == 4);
  REQUIRE(std::abs(est.value - std::log(2.0)) < 0.02);
}

TEST_CASE("lz76 on periodic and random input") {
  Word per;
  for (int i = 0; i < 100000; ++i) per.push_back(i % 2);
  EntropyEstimate plz = lz76_entropy(per, 2);
  REQUIRE(plz.value < 0.01);

  // the parser is quadratic in the worst case; keep the sample modest
  Word w = iid_word(2, 50'000, 3);
  EntropyEstimate rlz = lz76_entropy(w, 2);
  REQUIRE(std::abs(rlz.value - std::log(2.0)) < 0.2 * std::log(2.0));
}

TEST_CASE("relative entropy of a duplicated factor is zero") {
  Word y = iid_word(2, 100000, 21);
  Word joint = zip_words(y, 2, y, 2);
  EntropyEstimate est = relative_entropy_estimate(joint, 4, y, 2);
  REQUIRE(est.value == Approx(0.0).margin(1e-12));
}

TEST_CASE("independent joint adds the bits entropy") {
  Word bits = iid_word(2, 400000, 31);
  Sft gm = goldenmean();
  Word y = sample_path(parry_measure(gm), 400000, 32);
  Word joint = zip_words(bits, 2, y, 2);
  EntropyOptions opts;
  opts.k_schedule = {4, 6};
  EntropyEstimate est = relative_entropy_estimate(joint, 4, y, 2, opts);
  REQUIRE(std::abs(est.value - std::log(2.0)) < 0.02);
}

TEST_CASE("relative entropy subadditivity on a hidden-chain triple") {
  // alpha, beta, gamma are symbol maps of one hidden 4-state chain
  Rng rng(777);
  Sft chain = random_sft(rng, 4);
  MarkovMeasure mu = random_markov_measure(chain, rng);
  Word z = sample_path(mu, 200000, 50);
  auto project = [&](const Word& w, const std::vector<int>& map) {
    Word out;
    out.reserve(w.size());
    for (Sym s : w) out.push_back(map[static_cast<std::size_t>(s)]);
    return out;
  };
  std::vector<int> fa{0, 1, 1, 0}, fb{0, 0, 1, 1}, fc{1, 0, 1, 0};
  Word alpha = project(z, fa), beta = project(z, fb), gamma = project(z, fc);
  EntropyOptions opts;
  opts.k_schedule = {3};
  auto h_a_c = relative_entropy_estimate(zip_words(alpha, 2, gamma, 2), 4, gamma, 2, opts);
  auto h_b_c = relative_entropy_estimate(zip_words(beta, 2, gamma, 2), 4, gamma, 2, opts);
  Word bg = zip_words(beta, 2, gamma, 2);
  auto h_a_bc = relative_entropy_estimate(zip_words(alpha, 2, bg, 4), 8, bg, 4, opts);
  double lhs = h_a_c.value;
  double rhs = h_a_bc.value + h_b_c.value;
  double sigma = std::sqrt(h_a_c.stderr_value * h_a_c.stderr_value +
                           h_a_bc.stderr_value * h_a_bc.stderr_value +
                           h_b_c.stderr_value * h_b_c.stderr_value);
  REQUIRE(lhs <= rhs + 3 * sigma);
}
