#pragma once

// Shared fixtures and small generators for the test suite.

#include <map>
#include <string>
#include <vector>

#include "classdeg/markov.hpp"
#include "classdeg/rng.hpp"
#include "classdeg/shift.hpp"

namespace testsupport {

using namespace classdeg;

inline std::string fixture(const std::string& name) {
  return std::string(CLASSDEG_FIXTURE_DIR) + "/" + name;
}

/// Full 2-shift {A,B} collapsing onto the single fixed point b.
inline FactorTriple t1() {
  Sft x = build_sft({"A", "B"}, {{"A", "A"}, {"A", "B"}, {"B", "A"}, {"B", "B"}});
  return make_triple(std::move(x), {{"A", "b"}, {"B", "b"}});
}

/// Identity code on the golden mean shift.
inline FactorTriple identity_goldenmean() {
  Sft x = build_sft({"0", "1"}, {{"0", "0"}, {"0", "1"}, {"1", "0"}});
  return make_triple(std::move(x), {{"0", "0"}, {"1", "1"}});
}

/// Two disjoint 2-cycles a_i <-> b_i, both mapping onto the alternating
/// point (ab)^inf. Class degree 2.
inline FactorTriple t3() {
  Sft x = build_sft({"a1", "b1", "a2", "b2"},
                    {{"a1", "b1"}, {"b1", "a1"}, {"a2", "b2"}, {"b2", "a2"}});
  return make_triple(std::move(x),
                     {{"a1", "a"}, {"b1", "b"}, {"a2", "a"}, {"b2", "b"}});
}

inline Sft goldenmean() {
  return build_sft({"0", "1"}, {{"0", "0"}, {"0", "1"}, {"1", "0"}});
}

inline Sft full_shift(const std::vector<std::string>& symbols) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& a : symbols)
    for (const auto& b : symbols) pairs.emplace_back(a, b);
  return build_sft(symbols, pairs);
}

/// Bernoulli(p on first symbol) over a 2-symbol full shift.
inline MarkovMeasure bernoulli(const Sft& full2, double p) {
  return make_markov_measure(full2, {{p, 1 - p}, {p, 1 - p}}, {p, 1 - p});
}

inline MarkovMeasure t3_symmetric_measure(const Sft& x) {
  // alphabet order: a1 a2 b1 b2
  return make_markov_measure(x,
                             {{0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}},
                             {0.25, 0.25, 0.25, 0.25});
}

/// Random essential SFT with n symbols (for property tests).
inline Sft random_sft(Rng& rng, int n_symbols) {
  std::vector<std::string> names;
  for (int i = 0; i < n_symbols; ++i) names.push_back("s" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> pairs;
  // a hamiltonian cycle keeps the shift nonempty; extra random edges on top
  for (int i = 0; i < n_symbols; ++i)
    pairs.emplace_back(names[static_cast<std::size_t>(i)],
                       names[static_cast<std::size_t>((i + 1) % n_symbols)]);
  for (int i = 0; i < n_symbols; ++i)
    for (int j = 0; j < n_symbols; ++j)
      if (rng.next_bernoulli(0.4))
        pairs.emplace_back(names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(j)]);
  return build_sft(names, pairs);
}

/// Random Markov measure supported on all allowed pairs of `sft`.
inline MarkovMeasure random_markov_measure(const Sft& sft, Rng& rng) {
  int n = sft.size();
  std::vector<std::vector<double>> p(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!sft.edge(i, j)) continue;
      double w = 0.1 + rng.next_double();
      p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = w;
      row += w;
    }
    for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= row;
  }
  // stationary vector by damped power iteration on the left
  std::vector<double> pi(static_cast<std::size_t>(n), 1.0 / n);
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        next[static_cast<std::size_t>(j)] +=
            pi[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    double diff = 0.0;
    for (int j = 0; j < n; ++j) {
      next[static_cast<std::size_t>(j)] = 0.5 * next[static_cast<std::size_t>(j)] + 0.5 * pi[static_cast<std::size_t>(j)];
      diff = std::max(diff, std::abs(next[static_cast<std::size_t>(j)] - pi[static_cast<std::size_t>(j)]));
    }
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  double z = 0.0;
  for (double x : pi) z += x;
  for (double& x : pi) x /= z;
  return make_markov_measure(sft, std::move(p), std::move(pi));
}

/// Random legal word by a stationary-free walk.
inline Word random_word(const Sft& sft, Rng& rng, int length) {
  Word u;
  Sym cur = static_cast<Sym>(rng.next_below(static_cast<std::uint64_t>(sft.size())));
  u.push_back(cur);
  while (static_cast<int>(u.size()) < length) {
    const auto& succ = sft.succ[static_cast<std::size_t>(cur)];
    cur = succ[rng.next_below(succ.size())];
    u.push_back(cur);
  }
  return u;
}

}  // namespace testsupport
