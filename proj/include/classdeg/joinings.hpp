#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "classdeg/class_degree.hpp"
#include "classdeg/errors.hpp"
#include "classdeg/markov.hpp"
#include "classdeg/parallel.hpp"
#include "classdeg/rng.hpp"
#include "classdeg/shift.hpp"

namespace classdeg {

/// A pair of equal-image X-words together with that image.
struct PairPath {
  Word x;
  Word x2;
  Word y;

  void validate(const FactorTriple& triple) const {
    if (x.size() != x2.size() || x.size() != y.size())
      throw SymbolMismatch("pair path components have different lengths");
    if (apply_code(triple, x) != y || apply_code(triple, x2) != y)
      throw SymbolMismatch("pair path images disagree");
  }
};

/// Sampler for the relatively independent joining of mu1 and mu2 over
/// nu: both coordinates are conditionally independent given the image.
struct RijSampler {
  MarkovMeasure mu1;
  MarkovMeasure mu2;
  FactorTriple triple;
  PushforwardMeasure nu;
};

/// Builds the sampler and checks that both pushforwards agree with nu
/// on all Y-words up to length 6 (tolerance 1e-9).
inline RijSampler make_rij_sampler(MarkovMeasure mu1, MarkovMeasure mu2, FactorTriple triple) {
  PushforwardMeasure nu{mu1, triple};
  PushforwardMeasure nu2{mu2, triple};
  for (int len = 1; len <= 6; ++len) {
    for (const Word& w : enumerate_y_blocks(triple, len)) {
      double a = nu.word_probability(w);
      double b = nu2.word_probability(w);
      if (std::abs(a - b) > 1e-9)
        throw IllegalMeasure("mu1 and mu2 push forward to different measures on " +
                             std::to_string(len) + "-blocks");
    }
  }
  return RijSampler{std::move(mu1), std::move(mu2), triple, std::move(nu)};
}

/// One window draw: y from nu as the image of a mu1-path, then x and x'
/// conditionally independent given y.
inline PairPath rij_sample(const RijSampler& sampler, long length, std::uint64_t seed) {
  Word u = sample_path(sampler.mu1, length, Rng::derive(seed, 1));
  Word y = apply_code(sampler.triple, u);
  Rng rx(Rng::derive(seed, 2));
  Rng rx2(Rng::derive(seed, 3));
  PairPath out;
  out.x = conditional_sample(sampler.mu1, sampler.triple, y, rx);
  out.x2 = conditional_sample(sampler.mu2, sampler.triple, y, rx2);
  out.y = std::move(y);
  return out;
}

namespace detail {

/// Routing sets for aligned blocks of one image word, keyed by the
/// block endpoints. Realizable endpoints only.
struct BlockRouter {
  WordReach reach;
  std::map<Sym, int> start_index;
  std::map<Sym, int> end_index;

  BlockRouter(const FactorTriple& t, const Word& w) : reach(t, w) {
    for (std::size_t i = 0; i < reach.starts.size(); ++i)
      start_index[reach.starts[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < reach.ends.size(); ++i)
      end_index[reach.ends[i]] = static_cast<int>(i);
  }

  bool routes(Sym s, Sym e, Sym a, int n) const {
    auto si = start_index.find(s);
    auto ei = end_index.find(e);
    if (si == start_index.end() || ei == end_index.end()) return false;
    return reach.routes(si->second, ei->second, a, n);
  }
};

}  // namespace detail

struct D2Witness {
  long start = 0;
  int length = 0;
  int offset = 0;
  Sym symbol = -1;
};

/// Searches all subwords up to `width` for a common routing symbol at a
/// common time for the two coordinates.
inline std::optional<D2Witness> find_d2_witness(const FactorTriple& triple, const PairPath& pair,
                                                int width = 6) {
  pair.validate(triple);
  long n = static_cast<long>(pair.y.size());
  std::map<Word, detail::BlockRouter> routers;
  for (int len = 1; len <= std::min<long>(width, n); ++len) {
    for (long s = 0; s + len <= n; ++s) {
      Word w(pair.y.begin() + s, pair.y.begin() + s + len);
      auto it = routers.find(w);
      if (it == routers.end())
        it = routers.emplace(w, detail::BlockRouter(triple, w)).first;
      const detail::BlockRouter& router = it->second;
      for (int off = 0; off < len; ++off) {
        for (Sym a : triple.preimages(w[static_cast<std::size_t>(off)])) {
          if (router.routes(pair.x[static_cast<std::size_t>(s)],
                            pair.x[static_cast<std::size_t>(s + len - 1)], a, off) &&
              router.routes(pair.x2[static_cast<std::size_t>(s)],
                            pair.x2[static_cast<std::size_t>(s + len - 1)], a, off)) {
            return D2Witness{s, len, off, a};
          }
        }
      }
    }
  }
  return std::nullopt;
}

inline bool d2_membership(const FactorTriple& triple, const PairPath& pair, int width = 6) {
  return find_d2_witness(triple, pair, width).has_value();
}

/// True iff bridging words exist in both directions: one with the same
/// image starting like u and ending like v, and one starting like v and
/// ending like u.
inline bool bridgeable_pair(const FactorTriple& triple, const Word& u, const Word& v) {
  triple.x.require_legal(u);
  triple.x.require_legal(v);
  Word w = apply_code(triple, u);
  if (apply_code(triple, v) != w) throw SymbolMismatch("words have different images");
  auto one_way = [&](Sym s, Sym e) {
    auto fwd = detail::layer_forward(triple, w, {s});
    return fwd[w.size() - 1][static_cast<std::size_t>(e)] != 0;
  };
  return one_way(u.front(), v.back()) && one_way(v.front(), u.back());
}

/// Estimate of the mass of pairs exhibiting a common routing symbol in
/// tb.m at some occurrence of tb.w inside the window.
struct DiagonalReport {
  long trials = 0;
  long window = 0;      // largest window actually used
  long d2_hits = 0;
  double estimate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 1.0;
  int workers = 1;
};

namespace detail {

inline std::pair<double, double> wilson95(long hits, long trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  double p = static_cast<double>(hits) / static_cast<double>(trials);
  double nt = static_cast<double>(trials);
  double denom = 1.0 + z * z / nt;
  double center = (p + z * z / (2.0 * nt)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / nt + z * z / (4.0 * nt * nt)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline std::vector<long> occurrences(const Word& y, const Word& w) {
  std::vector<long> out;
  if (w.empty() || w.size() > y.size()) return out;
  for (long i = 0; i + static_cast<long>(w.size()) <= static_cast<long>(y.size()); ++i) {
    if (std::equal(w.begin(), w.end(), y.begin() + i)) out.push_back(i);
  }
  return out;
}

}  // namespace detail

/// Monte Carlo estimate with Wilson 95% interval. A trial with no
/// occurrence of w retries with a doubled window, up to 10^6, before
/// failing with NoOccurrences.
inline DiagonalReport estimate_class_diagonal_mass(const RijSampler& sampler,
                                                   const TransitionBlock& tb, long trials,
                                                   long window, std::uint64_t seed,
                                                   int workers = 1) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (window < static_cast<long>(tb.w.size())) throw DomainError("window shorter than w");
  detail::BlockRouter router(sampler.triple, tb.w);
  std::vector<char> hits(static_cast<std::size_t>(trials), 0);
  std::vector<long> windows(static_cast<std::size_t>(trials), 0);
  std::vector<std::string> failures(static_cast<std::size_t>(trials));

  parallel_for(trials, workers, [&](long t) {
    long w_len = window;
    for (int attempt = 0;; ++attempt) {
      std::uint64_t trial_seed = Rng::derive(seed, static_cast<std::uint64_t>(t) * 64 +
                                                       static_cast<std::uint64_t>(attempt));
      PairPath pair = rij_sample(sampler, w_len, trial_seed);
      auto occs = detail::occurrences(pair.y, tb.w);
      if (occs.empty()) {
        if (w_len >= 1'000'000) {
          failures[static_cast<std::size_t>(t)] =
              "no occurrence of w in a window of " + std::to_string(w_len);
          return;
        }
        w_len = std::min<long>(1'000'000, w_len * 2);
        continue;
      }
      windows[static_cast<std::size_t>(t)] = w_len;
      int len = static_cast<int>(tb.w.size());
      for (long i : occs) {
        Sym sx = pair.x[static_cast<std::size_t>(i)];
        Sym ex = pair.x[static_cast<std::size_t>(i + len - 1)];
        Sym sx2 = pair.x2[static_cast<std::size_t>(i)];
        Sym ex2 = pair.x2[static_cast<std::size_t>(i + len - 1)];
        for (Sym a : tb.m) {
          if (router.routes(sx, ex, a, tb.n) && router.routes(sx2, ex2, a, tb.n)) {
            hits[static_cast<std::size_t>(t)] = 1;
            return;
          }
        }
      }
      return;
    }
  });

  for (const auto& f : failures)
    if (!f.empty()) throw NoOccurrences(f);

  DiagonalReport report;
  report.trials = trials;
  report.workers = workers;
  for (long t = 0; t < trials; ++t) {
    report.d2_hits += hits[static_cast<std::size_t>(t)];
    report.window = std::max(report.window, windows[static_cast<std::size_t>(t)]);
  }
  report.estimate = static_cast<double>(report.d2_hits) / static_cast<double>(trials);
  auto [lo, hi] = detail::wilson95(report.d2_hits, trials);
  report.wilson_low = lo;
  report.wilson_high = hi;
  return report;
}

/// For every occurrence of tb.w in pair.y, checks that the aligned
/// blocks share a routing symbol in tb.m at time tb.n. Returns the
/// positions that violate it (empty when the pointwise routing
/// conclusion holds).
inline std::vector<long> common_routing_check(const FactorTriple& triple,
                                              const TransitionBlock& tb, const PairPath& pair) {
  pair.validate(triple);
  detail::BlockRouter router(triple, tb.w);
  std::vector<long> violations;
  int len = static_cast<int>(tb.w.size());
  for (long i : detail::occurrences(pair.y, tb.w)) {
    bool common = false;
    for (Sym a : tb.m) {
      if (router.routes(pair.x[static_cast<std::size_t>(i)],
                        pair.x[static_cast<std::size_t>(i + len - 1)], a, tb.n) &&
          router.routes(pair.x2[static_cast<std::size_t>(i)],
                        pair.x2[static_cast<std::size_t>(i + len - 1)], a, tb.n))
        common = true;
    }
    if (!common) violations.push_back(i);
  }
  return violations;
}

}  // namespace classdeg
