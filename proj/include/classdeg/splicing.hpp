#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "classdeg/class_degree.hpp"
#include "classdeg/entropy_est.hpp"
#include "classdeg/errors.hpp"
#include "classdeg/joinings.hpp"
#include "classdeg/markov.hpp"
#include "classdeg/parallel.hpp"
#include "classdeg/rng.hpp"

namespace classdeg {

/// Parameters of the block-coin measure on {1,2,3} sequences.
struct EtaParams {
  int n = 1;       // block length N >= 1
  double p = 0.1;  // tail probability, in (0, 1/2]

  void validate() const {
    if (n < 1) throw DomainError("eta requires N >= 1");
    if (!(p > 0.0 && p <= 0.5)) throw DomainError("eta requires p in (0, 1/2]");
  }
};

struct EtaStats {
  double h_eta = 0.0;        // hp(p) / N
  double prob_1 = 0.0;       // (1-p)/N
  double prob_2 = 0.0;       // p/N
  double prob_1_block = 0.0; // mass of 1 3^{N-1} 2
  double prob_2_block = 0.0; // mass of 2 3^{N-1} 1
};

inline EtaStats eta_stats(const EtaParams& params) {
  params.validate();
  EtaStats s;
  double n = static_cast<double>(params.n);
  s.h_eta = hp(params.p) / n;
  s.prob_1 = (1.0 - params.p) / n;
  s.prob_2 = params.p / n;
  s.prob_1_block = params.p * (1.0 - params.p) / n;
  s.prob_2_block = s.prob_1_block;
  return s;
}

/// Labels for a mark sequence: every N-th mark (with a uniformly random
/// phase) carries an independent coin (1 with probability 1-p, else 2),
/// the other marks carry 3, all other positions carry 0.
inline std::vector<int> attach_labels(long length, const std::vector<long>& marks,
                                      const EtaParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  std::vector<int> t(static_cast<std::size_t>(length), 0);
  long phase = static_cast<long>(rng.next_below(static_cast<std::uint64_t>(params.n)));
  for (std::size_t j = 0; j < marks.size(); ++j) {
    long pos = marks[j];
    if (pos < 0 || pos >= length) throw IndexOutOfRange("mark outside the window");
    if ((static_cast<long>(j) + phase) % params.n == 0)
      t[static_cast<std::size_t>(pos)] = rng.next_bernoulli(1.0 - params.p) ? 1 : 2;
    else
      t[static_cast<std::size_t>(pos)] = 3;
  }
  return t;
}

/// Stationary sample of the coin measure itself: every position is a
/// mark. Values are in {1,2,3}.
inline std::vector<int> eta_sample(const EtaParams& params, long length, std::uint64_t seed) {
  std::vector<long> marks;
  marks.reserve(static_cast<std::size_t>(length));
  for (long i = 0; i < length; ++i) marks.push_back(i);
  return attach_labels(length, marks, params, seed);
}

/// All i with y_{[i, i+|w|-1]} = w, overlaps included. The empty word
/// marks every coordinate (the whole space as the spanning set).
inline std::vector<long> mark_occurrences(const Word& y, const Word& w) {
  if (w.empty()) {
    std::vector<long> all(y.size());
    for (long i = 0; i < static_cast<long>(y.size()); ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
  }
  return detail::occurrences(y, w);
}

/// One draw from the extended system: a pair path, its label sequence,
/// and the marked coordinates.
struct JumpSample {
  PairPath pair;
  std::vector<int> t;
  std::vector<long> marks;

  std::vector<long> coin_positions() const {
    std::vector<long> out;
    for (long i = 0; i < static_cast<long>(t.size()); ++i)
      if (t[static_cast<std::size_t>(i)] == 1 || t[static_cast<std::size_t>(i)] == 2)
        out.push_back(i);
    return out;
  }
};

/// Labels the w-occurrences of the pair's image. The window must hold
/// at least two marks, and N must exceed |w| so splice blocks never
/// collide.
inline JumpSample attach_jump_labels(const PairPath& pair, const Word& w,
                                     const EtaParams& params, std::uint64_t seed) {
  params.validate();
  if (params.n <= static_cast<int>(w.size()))
    throw DomainError("N must exceed |w| when a transition block is attached");
  JumpSample out;
  out.marks = mark_occurrences(pair.y, w);
  if (out.marks.size() < 2)
    throw TooFewMarks("only " + std::to_string(out.marks.size()) +
                      " occurrences of w in the window");
  out.t = attach_labels(static_cast<long>(pair.y.size()), out.marks, params, seed);
  out.pair = pair;
  return out;
}

/// The four block-routing functions r^{ab}. r11 and r22 return their
/// argument; r12(u,v) is the lexicographically least X-block that
/// projects to w, starts with u_0, ends with v_last, and passes through
/// the least common routing symbol of (u,v) in M at time n. Memoized;
/// the memo table is write-once per key.
class RoutingFunctions {
 public:
  RoutingFunctions(const FactorTriple& triple, TransitionBlock tb)
      : triple_(&triple),
        tb_(std::move(tb)),
        router_(triple, tb_.w),
        mutex_(std::make_unique<std::mutex>()) {}

  const TransitionBlock& block() const { return tb_; }

  Word r11(const Word& u, const Word& v) const {
    check_pair(u, v);
    return u;
  }
  Word r22(const Word& u, const Word& v) const {
    check_pair(u, v);
    return v;
  }
  Word r12(const Word& u, const Word& v) { return cross(u, v); }
  Word r21(const Word& u, const Word& v) { return cross(v, u); }

  Word apply(int prev_label, int cur_label, const Word& u, const Word& v) {
    if (prev_label == 1 && cur_label == 1) return r11(u, v);
    if (prev_label == 2 && cur_label == 2) return r22(u, v);
    if (prev_label == 1 && cur_label == 2) return r12(u, v);
    if (prev_label == 2 && cur_label == 1) return r21(u, v);
    throw RoutingGap("labels outside {1,2}");
  }

  /// Eagerly validates a set of support pairs (each must admit a common
  /// routing symbol).
  void prevalidate(const std::vector<std::pair<Word, Word>>& support_pairs) {
    for (const auto& [u, v] : support_pairs) {
      r12(u, v);
      r21(u, v);
    }
  }

 private:
  void check_pair(const Word& u, const Word& v) const {
    if (u.size() != tb_.w.size() || v.size() != tb_.w.size())
      throw SymbolMismatch("aligned blocks must have length |w|");
  }

  Sym common_symbol(const Word& u, const Word& v) const {
    for (Sym a : tb_.m) {
      if (router_.routes(u.front(), u.back(), a, tb_.n) &&
          router_.routes(v.front(), v.back(), a, tb_.n))
        return a;
    }
    throw NoCommonSymbol("pair of blocks shares no routing symbol in M");
  }

  /// Lexicographically least block through `a` at time n with the given
  /// endpoints, built greedily against reachability sets.
  Word least_path(Sym start, Sym end, Sym a) const {
    const Word& w = tb_.w;
    std::size_t len = w.size();
    std::size_t n = static_cast<std::size_t>(tb_.n);
    auto fwd_start = detail::layer_forward(*triple_, w, {start});
    auto bwd_a = detail::layer_backward(
        *triple_, Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n) + 1), {a});
    auto fwd_a = detail::layer_forward(
        *triple_, Word(w.begin() + static_cast<std::ptrdiff_t>(n), w.end()), {a});
    auto bwd_end = detail::layer_backward(*triple_, w, {end});
    auto allowed = [&](std::size_t i, Sym s) {
      if (i <= n) {
        if (!fwd_start[i][static_cast<std::size_t>(s)]) return false;
        if (!bwd_a[i][static_cast<std::size_t>(s)]) return false;
      }
      if (i >= n) {
        if (!fwd_a[i - n][static_cast<std::size_t>(s)]) return false;
      }
      return bwd_end[i][static_cast<std::size_t>(s)] != 0;
    };
    if (!allowed(0, start)) throw RoutingGap("endpoints cannot route through the symbol");
    Word out{start};
    for (std::size_t i = 1; i < len; ++i) {
      Sym chosen = -1;
      for (Sym s : triple_->preimages(w[i])) {
        if (!triple_->x.edge(out.back(), s)) continue;
        if (!allowed(i, s)) continue;
        chosen = s;
        break;  // preimages are sorted, first hit is lexicographically least
      }
      if (chosen < 0) throw RoutingGap("no continuation while building a routing block");
      out.push_back(chosen);
    }
    return out;
  }

  Word cross(const Word& u, const Word& v) {
    check_pair(u, v);
    Sym a = common_symbol(u, v);
    std::tuple<Sym, Sym, Sym> full_key{u.front(), v.back(), a};
    {
      std::lock_guard<std::mutex> lock(*mutex_);
      auto it = memo_.find(full_key);
      if (it != memo_.end()) return it->second;
    }
    Word path = least_path(u.front(), v.back(), a);
    std::lock_guard<std::mutex> lock(*mutex_);
    auto [it, _] = memo_.emplace(full_key, std::move(path));
    return it->second;
  }

  const FactorTriple* triple_;
  TransitionBlock tb_;
  detail::BlockRouter router_;
  std::map<std::tuple<Sym, Sym, Sym>, Word> memo_;
  std::unique_ptr<std::mutex> mutex_;
};

inline RoutingFunctions build_routing_functions(const FactorTriple& triple,
                                                const TransitionBlock& tb,
                                                const std::vector<std::pair<Word, Word>>&
                                                    support_pairs = {}) {
  RoutingFunctions rf(triple, tb);
  rf.prevalidate(support_pairs);
  return rf;
}

namespace detail {

/// z built from (xa, xb, t): before the first coin and on copy regions
/// after a coin, z copies xa when the governing label is 1 and xb when
/// it is 2; on the |w|-block at each coin it applies r^{prev cur}.
inline Word splice_one(const Word& xa, const Word& xb, const std::vector<int>& t,
                       const std::vector<long>& coins, int w_len, RoutingFunctions& routing) {
  long len = static_cast<long>(xa.size());
  Word z = xa;  // head convention: label 1 before the first coin
  for (std::size_t j = 0; j < coins.size(); ++j) {
    long i = coins[j];
    int prev = j == 0 ? 1 : t[static_cast<std::size_t>(coins[j - 1])];
    int cur = t[static_cast<std::size_t>(i)];
    if (i + w_len > len) throw RoutingGap("coin block exceeds the window");
    Word u(xa.begin() + i, xa.begin() + i + w_len);
    Word v(xb.begin() + i, xb.begin() + i + w_len);
    Word block = routing.apply(prev, cur, u, v);
    std::copy(block.begin(), block.end(), z.begin() + i);
    long stop = j + 1 < coins.size() ? coins[j + 1] : len;
    const Word& src = cur == 1 ? xa : xb;
    for (long k = i + w_len; k < stop; ++k)
      z[static_cast<std::size_t>(k)] = src[static_cast<std::size_t>(k)];
  }
  return z;
}

}  // namespace detail

/// The spliced pair (z, z'). z reads label 1 as "take from the first
/// path"; z' reads it as "take from the second path".
struct SplicedPair {
  Word z;
  Word z2;
  long first_coin = -1;  // stats should start at first_coin + |w|
};

inline SplicedPair splice(const JumpSample& sample, RoutingFunctions& routing) {
  const TransitionBlock& tb = routing.block();
  int w_len = static_cast<int>(tb.w.size());
  std::vector<long> coins = sample.coin_positions();
  SplicedPair out;
  if (coins.empty()) {
    out.z = sample.pair.x;
    out.z2 = sample.pair.x2;
    out.first_coin = -1;
    return out;
  }
  try {
    out.z = detail::splice_one(sample.pair.x, sample.pair.x2, sample.t, coins, w_len, routing);
    out.z2 = detail::splice_one(sample.pair.x2, sample.pair.x, sample.t, coins, w_len, routing);
  } catch (const NoCommonSymbol& e) {
    throw RoutingGap(std::string("routing functions do not cover an encountered pair: ") +
                     e.what());
  }
  out.first_coin = coins.front();
  return out;
}

/// Distinguishability of two measures through frequency classification
/// of windows of length N - w_len.
struct DistinguishabilityReport {
  double pstar = 0.0;
  double hstar = 0.0;
  double d = 0.0;  // |mu1(a) - mu2(a)|
  long trials = 0;
  long misses = 0;
  int window = 0;
  std::string separator;
};

/// Fraction of independent stationary window pairs falling outside
/// G1 x G2, where G_i collects windows whose empirical frequency of `a`
/// is within d/2 of mu_i(a); Hstar = Pstar log 2 + hp(min(Pstar, 1/2)).
inline DistinguishabilityReport distinguishability(const MarkovMeasure& mu1,
                                                   const MarkovMeasure& mu2, const Word& a_word,
                                                   int n_param, int w_len, long trials,
                                                   std::uint64_t seed, int workers = 1) {
  if (n_param <= w_len) throw DomainError("N must exceed the block length");
  long j_len = n_param - w_len;
  if (j_len < static_cast<long>(a_word.size()))
    throw DomainError("window shorter than the separator block");
  double f1 = word_probability(mu1, a_word);
  double f2 = word_probability(mu2, a_word);
  double d = std::abs(f1 - f2);
  if (d < 1e-12) throw DegenerateSeparator("mu1(a) = mu2(a); no separating block");

  long positions = j_len - static_cast<long>(a_word.size()) + 1;
  auto freq = [&](const Word& b) {
    long hits = 0;
    for (long i = 0; i + static_cast<long>(a_word.size()) <= static_cast<long>(b.size()); ++i)
      if (std::equal(a_word.begin(), a_word.end(), b.begin() + i)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(positions);
  };

  std::vector<char> miss(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, workers, [&](long t) {
    std::uint64_t s = Rng::derive(seed, static_cast<std::uint64_t>(t));
    Word b1 = sample_path(mu1, j_len, Rng::derive(s, 1));
    Word b2 = sample_path(mu2, j_len, Rng::derive(s, 2));
    bool in_g1 = std::abs(freq(b1) - f1) < d / 2.0;
    bool in_g2 = std::abs(freq(b2) - f2) < d / 2.0;
    miss[static_cast<std::size_t>(t)] = (in_g1 && in_g2) ? 0 : 1;
  });

  DistinguishabilityReport report;
  report.trials = trials;
  report.window = static_cast<int>(j_len);
  report.d = d;
  for (char m : miss) report.misses += m;
  report.pstar = static_cast<double>(report.misses) / static_cast<double>(trials);
  report.hstar = report.pstar * std::log(2.0) + hp(std::min(report.pstar, 0.5));
  return report;
}

/// Least X-block (shortest, then lexicographic) on which the two
/// measures disagree; empty when they agree on all blocks up to the
/// length cap.
inline std::optional<Word> choose_separator(const Sft& sft, const MarkovMeasure& mu1,
                                            const MarkovMeasure& mu2, int max_len = 3) {
  for (int len = 1; len <= max_len; ++len) {
    Word best;
    double best_gap = 1e-9;
    for (const Word& u : enumerate_blocks(sft, len)) {
      double gap = std::abs(word_probability(mu1, u) - word_probability(mu2, u));
      if (gap > best_gap) {
        best_gap = gap;
        best = u;
      }
    }
    if (!best.empty()) return best;
  }
  return std::nullopt;
}

/// Report for the jump-extension entropy identity.
struct JumpEntropyReport {
  double empirical = 0.0;
  double closed_form = 0.0;
  double gap = 0.0;
  double stderr_combined = 0.0;
  double h_x = 0.0;
  double h_x_stderr = 0.0;
  double h_t_given_x = 0.0;
  double h_t_stderr = 0.0;
  double mark_density = 0.0;
  long marks = 0;
  long path_len = 0;
};

namespace detail {

/// Conditional plug-in entropy of outcome given small integer contexts,
/// with a block bootstrap over positions.
struct ContextEntropy {
  double value = 0.0;
  double stderr_value = 0.0;
};

inline double context_entropy_from_counts(const std::map<std::pair<int, int>, long>& counts,
                                          long total) {
  std::map<int, long> ctx;
  for (const auto& [key, c] : counts) ctx[key.first] += c;
  double h = 0.0;
  for (const auto& [key, c] : counts)
    h += static_cast<double>(c) *
         std::log(static_cast<double>(ctx[key.first]) / static_cast<double>(c));
  return total > 0 ? h / static_cast<double>(total) : 0.0;
}

inline ContextEntropy context_entropy(const std::vector<int>& ctx, const std::vector<int>& out,
                                      long block_len, int resamples, std::uint64_t seed) {
  long n = static_cast<long>(ctx.size());
  std::map<std::pair<int, int>, long> counts;
  for (long i = 0; i < n; ++i) counts[{ctx[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(i)]}]++;
  ContextEntropy result;
  result.value = context_entropy_from_counts(counts, n);

  Rng rng(seed);
  long block = std::min(block_len, std::max<long>(1, n / 10));
  long nblocks = std::max<long>(1, n / block);
  std::vector<double> vals;
  for (int r = 0; r < resamples; ++r) {
    std::map<std::pair<int, int>, long> c;
    long total = 0;
    for (long b = 0; b < nblocks; ++b) {
      long start = static_cast<long>(rng.next_below(static_cast<std::uint64_t>(nblocks))) * block;
      long stop = std::min(n, start + block);
      for (long i = start; i < stop; ++i) {
        c[{ctx[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(i)]}]++;
        ++total;
      }
    }
    if (total > 0) vals.push_back(context_entropy_from_counts(c, total));
  }
  if (vals.size() >= 2) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size() - 1);
    result.stderr_value = std::sqrt(var);
  }
  return result;
}

}  // namespace detail

/// Checks h(joint) = h(mu) + mu(A) h(eta) on a sampled path. The joint
/// entropy is estimated as h(x) by windowed plug-in plus H(t | renewal
/// context), where the context is (current position marked?, marks
/// since the last coin, last coin value) -- a statistic of the sampled
/// pair only, so the identity is tested, not assumed.
inline JumpEntropyReport jump_entropy_check(const MarkovMeasure& mu, const Word& a_word,
                                            const EtaParams& params, long path_len,
                                            std::uint64_t seed,
                                            const EntropyOptions& entropy_opts = {}) {
  params.validate();
  if (!(word_probability(mu, a_word) > 0.0))
    throw TooFewMarks("the marking block has zero measure");
  Word x = sample_path(mu, path_len, Rng::derive(seed, 1));
  std::vector<long> marks = mark_occurrences(x, a_word);
  if (marks.size() < 2) throw TooFewMarks("fewer than two marks in the sampled path");
  std::vector<int> t = attach_labels(path_len, marks, params, Rng::derive(seed, 2));

  JumpEntropyReport report;
  report.path_len = path_len;
  report.marks = static_cast<long>(marks.size());
  report.mark_density = static_cast<double>(marks.size()) / static_cast<double>(path_len);

  EntropyEstimate hx = empirical_entropy(x, mu.sft.size(), entropy_opts);
  report.h_x = hx.value;
  report.h_x_stderr = hx.stderr_value;

  // renewal contexts: (marked?, capped marks-since-last-coin, last coin)
  std::vector<char> is_mark(static_cast<std::size_t>(path_len), 0);
  for (long m : marks) is_mark[static_cast<std::size_t>(m)] = 1;
  std::vector<int> ctx(static_cast<std::size_t>(path_len), 0);
  std::vector<int> outcome(static_cast<std::size_t>(path_len), 0);
  const int phase_cap = 4 * params.n + 2;
  int phase = phase_cap;  // unknown until the first coin
  int last_coin = 0;
  for (long i = 0; i < path_len; ++i) {
    int marked = is_mark[static_cast<std::size_t>(i)];
    ctx[static_cast<std::size_t>(i)] = (std::min(phase, phase_cap) * 3 + last_coin) * 2 + marked;
    outcome[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i)];
    if (t[static_cast<std::size_t>(i)] == 1 || t[static_cast<std::size_t>(i)] == 2) {
      phase = 0;
      last_coin = t[static_cast<std::size_t>(i)];
    } else if (marked) {
      phase = std::min(phase + 1, phase_cap);
    }
  }
  auto h_t = detail::context_entropy(ctx, outcome, 1000, 50, Rng::derive(seed, 3));
  report.h_t_given_x = h_t.value;
  report.h_t_stderr = h_t.stderr_value;

  report.empirical = report.h_x + report.h_t_given_x;
  report.closed_form =
      entropy(mu) + word_probability(mu, a_word) * hp(params.p) / static_cast<double>(params.n);
  report.gap = report.empirical - report.closed_form;
  report.stderr_combined = std::sqrt(hx.stderr_value * hx.stderr_value +
                                     h_t.stderr_value * h_t.stderr_value);
  return report;
}

}  // namespace classdeg
