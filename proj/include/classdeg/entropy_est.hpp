#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "classdeg/errors.hpp"
#include "classdeg/rng.hpp"
#include "classdeg/shift.hpp"

namespace classdeg {

/// A point estimate of an entropy rate in nats/symbol.
struct EntropyEstimate {
  double value = 0.0;
  double stderr_value = 0.0;
  std::string method;  // "plug-in-k" or "lz76"
  int k = 0;           // context length for plug-in estimates
  long n = 0;          // positions used
};

struct EntropyOptions {
  std::vector<int> k_schedule{4, 6, 8, 10};
  long bootstrap_block = 1000;
  int bootstrap_resamples = 50;
  std::uint64_t bootstrap_seed = 0x5EEDB00757ULL;
  bool miller_madow = false;
  /// k is admissible when (n - k) >= context_factor * (#observed k-contexts).
  double context_factor = 20.0;
};

namespace detail {

/// Conditional plug-in entropy from (k+1)-gram counts keyed so that
/// key / alphabet = the k-context key.
struct GramCounts {
  std::unordered_map<std::uint64_t, long> grams;
  long total = 0;

  void add(std::uint64_t g, long c = 1) {
    grams[g] += c;
    total += c;
  }

  double conditional_entropy(int alphabet, bool miller_madow) const {
    std::unordered_map<std::uint64_t, long> ctx;
    ctx.reserve(grams.size());
    for (const auto& [g, c] : grams) ctx[g / static_cast<std::uint64_t>(alphabet)] += c;
    double h = 0.0;
    for (const auto& [g, c] : grams) {
      long cc = ctx[g / static_cast<std::uint64_t>(alphabet)];
      h += static_cast<double>(c) * std::log(static_cast<double>(cc) / static_cast<double>(c));
    }
    h /= static_cast<double>(total);
    if (miller_madow && total > 0)
      h += static_cast<double>(static_cast<long>(grams.size()) - static_cast<long>(ctx.size())) /
           (2.0 * static_cast<double>(total));
    return h;
  }

  long context_count(int alphabet) const {
    std::unordered_map<std::uint64_t, char> ctx;
    ctx.reserve(grams.size());
    for (const auto& [g, _] : grams) ctx[g / static_cast<std::uint64_t>(alphabet)] = 1;
    return static_cast<long>(ctx.size());
  }
};

inline bool gram_code_fits(int alphabet, int gram_len) {
  long double cap = 1.0L;
  for (int i = 0; i < gram_len; ++i) {
    cap *= alphabet;
    if (cap > 9.2e18L) return false;
  }
  return true;
}

/// (k+1)-gram counts of `word`; the last symbol is the least
/// significant digit, so code / alphabet is the context code.
inline GramCounts count_grams(const Word& word, int alphabet, int k) {
  GramCounts out;
  const std::uint64_t a = static_cast<std::uint64_t>(alphabet);
  std::uint64_t modulus = 1;
  for (int i = 0; i < k; ++i) modulus *= a;
  std::uint64_t code = 0;
  for (long i = 0; i < static_cast<long>(word.size()); ++i) {
    code = (code % modulus) * a + static_cast<std::uint64_t>(word[static_cast<std::size_t>(i)]);
    if (i >= k) out.add(code);
  }
  return out;
}

/// Gram counts over a chosen multiset of bootstrap blocks.
inline GramCounts count_grams_blocks(const Word& word, int alphabet, int k,
                                     const std::vector<long>& block_starts, long block_len) {
  GramCounts out;
  const std::uint64_t a = static_cast<std::uint64_t>(alphabet);
  std::uint64_t modulus = 1;
  for (int i = 0; i < k; ++i) modulus *= a;
  long n = static_cast<long>(word.size());
  for (long start : block_starts) {
    long lo = start;
    long hi = std::min(n, start + block_len);
    std::uint64_t code = 0;
    for (long i = lo; i < hi; ++i) {
      code = (code % modulus) * a + static_cast<std::uint64_t>(word[static_cast<std::size_t>(i)]);
      if (i - lo >= k) out.add(code);
    }
  }
  return out;
}

inline std::vector<long> bootstrap_block_starts(long n, long block_len, Rng& rng) {
  long nblocks = std::max<long>(1, n / block_len);
  std::vector<long> starts;
  starts.reserve(static_cast<std::size_t>(nblocks));
  for (long b = 0; b < nblocks; ++b)
    starts.push_back(static_cast<long>(rng.next_below(static_cast<std::uint64_t>(nblocks))) * block_len);
  return starts;
}

}  // namespace detail

/// Largest k in the schedule whose observed contexts satisfy the data
/// rule; the rule counts observed contexts, not alphabet^k, so sparse
/// processes admit long contexts.
inline int admissible_k(const Word& word, int alphabet, const EntropyOptions& opts) {
  long n = static_cast<long>(word.size());
  int chosen = -1;
  for (int k : opts.k_schedule) {
    if (k < 0 || n <= k) break;
    if (!detail::gram_code_fits(alphabet, k + 1)) break;
    detail::GramCounts counts = detail::count_grams(word, alphabet, k);
    long contexts = counts.context_count(alphabet);
    if (static_cast<double>(n - k) < opts.context_factor * static_cast<double>(contexts)) break;
    chosen = k;
  }
  if (chosen < 0)
    throw InsufficientData("word of length " + std::to_string(n) +
                           " is too short for the requested context schedule");
  return chosen;
}

/// Plug-in conditional entropy H(x_0 | x_{-k..-1}) at the largest
/// admissible k, with a block-bootstrap standard error.
inline EntropyEstimate empirical_entropy(const Word& word, int alphabet,
                                         const EntropyOptions& opts = {}) {
  if (alphabet < 1) throw DomainError("alphabet size must be >= 1");
  for (Sym s : word)
    if (s < 0 || s >= alphabet) throw UnknownSymbol("symbol outside the declared alphabet");
  int k = admissible_k(word, alphabet, opts);
  detail::GramCounts counts = detail::count_grams(word, alphabet, k);

  EntropyEstimate est;
  est.method = "plug-in-k";
  est.k = k;
  est.n = counts.total;
  est.value = counts.conditional_entropy(alphabet, opts.miller_madow);

  long n = static_cast<long>(word.size());
  long block = std::min(opts.bootstrap_block, std::max<long>(1, n / 10));
  Rng rng(opts.bootstrap_seed);
  std::vector<double> resampled;
  resampled.reserve(static_cast<std::size_t>(opts.bootstrap_resamples));
  for (int r = 0; r < opts.bootstrap_resamples; ++r) {
    auto starts = detail::bootstrap_block_starts(n, block, rng);
    detail::GramCounts c = detail::count_grams_blocks(word, alphabet, k, starts, block);
    if (c.total > 0) resampled.push_back(c.conditional_entropy(alphabet, opts.miller_madow));
  }
  if (resampled.size() >= 2) {
    double mean = 0.0;
    for (double v : resampled) mean += v;
    mean /= static_cast<double>(resampled.size());
    double var = 0.0;
    for (double v : resampled) var += (v - mean) * (v - mean);
    var /= static_cast<double>(resampled.size() - 1);
    est.stderr_value = std::sqrt(var);
  }
  return est;
}

/// LZ76 cross-estimate: c(n) log(n) / n nats, by Kaspar-Schuster parsing.
inline EntropyEstimate lz76_entropy(const Word& word, int alphabet) {
  long n = static_cast<long>(word.size());
  if (n < 2) throw InsufficientData("LZ76 needs at least 2 symbols");
  long c = 1;
  long i = 0, k = 1, l = 1;
  long k_max = 1;
  while (true) {
    if (word[static_cast<std::size_t>(i + k - 1)] == word[static_cast<std::size_t>(l + k - 1)]) {
      ++k;
      if (l + k > n) {
        ++c;
        break;
      }
    } else {
      k_max = std::max(k_max, k);
      ++i;
      if (i == l) {
        ++c;
        l += k_max;
        if (l + 1 > n) break;
        i = 0;
        k = 1;
        k_max = 1;
      } else {
        k = 1;
      }
    }
  }
  EntropyEstimate est;
  est.method = "lz76";
  est.n = n;
  est.value = static_cast<double>(c) * std::log(static_cast<double>(n)) / static_cast<double>(n);
  est.stderr_value = 0.0;
  (void)alphabet;
  return est;
}

/// Pointwise product word over alphabet |a| * |b|.
inline Word zip_words(const Word& a, int, const Word& b, int b_alphabet) {
  if (a.size() != b.size()) throw SymbolMismatch("zipped words must have equal length");
  Word out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.push_back(a[i] * b_alphabet + b[i]);
  return out;
}

/// Relative entropy estimate h(joint) - h(factor) at matched k,
/// clamped at 0, with the difference bootstrapped on aligned blocks.
inline EntropyEstimate relative_entropy_estimate(const Word& joint, int joint_alphabet,
                                                 const Word& factor, int factor_alphabet,
                                                 const EntropyOptions& opts = {}) {
  if (joint.size() != factor.size())
    throw SymbolMismatch("joint and factor words must have equal length");
  int k = std::min(admissible_k(joint, joint_alphabet, opts),
                   admissible_k(factor, factor_alphabet, opts));
  detail::GramCounts cj = detail::count_grams(joint, joint_alphabet, k);
  detail::GramCounts cf = detail::count_grams(factor, factor_alphabet, k);

  EntropyEstimate est;
  est.method = "plug-in-k";
  est.k = k;
  est.n = cj.total;
  est.value = std::max(0.0, cj.conditional_entropy(joint_alphabet, opts.miller_madow) -
                                cf.conditional_entropy(factor_alphabet, opts.miller_madow));

  long n = static_cast<long>(joint.size());
  long block = std::min(opts.bootstrap_block, std::max<long>(1, n / 10));
  Rng rng(opts.bootstrap_seed);
  std::vector<double> resampled;
  for (int r = 0; r < opts.bootstrap_resamples; ++r) {
    auto starts = detail::bootstrap_block_starts(n, block, rng);
    detail::GramCounts rj = detail::count_grams_blocks(joint, joint_alphabet, k, starts, block);
    detail::GramCounts rf = detail::count_grams_blocks(factor, factor_alphabet, k, starts, block);
    if (rj.total > 0 && rf.total > 0)
      resampled.push_back(rj.conditional_entropy(joint_alphabet, opts.miller_madow) -
                          rf.conditional_entropy(factor_alphabet, opts.miller_madow));
  }
  if (resampled.size() >= 2) {
    double mean = 0.0;
    for (double v : resampled) mean += v;
    mean /= static_cast<double>(resampled.size());
    double var = 0.0;
    for (double v : resampled) var += (v - mean) * (v - mean);
    var /= static_cast<double>(resampled.size() - 1);
    est.stderr_value = std::sqrt(var);
  }
  return est;
}

}  // namespace classdeg
