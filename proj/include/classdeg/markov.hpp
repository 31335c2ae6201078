#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "classdeg/errors.hpp"
#include "classdeg/rng.hpp"
#include "classdeg/shift.hpp"

namespace classdeg {

inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kPerronResidual = 1e-13;

/// H_p = -p log p - (1-p) log(1-p), in nats, with 0 log 0 = 0.
inline double hp(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("hp requires p in [0,1]");
  double out = 0.0;
  if (p > 0.0) out -= p * std::log(p);
  if (p < 1.0) out -= (1.0 - p) * std::log(1.0 - p);
  return out;
}

/// H(x|y) <= Pr(E) log K when x is a function of y off E and one of K
/// functions of y on E, with E measurable from y.
inline double bound_good(int k_functions, double pr_e) {
  if (k_functions < 1) throw DomainError("bound_good requires K >= 1");
  if (!(pr_e >= 0.0 && pr_e <= 1.0)) throw DomainError("bound_good requires Pr(E) in [0,1]");
  return pr_e * std::log(static_cast<double>(k_functions));
}

/// Same setup with E arbitrary: H(x|y) <= Pr(E) log K + H_{Pr(E)}.
inline double bound_bad(int k_functions, double pr_e) {
  return bound_good(k_functions, pr_e) + hp(pr_e);
}

/// Stationary Markov measure on a 1-step SFT.
struct MarkovMeasure {
  Sft sft;
  std::vector<std::vector<double>> transition;  // row-stochastic, support in allowed pairs
  std::vector<double> stationary;               // stationary * transition = stationary

  double prob(Sym a, Sym b) const {
    return transition[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
};

inline void validate_measure(const MarkovMeasure& mu) {
  int n = mu.sft.size();
  if (static_cast<int>(mu.transition.size()) != n ||
      static_cast<int>(mu.stationary.size()) != n)
    throw IllegalMeasure("matrix dimensions do not match the alphabet");
  double stat_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& row = mu.transition[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != n)
      throw IllegalMeasure("transition matrix is not square");
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double p = row[static_cast<std::size_t>(j)];
      if (p < 0.0) throw IllegalMeasure("negative transition probability");
      if (p > 0.0 && !mu.sft.edge(i, j))
        throw IllegalMeasure("transition mass outside the allowed pairs");
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > kStochasticTol)
      throw IllegalMeasure("transition row does not sum to 1");
    if (mu.stationary[static_cast<std::size_t>(i)] < 0.0)
      throw IllegalMeasure("negative stationary mass");
    stat_sum += mu.stationary[static_cast<std::size_t>(i)];
  }
  if (std::abs(stat_sum - 1.0) > kStochasticTol)
    throw IllegalMeasure("stationary vector does not sum to 1");
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += mu.stationary[static_cast<std::size_t>(i)] * mu.prob(i, j);
    if (std::abs(acc - mu.stationary[static_cast<std::size_t>(j)]) > 1e-9)
      throw IllegalMeasure("vector is not stationary for the transition matrix");
  }
}

inline MarkovMeasure make_markov_measure(Sft sft,
                                         std::vector<std::vector<double>> transition,
                                         std::vector<double> stationary) {
  MarkovMeasure mu{std::move(sft), std::move(transition), std::move(stationary)};
  validate_measure(mu);
  return mu;
}

namespace detail {

struct PerronData {
  double rho = 0.0;
  std::vector<double> right;
  std::vector<double> left;
};

/// Power iteration for the Perron eigenpair of a nonnegative matrix
/// whose support is strongly connected and aperiodic.
inline PerronData perron(const std::vector<std::vector<double>>& m) {
  int n = static_cast<int>(m.size());
  auto iterate = [n](auto mult) {
    std::vector<double> v(static_cast<std::size_t>(n), 1.0 / n);
    for (long iter = 0; iter < 2'000'000; ++iter) {
      std::vector<double> w = mult(v);
      double rho = 0.0;
      for (double x : w) rho += x;
      if (!(rho > 0.0)) throw NotIrreducible("matrix iterate vanished");
      for (double& x : w) x /= rho;
      std::vector<double> ww = mult(w);
      double residual = 0.0;
      for (int i = 0; i < n; ++i)
        residual = std::max(residual, std::abs(ww[static_cast<std::size_t>(i)] - rho * w[static_cast<std::size_t>(i)]));
      v.swap(w);
      if (residual <= kPerronResidual * std::max(1.0, rho)) return std::make_pair(rho, v);
    }
    throw DomainError("Perron power iteration did not reach the residual target");
  };
  auto mult_right = [&m, n](const std::vector<double>& v) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(i)] += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
    return out;
  };
  auto mult_left = [&m, n](const std::vector<double>& v) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(j)] += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(i)];
    return out;
  };
  PerronData out;
  auto [rho_r, right] = iterate(mult_right);
  auto [rho_l, left] = iterate(mult_left);
  out.rho = 0.5 * (rho_r + rho_l);
  out.right = std::move(right);
  out.left = std::move(left);
  return out;
}

inline void require_aperiodic_irreducible(const Sft& sft) {
  if (!sft.irreducible)
    throw NotIrreducible("transition graph is not strongly connected");
  if (sft.period > 1)
    throw NotIrreducible("transition graph has period " + std::to_string(sft.period) +
                         "; power iteration cannot converge");
}

}  // namespace detail

/// The measure of maximal entropy: P_ij = A_ij r_j / (rho r_i) from the
/// Perron eigenpair of the 0/1 transition matrix.
inline MarkovMeasure parry_measure(const Sft& sft) {
  detail::require_aperiodic_irreducible(sft);
  int n = sft.size();
  std::vector<std::vector<double>> a(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (sft.edge(i, j)) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1.0;
  auto pd = detail::perron(a);
  std::vector<std::vector<double>> p(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<double> pi(static_cast<std::size_t>(n), 0.0);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += pd.left[static_cast<std::size_t>(i)] * pd.right[static_cast<std::size_t>(i)];
  for (int i = 0; i < n; ++i) {
    pi[static_cast<std::size_t>(i)] = pd.left[static_cast<std::size_t>(i)] * pd.right[static_cast<std::size_t>(i)] / z;
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!sft.edge(i, j)) continue;
      p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          pd.right[static_cast<std::size_t>(j)] / (pd.rho * pd.right[static_cast<std::size_t>(i)]);
      row += p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= row;
  }
  return make_markov_measure(sft, std::move(p), std::move(pi));
}

/// Finite-range potential: a table of values (nats) on legal range-k
/// blocks, plus its variation sequence (var_j = 0 for j >= k, recorded
/// explicitly so summability is an interface fact).
struct Potential {
  int range = 1;
  std::map<Word, double> table;
  std::vector<double> variation;  // var_0 .. var_{range-1}

  double value(const Word& u) const {
    if (static_cast<int>(u.size()) != range)
      throw IndexOutOfRange("potential applied to a block of the wrong length");
    auto it = table.find(u);
    return it == table.end() ? 0.0 : it->second;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& [_, v] : table) m = std::max(m, std::abs(v));
    return m;
  }

  double variation_tail_sum() const {  // sum_{j >= 1} var_j
    double s = 0.0;
    for (std::size_t j = 1; j < variation.size(); ++j) s += variation[j];
    return s;
  }
};

/// Builds a potential over the legal k-blocks of `sft`. Blocks missing
/// from `table` get value 0; entries on illegal blocks are rejected.
inline Potential make_potential(const Sft& sft, int range, std::map<Word, double> table) {
  if (range < 1) throw DomainError("potential range must be >= 1");
  for (const auto& [u, _] : table) {
    if (static_cast<int>(u.size()) != range)
      throw IllegalWord("potential table key of the wrong length");
    sft.require_legal(u);
  }
  Potential v{range, std::move(table), {}};
  std::vector<Word> blocks = enumerate_blocks(sft, range);
  v.variation.assign(static_cast<std::size_t>(range), 0.0);
  for (int j = 0; j < range; ++j) {
    double worst = 0.0;
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      for (std::size_t b = a + 1; b < blocks.size(); ++b) {
        if (!std::equal(blocks[a].begin(), blocks[a].begin() + j, blocks[b].begin())) continue;
        worst = std::max(worst, std::abs(v.value(blocks[a]) - v.value(blocks[b])));
      }
    }
    v.variation[static_cast<std::size_t>(j)] = worst;
  }
  return v;
}

/// -sum_i pi_i sum_j P_ij log P_ij, in nats per symbol.
inline double entropy(const MarkovMeasure& mu) {
  double h = 0.0;
  int n = mu.sft.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double p = mu.prob(i, j);
      if (p > 0.0) h -= mu.stationary[static_cast<std::size_t>(i)] * p * std::log(p);
    }
  }
  return h;
}

/// mu(u) as a product of stationary start and transition steps.
inline double word_probability(const MarkovMeasure& mu, const Word& u) {
  mu.sft.require_legal(u);
  if (u.empty()) return 1.0;
  double p = mu.stationary[static_cast<std::size_t>(u[0])];
  for (std::size_t i = 0; i + 1 < u.size(); ++i) p *= mu.prob(u[i], u[i + 1]);
  return p;
}

/// h(mu) + integral of V, with the integral summed over legal k-blocks.
inline double pressure_value(const MarkovMeasure& mu, const Potential& v) {
  double integral = 0.0;
  for (const Word& u : enumerate_blocks(mu.sft, v.range))
    integral += word_probability(mu, u) * v.value(u);
  return entropy(mu) + integral;
}

/// Equilibrium state of a finite-range potential, as a Markov measure
/// on the max(k-1, 1)-block presentation, together with the pressure.
struct EquilibriumState {
  MarkovMeasure measure;
  double pressure = 0.0;
  int block_len = 1;
  std::vector<Word> block_contents;  // block symbol -> original word
};

inline EquilibriumState equilibrium_state(const Sft& sft, const Potential& v) {
  detail::require_aperiodic_irreducible(sft);
  int m = std::max(v.range - 1, 1);

  std::vector<Word> states = enumerate_blocks(sft, m);
  int n = static_cast<int>(states.size());
  std::vector<std::string> names;
  names.reserve(states.size());
  for (const Word& u : states) names.push_back(detail::join_block_name(sft.alphabet, u));

  std::vector<std::vector<double>> weight(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Word& u = states[static_cast<std::size_t>(i)];
      const Word& w = states[static_cast<std::size_t>(j)];
      if (m > 1 && !std::equal(u.begin() + 1, u.end(), w.begin())) continue;
      Word joined = u;
      joined.push_back(w.back());
      if (!sft.legal_word(joined)) continue;
      Word v_arg(joined.begin(), joined.begin() + v.range);
      weight[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::exp(v.value(v_arg));
      edges.emplace_back(names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(j)]);
    }
  }

  auto pd = detail::perron(weight);
  std::vector<std::vector<double>> p(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<double> pi(static_cast<std::size_t>(n), 0.0);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += pd.left[static_cast<std::size_t>(i)] * pd.right[static_cast<std::size_t>(i)];
  for (int i = 0; i < n; ++i) {
    pi[static_cast<std::size_t>(i)] = pd.left[static_cast<std::size_t>(i)] * pd.right[static_cast<std::size_t>(i)] / z;
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      double l = weight[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (l <= 0.0) continue;
      p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          l * pd.right[static_cast<std::size_t>(j)] / (pd.rho * pd.right[static_cast<std::size_t>(i)]);
      row += p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= row;
  }

  EquilibriumState out;
  out.pressure = std::log(pd.rho);
  out.block_len = m;
  out.block_contents = std::move(states);
  if (m == 1) {
    out.measure = make_markov_measure(sft, std::move(p), std::move(pi));
  } else {
    // Nothing is pruned here (the language is essential), but build_sft
    // sorts names, so permute the matrices to its alphabet order.
    Sft block_sft = build_sft(names, edges);
    int bn = block_sft.size();
    std::vector<int> to_new(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
      to_new[static_cast<std::size_t>(i)] = block_sft.alphabet.index_of(names[static_cast<std::size_t>(i)]);
    std::vector<std::vector<double>> p2(static_cast<std::size_t>(bn),
                                        std::vector<double>(static_cast<std::size_t>(bn), 0.0));
    std::vector<double> pi2(static_cast<std::size_t>(bn), 0.0);
    std::vector<Word> contents2(static_cast<std::size_t>(bn));
    for (int i = 0; i < n; ++i) {
      pi2[static_cast<std::size_t>(to_new[static_cast<std::size_t>(i)])] = pi[static_cast<std::size_t>(i)];
      contents2[static_cast<std::size_t>(to_new[static_cast<std::size_t>(i)])] =
          out.block_contents[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j)
        p2[static_cast<std::size_t>(to_new[static_cast<std::size_t>(i)])]
          [static_cast<std::size_t>(to_new[static_cast<std::size_t>(j)])] =
            p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    out.block_contents = std::move(contents2);
    out.measure = make_markov_measure(std::move(block_sft), std::move(p2), std::move(pi2));
  }
  return out;
}

/// Stationary sample of a Markov path, bit-reproducible for a seed.
inline Word sample_path(const MarkovMeasure& mu, long length, std::uint64_t seed) {
  if (length < 1) throw DomainError("path length must be >= 1");
  Rng rng(seed);
  Word out;
  out.reserve(static_cast<std::size_t>(length));
  int cur = rng.next_categorical(mu.stationary);
  out.push_back(cur);
  for (long i = 1; i < length; ++i) {
    cur = rng.next_categorical(mu.transition[static_cast<std::size_t>(cur)]);
    out.push_back(cur);
  }
  return out;
}

/// nu(w) = sum over preimage words of mu(u), by forward products over
/// the preimage symbol layers. Positivity of nu(w) is decided by the
/// boolean support version, never by sampling.
struct PushforwardMeasure {
  MarkovMeasure source;
  FactorTriple triple;

  double word_probability(const Word& w) const {
    if (w.empty()) return 1.0;
    for (Sym ys : w)
      if (ys < 0 || ys >= triple.y_alphabet.size())
        throw UnknownSymbol("Y word uses a symbol outside the image alphabet");
    int n = triple.x.size();
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    for (Sym xs : triple.preimages(w[0]))
      alpha[static_cast<std::size_t>(xs)] = source.stationary[static_cast<std::size_t>(xs)];
    for (std::size_t i = 1; i < w.size(); ++i) {
      std::vector<double> next(static_cast<std::size_t>(n), 0.0);
      for (Sym xs : triple.preimages(w[i]))
        for (Sym p : triple.x.pred[static_cast<std::size_t>(xs)])
          next[static_cast<std::size_t>(xs)] += alpha[static_cast<std::size_t>(p)] * source.prob(p, xs);
      alpha.swap(next);
    }
    double total = 0.0;
    for (double a : alpha) total += a;
    return total;
  }

  /// Exact support decision: nu(w) > 0.
  bool positive(const Word& w) const {
    if (w.empty()) return true;
    int n = triple.x.size();
    std::vector<char> cur(static_cast<std::size_t>(n), 0);
    for (Sym xs : triple.preimages(w[0]))
      if (source.stationary[static_cast<std::size_t>(xs)] > 0.0) cur[static_cast<std::size_t>(xs)] = 1;
    bool any = false;
    for (char c : cur) any = any || c;
    if (!any) return false;
    for (std::size_t i = 1; i < w.size(); ++i) {
      std::vector<char> next(static_cast<std::size_t>(n), 0);
      any = false;
      for (Sym xs : triple.preimages(w[i])) {
        for (Sym p : triple.x.pred[static_cast<std::size_t>(xs)]) {
          if (cur[static_cast<std::size_t>(p)] && source.prob(p, xs) > 0.0) {
            next[static_cast<std::size_t>(xs)] = 1;
            any = true;
            break;
          }
        }
      }
      if (!any) return false;
      cur.swap(next);
    }
    return true;
  }
};

inline double nu_word_probability(const PushforwardMeasure& nu, const Word& w) {
  return nu.word_probability(w);
}

/// Exact draw from mu conditioned on the image word: backward
/// accumulation of preimage-layer mass, then forward sampling. Marginals
/// match the conditional law exactly (up to float rounding).
inline Word conditional_sample(const MarkovMeasure& mu, const FactorTriple& triple,
                               const Word& y, Rng& rng) {
  if (y.empty()) return {};
  int n = triple.x.size();
  std::size_t len = y.size();
  for (Sym ys : y)
    if (ys < 0 || ys >= triple.y_alphabet.size())
      throw UnknownSymbol("Y word uses a symbol outside the image alphabet");

  // beta[i][s] proportional to the mass of completions from symbol s at
  // position i; scaled per layer to avoid underflow.
  std::vector<std::vector<double>> beta(len, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (Sym xs : triple.preimages(y[len - 1])) beta[len - 1][static_cast<std::size_t>(xs)] = 1.0;
  for (std::size_t i = len - 1; i > 0; --i) {
    double scale = 0.0;
    for (Sym xs : triple.preimages(y[i - 1])) {
      double acc = 0.0;
      for (Sym s : triple.x.succ[static_cast<std::size_t>(xs)])
        acc += mu.prob(xs, s) * beta[i][static_cast<std::size_t>(s)];
      beta[i - 1][static_cast<std::size_t>(xs)] = acc;
      scale = std::max(scale, acc);
    }
    if (scale <= 0.0) throw ZeroMassWord("image word has zero mass under the measure");
    for (Sym xs : triple.preimages(y[i - 1])) beta[i - 1][static_cast<std::size_t>(xs)] /= scale;
  }

  std::vector<double> w0(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (Sym xs : triple.preimages(y[0])) {
    w0[static_cast<std::size_t>(xs)] =
        mu.stationary[static_cast<std::size_t>(xs)] * beta[0][static_cast<std::size_t>(xs)];
    total += w0[static_cast<std::size_t>(xs)];
  }
  if (!(total > 0.0)) throw ZeroMassWord("image word has zero mass under the measure");

  Word out;
  out.reserve(len);
  out.push_back(rng.next_categorical(w0));
  for (std::size_t i = 1; i < len; ++i) {
    std::vector<double> wi(static_cast<std::size_t>(n), 0.0);
    double layer_total = 0.0;
    for (Sym xs : triple.preimages(y[i])) {
      wi[static_cast<std::size_t>(xs)] =
          mu.prob(out.back(), xs) * beta[i][static_cast<std::size_t>(xs)];
      layer_total += wi[static_cast<std::size_t>(xs)];
    }
    if (!(layer_total > 0.0)) throw ZeroMassWord("conditional sampling reached a dead end");
    out.push_back(rng.next_categorical(wi));
  }
  return out;
}

inline Word conditional_sample(const MarkovMeasure& mu, const FactorTriple& triple,
                               const Word& y, std::uint64_t seed) {
  Rng rng(seed);
  return conditional_sample(mu, triple, y, rng);
}

}  // namespace classdeg
