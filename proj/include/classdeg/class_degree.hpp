#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "classdeg/errors.hpp"
#include "classdeg/markov.hpp"
#include "classdeg/parallel.hpp"
#include "classdeg/shift.hpp"

namespace classdeg {

/// (w, n, M): a Y-word, a time in it, and a set of X-symbols over w_n
/// through which every preimage word of w can be routed. depth = |M|.
struct TransitionBlock {
  Word w;
  int n = 0;
  std::vector<Sym> m;

  int depth() const { return static_cast<int>(m.size()); }
};

/// Certificate for a transition block: each preimage word of w mapped
/// to the subset of M through which it is routable at time n.
struct RoutingTable {
  std::vector<std::pair<Word, std::vector<Sym>>> entries;
};

struct MinimalBlockResult {
  TransitionBlock block;
  RoutingTable certificate;
};

namespace detail {

/// Reachable X-symbol sets per layer of the preimage graph of w,
/// seeded at layer `from` with `starts`.
inline std::vector<std::vector<char>> layer_forward(const FactorTriple& t, const Word& w,
                                                    const std::vector<Sym>& starts) {
  std::size_t len = w.size();
  int n = t.x.size();
  std::vector<std::vector<char>> fwd(len, std::vector<char>(static_cast<std::size_t>(n), 0));
  for (Sym s : starts)
    if (t.code_of(s) == w[0]) fwd[0][static_cast<std::size_t>(s)] = 1;
  for (std::size_t i = 1; i < len; ++i) {
    for (Sym xs : t.preimages(w[i])) {
      for (Sym p : t.x.pred[static_cast<std::size_t>(xs)]) {
        if (fwd[i - 1][static_cast<std::size_t>(p)]) {
          fwd[i][static_cast<std::size_t>(xs)] = 1;
          break;
        }
      }
    }
  }
  return fwd;
}

inline std::vector<std::vector<char>> layer_backward(const FactorTriple& t, const Word& w,
                                                     const std::vector<Sym>& ends) {
  std::size_t len = w.size();
  int n = t.x.size();
  std::vector<std::vector<char>> bwd(len, std::vector<char>(static_cast<std::size_t>(n), 0));
  for (Sym s : ends)
    if (t.code_of(s) == w[len - 1]) bwd[len - 1][static_cast<std::size_t>(s)] = 1;
  for (std::size_t i = len - 1; i > 0; --i) {
    for (Sym xs : t.preimages(w[i - 1])) {
      for (Sym q : t.x.succ[static_cast<std::size_t>(xs)]) {
        if (bwd[i][static_cast<std::size_t>(q)]) {
          bwd[i - 1][static_cast<std::size_t>(xs)] = 1;
          break;
        }
      }
    }
  }
  return bwd;
}

/// Per-word reachability data reused across times n and candidate sets.
/// Preimage words of w are abstracted by their endpoint pairs (s, e):
/// routability of u through a at n depends only on u_0 and u_last.
struct WordReach {
  std::vector<Sym> starts;                            // preimages of w_0 with completions
  std::vector<std::vector<std::vector<char>>> fwd;    // by start index
  std::vector<Sym> ends;                              // preimages of w_last with ancestors
  std::vector<std::vector<std::vector<char>>> bwd;    // by end index
  std::vector<std::pair<int, int>> elements;          // realizable (start idx, end idx)

  WordReach(const FactorTriple& t, const Word& w) {
    std::size_t len = w.size();
    for (Sym s : t.preimages(w[0])) {
      auto f = layer_forward(t, w, {s});
      bool any = false;
      for (int e = 0; e < t.x.size(); ++e) any = any || f[len - 1][static_cast<std::size_t>(e)];
      if (!any) continue;
      starts.push_back(s);
      fwd.push_back(std::move(f));
    }
    for (Sym e : t.preimages(w[len - 1])) {
      auto b = layer_backward(t, w, {e});
      bool any = false;
      for (int s = 0; s < t.x.size(); ++s) any = any || b[0][static_cast<std::size_t>(s)];
      if (!any) continue;
      ends.push_back(e);
      bwd.push_back(std::move(b));
    }
    for (std::size_t si = 0; si < starts.size(); ++si)
      for (std::size_t ei = 0; ei < ends.size(); ++ei)
        if (fwd[si][len - 1][static_cast<std::size_t>(ends[ei])])
          elements.emplace_back(static_cast<int>(si), static_cast<int>(ei));
  }

  bool routes(int si, int ei, Sym a, int n) const {
    return fwd[static_cast<std::size_t>(si)][static_cast<std::size_t>(n)][static_cast<std::size_t>(a)] &&
           bwd[static_cast<std::size_t>(ei)][static_cast<std::size_t>(n)][static_cast<std::size_t>(a)];
  }
};

/// Smallest covering subset of `candidates` (by size, then
/// lexicographic in the fixed symbol order), where candidate c covers
/// element i iff covers[c][i]. max_size bounds the search.
inline std::optional<std::vector<int>> min_cover(const std::vector<std::vector<char>>& covers,
                                                 std::size_t n_elements, int max_size) {
  int n_cand = static_cast<int>(covers.size());
  if (n_elements == 0 && n_cand > 0) return std::vector<int>{0};
  std::vector<int> combo;
  auto covered_all = [&](const std::vector<int>& sel) {
    for (std::size_t e = 0; e < n_elements; ++e) {
      bool hit = false;
      for (int c : sel) hit = hit || covers[static_cast<std::size_t>(c)][e];
      if (!hit) return false;
    }
    return true;
  };
  for (int size = 1; size <= std::min(max_size, n_cand); ++size) {
    combo.assign(static_cast<std::size_t>(size), 0);
    // iterate size-combinations in lexicographic order
    for (int i = 0; i < size; ++i) combo[static_cast<std::size_t>(i)] = i;
    while (true) {
      if (covered_all(combo)) return combo;
      int i = size - 1;
      while (i >= 0 && combo[static_cast<std::size_t>(i)] == n_cand - size + i) --i;
      if (i < 0) break;
      ++combo[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j)
        combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// True iff some X-word with the same image and the same first and last
/// symbols as u passes through a at time n.
inline bool routable(const FactorTriple& triple, const Word& u, Sym a, int n) {
  if (n < 0 || n >= static_cast<int>(u.size()))
    throw IndexOutOfRange("routing time outside the word");
  triple.x.require_legal(u);
  if (a < 0 || a >= triple.x.size()) throw UnknownSymbol("routing symbol out of range");
  if (triple.code_of(a) != triple.code_of(u[static_cast<std::size_t>(n)]))
    throw SymbolMismatch("routing symbol maps to a different image letter");
  Word w = apply_code(triple, u);
  auto fwd = detail::layer_forward(triple, w, {u.front()});
  auto bwd = detail::layer_backward(triple, w, {u.back()});
  return fwd[static_cast<std::size_t>(n)][static_cast<std::size_t>(a)] &&
         bwd[static_cast<std::size_t>(n)][static_cast<std::size_t>(a)];
}

/// True iff every X-word projecting to w is routable through some
/// member of M at time n. Preimages are explored through the layered
/// graph (via endpoint pairs), never materialized.
inline bool is_transition_block(const FactorTriple& triple, const Word& w, int n,
                                const std::vector<Sym>& m) {
  if (w.empty()) throw IllegalWord("transition block over an empty word");
  if (!y_word_legal(triple, w)) throw IllegalWord("w is not in the language of Y");
  if (n < 0 || n >= static_cast<int>(w.size()))
    throw IndexOutOfRange("time index outside the word");
  if (m.empty()) throw SymbolMismatch("M must be nonempty");
  for (Sym a : m)
    if (a < 0 || a >= triple.x.size() || triple.code_of(a) != w[static_cast<std::size_t>(n)])
      throw SymbolMismatch("member of M does not map to w_n");
  detail::WordReach reach(triple, w);
  for (const auto& [si, ei] : reach.elements) {
    bool covered = false;
    for (Sym a : m) covered = covered || reach.routes(si, ei, a, n);
    if (!covered) return false;
  }
  return true;
}

/// All preimage words of w, lexicographic, capped.
inline std::vector<Word> enumerate_preimages(const FactorTriple& triple, const Word& w,
                                             std::uint64_t cap = 0) {
  if (cap == 0) cap = max_blocks_cap();
  if (!y_word_legal(triple, w)) throw IllegalWord("w is not in the language of Y");
  auto bwd_all = detail::layer_backward(triple, w, triple.preimages(w.back()));
  std::vector<Word> out;
  Word cur;
  auto dfs = [&](auto&& self, std::size_t layer) -> void {
    if (layer == w.size()) {
      if (out.size() + 1 > cap)
        throw ResourceLimit("preimage enumeration exceeds the cap");
      out.push_back(cur);
      return;
    }
    for (Sym xs : triple.preimages(w[layer])) {
      if (!bwd_all[layer][static_cast<std::size_t>(xs)]) continue;
      if (layer > 0 && !triple.x.edge(cur.back(), xs)) continue;
      cur.push_back(xs);
      self(self, layer + 1);
      cur.pop_back();
    }
  };
  dfs(dfs, 0);
  return out;
}

/// Routing certificate for a block: every preimage word mapped to its
/// routing subset of M.
inline RoutingTable routing_table(const FactorTriple& triple, const TransitionBlock& tb,
                                  std::uint64_t cap = 0) {
  detail::WordReach reach(triple, tb.w);
  std::map<Sym, std::size_t> start_index, end_index;
  for (std::size_t i = 0; i < reach.starts.size(); ++i) start_index[reach.starts[i]] = i;
  for (std::size_t i = 0; i < reach.ends.size(); ++i) end_index[reach.ends[i]] = i;
  RoutingTable table;
  for (const Word& u : enumerate_preimages(triple, tb.w, cap)) {
    std::vector<Sym> routes;
    std::size_t si = start_index.at(u.front());
    std::size_t ei = end_index.at(u.back());
    for (Sym a : tb.m)
      if (reach.routes(static_cast<int>(si), static_cast<int>(ei), a, tb.n)) routes.push_back(a);
    table.entries.emplace_back(u, std::move(routes));
  }
  return table;
}

/// Searches all (w, n, M) with |w| <= l_max and nu(w) > 0 for a
/// transition block of minimal depth. Order: increasing |w|,
/// lexicographic w, increasing n; at each (w, n) the minimum-size M is
/// found exactly by subset enumeration in the fixed symbol order. The
/// first achiever of the final minimum wins, independent of worker
/// count.
inline MinimalBlockResult minimal_transition_block(const FactorTriple& triple,
                                                   const PushforwardMeasure& nu, int l_max,
                                                   int workers = 1) {
  if (l_max < 1) throw DomainError("l_max must be >= 1");

  struct Local {
    int depth = 0;
    TransitionBlock block;
    bool found = false;
  };

  std::optional<TransitionBlock> best;
  for (int len = 1; len <= l_max && (!best || best->m.size() > 1); ++len) {
    std::vector<Word> words;
    for (Word& w : enumerate_y_blocks(triple, len))
      if (nu.positive(w)) words.push_back(std::move(w));

    std::vector<Local> locals(words.size());
    int bound = best ? static_cast<int>(best->m.size()) : triple.x.size() + 1;
    parallel_for(static_cast<long>(words.size()), workers, [&](long wi) {
      const Word& w = words[static_cast<std::size_t>(wi)];
      detail::WordReach reach(triple, w);
      Local& local = locals[static_cast<std::size_t>(wi)];
      for (int n = 0; n < len; ++n) {
        const std::vector<Sym>& candidates = triple.preimages(w[static_cast<std::size_t>(n)]);
        std::vector<std::vector<char>> covers(candidates.size(),
                                              std::vector<char>(reach.elements.size(), 0));
        for (std::size_t c = 0; c < candidates.size(); ++c)
          for (std::size_t e = 0; e < reach.elements.size(); ++e)
            covers[c][e] = reach.routes(reach.elements[e].first, reach.elements[e].second,
                                        candidates[c], n)
                               ? 1
                               : 0;
        int max_size = (local.found ? local.depth : bound) - 1;
        if (max_size < 1) break;
        auto cover = detail::min_cover(covers, reach.elements.size(), max_size);
        if (!cover) continue;
        std::vector<Sym> m;
        for (int c : *cover) m.push_back(candidates[static_cast<std::size_t>(c)]);
        local.depth = static_cast<int>(m.size());
        local.block = TransitionBlock{w, n, std::move(m)};
        local.found = true;
      }
    });
    for (const Local& local : locals) {
      if (!local.found) continue;
      if (!best || local.depth < static_cast<int>(best->m.size())) best = local.block;
    }
  }

  if (!best) {
    // Unreachable for a genuine pushforward: (w, n, all preimages of
    // w_n) is always a transition block and every length has a
    // nu-positive word. Kept as the explicit bounded-search outcome.
    throw NotFoundWithinBound("no transition block with positive mass up to length " +
                              std::to_string(l_max));
  }
  return MinimalBlockResult{*best, routing_table(triple, *best)};
}

/// Depth of a nu-minimal transition block; equals the class degree of
/// nu (and of pi, when nu is fully supported).
inline int class_degree_of_measure(const FactorTriple& triple, const PushforwardMeasure& nu,
                                   int l_max, int workers = 1) {
  return minimal_transition_block(triple, nu, l_max, workers).block.depth();
}

/// Brute-force oracle: number of transition classes over the periodic
/// point y^inf, from the period-step fiber graph. Mutual bridging is
/// reachability both ways in the transitive closure; the closure must
/// stabilize within `stabilization_cap` period multiples.
inline int count_transition_classes_periodic(const FactorTriple& triple, const Word& y,
                                             int stabilization_cap = 4) {
  if (y.empty()) throw IllegalWord("empty period word");
  std::size_t period = y.size();
  // layered word y . y_0 realizes one period step
  Word step = y;
  step.push_back(y[0]);
  if (!y_word_legal(triple, step)) throw IllegalWord("y^inf is not in the language of Y");

  const std::vector<Sym>& nodes_all = triple.preimages(y[0]);
  int n = static_cast<int>(nodes_all.size());
  std::vector<std::vector<char>> m(static_cast<std::size_t>(n),
                                   std::vector<char>(static_cast<std::size_t>(n), 0));
  for (int i = 0; i < n; ++i) {
    auto fwd = detail::layer_forward(triple, step, {nodes_all[static_cast<std::size_t>(i)]});
    for (int j = 0; j < n; ++j)
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          fwd[period][static_cast<std::size_t>(nodes_all[static_cast<std::size_t>(j)])];
  }

  // keep only nodes on bi-infinite fiber paths
  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (!alive[static_cast<std::size_t>(v)]) continue;
      bool has_out = false, has_in = false;
      for (int u = 0; u < n; ++u) {
        if (!alive[static_cast<std::size_t>(u)]) continue;
        has_out = has_out || m[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)];
        has_in = has_in || m[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
      }
      if (!has_out || !has_in) {
        alive[static_cast<std::size_t>(v)] = 0;
        changed = true;
      }
    }
  }
  std::vector<int> nodes;
  for (int v = 0; v < n; ++v)
    if (alive[static_cast<std::size_t>(v)]) nodes.push_back(v);
  if (nodes.empty()) throw IllegalWord("y^inf has an empty fiber");

  // transitive closure within the stabilization cap
  auto mat_or_mul = [&](const std::vector<std::vector<char>>& r) {
    std::vector<std::vector<char>> out = r;
    for (int i : nodes)
      for (int k : nodes) {
        if (!r[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) continue;
        for (int j : nodes)
          if (m[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)])
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
      }
    return out;
  };
  std::vector<std::vector<char>> reach = m;
  bool stabilized = false;
  for (int k = 2; k <= stabilization_cap; ++k) {
    auto next = mat_or_mul(reach);
    if (next == reach) {
      stabilized = true;
      break;
    }
    reach = std::move(next);
  }
  if (!stabilized) {
    auto next = mat_or_mul(reach);
    if (next != reach)
      throw PeriodTooLarge("bridging relation did not stabilize within " +
                           std::to_string(stabilization_cap) + " period windows");
  }

  // classes = mutual-reachability components of recurrent nodes
  std::vector<int> recurrent;
  for (int v : nodes)
    if (reach[static_cast<std::size_t>(v)][static_cast<std::size_t>(v)]) recurrent.push_back(v);
  std::vector<int> cls(static_cast<std::size_t>(n), -1);
  int count = 0;
  for (int v : recurrent) {
    if (cls[static_cast<std::size_t>(v)] >= 0) continue;
    for (int u : recurrent)
      if (reach[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] &&
          reach[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)])
        cls[static_cast<std::size_t>(u)] = count;
    ++count;
  }
  return count;
}

/// The unique member of M through which a positive-measure preimage of
/// tb.w is routable. Multiple routes signal a broken minimality
/// certificate upstream, not a valid outcome.
inline Sym unique_routing_symbol(const FactorTriple& triple, const MarkovMeasure& mu,
                                 const TransitionBlock& tb, const Word& u) {
  if (apply_code(triple, u) != tb.w)
    throw SymbolMismatch("word does not project to the block's image word");
  if (!(word_probability(mu, u) > 0.0))
    throw IllegalWord("word has zero measure");
  std::vector<Sym> routes;
  for (Sym a : tb.m)
    if (routable(triple, u, a, tb.n)) routes.push_back(a);
  if (routes.empty()) throw NotRoutable("no routing symbol in M");
  if (routes.size() > 1) throw NotUnique("more than one routing symbol in M");
  return routes[0];
}

}  // namespace classdeg
