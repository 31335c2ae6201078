#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "classdeg/errors.hpp"

namespace classdeg {

using Sym = int;
/// A finite block; symbols are indices into the owning space's alphabet.
using Word = std::vector<Sym>;

/// Ordered finite set of symbol names. Order is lexicographic in the
/// names and is fixed at ingestion; every deterministic tie-break
/// downstream uses it.
struct Alphabet {
  std::vector<std::string> names;

  int size() const { return static_cast<int>(names.size()); }

  Sym index_of(const std::string& name) const {
    auto it = std::lower_bound(names.begin(), names.end(), name);
    if (it == names.end() || *it != name)
      throw UnknownSymbol("no symbol named '" + name + "'");
    return static_cast<Sym>(it - names.begin());
  }

  bool contains(const std::string& name) const {
    return std::binary_search(names.begin(), names.end(), name);
  }

  const std::string& name(Sym s) const {
    if (s < 0 || s >= size()) throw IndexOutOfRange("symbol index out of range");
    return names[static_cast<std::size_t>(s)];
  }
};

inline Alphabet make_alphabet(std::vector<std::string> names) {
  if (names.empty()) throw EmptyShift("alphabet is empty");
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw BadInstanceFile("duplicate symbol name in alphabet");
  return Alphabet{std::move(names)};
}

/// Cap on block enumeration, configurable via CLASSDEG_MAX_BLOCKS.
inline std::uint64_t max_blocks_cap() {
  if (const char* env = std::getenv("CLASSDEG_MAX_BLOCKS")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
    throw BadInstanceFile("CLASSDEG_MAX_BLOCKS is not a positive integer");
  }
  return 5'000'000ULL;
}

/// 1-step shift of finite type presented on symbols (a vertex shift).
/// Always essential: construction prunes symbols with no bi-infinite
/// continuation, so "legal word" means extendable both ways.
struct Sft {
  Alphabet alphabet;
  std::vector<std::vector<char>> allowed;   // [from][to]
  std::vector<std::vector<Sym>> succ;       // sorted successor lists
  std::vector<std::vector<Sym>> pred;       // sorted predecessor lists
  std::vector<std::string> removed_symbols; // pruned at construction
  bool irreducible = false;
  int period = 0;  // gcd of cycle lengths; meaningful when irreducible

  int size() const { return alphabet.size(); }

  bool edge(Sym a, Sym b) const {
    return allowed[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] != 0;
  }

  bool legal_word(const Word& u) const {
    if (u.empty()) return true;
    for (Sym s : u)
      if (s < 0 || s >= size()) return false;
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
      if (!edge(u[i], u[i + 1])) return false;
    return true;
  }

  void require_legal(const Word& u) const {
    for (Sym s : u)
      if (s < 0 || s >= size())
        throw UnknownSymbol("word uses a symbol outside the alphabet");
    if (!legal_word(u)) throw IllegalWord("word violates the transition table");
  }

  Word parse_word(const std::vector<std::string>& names) const {
    Word u;
    u.reserve(names.size());
    for (const auto& n : names) u.push_back(alphabet.index_of(n));
    return u;
  }

  std::vector<std::string> word_names(const Word& u) const {
    std::vector<std::string> out;
    out.reserve(u.size());
    for (Sym s : u) out.push_back(alphabet.name(s));
    return out;
  }
};

namespace detail {

inline bool strongly_connected(const std::vector<std::vector<Sym>>& succ,
                               const std::vector<std::vector<Sym>>& pred) {
  int n = static_cast<int>(succ.size());
  if (n == 0) return false;
  auto reach_all = [n](const std::vector<std::vector<Sym>>& adj) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (Sym w : adj[static_cast<std::size_t>(v)])
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          ++count;
          stack.push_back(w);
        }
    }
    return count == n;
  };
  return reach_all(succ) && reach_all(pred);
}

/// Period of a strongly connected graph via gcd of level differences
/// along edges of a BFS tree.
inline int graph_period(const std::vector<std::vector<Sym>>& succ) {
  int n = static_cast<int>(succ.size());
  std::vector<int> level(static_cast<std::size_t>(n), -1);
  std::vector<int> queue{0};
  level[0] = 0;
  int g = 0;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    int v = queue[qi];
    for (Sym w : succ[static_cast<std::size_t>(v)]) {
      if (level[static_cast<std::size_t>(w)] < 0) {
        level[static_cast<std::size_t>(w)] = level[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      } else {
        int d = level[static_cast<std::size_t>(v)] + 1 - level[static_cast<std::size_t>(w)];
        g = std::gcd(g, std::abs(d));
      }
    }
  }
  return g == 0 ? 1 : g;
}

inline std::string join_block_name(const Alphabet& base, const Word& u) {
  bool single_char = true;
  for (const auto& n : base.names) single_char = single_char && n.size() == 1;
  std::string out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i && !single_char) out += ',';
    out += base.name(u[i]);
  }
  return out;
}

}  // namespace detail

/// Builds the pruned essential SFT on the given symbols. Symbols with
/// no outgoing or no incoming continuation are removed iteratively and
/// recorded in removed_symbols.
inline Sft build_sft(const std::vector<std::string>& symbols,
                     const std::vector<std::pair<std::string, std::string>>& allowed_pairs) {
  Alphabet full = make_alphabet(symbols);
  int n = full.size();
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(n),
                                     std::vector<char>(static_cast<std::size_t>(n), 0));
  for (const auto& [a, b] : allowed_pairs) {
    Sym i = full.index_of(a);
    Sym j = full.index_of(b);
    adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
  }

  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (!alive[static_cast<std::size_t>(v)]) continue;
      bool has_out = false, has_in = false;
      for (int u = 0; u < n; ++u) {
        if (!alive[static_cast<std::size_t>(u)]) continue;
        has_out = has_out || adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)];
        has_in = has_in || adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
      }
      if (!has_out || !has_in) {
        alive[static_cast<std::size_t>(v)] = 0;
        changed = true;
      }
    }
  }

  std::vector<std::string> kept, removed;
  for (int v = 0; v < n; ++v)
    (alive[static_cast<std::size_t>(v)] ? kept : removed).push_back(full.names[static_cast<std::size_t>(v)]);
  if (kept.empty())
    throw EmptyShift("every symbol was pruned; no bi-infinite point exists");

  Sft sft;
  sft.alphabet = Alphabet{kept};  // kept is already sorted
  sft.removed_symbols = removed;
  int m = sft.size();
  sft.allowed.assign(static_cast<std::size_t>(m), std::vector<char>(static_cast<std::size_t>(m), 0));
  sft.succ.assign(static_cast<std::size_t>(m), {});
  sft.pred.assign(static_cast<std::size_t>(m), {});
  for (int i = 0; i < m; ++i) {
    Sym oi = full.index_of(kept[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m; ++j) {
      Sym oj = full.index_of(kept[static_cast<std::size_t>(j)]);
      if (adj[static_cast<std::size_t>(oi)][static_cast<std::size_t>(oj)]) {
        sft.allowed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
        sft.succ[static_cast<std::size_t>(i)].push_back(j);
        sft.pred[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  sft.irreducible = detail::strongly_connected(sft.succ, sft.pred);
  sft.period = sft.irreducible ? detail::graph_period(sft.succ) : 0;
  return sft;
}

inline bool is_irreducible(const Sft& sft) { return sft.irreducible; }

/// Exactly the length-L words of the language, lexicographic in
/// alphabet order. Throws ResourceLimit if the count exceeds `cap`
/// (default: CLASSDEG_MAX_BLOCKS).
inline std::vector<Word> enumerate_blocks(const Sft& sft, int length,
                                          std::uint64_t cap = 0) {
  if (length < 1) throw DomainError("block length must be >= 1");
  if (cap == 0) cap = max_blocks_cap();
  int n = sft.size();

  // Count paths first so the cap is enforced before materializing.
  std::vector<std::uint64_t> count(static_cast<std::size_t>(n), 1);
  std::uint64_t total = static_cast<std::uint64_t>(n);
  for (int step = 1; step < length; ++step) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(n), 0);
    total = 0;
    for (int v = 0; v < n; ++v) {
      for (Sym w : sft.succ[static_cast<std::size_t>(v)]) {
        next[static_cast<std::size_t>(v)] += count[static_cast<std::size_t>(w)];
        // counts are bounded by alphabet^length; saturate to avoid overflow
        if (next[static_cast<std::size_t>(v)] > (1ULL << 62)) next[static_cast<std::size_t>(v)] = 1ULL << 62;
      }
      total += next[static_cast<std::size_t>(v)];
      if (total > (1ULL << 62)) total = 1ULL << 62;
    }
    count.swap(next);
  }
  if (length == 1) total = static_cast<std::uint64_t>(n);
  if (total > cap)
    throw ResourceLimit("enumeration of " + std::to_string(total) +
                        " blocks exceeds the cap of " + std::to_string(cap));

  std::vector<Word> out;
  out.reserve(static_cast<std::size_t>(total));
  Word cur;
  auto dfs = [&](auto&& self, Sym v) -> void {
    cur.push_back(v);
    if (static_cast<int>(cur.size()) == length) {
      out.push_back(cur);
    } else {
      for (Sym w : sft.succ[static_cast<std::size_t>(v)]) self(self, w);
    }
    cur.pop_back();
  };
  for (Sym v = 0; v < n; ++v) dfs(dfs, v);
  return out;
}

/// (X, Y, pi): a 1-step SFT, a 1-block symbol code, and the sofic image
/// Y kept as the labeled-graph image of X (no minimization).
struct FactorTriple {
  Sft x;
  std::vector<Sym> code;  // X symbol -> Y symbol
  Alphabet y_alphabet;
  std::vector<std::vector<Sym>> y_preimages;  // Y symbol -> sorted X symbols

  Sym code_of(Sym xs) const {
    if (xs < 0 || xs >= x.size()) throw UnknownSymbol("X symbol out of range");
    return code[static_cast<std::size_t>(xs)];
  }

  const std::vector<Sym>& preimages(Sym ys) const {
    if (ys < 0 || ys >= y_alphabet.size())
      throw UnknownSymbol("Y symbol out of range");
    return y_preimages[static_cast<std::size_t>(ys)];
  }

  Word parse_y_word(const std::vector<std::string>& names) const {
    Word w;
    w.reserve(names.size());
    for (const auto& n : names) w.push_back(y_alphabet.index_of(n));
    return w;
  }
};

/// Assembles a factor triple from an SFT and a total symbol map.
inline FactorTriple make_triple(Sft x, const std::map<std::string, std::string>& code_map) {
  FactorTriple t;
  std::vector<std::string> y_names;
  for (const auto& name : x.alphabet.names) {
    auto it = code_map.find(name);
    if (it == code_map.end())
      throw UnknownSymbol("code is not total: missing image for '" + name + "'");
    y_names.push_back(it->second);
  }
  std::sort(y_names.begin(), y_names.end());
  y_names.erase(std::unique(y_names.begin(), y_names.end()), y_names.end());
  t.y_alphabet = Alphabet{y_names};
  t.code.resize(static_cast<std::size_t>(x.size()));
  t.y_preimages.assign(y_names.size(), {});
  for (Sym s = 0; s < x.size(); ++s) {
    Sym ys = t.y_alphabet.index_of(code_map.at(x.alphabet.names[static_cast<std::size_t>(s)]));
    t.code[static_cast<std::size_t>(s)] = ys;
    t.y_preimages[static_cast<std::size_t>(ys)].push_back(s);
  }
  t.x = std::move(x);
  return t;
}

/// Symbol-wise image of a legal X-word.
inline Word apply_code(const FactorTriple& triple, const Word& u) {
  triple.x.require_legal(u);
  Word w;
  w.reserve(u.size());
  for (Sym s : u) w.push_back(triple.code_of(s));
  return w;
}

/// Membership of w in the language of Y, decided by propagating
/// preimage symbol sets. X is essential, so a nonempty propagation is
/// both necessary and sufficient.
inline bool y_word_legal(const FactorTriple& triple, const Word& w) {
  if (w.empty()) return true;
  for (Sym ys : w)
    if (ys < 0 || ys >= triple.y_alphabet.size()) return false;
  std::vector<char> cur(static_cast<std::size_t>(triple.x.size()), 0);
  for (Sym xs : triple.preimages(w[0])) cur[static_cast<std::size_t>(xs)] = 1;
  for (std::size_t i = 1; i < w.size(); ++i) {
    std::vector<char> next(static_cast<std::size_t>(triple.x.size()), 0);
    bool any = false;
    for (Sym xs : triple.preimages(w[i])) {
      for (Sym p : triple.x.pred[static_cast<std::size_t>(xs)]) {
        if (cur[static_cast<std::size_t>(p)]) {
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

/// Length-L words of Y's language, lexicographic in Y's alphabet order.
inline std::vector<Word> enumerate_y_blocks(const FactorTriple& triple, int length,
                                            std::uint64_t cap = 0) {
  if (length < 1) throw DomainError("block length must be >= 1");
  if (cap == 0) cap = max_blocks_cap();
  std::vector<Word> out;
  Word cur;
  std::vector<std::vector<char>> sets;  // reachable preimage sets per position
  auto dfs = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == length) {
      if (out.size() + 1 > cap)
        throw ResourceLimit("Y-block enumeration exceeds the cap of " + std::to_string(cap));
      out.push_back(cur);
      return;
    }
    for (Sym ys = 0; ys < triple.y_alphabet.size(); ++ys) {
      std::vector<char> next(static_cast<std::size_t>(triple.x.size()), 0);
      bool any = false;
      if (cur.empty()) {
        for (Sym xs : triple.preimages(ys)) {
          next[static_cast<std::size_t>(xs)] = 1;
          any = true;
        }
      } else {
        const auto& prev = sets.back();
        for (Sym xs : triple.preimages(ys)) {
          for (Sym p : triple.x.pred[static_cast<std::size_t>(xs)]) {
            if (prev[static_cast<std::size_t>(p)]) {
              next[static_cast<std::size_t>(xs)] = 1;
              any = true;
              break;
            }
          }
        }
      }
      if (!any) continue;
      cur.push_back(ys);
      sets.push_back(std::move(next));
      self(self);
      sets.pop_back();
      cur.pop_back();
    }
  };
  dfs(dfs);
  return out;
}

/// The 2-fold fiber product: symbols are pairs (a,b) with equal image,
/// transitions are componentwise. Its language is the set of pairs of
/// equal-image X-words. Pair symbols are named "a|b".
inline Sft fiber_product(const FactorTriple& triple) {
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> pairs;
  int n = triple.x.size();
  std::vector<std::pair<Sym, Sym>> syms;
  for (Sym a = 0; a < n; ++a)
    for (Sym b = 0; b < n; ++b)
      if (triple.code_of(a) == triple.code_of(b)) syms.emplace_back(a, b);
  auto pair_name = [&](Sym a, Sym b) {
    return triple.x.alphabet.name(a) + "|" + triple.x.alphabet.name(b);
  };
  for (auto [a, b] : syms) names.push_back(pair_name(a, b));
  for (auto [a, b] : syms)
    for (auto [c, d] : syms)
      if (triple.x.edge(a, c) && triple.x.edge(b, d))
        pairs.emplace_back(pair_name(a, b), pair_name(c, d));
  return build_sft(names, pairs);
}

}  // namespace classdeg
