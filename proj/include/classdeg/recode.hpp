#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "classdeg/errors.hpp"
#include "classdeg/shift.hpp"

namespace classdeg {

/// A factor triple in general position: X given by finitely many
/// forbidden words, pi by a sliding block map with window [-l, r].
struct GeneralTriple {
  std::vector<std::string> alphabet;
  std::vector<std::vector<std::string>> forbidden_words;
  int window_left = 0;   // l >= 0
  int window_right = 0;  // r >= 0
  /// Sliding block table: legal (l+r+1)-words of X -> Y symbol names.
  std::map<std::vector<std::string>, std::string> code_table;

  int window_size() const { return window_left + window_right + 1; }
};

/// Result of passing to a higher-block presentation: a 1-step 1-block
/// triple plus the conjugacy dictionaries between original words and
/// block words.
struct RecodedTriple {
  FactorTriple triple;
  int block_len = 1;                    // N: each new symbol is an N-word
  Alphabet original_alphabet;
  std::vector<Word> block_contents;     // block symbol -> original N-word

  /// encode: original word of length >= N -> block word of length |u|-N+1.
  Word encode(const Word& original) const {
    int n = block_len;
    if (static_cast<int>(original.size()) < n)
      throw IndexOutOfRange("word shorter than the block length cannot be encoded");
    Word out;
    out.reserve(original.size() - static_cast<std::size_t>(n) + 1);
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= original.size(); ++i) {
      Word piece(original.begin() + static_cast<std::ptrdiff_t>(i),
                 original.begin() + static_cast<std::ptrdiff_t>(i) + n);
      Sym found = -1;
      for (Sym b = 0; b < static_cast<Sym>(block_contents.size()); ++b) {
        if (block_contents[static_cast<std::size_t>(b)] == piece) {
          found = b;
          break;
        }
      }
      if (found < 0) throw IllegalWord("word contains a forbidden block");
      out.push_back(found);
    }
    return out;
  }

  /// decode: block word -> original word of length |v|+N-1.
  Word decode(const Word& blocks) const {
    if (blocks.empty()) return {};
    Word out = block_contents.at(static_cast<std::size_t>(blocks[0]));
    for (std::size_t i = 1; i < blocks.size(); ++i) {
      const Word& piece = block_contents.at(static_cast<std::size_t>(blocks[i]));
      // consecutive blocks must overlap in N-1 symbols
      for (std::size_t j = 0; j + 1 < piece.size(); ++j)
        if (out[out.size() - piece.size() + 1 + j] != piece[j])
          throw IllegalWord("block word is not a valid overlap chain");
      out.push_back(piece.back());
    }
    return out;
  }
};

namespace detail {

inline bool contains_forbidden(const Word& u, const std::vector<Word>& forbidden) {
  for (const Word& f : forbidden) {
    if (f.empty() || f.size() > u.size()) continue;
    for (std::size_t i = 0; i + f.size() <= u.size(); ++i) {
      if (std::equal(f.begin(), f.end(), u.begin() + static_cast<std::ptrdiff_t>(i))) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Higher-block recoding. New symbols are the legal X-words of length
/// N = max(m-1, l+r+1, 1), where m is the longest forbidden word; two
/// blocks are adjacent when they overlap in N-1 symbols and their
/// (N+1)-word join avoids every forbidden word. The code becomes
/// 1-block: a block maps through the table entry at its first l+r+1
/// symbols.
inline RecodedTriple recode_to_one_step_one_block(const GeneralTriple& general,
                                                  std::uint64_t cap = 0) {
  if (general.window_left < 0 || general.window_right < 0)
    throw DomainError("code window sides must be nonnegative");
  if (cap == 0) cap = max_blocks_cap();
  Alphabet base = make_alphabet(general.alphabet);

  std::vector<Word> forbidden;
  int max_forbidden = 0;
  for (const auto& f : general.forbidden_words) {
    Word w;
    for (const auto& name : f) w.push_back(base.index_of(name));
    if (w.empty()) throw BadInstanceFile("empty forbidden word");
    max_forbidden = std::max(max_forbidden, static_cast<int>(w.size()));
    forbidden.push_back(std::move(w));
  }
  int n_block = std::max({max_forbidden - 1, general.window_size(), 1});

  // Legal N-blocks of the base language.
  std::vector<Word> blocks;
  Word cur;
  auto dfs = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == n_block) {
      if (!detail::contains_forbidden(cur, forbidden)) {
        if (blocks.size() + 1 > cap)
          throw ResourceLimit("higher-block alphabet exceeds the enumeration cap");
        blocks.push_back(cur);
      }
      return;
    }
    for (Sym s = 0; s < base.size(); ++s) {
      cur.push_back(s);
      if (!detail::contains_forbidden(cur, forbidden))
        self(self);
      cur.pop_back();
    }
  };
  dfs(dfs);
  if (blocks.empty()) throw EmptyShift("every block of the requested length is forbidden");

  std::vector<std::string> names;
  names.reserve(blocks.size());
  for (const Word& b : blocks) names.push_back(detail::join_block_name(base, b));

  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      const Word& u = blocks[i];
      const Word& v = blocks[j];
      if (!std::equal(u.begin() + 1, u.end(), v.begin())) continue;
      Word joined = u;
      joined.push_back(v.back());
      if (detail::contains_forbidden(joined, forbidden)) continue;
      pairs.emplace_back(names[i], names[j]);
    }
  }

  Sft block_sft = build_sft(names, pairs);

  // Surviving block symbols, their contents, and the 1-block code.
  RecodedTriple out;
  out.block_len = n_block;
  out.original_alphabet = base;
  std::map<std::string, std::string> code_map;
  std::map<std::string, const Word*> by_name;
  for (std::size_t i = 0; i < blocks.size(); ++i) by_name[names[i]] = &blocks[i];
  for (const auto& name : block_sft.alphabet.names) {
    const Word& content = *by_name.at(name);
    out.block_contents.push_back(content);
    std::vector<std::string> window;
    for (int k = 0; k < general.window_size(); ++k)
      window.push_back(base.name(content[static_cast<std::size_t>(k)]));
    auto it = general.code_table.find(window);
    if (it == general.code_table.end())
      throw UnknownSymbol("code table has no entry for a legal window");
    code_map[name] = it->second;
  }
  out.triple = make_triple(std::move(block_sft), code_map);
  return out;
}

}  // namespace classdeg
