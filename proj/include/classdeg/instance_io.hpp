#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "classdeg/errors.hpp"
#include "classdeg/markov.hpp"
#include "classdeg/recode.hpp"
#include "classdeg/shift.hpp"

namespace classdeg {

using Json = nlohmann::ordered_json;

/// A loaded instance file. When the file describes a triple in general
/// position (long forbidden words or a wide code window) it is recoded
/// to 1-step 1-block at ingestion and the dictionaries are kept.
struct Instance {
  Sft sft;                               // X (after recoding, if any)
  std::optional<FactorTriple> triple;    // absent for SFT-only files
  std::optional<RecodedTriple> recoded;  // present when ingestion recoded
  std::string path;
  std::uint64_t file_hash = 0;           // FNV-1a over the file bytes
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadInstanceFile("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline Json parse_json(const std::string& text, const std::string& path) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw BadInstanceFile("'" + path + "' is not valid JSON");
  return j;
}

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& known,
                                const std::string& what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw BadInstanceFile(what + " has unknown key '" + it.key() + "'");
}

/// Word keys in code/potential tables: a single symbol name, a
/// comma-joined list, or plain concatenation when all symbols are
/// single characters.
inline std::vector<std::string> split_word_key(const std::string& key,
                                               const std::vector<std::string>& alphabet) {
  if (key.find(',') != std::string::npos) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : key) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  }
  for (const auto& name : alphabet)
    if (name == key) return {key};
  bool single_char = true;
  for (const auto& name : alphabet) single_char = single_char && name.size() == 1;
  if (!single_char)
    throw BadInstanceFile("cannot split word key '" + key + "'; use comma-separated symbols");
  std::vector<std::string> out;
  for (char c : key) out.emplace_back(1, c);
  return out;
}

}  // namespace detail

/// Loads an instance file:
///   { "alphabet": [...], "transitions": [[a,b],...], "code": {a: y, ...},
///     "forbidden_words": [[...],...], "code_window": [l, r] }
/// Unknown keys are rejected.
inline Instance load_instance(const std::string& path) {
  std::string text = detail::read_file(path);
  Json j = detail::parse_json(text, path);
  if (!j.is_object()) throw BadInstanceFile("instance file must be a JSON object");
  detail::reject_unknown_keys(
      j, {"alphabet", "transitions", "code", "forbidden_words", "code_window"}, "instance");

  if (!j.contains("alphabet") || !j["alphabet"].is_array())
    throw BadInstanceFile("instance needs an 'alphabet' array");
  std::vector<std::string> alphabet;
  for (const auto& s : j["alphabet"]) {
    if (!s.is_string()) throw BadInstanceFile("alphabet entries must be strings");
    alphabet.push_back(s.get<std::string>());
  }

  std::vector<std::pair<std::string, std::string>> transitions;
  bool has_transitions = j.contains("transitions");
  if (has_transitions) {
    for (const auto& e : j["transitions"]) {
      if (!e.is_array() || e.size() != 2)
        throw BadInstanceFile("transitions must be [from, to] pairs");
      transitions.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }

  std::vector<std::vector<std::string>> forbidden;
  int max_forbidden = 0;
  if (j.contains("forbidden_words")) {
    for (const auto& f : j["forbidden_words"]) {
      std::vector<std::string> word;
      if (f.is_string()) {
        word = detail::split_word_key(f.get<std::string>(), alphabet);
      } else if (f.is_array()) {
        for (const auto& s : f) word.push_back(s.get<std::string>());
      } else {
        throw BadInstanceFile("forbidden words must be strings or symbol arrays");
      }
      max_forbidden = std::max(max_forbidden, static_cast<int>(word.size()));
      forbidden.push_back(std::move(word));
    }
  }

  int win_l = 0, win_r = 0;
  if (j.contains("code_window")) {
    const auto& w = j["code_window"];
    if (!w.is_array() || w.size() != 2)
      throw BadInstanceFile("code_window must be [l, r]");
    win_l = w[0].get<int>();
    win_r = w[1].get<int>();
    if (win_l < 0 || win_r < 0) throw BadInstanceFile("code_window sides must be >= 0");
  }

  if (!has_transitions && forbidden.empty())
    throw BadInstanceFile("instance needs 'transitions' or 'forbidden_words'");

  bool needs_recode = max_forbidden > 2 || win_l + win_r > 0;

  Instance out;
  out.path = path;
  out.file_hash = detail::fnv1a64(text);

  if (!needs_recode) {
    if (!forbidden.empty()) {
      // forbidden pairs restrict the transition table
      std::set<std::pair<std::string, std::string>> banned;
      std::set<std::string> banned_symbols;
      for (const auto& f : forbidden) {
        if (f.size() == 2) banned.insert({f[0], f[1]});
        if (f.size() == 1) banned_symbols.insert(f[0]);
      }
      std::vector<std::pair<std::string, std::string>> kept;
      if (!has_transitions) {
        for (const auto& a : alphabet)
          for (const auto& b : alphabet) transitions.emplace_back(a, b);
      }
      for (const auto& t : transitions)
        if (!banned.count(t) && !banned_symbols.count(t.first) && !banned_symbols.count(t.second))
          kept.push_back(t);
      transitions = std::move(kept);
    }
    out.sft = build_sft(alphabet, transitions);
    if (j.contains("code")) {
      std::map<std::string, std::string> code_map;
      for (auto it = j["code"].begin(); it != j["code"].end(); ++it)
        code_map[it.key()] = it.value().get<std::string>();
      out.triple = make_triple(out.sft, code_map);
    }
    return out;
  }

  GeneralTriple general;
  general.alphabet = alphabet;
  general.forbidden_words = forbidden;
  if (has_transitions) {
    // encode the complement of the 1-step table as forbidden pairs
    std::set<std::pair<std::string, std::string>> allowed(transitions.begin(), transitions.end());
    for (const auto& a : alphabet)
      for (const auto& b : alphabet)
        if (!allowed.count({a, b})) general.forbidden_words.push_back({a, b});
  }
  general.window_left = win_l;
  general.window_right = win_r;
  if (!j.contains("code"))
    throw BadInstanceFile("recoded instances need a 'code' table");
  for (auto it = j["code"].begin(); it != j["code"].end(); ++it)
    general.code_table[detail::split_word_key(it.key(), alphabet)] = it.value().get<std::string>();

  RecodedTriple recoded = recode_to_one_step_one_block(general);
  out.sft = recoded.triple.x;
  out.triple = recoded.triple;
  out.recoded = std::move(recoded);
  return out;
}

/// Loads a measure file against an instance:
///   {"type": "markov", "transition": [[...]], "stationary": [...]}
///   {"type": "pushforward", "source": <markov object>, "instance": path}
/// Matrices are indexed in the instance's (sorted) alphabet order.
inline MarkovMeasure load_markov_measure(const Json& j, const Sft& sft) {
  detail::reject_unknown_keys(j, {"type", "transition", "stationary"}, "measure");
  if (!j.contains("transition") || !j.contains("stationary"))
    throw BadInstanceFile("markov measure needs 'transition' and 'stationary'");
  std::vector<std::vector<double>> p;
  for (const auto& row : j["transition"]) p.push_back(row.get<std::vector<double>>());
  std::vector<double> pi = j["stationary"].get<std::vector<double>>();
  return make_markov_measure(sft, std::move(p), std::move(pi));
}

inline MarkovMeasure load_measure_file(const std::string& path, const Sft& sft) {
  Json j = detail::parse_json(detail::read_file(path), path);
  if (!j.is_object() || !j.contains("type"))
    throw BadInstanceFile("measure file needs a 'type'");
  std::string type = j["type"].get<std::string>();
  if (type == "markov") return load_markov_measure(j, sft);
  throw BadInstanceFile("measure file at '" + path + "' is not of type 'markov'");
}

/// Loads either a markov measure (whose pushforward becomes nu) or an
/// explicit pushforward file.
inline PushforwardMeasure load_nu_file(const std::string& path, const FactorTriple& triple) {
  Json j = detail::parse_json(detail::read_file(path), path);
  if (!j.is_object() || !j.contains("type"))
    throw BadInstanceFile("measure file needs a 'type'");
  std::string type = j["type"].get<std::string>();
  if (type == "markov")
    return PushforwardMeasure{load_markov_measure(j, triple.x), triple};
  if (type == "pushforward") {
    detail::reject_unknown_keys(j, {"type", "source", "instance"}, "measure");
    if (!j.contains("source")) throw BadInstanceFile("pushforward measure needs 'source'");
    return PushforwardMeasure{load_markov_measure(j["source"], triple.x), triple};
  }
  throw BadInstanceFile("unknown measure type '" + type + "'");
}

/// Potential file: {"range": k, "table": {word-key: value}}.
inline Potential load_potential_file(const std::string& path, const Sft& sft) {
  Json j = detail::parse_json(detail::read_file(path), path);
  if (!j.is_object()) throw BadInstanceFile("potential file must be a JSON object");
  detail::reject_unknown_keys(j, {"range", "table"}, "potential");
  if (!j.contains("range")) throw BadInstanceFile("potential needs 'range'");
  int range = j["range"].get<int>();
  std::map<Word, double> table;
  if (j.contains("table")) {
    for (auto it = j["table"].begin(); it != j["table"].end(); ++it) {
      std::vector<std::string> names = detail::split_word_key(it.key(), sft.alphabet.names);
      table[sft.parse_word(names)] = it.value().get<double>();
    }
  }
  return make_potential(sft, range, std::move(table));
}

}  // namespace classdeg
