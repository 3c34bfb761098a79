#include "evotext/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "evotext/errors.hpp"

namespace evotext {

QwertyMap QwertyMap::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open qwerty map: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return from_lines(lines);
}

QwertyMap QwertyMap::from_lines(const std::vector<std::string>& lines) {
  QwertyMap map;
  std::size_t lineno = 0;
  for (const auto& line : lines) {
    ++lineno;
    if (line.empty()) continue;
    if (line.size() < 2 || line[1] != ':')
      throw ParseError("qwerty map line " + std::to_string(lineno) +
                       ": expected `<char>:<adjacent chars>`");
    const char key = line[0];
    std::string adj = line.substr(2);
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    if (adj.empty())
      throw ParseError("qwerty map line " + std::to_string(lineno) +
                       ": no adjacent characters");
    map.adjacency_[key] = adj;
  }
  // Symmetry: b in adj(a) <=> a in adj(b).
  for (const auto& [key, adj] : map.adjacency_) {
    for (char other : adj) {
      auto it = map.adjacency_.find(other);
      if (it == map.adjacency_.end() ||
          it->second.find(key) == std::string::npos) {
        throw ParseError(std::string("qwerty map: asymmetric adjacency ") + key +
                         " -> " + other);
      }
    }
  }
  for (char c = 'a'; c <= 'z'; ++c)
    if (!map.has(c))
      throw ParseError(std::string("qwerty map: missing letter ") + c);
  for (char c = '0'; c <= '9'; ++c)
    if (!map.has(c))
      throw ParseError(std::string("qwerty map: missing digit ") + c);
  return map;
}

const std::string* QwertyMap::neighbors(char c) const {
  auto it = adjacency_.find(c);
  return it == adjacency_.end() ? nullptr : &it->second;
}

std::string char_swap_typo(const std::string& word, Rng& rng) {
  if (word.size() < 2)
    throw TooShortError("char_swap_typo: need at least 2 characters");
  std::string out = word;
  const std::size_t i = rng.index(word.size() - 1);
  std::swap(out[i], out[i + 1]);
  return out;
}

std::string qwerty_typo(const std::string& word, const QwertyMap& map, Rng& rng) {
  std::vector<std::size_t> mappable;
  for (std::size_t i = 0; i < word.size(); ++i)
    if (map.has(word[i])) mappable.push_back(i);
  if (mappable.empty())
    throw NoMappableCharError("qwerty_typo: no mappable character in `" + word + "`");
  std::string out = word;
  const std::size_t pos = mappable[rng.index(mappable.size())];
  const std::string& adj = *map.neighbors(word[pos]);
  out[pos] = adj[rng.index(adj.size())];
  return out;
}

std::size_t typo_budget(std::size_t n) {
  const std::size_t tenth = static_cast<std::size_t>(
      std::ceil(0.10 * static_cast<double>(n)));
  return std::max<std::size_t>(1, tenth == 0 ? 0 : tenth - 1);
}

MutationOutcome add_typos(const TokenSeq& tokens, const QwertyMap& map, Rng& rng) {
  if (tokens.empty()) throw EmptyInputError("add_typos: empty input");
  MutationOutcome out;
  out.tokens = tokens;

  const bool use_swap = rng.coin();
  out.op = use_swap ? "typo_swap" : "typo_qwerty";

  std::vector<std::size_t> qualifying;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& w = tokens.tokens[i];
    if (use_swap) {
      if (w.size() >= 2) qualifying.push_back(i);
    } else {
      for (char c : w) {
        if (map.has(c)) {
          qualifying.push_back(i);
          break;
        }
      }
    }
  }
  if (qualifying.empty()) {
    out.noop = true;
    out.op = "noop";
    return out;
  }

  const std::size_t budget = std::min(typo_budget(tokens.size()), qualifying.size());
  const std::size_t m = 1 + rng.index(budget);

  // Partial Fisher-Yates: m distinct qualifying positions.
  for (std::size_t picked = 0; picked < m; ++picked) {
    const std::size_t j = picked + rng.index(qualifying.size() - picked);
    std::swap(qualifying[picked], qualifying[j]);
    const std::size_t pos = qualifying[picked];
    const std::string before = out.tokens.tokens[pos];
    const std::string after = use_swap ? char_swap_typo(before, rng)
                                       : qwerty_typo(before, map, rng);
    out.tokens.tokens[pos] = after;
    out.edits.push_back({pos, before, after});
  }
  out.tokens.raw = join_tokens(out.tokens);
  return out;
}

MutationOutcome glove_mutate(const TokenSeq& tokens,
                             const WordEmbeddingTable& general,
                             const WordEmbeddingTable& counterfitted,
                             double delta, Rng& rng, std::size_t k,
                             SynonymCache* cache) {
  if (tokens.empty()) throw EmptyInputError("glove_mutate: empty input");
  MutationOutcome out;
  out.tokens = tokens;
  out.op = "glove";

  SynonymCache local;
  SynonymCache& memo = cache ? *cache : local;
  auto synonyms_of = [&](const std::string& word) -> const std::vector<Synonym>& {
    auto it = memo.find(word);
    if (it == memo.end())
      it = memo.emplace(word, nearest_synonyms(word, general, counterfitted,
                                               delta, k)).first;
    return it->second;
  };

  bool any = false;
  for (const auto& tok : tokens.tokens) {
    if (!synonyms_of(tok).empty()) {
      any = true;
      break;
    }
  }
  if (!any) {
    out.noop = true;
    out.op = "noop";
    return out;
  }

  const std::size_t n = tokens.size();
  const std::size_t count = (n >= 2 && rng.coin()) ? 2 : 1;
  std::vector<std::size_t> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = i;
  for (std::size_t picked = 0; picked < count; ++picked) {
    const std::size_t j = picked + rng.index(n - picked);
    std::swap(positions[picked], positions[j]);
    const std::size_t pos = positions[picked];
    const auto& syns = synonyms_of(out.tokens.tokens[pos]);
    if (syns.empty()) continue;
    const std::string before = out.tokens.tokens[pos];
    const std::string after = syns[rng.index(syns.size())].token;
    out.tokens.tokens[pos] = after;
    out.edits.push_back({pos, before, after});
  }
  out.tokens.raw = join_tokens(out.tokens);
  return out;
}

MutationOutcome seq_mutate(const TokenSeq& tokens, const SequenceMutator& mutator,
                           Rng& rng, std::size_t beams) {
  if (tokens.empty()) throw EmptyInputError("seq_mutate: empty input");
  const auto candidates = mutator.rewrite(tokens, beams);
  if (candidates.empty() || candidates.size() > beams)
    throw InvariantViolationError("sequence mutator returned " +
                                  std::to_string(candidates.size()) +
                                  " candidates for beams=" + std::to_string(beams));
  for (const auto& cand : candidates) {
    if (cand.size() != tokens.size())
      throw InvariantViolationError("sequence mutator changed token count");
  }
  MutationOutcome out;
  out.op = "seq";
  out.tokens = candidates[rng.index(candidates.size())];
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (out.tokens.tokens[i] != tokens.tokens[i])
      out.edits.push_back({i, tokens.tokens[i], out.tokens.tokens[i]});
  }
  if (out.edits.empty()) out.noop = (out.tokens.tokens == tokens.tokens);
  return out;
}

} // namespace evotext
