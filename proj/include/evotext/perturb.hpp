#ifndef EVOTEXT_PERTURB_HPP
#define EVOTEXT_PERTURB_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "evotext/embedding_table.hpp"
#include "evotext/rng.hpp"
#include "evotext/token_seq.hpp"

namespace evotext {

// Keyboard adjacency for the US layout. Loaded from a bundled file of
// `<char>:<adjacent chars>` lines; symmetry is enforced at load and the
// map must cover a-z and 0-9.
class QwertyMap {
public:
  static QwertyMap load_file(const std::string& path);
  static QwertyMap from_lines(const std::vector<std::string>& lines);

  const std::string* neighbors(char c) const;
  bool has(char c) const { return adjacency_.count(c) != 0; }
  std::size_t size() const { return adjacency_.size(); }

private:
  std::map<char, std::string> adjacency_; // values kept sorted
};

// One word-level mutation event; positions index into the token sequence.
struct EditRecord {
  std::size_t pos;
  std::string from;
  std::string to;
};

struct MutationOutcome {
  TokenSeq tokens;
  std::vector<EditRecord> edits;
  std::string op;   // "glove" | "typo_swap" | "typo_qwerty" | "seq" | "seq_fallback_glove"
  bool noop = false;
};

// Transposes one uniformly chosen adjacent character pair. Words shorter
// than 2 characters are rejected.
std::string char_swap_typo(const std::string& word, Rng& rng);

// Replaces one uniformly chosen mappable character with a uniformly
// chosen adjacent key.
std::string qwerty_typo(const std::string& word, const QwertyMap& map, Rng& rng);

// Budget for typo-affected words in a sentence of n tokens: strictly
// under 10%, floored so one word is always perturbable.
std::size_t typo_budget(std::size_t n);

// Picks one error type per call (coin flip), then perturbs m words chosen
// uniformly without replacement among the qualifying ones,
// 1 <= m <= typo_budget(n). Token count is always preserved; when no word
// qualifies the input comes back unchanged with the no-op flag.
MutationOutcome add_typos(const TokenSeq& tokens, const QwertyMap& map, Rng& rng);

// Memo for nearest_synonyms lookups; tables are immutable, so one cache
// can serve a whole attack.
using SynonymCache = std::unordered_map<std::string, std::vector<Synonym>>;

// Substitutes dual-threshold synonyms at 1 or 2 uniformly chosen
// positions; positions without qualifying synonyms stay unchanged. No-op
// flag when no position in the sentence has synonyms.
MutationOutcome glove_mutate(const TokenSeq& tokens,
                             const WordEmbeddingTable& general,
                             const WordEmbeddingTable& counterfitted,
                             double delta, Rng& rng, std::size_t k = 8,
                             SynonymCache* cache = nullptr);

// External rewriter: returns between 1 and `beams` candidates, each with
// the same token count as the input.
class SequenceMutator {
public:
  virtual ~SequenceMutator() = default;
  virtual std::vector<TokenSeq> rewrite(const TokenSeq& tokens,
                                        std::size_t beams) const = 0;
};

// HTTP client: POST /mutate {"text": "...", "beams": n} ->
// {"candidates": ["...", ...]}. Candidates are re-preprocessed; any that
// change the token count violate the contract.
class RemoteSequenceMutator : public SequenceMutator {
public:
  explicit RemoteSequenceMutator(std::string base_url, int retries = 3,
                                 int timeout_seconds = 10);
  ~RemoteSequenceMutator() override;
  std::vector<TokenSeq> rewrite(const TokenSeq& tokens,
                                std::size_t beams) const override;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Requests beams=5 rewrites and samples one uniformly (the identity
// rewrite is a legitimate outcome). Transport errors propagate so the
// engine can fall back to glove_mutate.
MutationOutcome seq_mutate(const TokenSeq& tokens, const SequenceMutator& mutator,
                           Rng& rng, std::size_t beams = 5);

} // namespace evotext

#endif
