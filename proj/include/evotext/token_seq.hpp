#ifndef EVOTEXT_TOKEN_SEQ_HPP
#define EVOTEXT_TOKEN_SEQ_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace evotext {

// A preprocessed sentence: ordered lowercase, punctuation-free word
// tokens plus the raw source string (kept for reporting only).
struct TokenSeq {
  std::vector<std::string> tokens;
  std::string raw;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }

  bool operator==(const TokenSeq& other) const { return tokens == other.tokens; }
  bool operator!=(const TokenSeq& other) const { return !(*this == other); }
};

// ASCII punctuation characters removed (not replaced by space) before
// whitespace splitting.
extern const std::string kPunctuationStripSet;

// Lowercase, strip punctuation, split on whitespace runs. Whitespace-only
// input yields an empty TokenSeq; callers reject empty sequences before
// attacking.
TokenSeq preprocess(const std::string& raw);

// Builds a TokenSeq directly from tokens (assumed already normalized).
TokenSeq from_tokens(std::vector<std::string> tokens);

std::string join_tokens(const TokenSeq& seq);

// Jaccard coefficient over (position, token) pairs. Both inputs must be
// non-empty; lengths may differ.
double positional_jaccard(const TokenSeq& a, const TokenSeq& b);

// Number of positions where the two equal-length sequences differ.
std::size_t words_replaced(const TokenSeq& a, const TokenSeq& b);

} // namespace evotext

#endif
