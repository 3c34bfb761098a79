#include "evotext/token_seq.hpp"

#include <array>
#include <cctype>
#include <sstream>

#include "evotext/errors.hpp"

namespace evotext {

const std::string kPunctuationStripSet = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

namespace {

std::array<bool, 256> build_strip_table() {
  std::array<bool, 256> t{};
  for (unsigned char c : kPunctuationStripSet) t[c] = true;
  return t;
}

const std::array<bool, 256> kStrip = build_strip_table();

} // namespace

TokenSeq preprocess(const std::string& raw) {
  TokenSeq out;
  out.raw = raw;
  std::string current;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      if (!current.empty()) {
        out.tokens.push_back(current);
        current.clear();
      }
      continue;
    }
    if (kStrip[c]) continue;
    current.push_back(static_cast<char>(std::tolower(c)));
  }
  if (!current.empty()) out.tokens.push_back(current);
  return out;
}

TokenSeq from_tokens(std::vector<std::string> tokens) {
  TokenSeq out;
  out.tokens = std::move(tokens);
  std::ostringstream oss;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    if (i) oss << ' ';
    oss << out.tokens[i];
  }
  out.raw = oss.str();
  return out;
}

std::string join_tokens(const TokenSeq& seq) {
  std::ostringstream oss;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i) oss << ' ';
    oss << seq.tokens[i];
  }
  return oss.str();
}

double positional_jaccard(const TokenSeq& a, const TokenSeq& b) {
  if (a.empty() || b.empty())
    throw EmptyInputError("positional_jaccard: empty sequence");
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t matches = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (a.tokens[i] == b.tokens[i]) ++matches;
  const std::size_t uni = a.size() + b.size() - matches;
  return static_cast<double>(matches) / static_cast<double>(uni);
}

std::size_t words_replaced(const TokenSeq& a, const TokenSeq& b) {
  if (a.size() != b.size())
    throw LengthMismatchError("words_replaced: sequences differ in length");
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.tokens[i] != b.tokens[i]) ++count;
  return count;
}

} // namespace evotext
