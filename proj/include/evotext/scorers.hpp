#ifndef EVOTEXT_SCORERS_HPP
#define EVOTEXT_SCORERS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "evotext/embedding_table.hpp"
#include "evotext/token_seq.hpp"
#include "evotext/victim.hpp"

namespace evotext {

// Deterministic sentence encoder with a fixed output dimensionality.
// An all-zero vector is the "nothing encodable" sentinel; similarity
// against it is defined as 0.
class SentenceEncoder {
public:
  virtual ~SentenceEncoder() = default;
  virtual std::vector<double> encode(const TokenSeq& tokens) const = 0;
  virtual std::size_t dim() const = 0;
};

// Built-in default: unit-normalized mean of word embeddings of the
// in-vocabulary tokens; the zero sentinel when every token is OOV.
class MeanEmbeddingEncoder : public SentenceEncoder {
public:
  explicit MeanEmbeddingEncoder(const WordEmbeddingTable& table) : table_(table) {}
  std::vector<double> encode(const TokenSeq& tokens) const override;
  std::size_t dim() const override { return table_.dim(); }

private:
  const WordEmbeddingTable& table_;
};

// Mean of embeddings of in-vocabulary tokens, unit-normalized; zero
// sentinel when the whole sentence is OOV.
std::vector<double> encode_mean(const TokenSeq& tokens,
                                const WordEmbeddingTable& table);

bool is_zero_sentinel(const std::vector<double>& v);

// cosine(encode(a), encode(b)); 0 when either side hits the sentinel.
// Equals 1 exactly on identical inputs.
double semantic_similarity(const TokenSeq& a, const TokenSeq& b,
                           const SentenceEncoder& encoder);

// Mean per-word negative log-likelihood (natural log), finite for any
// non-empty input. exp(nll) is the word-normalized perplexity.
class LanguageModel {
public:
  virtual ~LanguageModel() = default;
  virtual double nll(const TokenSeq& tokens) const = 0;
  double perplexity(const TokenSeq& tokens) const;
};

// Additive-smoothed order-n model (n in {2,3}) over the training
// vocabulary plus an unknown-word type. Sentences are padded with n-1
// start symbols; the end symbol is predicted and counted like a word.
class NgramLanguageModel : public LanguageModel {
public:
  static std::unique_ptr<NgramLanguageModel>
  train(const std::vector<std::string>& corpus_lines, int order,
        double smoothing = 1.0);

  static std::unique_ptr<NgramLanguageModel>
  train_file(const std::string& path, int order, double smoothing = 1.0);

  double nll(const TokenSeq& tokens) const override;

  // P(word | context) with additive smoothing; `word` may be the end
  // symbol. Exposed so tests can sum the distribution over the event set.
  double prob(const std::vector<std::string>& context,
              const std::string& word) const;

  int order() const { return order_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  static const std::string kStart;
  static const std::string kEnd;
  static const std::string kUnk;

private:
  std::string map_token(const std::string& tok) const;

  int order_ = 3;
  double smoothing_ = 1.0;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, bool> in_vocab_;
  std::unordered_map<std::string, double> context_counts_;
  std::unordered_map<std::string, double> ngram_counts_;
};

// One importance score per token position; deterministic given fixed
// plugins. `victim_queries` reports the classifier calls spent.
struct ImportanceResult {
  std::vector<double> scores;
  std::uint64_t victim_queries = 0;
};

class WordImportance {
public:
  virtual ~WordImportance() = default;
  virtual ImportanceResult rank(const TokenSeq& tokens) const = 0;
};

// Built-in default: leave-one-out posterior drop. score_i is the
// original-label posterior of the full sentence minus the posterior with
// position i deleted (single-token inputs substitute the unknown-word
// proxy instead of deleting).
class LeaveOneOutImportance : public WordImportance {
public:
  explicit LeaveOneOutImportance(const VictimModel& victim) : victim_(victim) {}
  ImportanceResult rank(const TokenSeq& tokens) const override;

  static const std::string kUnkProxy;

private:
  const VictimModel& victim_;
};

// Remote plugins over the same wire family as the victim client.
// POST /encode {"texts":[...]} -> {"vectors":[[...],...]}
class RemoteEncoder : public SentenceEncoder {
public:
  explicit RemoteEncoder(std::string base_url, int retries = 3,
                         int timeout_seconds = 10);
  ~RemoteEncoder() override;
  std::vector<double> encode(const TokenSeq& tokens) const override;
  std::size_t dim() const override;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// POST /nll {"texts":[...]} -> {"nll":[...]}
class RemoteLanguageModel : public LanguageModel {
public:
  explicit RemoteLanguageModel(std::string base_url, int retries = 3,
                               int timeout_seconds = 10);
  ~RemoteLanguageModel() override;
  double nll(const TokenSeq& tokens) const override;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace evotext

#endif
