#ifndef EVOTEXT_VICTIM_HPP
#define EVOTEXT_VICTIM_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "evotext/token_seq.hpp"

namespace evotext {

struct LabelDistribution {
  std::vector<std::string> labels;
  std::vector<double> probs;

  // Index of the most probable label; first index wins ties.
  std::size_t argmax() const;
};

// The black-box classifier under attack. Implementations must be
// deterministic per (instance, input), keep a fixed label ordering for
// their lifetime, and allow concurrent classify calls. The query counter
// is monotone and counts every classified text.
class VictimModel {
public:
  virtual ~VictimModel() = default;

  LabelDistribution classify(const TokenSeq& text) const;

  virtual std::vector<LabelDistribution>
  classify_batch(const std::vector<TokenSeq>& texts) const = 0;

  virtual std::vector<std::string> labels() const = 0;

  std::uint64_t query_count() const { return queries_.load(); }

protected:
  void count_queries(std::uint64_t n) const { queries_.fetch_add(n); }

private:
  mutable std::atomic<std::uint64_t> queries_{0};
};

// Multinomial naive Bayes over unigram counts with additive smoothing.
// Unseen tokens contribute only the smoothed likelihood (the vocabulary
// carries an implicit unknown-word type, hence the +1 in the event count).
class NaiveBayesVictim : public VictimModel {
public:
  // corpus: (label, text) pairs; texts are preprocessed internally.
  // Requires a non-empty corpus with >= 2 distinct labels and smoothing > 0.
  static std::unique_ptr<NaiveBayesVictim>
  train(const std::vector<std::pair<std::string, std::string>>& corpus,
        double smoothing);

  std::vector<LabelDistribution>
  classify_batch(const std::vector<TokenSeq>& texts) const override;

  std::vector<std::string> labels() const override { return labels_; }

  void save(const std::string& path) const;
  static std::unique_ptr<NaiveBayesVictim> load(const std::string& path);

  double smoothing() const { return smoothing_; }
  std::size_t vocab_size() const { return vocab_size_; }

private:
  LabelDistribution classify_one(const TokenSeq& text) const;

  std::vector<std::string> labels_;   // lexicographic, fixed for lifetime
  std::vector<double> log_prior_;
  std::vector<double> total_tokens_;  // per label
  std::unordered_map<std::string, std::vector<double>> token_counts_;
  std::size_t vocab_size_ = 0;
  double smoothing_ = 1.0;
};

// Convenience wrapper matching the training contract.
std::unique_ptr<NaiveBayesVictim>
train_bow(const std::vector<std::pair<std::string, std::string>>& corpus,
          double smoothing);

// HTTP client for a remote victim: POST /classify with
// {"texts": [...]}; expects {"labels": [...], "probs": [[...], ...]}.
// Transport failures, malformed responses, and distribution-invariant
// violations are reported as distinct error types. Thread-safe facade;
// requests are serialized internally.
class RemoteVictim : public VictimModel {
public:
  explicit RemoteVictim(std::string base_url, int retries = 3,
                        int timeout_seconds = 10);
  ~RemoteVictim() override;

  std::vector<LabelDistribution>
  classify_batch(const std::vector<TokenSeq>& texts) const override;

  std::vector<std::string> labels() const override;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Parses `builtin:<model-file>` / `remote:<url>` victim specs.
std::unique_ptr<VictimModel> open_victim(const std::string& spec);

// UTF-8 CSV with header `label,text`, quoted fields, one document per row.
std::vector<std::pair<std::string, std::string>>
load_labeled_csv(const std::string& path);

} // namespace evotext

#endif
