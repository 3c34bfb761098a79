#include "evotext/scorers.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "evotext/errors.hpp"

namespace evotext {

std::vector<double> encode_mean(const TokenSeq& tokens,
                                const WordEmbeddingTable& table) {
  if (tokens.empty()) throw EmptyInputError("encode_mean: empty input");
  std::vector<double> acc(table.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& tok : tokens.tokens) {
    if (const auto* vec = table.find(tok)) {
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += (*vec)[i];
      ++hits;
    }
  }
  if (hits == 0) return std::vector<double>(table.dim(), 0.0);
  double norm2 = 0.0;
  for (double v : acc) norm2 += v * v;
  if (norm2 == 0.0) return std::vector<double>(table.dim(), 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : acc) v *= inv;
  return acc;
}

std::vector<double> MeanEmbeddingEncoder::encode(const TokenSeq& tokens) const {
  return encode_mean(tokens, table_);
}

bool is_zero_sentinel(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

double semantic_similarity(const TokenSeq& a, const TokenSeq& b,
                           const SentenceEncoder& encoder) {
  if (a.empty() || b.empty())
    throw EmptyInputError("semantic_similarity: empty input");
  if (a.tokens == b.tokens) return 1.0;
  const auto ea = encoder.encode(a);
  const auto eb = encoder.encode(b);
  if (is_zero_sentinel(ea) || is_zero_sentinel(eb)) return 0.0;
  return cosine(ea, eb);
}

double LanguageModel::perplexity(const TokenSeq& tokens) const {
  return std::exp(nll(tokens));
}

const std::string NgramLanguageModel::kStart = "<s>";
const std::string NgramLanguageModel::kEnd = "</s>";
const std::string NgramLanguageModel::kUnk = "<unk>";

namespace {

std::string key_join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    out += p;
    out.push_back('\x1f');
  }
  return out;
}

} // namespace

std::unique_ptr<NgramLanguageModel>
NgramLanguageModel::train(const std::vector<std::string>& corpus_lines, int order,
                          double smoothing) {
  if (corpus_lines.empty()) throw TrainingError("train_ngram_lm: empty corpus");
  if (order != 2 && order != 3)
    throw TrainingError("train_ngram_lm: order must be 2 or 3");
  if (smoothing <= 0.0) throw TrainingError("train_ngram_lm: smoothing must be > 0");

  auto model = std::unique_ptr<NgramLanguageModel>(new NgramLanguageModel());
  model->order_ = order;
  model->smoothing_ = smoothing;

  std::vector<std::vector<std::string>> sentences;
  for (const auto& line : corpus_lines) {
    TokenSeq seq = preprocess(line);
    if (seq.empty()) continue;
    for (const auto& tok : seq.tokens) {
      if (!model->in_vocab_.count(tok)) {
        model->in_vocab_[tok] = true;
        model->vocab_.push_back(tok);
      }
    }
    sentences.push_back(std::move(seq.tokens));
  }
  if (sentences.empty()) throw TrainingError("train_ngram_lm: no usable sentences");

  for (const auto& sent : sentences) {
    std::vector<std::string> padded(order - 1, kStart);
    padded.insert(padded.end(), sent.begin(), sent.end());
    padded.push_back(kEnd);
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      std::vector<std::string> ctx(padded.begin() + (i - (order - 1)),
                                   padded.begin() + i);
      model->context_counts_[key_join(ctx)] += 1.0;
      ctx.push_back(padded[i]);
      model->ngram_counts_[key_join(ctx)] += 1.0;
    }
  }
  return model;
}

std::unique_ptr<NgramLanguageModel>
NgramLanguageModel::train_file(const std::string& path, int order, double smoothing) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open LM corpus: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return train(lines, order, smoothing);
}

std::string NgramLanguageModel::map_token(const std::string& tok) const {
  if (tok == kEnd || tok == kStart) return tok;
  return in_vocab_.count(tok) ? tok : kUnk;
}

double NgramLanguageModel::prob(const std::vector<std::string>& context,
                                const std::string& word) const {
  std::vector<std::string> ctx;
  ctx.reserve(context.size());
  for (const auto& c : context) ctx.push_back(map_token(c));
  const std::string w = map_token(word);

  auto cit = context_counts_.find(key_join(ctx));
  const double ctx_count = (cit == context_counts_.end()) ? 0.0 : cit->second;

  std::vector<std::string> full = ctx;
  full.push_back(w);
  auto nit = ngram_counts_.find(key_join(full));
  const double ngram_count = (nit == ngram_counts_.end()) ? 0.0 : nit->second;

  // Event set: vocabulary + unknown type + end symbol.
  const double events = static_cast<double>(vocab_.size() + 2);
  return (ngram_count + smoothing_) / (ctx_count + smoothing_ * events);
}

double NgramLanguageModel::nll(const TokenSeq& tokens) const {
  if (tokens.empty()) throw EmptyInputError("nll: empty input");
  std::vector<std::string> padded(order_ - 1, kStart);
  padded.insert(padded.end(), tokens.tokens.begin(), tokens.tokens.end());
  padded.push_back(kEnd);
  double total = 0.0;
  std::size_t predicted = 0;
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    std::vector<std::string> ctx(padded.begin() + (i - (order_ - 1)),
                                 padded.begin() + i);
    total -= std::log(prob(ctx, padded[i]));
    ++predicted;
  }
  return total / static_cast<double>(predicted);
}

const std::string LeaveOneOutImportance::kUnkProxy = "unk";

ImportanceResult LeaveOneOutImportance::rank(const TokenSeq& tokens) const {
  if (tokens.empty()) throw EmptyInputError("word importance: empty input");
  const std::size_t n = tokens.size();

  std::vector<TokenSeq> queries;
  queries.reserve(n + 1);
  queries.push_back(tokens);
  if (n == 1) {
    queries.push_back(from_tokens({kUnkProxy}));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> rest;
      rest.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) rest.push_back(tokens.tokens[j]);
      queries.push_back(from_tokens(std::move(rest)));
    }
  }

  const auto dists = victim_.classify_batch(queries);
  const std::size_t label = dists[0].argmax();
  const double base = dists[0].probs[label];

  ImportanceResult result;
  result.victim_queries = queries.size();
  result.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    result.scores[i] = base - dists[i + 1].probs[label];
  return result;
}

} // namespace evotext
