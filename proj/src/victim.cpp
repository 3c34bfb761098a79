#include "evotext/victim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evotext/errors.hpp"

namespace evotext {

using nlohmann::json;

std::size_t LabelDistribution::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

LabelDistribution VictimModel::classify(const TokenSeq& text) const {
  return classify_batch({text}).front();
}

std::unique_ptr<NaiveBayesVictim>
NaiveBayesVictim::train(const std::vector<std::pair<std::string, std::string>>& corpus,
                        double smoothing) {
  if (corpus.empty()) throw TrainingError("train_bow: empty corpus");
  if (smoothing <= 0.0) throw TrainingError("train_bow: smoothing must be > 0");

  std::set<std::string> label_set;
  for (const auto& [label, _] : corpus) label_set.insert(label);
  if (label_set.size() < 2)
    throw TrainingError("train_bow: corpus has a single label");

  auto model = std::unique_ptr<NaiveBayesVictim>(new NaiveBayesVictim());
  model->smoothing_ = smoothing;
  model->labels_.assign(label_set.begin(), label_set.end());
  const std::size_t nlabels = model->labels_.size();

  std::unordered_map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < nlabels; ++i) label_index[model->labels_[i]] = i;

  std::vector<double> doc_counts(nlabels, 0.0);
  model->total_tokens_.assign(nlabels, 0.0);

  for (const auto& [label, text] : corpus) {
    const std::size_t li = label_index.at(label);
    doc_counts[li] += 1.0;
    const TokenSeq seq = preprocess(text);
    for (const auto& tok : seq.tokens) {
      auto& row = model->token_counts_[tok];
      if (row.empty()) row.assign(nlabels, 0.0);
      row[li] += 1.0;
      model->total_tokens_[li] += 1.0;
    }
  }

  model->vocab_size_ = model->token_counts_.size();
  model->log_prior_.resize(nlabels);
  const double total_docs = static_cast<double>(corpus.size());
  for (std::size_t i = 0; i < nlabels; ++i)
    model->log_prior_[i] = std::log(doc_counts[i] / total_docs);
  return model;
}

LabelDistribution NaiveBayesVictim::classify_one(const TokenSeq& text) const {
  if (text.empty()) throw EmptyInputError("classify: empty input");
  const std::size_t nlabels = labels_.size();
  std::vector<double> logp(log_prior_);
  // Event space per label: vocabulary plus one unknown-word type.
  const double event_types = static_cast<double>(vocab_size_ + 1);
  for (std::size_t li = 0; li < nlabels; ++li) {
    const double denom = std::log(total_tokens_[li] + smoothing_ * event_types);
    double acc = 0.0;
    for (const auto& tok : text.tokens) {
      auto it = token_counts_.find(tok);
      const double c = (it == token_counts_.end()) ? 0.0 : it->second[li];
      acc += std::log(c + smoothing_) - denom;
    }
    logp[li] += acc;
  }
  // Log-sum-exp normalization.
  const double mx = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  for (double v : logp) z += std::exp(v - mx);
  LabelDistribution dist;
  dist.labels = labels_;
  dist.probs.resize(nlabels);
  for (std::size_t i = 0; i < nlabels; ++i)
    dist.probs[i] = std::exp(logp[i] - mx) / z;
  return dist;
}

std::vector<LabelDistribution>
NaiveBayesVictim::classify_batch(const std::vector<TokenSeq>& texts) const {
  count_queries(texts.size());
  std::vector<LabelDistribution> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(classify_one(t));
  return out;
}

void NaiveBayesVictim::save(const std::string& path) const {
  json j;
  j["kind"] = "naive_bayes";
  j["smoothing"] = smoothing_;
  j["labels"] = labels_;
  j["log_prior"] = log_prior_;
  j["total_tokens"] = total_tokens_;
  json counts = json::object();
  // Sort tokens so the file is byte-stable across runs.
  std::map<std::string, const std::vector<double>*> sorted;
  for (const auto& [tok, row] : token_counts_) sorted[tok] = &row;
  for (const auto& [tok, row] : sorted) counts[tok] = *row;
  j["token_counts"] = std::move(counts);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model file: " + path);
  out << j.dump(2) << "\n";
}

std::unique_ptr<NaiveBayesVictim> NaiveBayesVictim::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("model file " + path + ": " + e.what());
  }
  if (j.value("kind", "") != "naive_bayes")
    throw ParseError("model file " + path + ": unknown kind");
  auto model = std::unique_ptr<NaiveBayesVictim>(new NaiveBayesVictim());
  try {
    model->smoothing_ = j.at("smoothing").get<double>();
    model->labels_ = j.at("labels").get<std::vector<std::string>>();
    model->log_prior_ = j.at("log_prior").get<std::vector<double>>();
    model->total_tokens_ = j.at("total_tokens").get<std::vector<double>>();
    for (const auto& [tok, row] : j.at("token_counts").items())
      model->token_counts_[tok] = row.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError("model file " + path + ": " + e.what());
  }
  model->vocab_size_ = model->token_counts_.size();
  return model;
}

std::unique_ptr<NaiveBayesVictim>
train_bow(const std::vector<std::pair<std::string, std::string>>& corpus,
          double smoothing) {
  return NaiveBayesVictim::train(corpus, smoothing);
}

std::unique_ptr<VictimModel> open_victim(const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0)
    return NaiveBayesVictim::load(spec.substr(8));
  if (spec.rfind("remote:", 0) == 0)
    return std::make_unique<RemoteVictim>(spec.substr(7));
  throw ConfigError("victim spec must be builtin:<model-file> or remote:<url>: " +
                    spec);
}

namespace {

// Minimal RFC-4180 CSV reader: quoted fields, embedded commas/quotes,
// both LF and CRLF line endings.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"': in_quotes = true; break;
      case ',':
        row.push_back(field);
        field.clear();
        break;
      case '\r': break;
      case '\n':
        row.push_back(field);
        field.clear();
        rows.push_back(row);
        row.clear();
        break;
      default: field.push_back(c);
    }
  }
  if (any && (!field.empty() || !row.empty())) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

} // namespace

std::vector<std::pair<std::string, std::string>>
load_labeled_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  auto rows = parse_csv(in);
  if (rows.empty()) throw ParseError(path + ": empty file");
  if (rows[0].size() != 2 || rows[0][0] != "label" || rows[0][1] != "text")
    throw ParseError(path + ": first row must be the header `label,text`");
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2)
      throw ParseError(path + " row " + std::to_string(i + 1) +
                       ": expected 2 fields, got " + std::to_string(rows[i].size()));
    out.emplace_back(rows[i][0], rows[i][1]);
  }
  return out;
}

} // namespace evotext
