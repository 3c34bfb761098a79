#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "evotext/errors.hpp"
#include "evotext/perturb.hpp"
#include "evotext/scorers.hpp"
#include "evotext/victim.hpp"

namespace evotext {

using nlohmann::json;

namespace {

// Shared POST-with-retries helper. Serializes requests behind a mutex so
// callers see a thread-safe facade.
class HttpEndpoint {
public:
  HttpEndpoint(std::string base_url, int retries, int timeout_seconds)
      : base_url_(std::move(base_url)), retries_(retries),
        client_(base_url_) {
    client_.set_connection_timeout(timeout_seconds, 0);
    client_.set_read_timeout(timeout_seconds, 0);
  }

  json post(const std::string& path, const json& body) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, retries_); ++attempt) {
      auto res = client_.Post(path, body.dump(), "application/json");
      if (!res) {
        last_error = "no response (" + httplib::to_string(res.error()) + ")";
        continue;
      }
      if (res->status != 200) {
        last_error = "status " + std::to_string(res->status);
        continue;
      }
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw MalformedResponseError(base_url_ + path + ": invalid JSON: " +
                                     e.what());
      }
    }
    throw TransportError(base_url_ + path + ": " + last_error + " after " +
                         std::to_string(std::max(1, retries_)) + " attempts");
  }

private:
  std::string base_url_;
  int retries_;
  httplib::Client client_;
  std::mutex mutex_;
};

json texts_payload(const std::vector<TokenSeq>& texts) {
  json arr = json::array();
  for (const auto& t : texts) arr.push_back(join_tokens(t));
  return json{{"texts", std::move(arr)}};
}

} // namespace

struct RemoteVictim::Impl {
  Impl(std::string url, int retries, int timeout)
      : endpoint(std::move(url), retries, timeout) {}
  HttpEndpoint endpoint;
  std::mutex label_mutex;
  std::optional<std::vector<std::string>> fixed_labels;
};

RemoteVictim::RemoteVictim(std::string base_url, int retries, int timeout_seconds)
    : impl_(std::make_unique<Impl>(std::move(base_url), retries, timeout_seconds)) {}

RemoteVictim::~RemoteVictim() = default;

std::vector<LabelDistribution>
RemoteVictim::classify_batch(const std::vector<TokenSeq>& texts) const {
  if (texts.empty()) throw EmptyInputError("remote_classify: empty batch");
  for (const auto& t : texts)
    if (t.empty()) throw EmptyInputError("remote_classify: empty input text");

  const json reply = impl_->endpoint.post("/classify", texts_payload(texts));

  std::vector<std::string> labels;
  std::vector<std::vector<double>> probs;
  try {
    labels = reply.at("labels").get<std::vector<std::string>>();
    probs = reply.at("probs").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw MalformedResponseError(std::string("remote_classify: ") + e.what());
  }
  if (labels.size() < 2)
    throw InvariantViolationError("remote_classify: fewer than 2 labels");
  if (probs.size() != texts.size())
    throw MalformedResponseError("remote_classify: got " +
                                 std::to_string(probs.size()) +
                                 " distributions for " +
                                 std::to_string(texts.size()) + " texts");
  {
    std::lock_guard<std::mutex> lock(impl_->label_mutex);
    if (!impl_->fixed_labels) {
      impl_->fixed_labels = labels;
    } else if (*impl_->fixed_labels != labels) {
      throw InvariantViolationError("remote_classify: label ordering changed");
    }
  }

  std::vector<LabelDistribution> out;
  out.reserve(probs.size());
  for (const auto& p : probs) {
    if (p.size() != labels.size())
      throw InvariantViolationError("remote_classify: probs/labels size mismatch");
    double sum = 0.0;
    for (double v : p) {
      if (v < 0.0 || v > 1.0)
        throw InvariantViolationError("remote_classify: probability out of [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw InvariantViolationError("remote_classify: probs sum to " +
                                    std::to_string(sum));
    out.push_back({labels, p});
  }
  count_queries(texts.size());
  return out;
}

std::vector<std::string> RemoteVictim::labels() const {
  {
    std::lock_guard<std::mutex> lock(impl_->label_mutex);
    if (impl_->fixed_labels) return *impl_->fixed_labels;
  }
  // One probe query fixes the ordering.
  classify_batch({from_tokens({"probe"})});
  std::lock_guard<std::mutex> lock(impl_->label_mutex);
  return *impl_->fixed_labels;
}

struct RemoteEncoder::Impl {
  Impl(std::string url, int retries, int timeout)
      : endpoint(std::move(url), retries, timeout) {}
  HttpEndpoint endpoint;
  std::mutex dim_mutex;
  std::size_t dim = 0;
};

RemoteEncoder::RemoteEncoder(std::string base_url, int retries, int timeout_seconds)
    : impl_(std::make_unique<Impl>(std::move(base_url), retries, timeout_seconds)) {}

RemoteEncoder::~RemoteEncoder() = default;

std::vector<double> RemoteEncoder::encode(const TokenSeq& tokens) const {
  if (tokens.empty()) throw EmptyInputError("encode: empty input");
  const json reply = impl_->endpoint.post("/encode", texts_payload({tokens}));
  std::vector<std::vector<double>> vectors;
  try {
    vectors = reply.at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw MalformedResponseError(std::string("encode: ") + e.what());
  }
  if (vectors.size() != 1)
    throw MalformedResponseError("encode: expected 1 vector, got " +
                                 std::to_string(vectors.size()));
  std::lock_guard<std::mutex> lock(impl_->dim_mutex);
  if (impl_->dim == 0) impl_->dim = vectors[0].size();
  if (vectors[0].size() != impl_->dim)
    throw InvariantViolationError("encode: output dimensionality changed");
  return vectors[0];
}

std::size_t RemoteEncoder::dim() const {
  std::lock_guard<std::mutex> lock(impl_->dim_mutex);
  return impl_->dim;
}

struct RemoteLanguageModel::Impl {
  Impl(std::string url, int retries, int timeout)
      : endpoint(std::move(url), retries, timeout) {}
  HttpEndpoint endpoint;
};

RemoteLanguageModel::RemoteLanguageModel(std::string base_url, int retries,
                                         int timeout_seconds)
    : impl_(std::make_unique<Impl>(std::move(base_url), retries, timeout_seconds)) {}

RemoteLanguageModel::~RemoteLanguageModel() = default;

double RemoteLanguageModel::nll(const TokenSeq& tokens) const {
  if (tokens.empty()) throw EmptyInputError("nll: empty input");
  const json reply = impl_->endpoint.post("/nll", texts_payload({tokens}));
  std::vector<double> values;
  try {
    values = reply.at("nll").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw MalformedResponseError(std::string("nll: ") + e.what());
  }
  if (values.size() != 1)
    throw MalformedResponseError("nll: expected 1 value, got " +
                                 std::to_string(values.size()));
  if (!std::isfinite(values[0]) || values[0] < 0.0)
    throw InvariantViolationError("nll: non-finite or negative loss");
  return values[0];
}

struct RemoteSequenceMutator::Impl {
  Impl(std::string url, int retries, int timeout)
      : endpoint(std::move(url), retries, timeout) {}
  HttpEndpoint endpoint;
};

RemoteSequenceMutator::RemoteSequenceMutator(std::string base_url, int retries,
                                             int timeout_seconds)
    : impl_(std::make_unique<Impl>(std::move(base_url), retries, timeout_seconds)) {}

RemoteSequenceMutator::~RemoteSequenceMutator() = default;

std::vector<TokenSeq> RemoteSequenceMutator::rewrite(const TokenSeq& tokens,
                                                     std::size_t beams) const {
  if (tokens.empty()) throw EmptyInputError("rewrite: empty input");
  const json body{{"text", join_tokens(tokens)}, {"beams", beams}};
  const json reply = impl_->endpoint.post("/mutate", body);
  std::vector<std::string> raw;
  try {
    raw = reply.at("candidates").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw MalformedResponseError(std::string("rewrite: ") + e.what());
  }
  std::vector<TokenSeq> out;
  out.reserve(raw.size());
  for (const auto& text : raw) out.push_back(preprocess(text));
  return out;
}

} // namespace evotext
