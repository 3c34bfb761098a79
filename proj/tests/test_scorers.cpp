#include <doctest.h>

#include <cmath>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "evotext/embedding_table.hpp"
#include "evotext/errors.hpp"
#include "evotext/rng.hpp"
#include "evotext/scorers.hpp"
#include "evotext/victim.hpp"

using namespace evotext;
using nlohmann::json;

namespace {

WordEmbeddingTable table_from(const std::string& text) {
  std::istringstream in(text);
  return WordEmbeddingTable::load(in);
}

} // namespace

TEST_CASE("encode_mean basics") {
  const auto table = table_from("aa 1 0\nbb 0 1\n");
  const auto single = encode_mean(from_tokens({"aa"}), table);
  CHECK(single[0] == doctest::Approx(1.0));
  CHECK(single[1] == doctest::Approx(0.0));

  const auto pair = encode_mean(from_tokens({"aa", "bb"}), table);
  CHECK(pair[0] == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(pair[1] == doctest::Approx(std::sqrt(2.0) / 2.0));

  const auto oov = encode_mean(from_tokens({"zz", "qq"}), table);
  CHECK(is_zero_sentinel(oov));
  CHECK_THROWS_AS(encode_mean(from_tokens({}), table), EmptyInputError);
}

TEST_CASE("semantic similarity") {
  const auto table = table_from("aa 1 0\nbb 0 1\n");
  const MeanEmbeddingEncoder enc(table);
  const auto a = from_tokens({"aa"});
  const auto b = from_tokens({"bb"});
  CHECK(semantic_similarity(a, a, enc) == 1.0); // exactly
  CHECK(semantic_similarity(a, b, enc) == doctest::Approx(0.0));
  CHECK(semantic_similarity(a, b, enc) ==
        semantic_similarity(b, a, enc)); // symmetric
  // One side entirely OOV hits the sentinel rule.
  CHECK(semantic_similarity(a, from_tokens({"zz"}), enc) == 0.0);
}

TEST_CASE("bigram LM matches the closed-form smoothed computation") {
  const auto lm = NgramLanguageModel::train({"a b", "a b"}, 2, 1.0);
  // vocab {a,b}; event set size 4 (vocab + unk + end).
  // P(a|<s>) = (2+1)/(2+4), P(b|a) = (2+1)/(2+4), P(</s>|b) = (2+1)/(2+4).
  const double p = 3.0 / 6.0;
  const double expected = -(3.0 * std::log(p)) / 3.0;
  CHECK(lm->nll(from_tokens({"a", "b"})) == doctest::Approx(expected).epsilon(1e-12));

  // Entirely unseen words stay finite and positive.
  const double unseen = lm->nll(from_tokens({"zz", "qq", "rr"}));
  CHECK(std::isfinite(unseen));
  CHECK(unseen > 0.0);
}

TEST_CASE("LM context distribution sums to one over vocab + unk + end") {
  const auto lm = NgramLanguageModel::train(
      {"the movie was good", "the plot was thin", "a movie about love"}, 3, 0.5);
  const std::vector<std::vector<std::string>> contexts = {
      {NgramLanguageModel::kStart, NgramLanguageModel::kStart},
      {NgramLanguageModel::kStart, "the"},
      {"the", "movie"},
      {"was", "good"},
      {"nonsense", "context"}};
  for (const auto& ctx : contexts) {
    double sum = lm->prob(ctx, NgramLanguageModel::kUnk) +
                 lm->prob(ctx, NgramLanguageModel::kEnd);
    for (const auto& w : lm->vocabulary()) sum += lm->prob(ctx, w);
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("trained sentence scores below its scrambles on average") {
  std::vector<std::string> corpus;
  for (int i = 0; i < 8; ++i) {
    corpus.push_back("the movie was really good");
    corpus.push_back("the story was truly bad");
  }
  const auto lm = NgramLanguageModel::train(corpus, 3, 0.2);
  const std::vector<std::string> sent = {"the", "movie", "was", "really", "good"};
  const double straight = lm->nll(from_tokens(sent));

  Rng rng(31);
  double scrambled_total = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    auto shuffled = sent;
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.index(i)]);
    scrambled_total += lm->nll(from_tokens(shuffled));
  }
  CHECK(straight < scrambled_total / trials);
}

TEST_CASE("perplexity is exp of the mean nll") {
  const auto lm = NgramLanguageModel::train({"a b c", "a c b"}, 2, 1.0);
  const auto seq = from_tokens({"a", "b"});
  CHECK(lm->perplexity(seq) == doctest::Approx(std::exp(lm->nll(seq))).epsilon(1e-12));
  CHECK(std::log(lm->perplexity(seq)) == doctest::Approx(lm->nll(seq)).epsilon(1e-12));
}

TEST_CASE("LM training errors") {
  CHECK_THROWS_AS(NgramLanguageModel::train({}, 2, 1.0), TrainingError);
  CHECK_THROWS_AS(NgramLanguageModel::train({"a b"}, 4, 1.0), TrainingError);
  CHECK_THROWS_AS(NgramLanguageModel::train({"a b"}, 2, 0.0), TrainingError);
}

TEST_CASE("leave-one-out importance singles out the signal token") {
  // `signal` carries all class evidence; fillers are class-balanced.
  const std::vector<std::pair<std::string, std::string>> corpus{
      {"pos", "signal filler other"}, {"neg", "contra filler other"}};
  const auto victim = train_bow(corpus, 1.0);
  const LeaveOneOutImportance importance(*victim);

  const auto result = importance.rank(from_tokens({"signal", "filler", "other"}));
  REQUIRE(result.scores.size() == 3);
  CHECK(result.scores[0] > result.scores[1]);
  CHECK(result.scores[0] > result.scores[2]);

  // Closed-form check for the deletion of `signal`: the remaining tokens
  // are class-balanced, so the posterior falls back to the priors.
  const auto full = victim->classify(from_tokens({"signal", "filler", "other"}));
  const auto without = victim->classify(from_tokens({"filler", "other"}));
  const std::size_t label = full.argmax();
  CHECK(result.scores[0] ==
        doctest::Approx(full.probs[label] - without.probs[label]).epsilon(1e-12));
  CHECK(without.probs[label] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("leave-one-out importance edge cases") {
  // Equal token totals per class make OOV deletions posterior-neutral.
  const std::vector<std::pair<std::string, std::string>> corpus{
      {"pos", "good nice"}, {"neg", "bad sad"}};
  const auto victim = train_bow(corpus, 1.0);
  const LeaveOneOutImportance importance(*victim);

  const auto neutral = importance.rank(from_tokens({"good", "zzz"}));
  CHECK(neutral.scores[1] == 0.0); // deleting the OOV token changes nothing

  const auto uniform = importance.rank(from_tokens({"qq", "ww", "ee"}));
  for (double s : uniform.scores) CHECK(s == 0.0);

  const auto single = importance.rank(from_tokens({"good"}));
  CHECK(single.scores.size() == 1);
  CHECK(single.victim_queries == 2);

  // Determinism across invocations.
  const auto again = importance.rank(from_tokens({"good", "zzz"}));
  CHECK(again.scores == neutral.scores);
}

TEST_CASE("remote encoder and LM plugins") {
  httplib::Server server;
  server.Post("/encode", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    json vectors = json::array();
    for (const auto& t : body.at("texts")) {
      const double len = static_cast<double>(t.get<std::string>().size());
      vectors.push_back({len, 1.0});
    }
    res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
  });
  server.Post("/nll", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    json values = json::array();
    for (const auto& t : body.at("texts"))
      values.push_back(0.5 + static_cast<double>(t.get<std::string>().size()));
    res.set_content(json{{"nll", values}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string url = "http://127.0.0.1:" + std::to_string(port);

  {
    RemoteEncoder encoder(url);
    const auto vec = encoder.encode(from_tokens({"ab", "c"}));
    REQUIRE(vec.size() == 2);
    CHECK(vec[0] == doctest::Approx(4.0)); // "ab c"
    CHECK(encoder.dim() == 2);

    RemoteLanguageModel lm(url);
    CHECK(lm.nll(from_tokens({"ab"})) == doctest::Approx(2.5));
  }
  server.stop();
  thread.join();

  RemoteLanguageModel dead("http://127.0.0.1:1", 1, 1);
  CHECK_THROWS_AS(dead.nll(from_tokens({"x"})), TransportError);
}
