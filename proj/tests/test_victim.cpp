#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "evotext/errors.hpp"
#include "evotext/rng.hpp"
#include "evotext/victim.hpp"

using namespace evotext;
using nlohmann::json;

namespace {

using Corpus = std::vector<std::pair<std::string, std::string>>;

// Independent log-space oracle, computed with its own counting code:
// multinomial naive Bayes, additive smoothing, event space = vocab + unk.
std::map<std::string, double> nb_oracle(const Corpus& corpus, double smoothing,
                                        const std::vector<std::string>& tokens) {
  std::set<std::string> labels_set, vocab;
  std::map<std::string, double> docs, totals;
  std::map<std::pair<std::string, std::string>, double> counts;
  for (const auto& [label, text] : corpus) {
    labels_set.insert(label);
    docs[label] += 1;
    for (const auto& tok : preprocess(text).tokens) {
      vocab.insert(tok);
      totals[label] += 1;
      counts[{label, tok}] += 1;
    }
  }
  std::map<std::string, double> logp;
  for (const auto& label : labels_set) {
    double lp = std::log(docs[label] / static_cast<double>(corpus.size()));
    const double denom =
        std::log(totals[label] + smoothing * static_cast<double>(vocab.size() + 1));
    for (const auto& tok : tokens) {
      auto it = counts.find({label, tok});
      const double c = it == counts.end() ? 0.0 : it->second;
      lp += std::log(c + smoothing) - denom;
    }
    logp[label] = lp;
  }
  double mx = -1e300;
  for (const auto& [_, v] : logp) mx = std::max(mx, v);
  double z = 0;
  for (const auto& [_, v] : logp) z += std::exp(v - mx);
  std::map<std::string, double> posterior;
  for (const auto& [label, v] : logp) posterior[label] = std::exp(v - mx) / z;
  return posterior;
}

} // namespace

TEST_CASE("toy corpus posterior favors the signal label") {
  const Corpus corpus{{"pos", "good good"}, {"neg", "bad"}};
  const auto model = train_bow(corpus, 1.0);
  const auto dist = model->classify(from_tokens({"good"}));
  REQUIRE(dist.labels == std::vector<std::string>{"neg", "pos"});
  CHECK(dist.probs[1] > dist.probs[0]);
  // Hand computation: P(good|pos) = 3/5, P(good|neg) = 1/4, priors 1/2.
  const double ppos = (0.5 * 3.0 / 5.0) / (0.5 * 3.0 / 5.0 + 0.5 * 1.0 / 4.0);
  CHECK(dist.probs[1] == doctest::Approx(ppos).epsilon(1e-12));
}

TEST_CASE("four-sentence corpus: `good` appears only in positive docs") {
  const Corpus corpus{{"pos", "good fun"},
                      {"pos", "good story"},
                      {"neg", "bad story"},
                      {"neg", "dull fun"}};
  const auto model = train_bow(corpus, 1.0);
  const auto dist = model->classify(from_tokens({"good"}));
  const auto oracle = nb_oracle(corpus, 1.0, {"good"});
  CHECK(dist.probs[dist.argmax()] == doctest::Approx(oracle.at("pos")).epsilon(1e-12));
  CHECK(dist.labels[dist.argmax()] == "pos");
}

TEST_CASE("classify contract: sums to one, deterministic, errors on empty") {
  const Corpus corpus{{"pos", "nice fine good"}, {"neg", "bad sad mad"}};
  const auto model = train_bow(corpus, 0.5);
  const auto d1 = model->classify(from_tokens({"nice", "unknownword"}));
  double sum = 0;
  for (double p : d1.probs) sum += p;
  CHECK(std::abs(sum - 1.0) < 1e-6);
  const auto d2 = model->classify(from_tokens({"nice", "unknownword"}));
  CHECK(d1.probs == d2.probs);
  CHECK_THROWS_AS(model->classify(from_tokens({})), EmptyInputError);
}

TEST_CASE("training error paths") {
  CHECK_THROWS_AS(train_bow({}, 1.0), TrainingError);
  CHECK_THROWS_AS(train_bow({{"pos", "a"}, {"pos", "b"}}, 1.0), TrainingError);
  CHECK_THROWS_AS(train_bow({{"pos", "a"}, {"neg", "b"}}, 0.0), TrainingError);
}

TEST_CASE("posteriors match the closed-form oracle on random toy corpora") {
  Rng rng(555);
  const char* words[] = {"alpha", "beta", "gamma", "delta", "eps", "zeta",
                         "eta",   "theta", "iota", "kappa", "lam", "mu",
                         "nu",    "xi",    "omi",  "pi",    "rho", "sigma",
                         "tau",   "ups"};
  for (int trial = 0; trial < 100; ++trial) {
    Corpus corpus;
    const std::size_t docs = 2 + rng.index(48);
    for (std::size_t d = 0; d < docs; ++d) {
      const std::string label = rng.coin() ? "pos" : "neg";
      std::string text;
      const std::size_t len = 1 + rng.index(9);
      for (std::size_t w = 0; w < len; ++w) {
        text += words[rng.index(20)];
        text += ' ';
      }
      corpus.push_back({label, text});
    }
    bool two_labels = false;
    for (const auto& [l, _] : corpus)
      if (l != corpus[0].first) two_labels = true;
    if (!two_labels) corpus.push_back({corpus[0].first == "pos" ? "neg" : "pos", "filler"});

    const double smoothing = 0.25 + rng.uniform01() * 2.0;
    const auto model = train_bow(corpus, smoothing);

    std::vector<std::string> query;
    const std::size_t qlen = 1 + rng.index(6);
    for (std::size_t w = 0; w < qlen; ++w)
      query.push_back(rng.coin() ? words[rng.index(20)] : "oovword");
    const auto dist = model->classify(from_tokens(query));
    const auto oracle = nb_oracle(corpus, smoothing, query);
    for (std::size_t i = 0; i < dist.labels.size(); ++i)
      CHECK(std::abs(dist.probs[i] - oracle.at(dist.labels[i])) < 1e-9);
  }
}

TEST_CASE("save/load round-trip preserves posteriors and the query counter counts") {
  const Corpus corpus{{"pos", "good fun nice"}, {"neg", "bad sad"}};
  const auto model = train_bow(corpus, 1.0);
  const auto path = std::filesystem::temp_directory_path() / "evotext_nb_test.json";
  model->save(path.string());
  const auto loaded = NaiveBayesVictim::load(path.string());
  const auto a = model->classify(from_tokens({"good", "bad", "zzz"}));
  const auto b = loaded->classify(from_tokens({"good", "bad", "zzz"}));
  REQUIRE(a.labels == b.labels);
  for (std::size_t i = 0; i < a.probs.size(); ++i)
    CHECK(a.probs[i] == doctest::Approx(b.probs[i]).epsilon(1e-12));
  std::filesystem::remove(path);

  CHECK(model->query_count() == 1);
  model->classify_batch({from_tokens({"x"}), from_tokens({"y"})});
  CHECK(model->query_count() == 3); // monotone, counts every text
}

TEST_CASE("remote victim client") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/classify", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    const json body = json::parse(req.body);
    const auto texts = body.at("texts").get<std::vector<std::string>>();
    json probs = json::array();
    for (const auto& t : texts) {
      // Longer texts lean positive; fixed rule keeps it deterministic.
      const double p = t.size() % 2 == 0 ? 0.7 : 0.3;
      probs.push_back({1.0 - p, p});
    }
    res.set_content(json{{"labels", {"neg", "pos"}}, {"probs", probs}}.dump(),
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  {
    RemoteVictim victim("http://127.0.0.1:" + std::to_string(port));
    const auto dists =
        victim.classify_batch({from_tokens({"ab"}), from_tokens({"abc"})});
    REQUIRE(dists.size() == 2);
    CHECK(dists[0].labels == std::vector<std::string>{"neg", "pos"});
    CHECK(dists[0].probs[1] == doctest::Approx(0.7));
    CHECK(dists[1].probs[1] == doctest::Approx(0.3));
    CHECK(victim.query_count() == 2);
  }
  server.stop();
  thread.join();
  CHECK(hits.load() >= 1);
}

TEST_CASE("remote victim rejects protocol violations distinctly") {
  httplib::Server server;
  std::string payload;
  server.Post("/classify", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(payload, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  RemoteVictim victim("http://127.0.0.1:" + std::to_string(port), 1);

  payload = json{{"labels", {"neg", "pos"}},
                 {"probs", {{0.5, 0.3}}}}.dump(); // sums to 0.8
  CHECK_THROWS_AS(victim.classify_batch({from_tokens({"x"})}),
                  InvariantViolationError);

  payload = json{{"labels", {"neg", "pos"}}, {"probs", json::array()}}.dump();
  CHECK_THROWS_AS(victim.classify_batch({from_tokens({"x"})}),
                  MalformedResponseError);

  payload = "not json at all";
  CHECK_THROWS_AS(victim.classify_batch({from_tokens({"x"})}),
                  MalformedResponseError);

  server.stop();
  thread.join();
}

TEST_CASE("unreachable endpoint raises a transport error after retries") {
  RemoteVictim victim("http://127.0.0.1:1", 2, 1);
  CHECK_THROWS_AS(victim.classify_batch({from_tokens({"x"})}), TransportError);
}
