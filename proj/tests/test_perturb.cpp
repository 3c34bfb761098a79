#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "evotext/errors.hpp"
#include "evotext/perturb.hpp"

using namespace evotext;
using nlohmann::json;

namespace {

QwertyMap tiny_map() {
  // Symmetric toy layout covering a-z and 0-9 in a ring.
  std::vector<std::string> lines;
  const std::string keys = "abcdefghijklmnopqrstuvwxyz0123456789";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const char prev = keys[(i + keys.size() - 1) % keys.size()];
    const char next = keys[(i + 1) % keys.size()];
    lines.push_back(std::string(1, keys[i]) + ":" + prev + next);
  }
  return QwertyMap::from_lines(lines);
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                          std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

WordEmbeddingTable table_from(const std::string& text) {
  std::istringstream in(text);
  return WordEmbeddingTable::load(in);
}

} // namespace

TEST_CASE("qwerty map loader enforces format, symmetry, and coverage") {
  CHECK(tiny_map().size() == 36);
  CHECK_THROWS_AS(QwertyMap::from_lines({"a:b"}), ParseError); // asymmetric
  CHECK_THROWS_AS(QwertyMap::from_lines({"ab"}), ParseError);  // bad format
  // Missing letters/digits rejected.
  CHECK_THROWS_AS(QwertyMap::from_lines({"a:b", "b:a"}), ParseError);
}

TEST_CASE("char_swap_typo transposes one adjacent pair") {
  Rng rng(1);
  CHECK(char_swap_typo("ab", rng) == "ba");
  CHECK_THROWS_AS(char_swap_typo("a", rng), TooShortError);

  std::map<std::string, int> seen;
  for (int t = 0; t < 4000; ++t) seen[char_swap_typo("abc", rng)]++;
  REQUIRE(seen.size() == 2);
  CHECK(seen.count("bac") == 1);
  CHECK(seen.count("acb") == 1);
  // Each swap index drawn with probability 1/2.
  CHECK(seen["bac"] > 1700);
  CHECK(seen["acb"] > 1700);
}

TEST_CASE("qwerty_typo replaces one mappable character") {
  const auto map = tiny_map();
  Rng rng(2);
  // In the ring layout, `a` neighbors `9` and `b`.
  std::map<std::string, int> seen;
  for (int t = 0; t < 4000; ++t) seen[qwerty_typo("a", map, rng)]++;
  REQUIRE(seen.size() == 2);
  CHECK(seen["9"] > 1700);
  CHECK(seen["b"] > 1700);

  QwertyMap empty_chars = tiny_map();
  CHECK_THROWS_AS(qwerty_typo("--", empty_chars, rng), NoMappableCharError);
}

TEST_CASE("typo budget follows the strict 10 percent rule with floor 1") {
  CHECK(typo_budget(1) == 1);
  CHECK(typo_budget(5) == 1);  // ceil(0.5)-1 = 0, floored to 1
  CHECK(typo_budget(10) == 1); // ceil(1)-1 = 0, floored to 1
  CHECK(typo_budget(11) == 1); // ceil(1.1)-1 = 1
  CHECK(typo_budget(30) == 2); // ceil(3)-1 = 2
  CHECK(typo_budget(100) == 9);
}

TEST_CASE("add_typos respects the budget and produces typo-shaped edits") {
  const auto map = tiny_map();
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.index(40);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) {
      std::string w;
      const std::size_t len = 1 + rng.index(8);
      for (std::size_t c = 0; c < len; ++c)
        w.push_back(static_cast<char>('a' + rng.index(26)));
      words.push_back(w);
    }
    const TokenSeq input = from_tokens(words);
    const auto out = add_typos(input, map, rng);

    CHECK(out.tokens.size() == input.size()); // token count preserved
    if (out.noop) {
      CHECK(out.tokens.tokens == input.tokens);
      continue;
    }
    CHECK(out.edits.size() >= 1);
    CHECK(out.edits.size() <= typo_budget(n));
    CHECK((out.op == "typo_swap" || out.op == "typo_qwerty"));
    for (const auto& e : out.edits) {
      CHECK(e.from == input.tokens[e.pos]);
      CHECK(e.to == out.tokens.tokens[e.pos]);
      CHECK(e.from.size() == e.to.size());
      const std::size_t dist = levenshtein(e.from, e.to);
      if (out.op == "typo_qwerty") {
        CHECK(dist == 1); // exactly one substitution
      } else {
        CHECK(dist <= 2); // one adjacent transposition
      }
    }
    // Unedited positions are untouched.
    std::vector<bool> edited(n, false);
    for (const auto& e : out.edits) edited[e.pos] = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!edited[i]) CHECK(out.tokens.tokens[i] == input.tokens[i]);
  }
}

TEST_CASE("add_typos determinism for a fixed seed") {
  const auto map = tiny_map();
  const TokenSeq input = from_tokens({"alpha", "beta", "gamma", "delta"});
  Rng r1(77), r2(77);
  const auto a = add_typos(input, map, r1);
  const auto b = add_typos(input, map, r2);
  CHECK(a.tokens.tokens == b.tokens.tokens);
  CHECK(a.op == b.op);
}

TEST_CASE("glove_mutate substitutes only dual-threshold synonyms") {
  const auto general = table_from(
      "good 1 0 0\n"
      "great 0.95 0.31224989991991993 0\n"
      "movie 0 1 0\n"
      "film 0.05 0.99874921777190884 0\n"
      "rock 0 0 1\n");
  const auto cf = table_from(
      "good 1 0 0\n"
      "great 0.93 0.36755952471835056 0\n"
      "movie 0 1 0\n"
      "film 0.04 0.99919967974331621 0\n"
      "rock 0 0 1\n");

  Rng rng(5);
  int mutated = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const TokenSeq input = from_tokens({"good", "movie", "rock"});
    const auto out = glove_mutate(input, general, cf, 0.6, rng, 8);
    CHECK(out.tokens.size() == input.size());
    CHECK_FALSE(out.noop); // good and movie have synonyms
    for (const auto& e : out.edits) {
      ++mutated;
      // Re-verify both cosine constraints directly.
      CHECK(cosine(*general.find(e.from), *general.find(e.to)) >= 0.6);
      CHECK(cosine(*cf.find(e.from), *cf.find(e.to)) >= 0.6);
      CHECK((e.to == "great" || e.to == "film"));
    }
    CHECK(out.edits.size() <= 2);
  }
  CHECK(mutated > 0);

  // A sentence with no synonyms anywhere comes back flagged.
  Rng rng2(6);
  const auto noop = glove_mutate(from_tokens({"rock", "rock"}), general, cf,
                                 0.6, rng2, 8);
  CHECK(noop.noop);
  CHECK(noop.tokens.tokens == std::vector<std::string>{"rock", "rock"});
}

TEST_CASE("glove_mutate toy table forces the only synonym") {
  const auto general = table_from("good 1 0\ngreat 0.99 0.14106735979665885\nxx 0 1\n");
  const auto cf = general;
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto out = glove_mutate(from_tokens({"good", "xx"}), general, cf, 0.6,
                                  rng, 8);
    for (const auto& e : out.edits) {
      CHECK(e.from == "good");
      CHECK(e.to == "great");
    }
  }
}

namespace {

class StubMutator : public SequenceMutator {
public:
  explicit StubMutator(std::vector<std::vector<std::string>> candidates)
      : candidates_(std::move(candidates)) {}
  std::vector<TokenSeq> rewrite(const TokenSeq&, std::size_t) const override {
    std::vector<TokenSeq> out;
    for (const auto& c : candidates_) out.push_back(from_tokens(c));
    return out;
  }

private:
  std::vector<std::vector<std::string>> candidates_;
};

} // namespace

TEST_CASE("seq_mutate samples uniformly among returned candidates") {
  const TokenSeq input = from_tokens({"a", "b"});

  const StubMutator identity(std::vector<std::vector<std::string>>{{"a", "b"}});
  Rng rng(11);
  const auto out = seq_mutate(input, identity, rng);
  CHECK(out.tokens.tokens == input.tokens);
  CHECK(out.noop);

  const std::vector<std::vector<std::string>> beams{
      {"a", "b"}, {"a", "c"}, {"a", "d"}, {"a", "e"}, {"a", "f"}};
  const StubMutator five(beams);
  std::map<std::string, int> seen;
  for (int t = 0; t < 10000; ++t)
    seen[join_tokens(seq_mutate(input, five, rng).tokens)]++;
  REQUIRE(seen.size() == 5);
  for (const auto& [_, count] : seen) CHECK(count > 1700); // ~1/5 each

  const StubMutator wrong_len(std::vector<std::vector<std::string>>{{"a", "b", "c"}});
  CHECK_THROWS_AS(seq_mutate(input, wrong_len, rng), InvariantViolationError);
  auto six = beams;
  six.push_back({"a", "g"});
  const StubMutator too_many(six);
  CHECK_THROWS_AS(seq_mutate(input, too_many, rng), InvariantViolationError);
}

TEST_CASE("remote sequence mutator speaks the wire protocol") {
  httplib::Server server;
  server.Post("/mutate", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    CHECK(body.at("beams").get<int>() == 5);
    const std::string text = body.at("text").get<std::string>();
    res.set_content(json{{"candidates", {text, text}}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  {
    RemoteSequenceMutator mutator("http://127.0.0.1:" + std::to_string(port));
    const auto candidates = mutator.rewrite(from_tokens({"x", "y"}), 5);
    REQUIRE(candidates.size() == 2);
    CHECK(candidates[0].tokens == std::vector<std::string>{"x", "y"});
  }
  server.stop();
  thread.join();

  RemoteSequenceMutator dead("http://127.0.0.1:1", 1, 1);
  Rng rng(3);
  CHECK_THROWS_AS(seq_mutate(from_tokens({"x", "y"}), dead, rng), TransportError);
}
