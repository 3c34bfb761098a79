#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "evotext/errors.hpp"
#include "evotext/rng.hpp"
#include "evotext/selection.hpp"

using namespace evotext;

namespace {

WordEmbeddingTable table_from(const std::string& text) {
  std::istringstream in(text);
  return WordEmbeddingTable::load(in);
}

// Independent n-gram oracle for BLEU: separate counting code, string
// keys instead of token vectors.
double bleu_oracle(const std::vector<std::string>& ref,
                   const std::vector<std::string>& cand) {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::string, long> rc, cc;
    auto grams = [&](const std::vector<std::string>& toks,
                     std::map<std::string, long>& into) {
      if (toks.size() < n) return;
      for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key;
        for (std::size_t k = 0; k < n; ++k) key += toks[i + k] + "\x01";
        into[key]++;
      }
    };
    grams(ref, rc);
    grams(cand, cc);
    long matched = 0, total = 0;
    for (const auto& [key, count] : cc) {
      total += count;
      auto it = rc.find(key);
      if (it != rc.end()) matched += std::min(count, it->second);
    }
    double p;
    if (n == 1) {
      if (total == 0) return 0.0;
      p = static_cast<double>(matched) / static_cast<double>(total);
    } else {
      p = (static_cast<double>(matched) + 1.0) / (static_cast<double>(total) + 1.0);
    }
    if (p == 0.0) return 0.0;
    log_sum += 0.25 * std::log(p);
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum);
}

AttackOutcome make_outcome(bool correct, bool success, std::size_t replaced) {
  AttackOutcome o;
  o.originally_correct = correct;
  o.success = success;
  o.attacked = correct;
  if (success) {
    ChosenAdversary adv;
    adv.replaced = replaced;
    o.chosen = adv;
  }
  return o;
}

} // namespace

TEST_CASE("final_score tagged examples") {
  CHECK(final_score(1, 1, 1, 1.2) == 1.0);
  CHECK(final_score(0, 0.37, 8.4, 1.2) == 0.0);
  // High-precision oracle via long double arithmetic.
  const long double expected =
      (0.8L * 0.9L) / std::pow(5.94L, 1.2L);
  CHECK(std::abs(final_score(0.8, 0.9, 5.94, 1.2) -
                 static_cast<double>(expected)) < 1e-12);
  CHECK_THROWS_AS(final_score(0.5, 0.5, 0.0, 1.2), DomainError);
  CHECK_THROWS_AS(final_score(0.5, 0.5, -1.0, 1.2), DomainError);
  CHECK_THROWS_AS(final_score(0.5, 0.5, 1.0, 0.0), DomainError);
  // Negative semantic similarity ranks below any non-negative score.
  CHECK(final_score(0.5, -0.2, 3.0, 1.2) < 0.0);
}

TEST_CASE("final_score monotonicity on the positive orthant") {
  Rng rng(8);
  for (int t = 0; t < 2000; ++t) {
    const double f2 = 0.05 + 0.9 * rng.uniform01();
    const double f3 = 0.05 + 0.9 * rng.uniform01();
    const double lm = 0.5 + 10.0 * rng.uniform01();
    const double alpha = 0.2 + 2.0 * rng.uniform01();
    const double base = final_score(f2, f3, lm, alpha);
    CHECK(final_score(f2 + 0.05, f3, lm, alpha) > base);
    CHECK(final_score(f2, f3 + 0.05, lm, alpha) > base);
    CHECK(final_score(f2, f3, lm + 0.5, alpha) < base);
  }
}

TEST_CASE("select_best argmax is invariant under uniform LM scaling") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(20);
    std::vector<double> f2s, f3s, lms;
    std::vector<TokenSeq> toks;
    for (std::size_t i = 0; i < n; ++i) {
      f2s.push_back(0.05 + 0.9 * rng.uniform01());
      f3s.push_back(-0.5 + 1.4 * rng.uniform01());
      lms.push_back(0.5 + 8.0 * rng.uniform01());
      toks.push_back(from_tokens({"t" + std::to_string(i)}));
    }
    const double scale = 0.1 + 10.0 * rng.uniform01();

    auto build = [&](double mult) {
      std::vector<ScoredCandidate> rows;
      for (std::size_t i = 0; i < n; ++i) {
        ScoredCandidate row;
        row.index = i;
        row.f2 = f2s[i];
        row.tokens = &toks[i];
        row.score = final_score(f2s[i], f3s[i], lms[i] * mult, 1.2);
        rows.push_back(row);
      }
      return rows;
    };
    const auto base = select_best(build(1.0));
    const auto scaled = select_best(build(scale));
    REQUIRE(base.has_value());
    REQUIRE(scaled.has_value());
    CHECK(base == scaled);
  }
}

TEST_CASE("select_best tie rules") {
  std::vector<TokenSeq> toks{from_tokens({"b"}), from_tokens({"a"})};
  std::vector<ScoredCandidate> rows{
      {0, 0.5, 0.7, &toks[0]},
      {1, 0.5, 0.7, &toks[1]},
  };
  // Same score, same f2: lexicographically smaller tokens win.
  CHECK(*select_best(rows) == 1);
  rows[0].f2 = 0.8;
  CHECK(*select_best(rows) == 0); // higher f2 breaks the score tie
  rows[1].score = 0.6;
  CHECK(*select_best(rows) == 1); // score dominates everything
  CHECK_FALSE(select_best({}).has_value());
}

TEST_CASE("success rate, degraded accuracy, AWR") {
  std::vector<AttackOutcome> outcomes;
  outcomes.push_back(make_outcome(true, true, 2));
  outcomes.push_back(make_outcome(true, false, 0));
  outcomes.push_back(make_outcome(true, true, 4));
  outcomes.push_back(make_outcome(true, false, 0));
  outcomes.push_back(make_outcome(false, false, 0)); // misclassified: excluded
  CHECK(success_rate(outcomes) == doctest::Approx(50.0));
  CHECK(degraded_accuracy(75.26, outcomes) == doctest::Approx(75.26 * 0.5));
  CHECK(awr(outcomes) == doctest::Approx(3.0));

  std::vector<AttackOutcome> none{make_outcome(true, false, 0)};
  CHECK(success_rate(none) == 0.0);
  CHECK(degraded_accuracy(80.0, none) == doctest::Approx(80.0));
  CHECK_THROWS_AS(awr(none), NoSuccessError);
  CHECK_THROWS_AS(success_rate({}), EmptyInputError);

  std::vector<AttackOutcome> all{make_outcome(true, true, 1)};
  CHECK(success_rate(all) == 100.0);
  CHECK(degraded_accuracy(66.0, all) == doctest::Approx(0.0));

  // The worked Table-2-style arithmetic: 75.26% original, 65% success.
  std::vector<AttackOutcome> t2;
  for (int i = 0; i < 65; ++i) t2.push_back(make_outcome(true, true, 1));
  for (int i = 0; i < 35; ++i) t2.push_back(make_outcome(true, false, 0));
  CHECK(degraded_accuracy(75.26, t2) == doctest::Approx(26.341).epsilon(1e-6));
}

TEST_CASE("transferability against a second victim") {
  const std::vector<std::pair<std::string, std::string>> corpus_a{
      {"pos", "good nice fine"}, {"neg", "bad awful sad"}};
  const auto model_a = train_bow(corpus_a, 1.0);
  const std::vector<std::pair<std::string, std::string>> corpus_b{
      {"pos", "good sweet warm"}, {"neg", "bad bitter cold"}};
  const auto model_b = train_bow(corpus_b, 1.0);

  std::vector<TransferSample> samples;
  samples.push_back({from_tokens({"good", "nice"}), from_tokens({"bad", "nice"}), "pos"});
  samples.push_back({from_tokens({"bad", "sad"}), from_tokens({"bad", "warm"}), "neg"});

  // Model A == model B: adversaries flip by construction against A, so
  // transfer is 100% when B is the same model and correct on originals.
  {
    std::vector<TransferSample> flips;
    for (const auto& s : samples) {
      const auto od = model_a->classify(s.original);
      const auto ad = model_a->classify(s.adversary);
      if (od.labels[od.argmax()] == s.true_label && ad.argmax() != od.argmax())
        flips.push_back(s);
    }
    if (!flips.empty()) {
      const auto tr = transferability(flips, *model_a);
      CHECK(tr.percentage == 100.0);
    }
  }

  // Per-definition re-query oracle against model B.
  const auto tr = transferability(samples, *model_b);
  std::size_t considered = 0, transfers = 0;
  for (const auto& s : samples) {
    const auto od = model_b->classify(s.original);
    if (od.labels[od.argmax()] != s.true_label) continue;
    ++considered;
    const auto ad = model_b->classify(s.adversary);
    if (ad.argmax() != od.argmax()) ++transfers;
  }
  REQUIRE(considered > 0);
  CHECK(tr.percentage ==
        doctest::Approx(100.0 * static_cast<double>(transfers) /
                        static_cast<double>(considered)));
  CHECK_THROWS_AS(transferability({}, *model_b), EmptyInputError);
}

TEST_CASE("overlap metrics identity and orthogonal cases") {
  const auto table = table_from(
      "aa 1 0 0 0\n"
      "bb 0 1 0 0\n"
      "cc 0 0 1 0\n"
      "dd 0 0 0 1\n");
  const auto orig = from_tokens({"aa", "bb"});
  const auto same = overlap_metrics(orig, orig, table);
  CHECK(same.bleu == 1.0);
  REQUIRE(same.gms.has_value());
  REQUIRE(same.vecs.has_value());
  CHECK(*same.gms == 1.0);
  CHECK(*same.vecs == 1.0);

  // Disjoint vocabulary with orthogonal embeddings.
  const auto other = from_tokens({"cc", "dd"});
  const auto ortho = overlap_metrics(orig, other, table);
  CHECK(ortho.bleu == 0.0);
  CHECK(std::abs(*ortho.gms) < 1e-12);
  CHECK(std::abs(*ortho.vecs) < 1e-12);

  // Fully OOV side: gms/vecs absent, bleu still defined.
  const auto oov = overlap_metrics(orig, from_tokens({"zz", "yy"}), table);
  CHECK_FALSE(oov.gms.has_value());
  CHECK_FALSE(oov.vecs.has_value());
  CHECK(oov.bleu == 0.0);
}

TEST_CASE("BLEU matches the independent n-gram oracle on random pairs") {
  Rng rng(404);
  const auto table = table_from("w0 1 0\nw1 0 1\n");
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(14);
    std::vector<std::string> ref, cand;
    for (std::size_t i = 0; i < n; ++i)
      ref.push_back("w" + std::to_string(rng.index(6)));
    cand = ref;
    // Random substitutions, sometimes many, sometimes none.
    const std::size_t subs = rng.index(n);
    for (std::size_t s = 0; s < subs; ++s)
      cand[rng.index(n)] = "w" + std::to_string(rng.index(6));
    const auto got = overlap_metrics(from_tokens(ref), from_tokens(cand), table);
    const double want = bleu_oracle(ref, cand);
    CHECK(std::abs(got.bleu - want) < 1e-9);
  }
}

TEST_CASE("single substitution in a 10-token sentence against the oracle") {
  const auto table = table_from("w0 1 0\nw1 0 1\n");
  std::vector<std::string> ref{"w1", "w2", "w3", "w4", "w5",
                               "w6", "w7", "w8", "w9", "w10"};
  auto cand = ref;
  cand[4] = "w99";
  const auto got = overlap_metrics(from_tokens(ref), from_tokens(cand), table);
  CHECK(std::abs(got.bleu - bleu_oracle(ref, cand)) < 1e-12);
  CHECK(got.bleu < 1.0);
  CHECK(got.bleu > 0.0);
}
