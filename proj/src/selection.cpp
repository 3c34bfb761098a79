#include "evotext/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "evotext/errors.hpp"

namespace evotext {

double final_score(double f2, double f3, double lm, double alpha) {
  if (!(lm > 0.0)) throw DomainError("final_score: lm must be > 0");
  if (!(alpha > 0.0)) throw DomainError("final_score: alpha must be > 0");
  return (f2 * f3) / std::pow(lm, alpha);
}

std::optional<std::size_t> select_best(const std::vector<ScoredCandidate>& rows) {
  if (rows.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[best];
    if (a.score > b.score ||
        (a.score == b.score &&
         (a.f2 > b.f2 ||
          (a.f2 == b.f2 && a.tokens->tokens < b.tokens->tokens))))
      best = i;
  }
  return best;
}

AttackOutcome pick_best(AttackResult&& result, const VictimModel& victim,
                        const LanguageModel& lm, double alpha) {
  AttackOutcome outcome;
  outcome.original = result.original;
  outcome.original_label = result.original_label;
  outcome.labels = result.original_dist.labels;
  outcome.original_probs = result.original_dist.probs;
  outcome.generations = result.generations_run;
  outcome.converged = result.converged;
  outcome.attacked = true;

  std::vector<const Candidate*> members;
  for (const auto& pop : result.subpops)
    for (const auto& m : pop.members) members.push_back(&m);

  std::vector<TokenSeq> texts;
  texts.reserve(members.size());
  const bool mutated = result.fitness_form == FitnessForm::Mutated;
  for (const Candidate* m : members)
    texts.push_back(mutated ? m->ind_mut : m->ind);
  const auto dists = victim.classify_batch(texts);
  outcome.queries = result.queries + texts.size();

  std::vector<ScoredCandidate> rows;
  std::vector<std::string> row_labels;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const std::size_t am = dists[i].argmax();
    if (am == result.original_label_index) continue;
    ScoredCandidate row;
    row.index = i;
    row.f2 = members[i]->fitness->f2;
    row.tokens = &texts[i];
    row.score = final_score(members[i]->fitness->f2, members[i]->fitness->f3,
                            lm.nll(texts[i]), alpha);
    rows.push_back(row);
    row_labels.push_back(dists[i].labels[am]);
  }

  if (const auto best = select_best(rows)) {
    const ScoredCandidate& row = rows[*best];
    ChosenAdversary adv;
    adv.tokens = *row.tokens;
    adv.fitness = *members[row.index]->fitness;
    adv.lm_loss = lm.nll(*row.tokens);
    adv.score = row.score;
    adv.flipped_label = row_labels[*best];
    adv.replaced = words_replaced(result.original, adv.tokens);
    outcome.chosen = std::move(adv);
    outcome.success = true;
  }

  outcome.trace = std::move(result.trace);
  return outcome;
}

AttackOutcome run_full_attack(const std::string& raw_text,
                              const AttackConfig& config, const AttackDeps& deps) {
  if (deps.lm == nullptr) throw ConfigError("run_full_attack: language model missing");
  AttackEngine engine(config, deps);
  return pick_best(engine.run(raw_text), *deps.victim, *deps.lm, config.alpha);
}

double success_rate(const std::vector<AttackOutcome>& outcomes) {
  if (outcomes.empty()) throw EmptyInputError("success_rate: no outcomes");
  std::size_t correct = 0, successes = 0;
  for (const auto& o : outcomes) {
    if (o.originally_correct) ++correct;
    if (o.success) ++successes;
  }
  if (correct == 0)
    throw EmptyInputError("success_rate: no correctly classified inputs");
  return 100.0 * static_cast<double>(successes) / static_cast<double>(correct);
}

double degraded_accuracy(double original_accuracy,
                         const std::vector<AttackOutcome>& outcomes) {
  return original_accuracy * (1.0 - success_rate(outcomes) / 100.0);
}

double awr(const std::vector<AttackOutcome>& outcomes) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& o : outcomes) {
    if (!o.success || !o.chosen) continue;
    total += static_cast<double>(o.chosen->replaced);
    ++count;
  }
  if (count == 0) throw NoSuccessError("awr: no successful attacks");
  return total / static_cast<double>(count);
}

TransferReport transferability(const std::vector<TransferSample>& samples,
                               const VictimModel& model_b) {
  if (samples.empty()) throw EmptyInputError("transferability: no samples");
  std::vector<TokenSeq> texts;
  for (const auto& s : samples) {
    texts.push_back(s.original);
    texts.push_back(s.adversary);
  }
  const auto dists = model_b.classify_batch(texts);

  TransferReport report;
  report.considered.resize(samples.size(), false);
  report.transfers.resize(samples.size(), false);
  std::size_t considered = 0, transferred = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& orig_dist = dists[2 * i];
    const auto& adv_dist = dists[2 * i + 1];
    if (orig_dist.labels[orig_dist.argmax()] != samples[i].true_label) continue;
    report.considered[i] = true;
    ++considered;
    if (adv_dist.argmax() != orig_dist.argmax()) {
      report.transfers[i] = true;
      ++transferred;
    }
  }
  if (considered == 0)
    throw EmptyInputError("transferability: model B misclassifies every original");
  report.percentage =
      100.0 * static_cast<double>(transferred) / static_cast<double>(considered);
  return report;
}

namespace {

std::map<std::vector<std::string>, std::size_t>
ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

double bleu_score(const TokenSeq& reference, const TokenSeq& candidate) {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto ref = ngram_counts(reference.tokens, n);
    const auto cand = ngram_counts(candidate.tokens, n);
    double matched = 0.0, total = 0.0;
    for (const auto& [gram, count] : cand) {
      total += static_cast<double>(count);
      auto it = ref.find(gram);
      if (it != ref.end())
        matched += static_cast<double>(std::min(count, it->second));
    }
    double precision;
    if (n == 1) {
      if (total == 0.0) return 0.0;
      precision = matched / total;
    } else {
      precision = (matched + 1.0) / (total + 1.0); // add-one smoothing
    }
    if (precision == 0.0) return 0.0;
    log_sum += 0.25 * std::log(precision);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = (c >= r) ? 1.0 : std::exp(1.0 - r / c);
  const double bleu = bp * std::exp(log_sum);
  // Exact 1 for identical sentences: every precision and bp is exactly 1.
  return bleu;
}

} // namespace

OverlapMetrics overlap_metrics(const TokenSeq& orig, const TokenSeq& adv,
                               const WordEmbeddingTable& table) {
  if (orig.empty() || adv.empty())
    throw EmptyInputError("overlap_metrics: empty input");

  OverlapMetrics out;
  out.bleu = bleu_score(orig, adv);

  std::vector<const std::vector<double>*> ov, av;
  for (const auto& t : orig.tokens)
    if (const auto* v = table.find(t)) ov.push_back(v);
  for (const auto& t : adv.tokens)
    if (const auto* v = table.find(t)) av.push_back(v);

  if (!ov.empty() && !av.empty()) {
    auto directional = [](const std::vector<const std::vector<double>*>& from,
                          const std::vector<const std::vector<double>*>& to) {
      double acc = 0.0;
      for (const auto* f : from) {
        double best = -1.0;
        for (const auto* t : to) best = std::max(best, cosine(*f, *t));
        acc += best;
      }
      return acc / static_cast<double>(from.size());
    };
    out.gms = 0.5 * (directional(ov, av) + directional(av, ov));

    auto extrema = [&](const std::vector<const std::vector<double>*>& vecs) {
      std::vector<double> ex(table.dim(), 0.0);
      for (const auto* v : vecs) {
        for (std::size_t d = 0; d < ex.size(); ++d)
          if (std::abs((*v)[d]) > std::abs(ex[d])) ex[d] = (*v)[d];
      }
      return ex;
    };
    const auto ea = extrema(ov);
    const auto eb = extrema(av);
    const bool za = std::all_of(ea.begin(), ea.end(), [](double x) { return x == 0.0; });
    const bool zb = std::all_of(eb.begin(), eb.end(), [](double x) { return x == 0.0; });
    if (!za && !zb) out.vecs = cosine(ea, eb);
  }
  return out;
}

} // namespace evotext
