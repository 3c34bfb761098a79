#include "evotext/serialize.hpp"

namespace evotext {

using nlohmann::json;

json to_json(const FitnessVector& f) { return json::array({f.f1, f.f2, f.f3}); }

FitnessVector fitness_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json to_json(const EditRecord& e) {
  return json{{"p", e.pos}, {"f", e.from}, {"t", e.to}};
}

json to_json(const MutationEventTrace& m) {
  json edits = json::array();
  for (const auto& e : m.edits) edits.push_back(to_json(e));
  return json{{"len", m.len}, {"op", m.op}, {"edits", std::move(edits)}};
}

json to_json(const SubpopTrace& s) {
  json fitness = json::array();
  for (const auto& f : s.fitness) fitness.push_back(to_json(f));
  json mutations = json::array();
  for (const auto& m : s.mutations) mutations.push_back(to_json(m));
  return json{{"mode", s.mode},
              {"fitness", std::move(fitness)},
              {"lens", s.lens},
              {"fronts", s.fronts},
              {"mutations", std::move(mutations)}};
}

json to_json(const GenerationTrace& g) {
  json subpops = json::array();
  for (const auto& s : g.subpops) subpops.push_back(to_json(s));
  return json{{"generation", g.generation},
              {"queries", g.queries},
              {"subpops", std::move(subpops)}};
}

json outcome_to_json(const AttackOutcome& outcome, std::size_t index,
                     const json& extra_metrics) {
  json rec;
  rec["index"] = index;
  rec["raw"] = outcome.original.raw;
  rec["tokens"] = outcome.original.tokens;
  rec["true_label"] = outcome.true_label;
  rec["predicted_label"] = outcome.original_label;
  rec["labels"] = outcome.labels;
  rec["original_probs"] = outcome.original_probs;
  rec["originally_correct"] = outcome.originally_correct;
  rec["attacked"] = outcome.attacked;
  rec["success"] = outcome.success;
  rec["failure_reason"] = outcome.failure_reason;
  rec["queries"] = outcome.queries;
  rec["generations"] = outcome.generations;
  rec["converged"] = outcome.converged;
  if (outcome.chosen) {
    const auto& adv = *outcome.chosen;
    json a;
    a["tokens"] = adv.tokens.tokens;
    a["text"] = join_tokens(adv.tokens);
    a["fitness"] = to_json(adv.fitness);
    a["lm_loss"] = adv.lm_loss;
    a["score"] = adv.score;
    a["flipped_label"] = adv.flipped_label;
    a["words_replaced"] = adv.replaced;
    rec["adversary"] = std::move(a);
  } else {
    rec["adversary"] = nullptr;
  }
  if (!extra_metrics.is_null()) rec["metrics"] = extra_metrics;
  return rec;
}

} // namespace evotext
