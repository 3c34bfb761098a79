#ifndef EVOTEXT_SELECTION_HPP
#define EVOTEXT_SELECTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "evotext/engine.hpp"

namespace evotext {

// Final selection metric: (f2 * f3) / lm^alpha. Requires lm > 0 and
// alpha > 0; negative f3 yields a negative score, ranking below any
// non-negative candidate.
double final_score(double f2, double f3, double lm, double alpha);

struct ChosenAdversary {
  TokenSeq tokens;
  FitnessVector fitness;
  double lm_loss = 0.0;
  double score = 0.0;
  std::string flipped_label;
  std::size_t replaced = 0;
};

struct AttackOutcome {
  TokenSeq original;
  std::string original_label;        // victim argmax on the original
  std::vector<std::string> labels;
  std::vector<double> original_probs;
  bool success = false;
  std::optional<ChosenAdversary> chosen;
  std::uint64_t queries = 0;
  std::size_t generations = 0;
  bool converged = false;
  std::vector<GenerationTrace> trace;
  // Filled by callers that know ground truth:
  std::string true_label;
  bool originally_correct = false;
  bool attacked = false;
  std::string failure_reason;
};

// One candidate row of the final ranking.
struct ScoredCandidate {
  std::size_t index = 0;
  double score = 0.0;
  double f2 = 0.0;
  const TokenSeq* tokens = nullptr;
};

// Argmax by score, ties by higher f2, then lexicographically smaller
// token sequence. Empty input -> nullopt.
std::optional<std::size_t> select_best(const std::vector<ScoredCandidate>& rows);

// Restricts the final population to candidates whose delivered form flips
// the victim argmax, scores them with Eq-style final_score, and fills the
// outcome. Consumes one batched victim query over the final population.
AttackOutcome pick_best(AttackResult&& result, const VictimModel& victim,
                        const LanguageModel& lm, double alpha);

// Convenience: full attack + final selection.
AttackOutcome run_full_attack(const std::string& raw_text,
                              const AttackConfig& config, const AttackDeps& deps);

// ---- Aggregate metrics -------------------------------------------------

// 100 * successes / originally-correct outcomes.
double success_rate(const std::vector<AttackOutcome>& outcomes);

// Accuracy once successful adversaries replace their originals.
double degraded_accuracy(double original_accuracy,
                         const std::vector<AttackOutcome>& outcomes);

// Mean words replaced across successful attacks.
double awr(const std::vector<AttackOutcome>& outcomes);

struct TransferSample {
  TokenSeq original;
  TokenSeq adversary;
  std::string true_label;
};

struct TransferReport {
  double percentage = 0.0;
  std::vector<bool> considered; // per input sample: model B was correct on the original
  std::vector<bool> transfers;  // per input sample: adversary also flips model B
};

// Fraction of adversaries that also flip model B, over the samples whose
// originals model B labels correctly.
TransferReport transferability(const std::vector<TransferSample>& samples,
                               const VictimModel& model_b);

struct OverlapMetrics {
  double bleu = 0.0;
  std::optional<double> gms;
  std::optional<double> vecs;
};

// BLEU (1-4 gram, add-one smoothing for n >= 2, brevity penalty), greedy
// matching score, and vector-extrema cosine similarity. GMS/VECS skip OOV
// tokens and are absent when a side is entirely OOV.
OverlapMetrics overlap_metrics(const TokenSeq& orig, const TokenSeq& adv,
                               const WordEmbeddingTable& table);

} // namespace evotext

#endif
