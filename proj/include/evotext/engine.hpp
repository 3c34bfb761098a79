#ifndef EVOTEXT_ENGINE_HPP
#define EVOTEXT_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evotext/perturb.hpp"
#include "evotext/rng.hpp"
#include "evotext/scorers.hpp"
#include "evotext/token_seq.hpp"
#include "evotext/victim.hpp"

namespace evotext {

// The 3-objective fitness of a candidate; every component is maximized.
// f1: posterior shift in [0,1], f2: positional Jaccard in [0,1],
// f3: semantic similarity in [-1,1].
struct FitnessVector {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
};

// One population member: the normal form carried as genetic material and
// the mutated (delivered) form, plus the last mutation event for tracing.
struct Candidate {
  TokenSeq ind;
  TokenSeq ind_mut;
  std::optional<FitnessVector> fitness;
  std::size_t generation = 0;
  std::string op;
  std::vector<EditRecord> edits;
};

enum class MutationMode { Swap, Typo };
enum class AttackMode { Single, Combined };
enum class MutatorChoice { Glove, Sequence };

// Which form the fitness vector is computed on. Mutated is the paper
// pipeline; Normal exists for sensitivity studies.
enum class FitnessForm { Mutated, Normal };

struct AttackConfig {
  AttackMode mode = AttackMode::Single;
  std::size_t popsize = 64;
  double delta = 0.6;
  double alpha = 1.2;
  std::size_t max_iters = 60;
  std::size_t k_imp = 8;
  std::size_t k_nn = 8;
  std::uint64_t seed = 0;
  MutatorChoice mutator = MutatorChoice::Glove;
  FitnessForm fitness_form = FitnessForm::Mutated;

  void validate() const; // throws ConfigError
};

struct Population {
  std::vector<Candidate> members;
  MutationMode mode = MutationMode::Swap;
};

// Everything the engine queries. Non-owning; all plugins must outlive the
// engine and allow concurrent read-only use.
struct AttackDeps {
  const VictimModel* victim = nullptr;
  const SentenceEncoder* encoder = nullptr;
  const WordImportance* importance = nullptr;
  const WordEmbeddingTable* general = nullptr;
  const WordEmbeddingTable* counterfitted = nullptr;
  const QwertyMap* qwerty = nullptr;
  const SequenceMutator* seq_mutator = nullptr; // required for MutatorChoice::Sequence
  const LanguageModel* lm = nullptr;            // used by final selection
};

// ---- NSGA-2 primitives ------------------------------------------------

// Standard Pareto dominance, all objectives maximized: a >= b everywhere
// and a > b somewhere.
bool dominates(const FitnessVector& a, const FitnessVector& b);

// Deb's fast non-dominated sort. Front 0 is the non-dominated set; front
// k is non-dominated once fronts < k are removed. Indices within a front
// are ascending.
std::vector<std::vector<std::size_t>>
fast_nondominated_sort(const std::vector<FitnessVector>& pop);

// NSGA-2 crowding distance for one front, aligned with the front order.
// Fronts of size <= 2 are all-infinite; a zero-range objective
// contributes nothing.
std::vector<double> crowding_distance(const std::vector<FitnessVector>& front);

// Per-member front rank and crowding distance over a whole population.
struct RankedPopulation {
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> rank;
  std::vector<double> crowding;
};
RankedPopulation rank_population(const std::vector<FitnessVector>& pop);

// Elitist truncation of a combined parent+child pool to `popsize`
// members: whole fronts in order, the cut front by descending crowding
// distance with ties broken by insertion order.
std::vector<std::size_t>
environmental_select(const std::vector<FitnessVector>& pool, std::size_t popsize);

// Binary tournaments producing `pairs` parent pairs. The dominator wins;
// otherwise the larger crowding distance; otherwise a coin. The two
// winners of a pair are re-drawn while they refer to the same member.
std::vector<std::pair<std::size_t, std::size_t>>
tournament_select(const std::vector<FitnessVector>& fitness,
                  const std::vector<double>& crowding, std::size_t pairs,
                  Rng& rng);

// Single-point structural crossover: two children from the normal forms
// at one cut, two from the mutated forms at an independent cut. Each
// child starts with ind == ind_mut, to be re-mutated downstream.
std::vector<Candidate> single_point_crossover(const Candidate& p1,
                                              const Candidate& p2, Rng& rng);

// ---- Trace ------------------------------------------------------------

struct MutationEventTrace {
  std::size_t len = 0;
  std::string op;
  std::vector<EditRecord> edits;
};

struct SubpopTrace {
  std::string mode; // "swap" | "typo"
  std::vector<FitnessVector> fitness;          // post-selection population
  std::vector<std::size_t> lens;               // token counts, same order
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<MutationEventTrace> mutations;   // every event this generation
};

struct GenerationTrace {
  std::size_t generation = 0;
  std::uint64_t queries = 0; // cumulative victim queries for this attack
  std::vector<SubpopTrace> subpops;
};

// ---- Attack loop ------------------------------------------------------

struct AttackResult {
  TokenSeq original;
  LabelDistribution original_dist;
  std::size_t original_label_index = 0;
  std::string original_label;
  std::vector<Population> subpops; // one, or two in combined mode
  std::vector<GenerationTrace> trace;
  std::uint64_t queries = 0;
  std::size_t generations_run = 0;
  bool converged = false;
  FitnessForm fitness_form = FitnessForm::Mutated;
};

class AttackEngine {
public:
  AttackEngine(const AttackConfig& config, const AttackDeps& deps);

  // Full GA-Execute loop on one sentence. Throws NoAttackableWordsError
  // when no word has a qualifying synonym, TooShortError under 2 tokens.
  AttackResult run(const std::string& raw_text);

  // Exposed for tests: one GA iteration on an evaluated population.
  void ga_step(Population& pop, std::size_t generation, std::uint64_t subpop_tag,
               SubpopTrace* trace);

  // Exposed for tests: builds and evaluates the initial population.
  Population initialize_population(MutationMode mode, std::size_t popsize,
                                   std::uint64_t subpop_tag, SubpopTrace* trace);

  // Must be called before initialize_population/ga_step when driving the
  // engine manually.
  void bind(const TokenSeq& original);

  std::uint64_t queries() const { return queries_; }

private:
  struct SubstitutionSlot {
    std::size_t pos;
    std::vector<std::string> options; // options[0] == original word
  };

  MutationOutcome mutate_form(const TokenSeq& ind, MutationMode mode, Rng& rng);
  FitnessVector evaluate_one(const Candidate& cand,
                             const LabelDistribution& dist) const;
  void evaluate(std::vector<Candidate>& cands);
  const TokenSeq& scored_form(const Candidate& cand) const;
  std::vector<std::string> union_mutset(const std::vector<Population>& pops) const;

  AttackConfig config_;
  AttackDeps deps_;
  TokenSeq original_;
  LabelDistribution original_dist_;
  std::size_t label_index_ = 0;
  double original_posterior_ = 0.0;
  std::vector<SubstitutionSlot> slots_;
  SynonymCache synonym_cache_;
  std::uint64_t queries_ = 0;
};

std::string to_string(AttackMode mode);
std::string to_string(MutationMode mode);
std::string to_string(MutatorChoice choice);

} // namespace evotext

#endif
