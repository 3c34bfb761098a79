#ifndef EVOTEXT_MANIFEST_HPP
#define EVOTEXT_MANIFEST_HPP

#include <memory>
#include <string>
#include <vector>

#include "evotext/engine.hpp"

namespace evotext {

// A labeled sentence to attack.
struct AttackInput {
  std::string text;
  std::string label;
};

// The single source of truth for a run. CLI flags override manifest keys;
// defaults fill the rest (flag > manifest > default).
struct RunManifest {
  AttackConfig config;
  std::string victim_spec;            // builtin:<model-file> | remote:<url>
  std::string embeddings_general;
  std::string embeddings_counterfitted;
  std::string qwerty_map;
  std::string lm_corpus;
  int lm_order = 3;
  double lm_smoothing = 1.0;
  std::string inputs_csv;             // label,text CSV
  std::string inputs_text;            // alternative: one sentence per line...
  std::string inputs_labels;          // ...plus a parallel labels file
  std::size_t limit_attacks = 0;      // 0 = attack every eligible input
  std::string encoder_endpoint;       // optional plugin URLs
  std::string lm_endpoint;
  std::string mutator_endpoint;
  std::string out_dir = ".";
  bool parallel_sentences = false;
  std::size_t workers = 1;
  bool seed_set = false;              // true when manifest/flag/env provided one

  static RunManifest load_file(const std::string& path);

  // Shape checks only (paths non-empty where required, enum values,
  // config invariants). Asset parsing happens in load_assets.
  void validate() const;
};

// Everything opened and parsed up front, so no victim query happens if
// any asset is broken. Heap storage keeps addresses stable for the
// plugins that hold references.
struct RunAssets {
  std::unique_ptr<WordEmbeddingTable> general;
  std::unique_ptr<WordEmbeddingTable> counterfitted;
  std::unique_ptr<QwertyMap> qwerty;
  std::unique_ptr<LanguageModel> lm;
  std::unique_ptr<SentenceEncoder> encoder;
  std::unique_ptr<VictimModel> victim;
  std::unique_ptr<WordImportance> importance;
  std::unique_ptr<SequenceMutator> mutator; // null unless configured
  std::vector<AttackInput> inputs;

  AttackDeps deps() const;
};

RunAssets load_assets(const RunManifest& manifest);

AttackMode parse_attack_mode(const std::string& s);
MutatorChoice parse_mutator_choice(const std::string& s);
FitnessForm parse_fitness_form(const std::string& s);

} // namespace evotext

#endif
