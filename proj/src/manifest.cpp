#include "evotext/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "evotext/errors.hpp"

namespace evotext {

using nlohmann::json;
namespace fs = std::filesystem;

AttackMode parse_attack_mode(const std::string& s) {
  if (s == "single") return AttackMode::Single;
  if (s == "combined") return AttackMode::Combined;
  throw ConfigError("mode must be `single` or `combined`: " + s);
}

MutatorChoice parse_mutator_choice(const std::string& s) {
  if (s == "glove") return MutatorChoice::Glove;
  if (s == "sequence") return MutatorChoice::Sequence;
  throw ConfigError("mutator must be `glove` or `sequence`: " + s);
}

FitnessForm parse_fitness_form(const std::string& s) {
  if (s == "mutated") return FitnessForm::Mutated;
  if (s == "normal") return FitnessForm::Normal;
  throw ConfigError("fitness_form must be `mutated` or `normal`: " + s);
}

RunManifest RunManifest::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("manifest " + path + ": " + e.what());
  }

  RunManifest m;
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    fs::path fp(p);
    return fp.is_absolute() ? p : (base / fp).string();
  };

  try {
    if (j.contains("config")) {
      const auto& c = j["config"];
      if (c.contains("mode")) m.config.mode = parse_attack_mode(c["mode"]);
      if (c.contains("popsize")) m.config.popsize = c["popsize"].get<std::size_t>();
      if (c.contains("delta")) m.config.delta = c["delta"].get<double>();
      if (c.contains("alpha")) m.config.alpha = c["alpha"].get<double>();
      if (c.contains("max_iters")) m.config.max_iters = c["max_iters"].get<std::size_t>();
      if (c.contains("k_imp")) m.config.k_imp = c["k_imp"].get<std::size_t>();
      if (c.contains("k_nn")) m.config.k_nn = c["k_nn"].get<std::size_t>();
      if (c.contains("seed")) {
        m.config.seed = c["seed"].get<std::uint64_t>();
        m.seed_set = true;
      }
      if (c.contains("mutator")) m.config.mutator = parse_mutator_choice(c["mutator"]);
      if (c.contains("fitness_form"))
        m.config.fitness_form = parse_fitness_form(c["fitness_form"]);
    }
    if (j.contains("victim")) m.victim_spec = j["victim"].get<std::string>();
    if (j.contains("assets")) {
      const auto& a = j["assets"];
      if (a.contains("embeddings_general"))
        m.embeddings_general = resolve(a["embeddings_general"]);
      if (a.contains("embeddings_counterfitted"))
        m.embeddings_counterfitted = resolve(a["embeddings_counterfitted"]);
      if (a.contains("qwerty_map")) m.qwerty_map = resolve(a["qwerty_map"]);
      if (a.contains("lm_corpus")) m.lm_corpus = resolve(a["lm_corpus"]);
      if (a.contains("lm_order")) m.lm_order = a["lm_order"].get<int>();
      if (a.contains("lm_smoothing")) m.lm_smoothing = a["lm_smoothing"].get<double>();
    }
    if (j.contains("inputs")) {
      const auto& i = j["inputs"];
      if (i.contains("csv")) m.inputs_csv = resolve(i["csv"]);
      if (i.contains("text")) m.inputs_text = resolve(i["text"]);
      if (i.contains("labels")) m.inputs_labels = resolve(i["labels"]);
      if (i.contains("limit_attacks"))
        m.limit_attacks = i["limit_attacks"].get<std::size_t>();
    }
    if (j.contains("plugins")) {
      const auto& p = j["plugins"];
      if (p.contains("encoder")) m.encoder_endpoint = p["encoder"].get<std::string>();
      if (p.contains("lm")) m.lm_endpoint = p["lm"].get<std::string>();
      if (p.contains("mutator")) m.mutator_endpoint = p["mutator"].get<std::string>();
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      if (o.contains("dir")) m.out_dir = resolve(o["dir"]);
    }
    if (j.contains("run")) {
      const auto& r = j["run"];
      if (r.contains("parallel_sentences"))
        m.parallel_sentences = r["parallel_sentences"].get<bool>();
      if (r.contains("workers")) m.workers = r["workers"].get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ParseError("manifest " + path + ": " + e.what());
  }

  // Victim model path in `builtin:` specs is manifest-relative too.
  if (m.victim_spec.rfind("builtin:", 0) == 0)
    m.victim_spec = "builtin:" + resolve(m.victim_spec.substr(8));
  return m;
}

void RunManifest::validate() const {
  config.validate();
  if (victim_spec.empty())
    throw ConfigError("manifest: victim is required");
  if (victim_spec.rfind("builtin:", 0) != 0 && victim_spec.rfind("remote:", 0) != 0)
    throw ConfigError("manifest: victim must be builtin:<model-file> or remote:<url>");
  if (embeddings_general.empty() || embeddings_counterfitted.empty())
    throw ConfigError("manifest: both embedding tables are required");
  if (qwerty_map.empty()) throw ConfigError("manifest: qwerty_map is required");
  if (lm_corpus.empty() && lm_endpoint.empty())
    throw ConfigError("manifest: lm_corpus or a remote lm plugin is required");
  if (inputs_csv.empty() && inputs_text.empty())
    throw ConfigError("manifest: inputs.csv or inputs.text is required");
  if (!inputs_text.empty() && inputs_labels.empty())
    throw ConfigError("manifest: inputs.text needs a parallel inputs.labels file");
  if (config.mutator == MutatorChoice::Sequence && mutator_endpoint.empty())
    throw ConfigError("manifest: sequence mutator selected but plugins.mutator is empty");
  if (lm_order != 2 && lm_order != 3)
    throw ConfigError("manifest: lm_order must be 2 or 3");
  if (workers < 1) throw ConfigError("manifest: workers must be >= 1");

  for (const std::string& p :
       {embeddings_general, embeddings_counterfitted, qwerty_map}) {
    if (!fs::exists(p)) throw ConfigError("manifest: missing file " + p);
  }
  if (!lm_corpus.empty() && !fs::exists(lm_corpus))
    throw ConfigError("manifest: missing file " + lm_corpus);
  if (!inputs_csv.empty() && !fs::exists(inputs_csv))
    throw ConfigError("manifest: missing file " + inputs_csv);
  if (!inputs_text.empty() && !fs::exists(inputs_text))
    throw ConfigError("manifest: missing file " + inputs_text);
  if (!inputs_labels.empty() && !fs::exists(inputs_labels))
    throw ConfigError("manifest: missing file " + inputs_labels);
  if (victim_spec.rfind("builtin:", 0) == 0 && !fs::exists(victim_spec.substr(8)))
    throw ConfigError("manifest: missing victim model " + victim_spec.substr(8));
}

namespace {

std::vector<AttackInput> load_inputs(const RunManifest& m) {
  std::vector<AttackInput> inputs;
  if (!m.inputs_csv.empty()) {
    for (auto& [label, text] : load_labeled_csv(m.inputs_csv))
      inputs.push_back({text, label});
    return inputs;
  }
  std::ifstream text_in(m.inputs_text);
  if (!text_in) throw ParseError("cannot open inputs: " + m.inputs_text);
  std::ifstream label_in(m.inputs_labels);
  if (!label_in) throw ParseError("cannot open labels: " + m.inputs_labels);
  std::string text, label;
  while (std::getline(text_in, text)) {
    if (!std::getline(label_in, label))
      throw ParseError("labels file shorter than inputs file");
    inputs.push_back({text, label});
  }
  if (std::getline(label_in, label))
    throw ParseError("labels file longer than inputs file");
  return inputs;
}

} // namespace

AttackDeps RunAssets::deps() const {
  AttackDeps d;
  d.victim = victim.get();
  d.encoder = encoder.get();
  d.importance = importance.get();
  d.general = general.get();
  d.counterfitted = counterfitted.get();
  d.qwerty = qwerty.get();
  d.seq_mutator = mutator.get();
  d.lm = lm.get();
  return d;
}

RunAssets load_assets(const RunManifest& manifest) {
  RunAssets assets;
  assets.general = std::make_unique<WordEmbeddingTable>(
      WordEmbeddingTable::load_file(manifest.embeddings_general));
  assets.counterfitted = std::make_unique<WordEmbeddingTable>(
      WordEmbeddingTable::load_file(manifest.embeddings_counterfitted));
  assets.qwerty =
      std::make_unique<QwertyMap>(QwertyMap::load_file(manifest.qwerty_map));

  if (!manifest.lm_endpoint.empty()) {
    assets.lm = std::make_unique<RemoteLanguageModel>(manifest.lm_endpoint);
  } else {
    assets.lm = NgramLanguageModel::train_file(manifest.lm_corpus, manifest.lm_order,
                                               manifest.lm_smoothing);
  }
  if (!manifest.encoder_endpoint.empty()) {
    assets.encoder = std::make_unique<RemoteEncoder>(manifest.encoder_endpoint);
  } else {
    assets.encoder = std::make_unique<MeanEmbeddingEncoder>(*assets.general);
  }
  if (!manifest.mutator_endpoint.empty())
    assets.mutator = std::make_unique<RemoteSequenceMutator>(manifest.mutator_endpoint);

  assets.victim = open_victim(manifest.victim_spec);
  assets.importance = std::make_unique<LeaveOneOutImportance>(*assets.victim);
  assets.inputs = load_inputs(manifest);
  if (assets.inputs.empty()) throw ConfigError("inputs file has no sentences");
  return assets;
}

} // namespace evotext
