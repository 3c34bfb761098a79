#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evotext/errors.hpp"
#include "evotext/manifest.hpp"
#include "evotext/report.hpp"
#include "evotext/rng.hpp"
#include "evotext/selection.hpp"
#include "evotext/serialize.hpp"
#include "evotext/victim.hpp"

namespace fs = std::filesystem;
using evotext::Rng;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

int cmd_train_victim(const std::string& corpus_path, const std::string& out_path,
                     double smoothing) {
  const auto corpus = evotext::load_labeled_csv(corpus_path);

  // Deterministic 90/10 split: seeded shuffle, first 90% trains the
  // persisted model, the rest reports holdout accuracy.
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(17);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.index(i)]);

  const std::size_t train_count =
      std::max<std::size_t>(1, (corpus.size() * 9) / 10);
  std::vector<std::pair<std::string, std::string>> train_rows;
  for (std::size_t k = 0; k < train_count; ++k) train_rows.push_back(corpus[order[k]]);

  const auto model = evotext::train_bow(train_rows, smoothing);
  model->save(out_path);

  std::size_t correct = 0, total = 0;
  for (std::size_t k = train_count; k < corpus.size(); ++k) {
    const auto& [label, text] = corpus[order[k]];
    const evotext::TokenSeq seq = evotext::preprocess(text);
    if (seq.empty()) continue;
    const auto dist = model->classify(seq);
    if (dist.labels[dist.argmax()] == label) ++correct;
    ++total;
  }
  std::cout << "model written to " << out_path << "\n";
  if (total == 0) {
    std::cout << "holdout accuracy: n/a (no holdout rows)\n";
  } else {
    std::cout << "holdout accuracy: " << std::fixed << std::setprecision(2)
              << 100.0 * static_cast<double>(correct) / static_cast<double>(total)
              << "% (" << correct << "/" << total << ")\n";
  }
  return kExitOk;
}

struct AttackOverrides {
  std::string mode, mutator, victim, out_dir;
  std::int64_t popsize = -1, max_iters = -1, limit = -1;
  double delta = -1.0, alpha = -1.0;
  std::int64_t seed = -1;
  bool seed_given = false;
};

int cmd_attack(const std::string& manifest_path, const AttackOverrides& ov) {
  evotext::RunManifest manifest = evotext::RunManifest::load_file(manifest_path);

  if (!ov.mode.empty()) manifest.config.mode = evotext::parse_attack_mode(ov.mode);
  if (!ov.mutator.empty())
    manifest.config.mutator = evotext::parse_mutator_choice(ov.mutator);
  if (!ov.victim.empty()) manifest.victim_spec = ov.victim;
  if (!ov.out_dir.empty()) manifest.out_dir = ov.out_dir;
  if (ov.popsize >= 0) manifest.config.popsize = static_cast<std::size_t>(ov.popsize);
  if (ov.max_iters >= 0)
    manifest.config.max_iters = static_cast<std::size_t>(ov.max_iters);
  if (ov.limit >= 0) manifest.limit_attacks = static_cast<std::size_t>(ov.limit);
  if (ov.delta >= 0.0) manifest.config.delta = ov.delta;
  if (ov.alpha >= 0.0) manifest.config.alpha = ov.alpha;
  if (ov.seed_given) {
    manifest.config.seed = static_cast<std::uint64_t>(ov.seed);
    manifest.seed_set = true;
  } else if (!manifest.seed_set) {
    if (const char* env = std::getenv("EVOTEXT_SEED")) {
      manifest.config.seed = std::strtoull(env, nullptr, 10);
      manifest.seed_set = true;
    }
  }

  manifest.validate();
  const evotext::RunAssets assets = evotext::load_assets(manifest);
  const evotext::RunOutput output = evotext::execute_run(manifest, assets);
  evotext::write_run_files(manifest.out_dir, output);
  evotext::print_summary(std::cout, output.report_body.at("aggregate"));
  std::cout << "report: " << (fs::path(manifest.out_dir) / "report.json").string()
            << "\n"
            << "trace:  " << (fs::path(manifest.out_dir) / "trace.jsonl").string()
            << "\n";
  return kExitOk;
}

json load_report_body(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw evotext::ParseError("cannot open report: " + path);
  json envelope;
  try {
    in >> envelope;
  } catch (const json::exception& e) {
    throw evotext::ParseError("report " + path + ": " + e.what());
  }
  if (!envelope.contains("report"))
    throw evotext::ParseError("report " + path + ": missing `report` body");
  return envelope["report"];
}

int cmd_evaluate(const std::string& report_path, const std::string& victim_spec,
                 const std::string& out_path) {
  const json body = load_report_body(report_path);
  std::vector<evotext::TransferSample> samples;
  std::vector<std::size_t> indices;
  for (const auto& rec : body.at("records")) {
    if (!rec.value("success", false)) continue;
    evotext::TransferSample s;
    s.original = evotext::from_tokens(
        rec.at("tokens").get<std::vector<std::string>>());
    s.adversary = evotext::from_tokens(
        rec.at("adversary").at("tokens").get<std::vector<std::string>>());
    s.true_label = rec.at("true_label").get<std::string>();
    samples.push_back(std::move(s));
    indices.push_back(rec.at("index").get<std::size_t>());
  }
  if (samples.empty())
    throw evotext::NoSuccessError("report has no successful adversaries");

  const auto model_b = evotext::open_victim(victim_spec);
  const evotext::TransferReport tr = evotext::transferability(samples, *model_b);

  std::cout << "adversaries          " << samples.size() << "\n"
            << "considered (B ok)    "
            << std::count(tr.considered.begin(), tr.considered.end(), true) << "\n"
            << "transferability      " << std::fixed << std::setprecision(2)
            << tr.percentage << "%\n";

  if (!out_path.empty()) {
    json out;
    out["transferability"] = tr.percentage;
    json rows = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      rows.push_back(json{{"index", indices[i]},
                          {"considered", static_cast<bool>(tr.considered[i])},
                          {"transfers", static_cast<bool>(tr.transfers[i])}});
    }
    out["samples"] = std::move(rows);
    std::ofstream f(out_path);
    if (!f) throw evotext::ParseError("cannot write " + out_path);
    f << out.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& report_path) {
  const json body = load_report_body(report_path);
  const json agg = evotext::aggregate_from_records(body.at("records"));
  evotext::print_summary(std::cout, agg);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"evotext: multi-objective evolutionary adversarial text attacks"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train-victim",
                                   "Train and persist the built-in classifier");
  std::string corpus_path, model_out;
  double smoothing = 1.0;
  train->add_option("--corpus", corpus_path, "label,text CSV")->required();
  train->add_option("--out", model_out, "output model file")->required();
  train->add_option("--smoothing", smoothing, "additive smoothing (default 1.0)");

  auto* attack = app.add_subcommand("attack", "Run attacks described by a manifest");
  std::string manifest_path;
  AttackOverrides ov;
  attack->add_option("--manifest", manifest_path, "run manifest (JSON)")->required();
  attack->add_option("--mode", ov.mode, "single|combined");
  attack->add_option("--mutator", ov.mutator, "glove|sequence");
  attack->add_option("--victim", ov.victim, "builtin:<model-file>|remote:<url>");
  attack->add_option("--out", ov.out_dir, "output directory");
  attack->add_option("--popsize", ov.popsize, "population size");
  attack->add_option("--max-iters", ov.max_iters, "generation cap");
  attack->add_option("--limit", ov.limit, "max attacks to run");
  attack->add_option("--delta", ov.delta, "synonym cosine threshold");
  attack->add_option("--alpha", ov.alpha, "final-score exponent");
  auto* seed_opt = attack->add_option("--seed", ov.seed, "root random seed");

  auto* evaluate =
      app.add_subcommand("evaluate", "Transferability of a report's adversaries");
  std::string report_path, victim_b, transfer_out;
  evaluate->add_option("--report", report_path, "attack report.json")->required();
  evaluate->add_option("--victim", victim_b, "model B spec")->required();
  evaluate->add_option("--out", transfer_out, "write transfer JSON here");

  auto* report = app.add_subcommand("report", "Recompute a report's summary");
  std::string report_only_path;
  report->add_option("--report", report_only_path, "attack report.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train_victim(corpus_path, model_out, smoothing);
    if (attack->parsed()) {
      ov.seed_given = seed_opt->count() > 0;
      return cmd_attack(manifest_path, ov);
    }
    if (evaluate->parsed()) return cmd_evaluate(report_path, victim_b, transfer_out);
    if (report->parsed()) return cmd_report(report_only_path);
  } catch (const evotext::ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const evotext::ParseError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const evotext::TrainingError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const evotext::NoSuccessError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const evotext::Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
