#include "evotext/report.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "evotext/errors.hpp"
#include "evotext/serialize.hpp"

namespace evotext {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ProcessedInput {
  std::size_t index = 0;
  AttackOutcome outcome;
  bool do_attack = false;
};

json config_to_json(const AttackConfig& c) {
  return json{{"mode", to_string(c.mode)},
              {"popsize", c.popsize},
              {"delta", c.delta},
              {"alpha", c.alpha},
              {"max_iters", c.max_iters},
              {"k_imp", c.k_imp},
              {"k_nn", c.k_nn},
              {"seed", c.seed},
              {"mutator", to_string(c.mutator)},
              {"fitness_form",
               c.fitness_form == FitnessForm::Mutated ? "mutated" : "normal"}};
}

json metrics_json(const AttackOutcome& outcome, const WordEmbeddingTable& table) {
  if (!outcome.success || !outcome.chosen) return nullptr;
  const OverlapMetrics m =
      overlap_metrics(outcome.original, outcome.chosen->tokens, table);
  json out;
  out["bleu"] = m.bleu;
  out["gms"] = m.gms ? json(*m.gms) : json(nullptr);
  out["vecs"] = m.vecs ? json(*m.vecs) : json(nullptr);
  return out;
}

} // namespace

RunOutput execute_run(const RunManifest& manifest, const RunAssets& assets) {
  const AttackDeps deps = assets.deps();
  const std::size_t limit = manifest.limit_attacks;

  // Phase 1: classify inputs in order, pick the attack set. With a limit
  // we classify one by one so nothing past the cutoff is touched;
  // without one, a single batch.
  std::vector<ProcessedInput> processed;
  std::size_t selected = 0;

  auto classify_into = [&](std::size_t i, const LabelDistribution& dist) {
    ProcessedInput p;
    p.index = i;
    const AttackInput& input = assets.inputs[i];
    const TokenSeq seq = preprocess(input.text);
    p.outcome.original = seq;
    p.outcome.true_label = input.label;
    p.outcome.labels = dist.labels;
    p.outcome.original_probs = dist.probs;
    p.outcome.original_label = dist.labels[dist.argmax()];
    p.outcome.queries = 1;
    p.outcome.originally_correct = (p.outcome.original_label == input.label);
    if (!p.outcome.originally_correct) {
      p.outcome.failure_reason = "misclassified";
    } else if (seq.size() < 2) {
      p.outcome.failure_reason = "too_short";
    } else {
      p.do_attack = true;
      ++selected;
    }
    processed.push_back(std::move(p));
  };

  if (limit == 0) {
    std::vector<TokenSeq> seqs;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < assets.inputs.size(); ++i) {
      const TokenSeq seq = preprocess(assets.inputs[i].text);
      if (seq.empty()) {
        ProcessedInput p;
        p.index = i;
        p.outcome.original = seq;
        p.outcome.true_label = assets.inputs[i].label;
        p.outcome.failure_reason = "empty";
        processed.push_back(std::move(p));
        continue;
      }
      seqs.push_back(seq);
      idx.push_back(i);
    }
    if (!seqs.empty()) {
      const auto dists = deps.victim->classify_batch(seqs);
      // Re-walk in input order, interleaving with the empty records.
      std::vector<ProcessedInput> merged;
      std::size_t d = 0, e = 0;
      for (std::size_t i = 0; i < assets.inputs.size(); ++i) {
        if (d < idx.size() && idx[d] == i) {
          classify_into(i, dists[d]);
          merged.push_back(std::move(processed.back()));
          processed.pop_back();
          ++d;
        } else {
          merged.push_back(std::move(processed[e++]));
        }
      }
      processed = std::move(merged);
    }
  } else {
    for (std::size_t i = 0; i < assets.inputs.size() && selected < limit; ++i) {
      const TokenSeq seq = preprocess(assets.inputs[i].text);
      if (seq.empty()) {
        ProcessedInput p;
        p.index = i;
        p.outcome.original = seq;
        p.outcome.true_label = assets.inputs[i].label;
        p.outcome.failure_reason = "empty";
        processed.push_back(std::move(p));
        continue;
      }
      classify_into(i, deps.victim->classify(seq));
    }
  }

  // Phase 2: run the attacks (optionally across sentence workers; seeds
  // are derived from the root seed and the input line index either way).
  std::vector<std::size_t> attack_rows;
  for (std::size_t r = 0; r < processed.size(); ++r)
    if (processed[r].do_attack) attack_rows.push_back(r);

  auto attack_one = [&](std::size_t row) {
    ProcessedInput& p = processed[row];
    AttackConfig cfg = manifest.config;
    cfg.seed = derive_seed(manifest.config.seed, {stream::kSentence, p.index});
    const std::uint64_t classify_cost = p.outcome.queries;
    try {
      AttackOutcome outcome =
          run_full_attack(assets.inputs[p.index].text, cfg, deps);
      outcome.true_label = p.outcome.true_label;
      outcome.originally_correct = true;
      outcome.queries += classify_cost;
      p.outcome = std::move(outcome);
    } catch (const NoAttackableWordsError&) {
      p.outcome.failure_reason = "no_attackable_words";
      p.outcome.attacked = false;
    }
  };

  const std::size_t workers =
      manifest.parallel_sentences ? std::max<std::size_t>(1, manifest.workers) : 1;
  if (workers <= 1 || attack_rows.size() <= 1) {
    for (std::size_t row : attack_rows) attack_one(row);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (;;) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= attack_rows.size()) break;
            attack_one(attack_rows[k]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  // Phase 3: assemble records and trace lines in input order.
  RunOutput out;
  json records = json::array();
  for (const auto& p : processed) {
    records.push_back(
        outcome_to_json(p.outcome, p.index,
                        metrics_json(p.outcome, *assets.general)));
    if (!p.outcome.trace.empty()) {
      json start;
      start["attack"] = p.index;
      start["event"] = "start";
      start["orig"] = p.outcome.original.tokens;
      start["orig_len"] = p.outcome.original.size();
      start["mode"] = to_string(manifest.config.mode);
      out.trace_lines.push_back(start.dump());
      for (const auto& gen : p.outcome.trace) {
        json line = to_json(gen);
        line["attack"] = p.index;
        out.trace_lines.push_back(line.dump());
      }
    }
  }

  out.report_body["victim"] = manifest.victim_spec;
  out.report_body["config"] = config_to_json(manifest.config);
  out.report_body["records"] = std::move(records);
  out.report_body["aggregate"] = aggregate_from_records(out.report_body["records"]);
  return out;
}

namespace {

struct Histogram {
  double lo, hi;
  std::size_t nbins;
  std::vector<std::size_t> counts;
  std::size_t absent = 0;

  Histogram(double lo_, double hi_, std::size_t nbins_)
      : lo(lo_), hi(hi_), nbins(nbins_), counts(nbins_, 0) {}

  void add(const json& value) {
    if (value.is_null()) {
      ++absent;
      return;
    }
    const double v = value.get<double>();
    double t = (v - lo) / (hi - lo);
    if (t < 0.0) t = 0.0;
    std::size_t bin = static_cast<std::size_t>(t * static_cast<double>(nbins));
    if (bin >= nbins) bin = nbins - 1;
    ++counts[bin];
  }

  json to_json() const {
    return json{{"lo", lo}, {"hi", hi}, {"bins", nbins},
                {"counts", counts}, {"absent", absent}};
  }
};

} // namespace

json aggregate_from_records(const json& records) {
  std::size_t processed = records.size();
  std::size_t classified = 0, correct = 0, attacked = 0, successes = 0,
              converged = 0;
  std::uint64_t total_queries = 0;
  double sum_f2 = 0, sum_f3 = 0, sum_lm = 0, sum_replaced = 0, sum_gens = 0;
  double sum_len = 0;
  std::size_t len_count = 0;

  Histogram h_f2(0.0, 1.0, 20), h_f3(-1.0, 1.0, 20), h_lm(0.0, 15.0, 30),
      h_bleu(0.0, 1.0, 20), h_gms(-1.0, 1.0, 20), h_vecs(-1.0, 1.0, 20);

  for (const auto& rec : records) {
    total_queries += rec.value("queries", std::uint64_t{0});
    const std::string reason = rec.value("failure_reason", "");
    if (reason != "empty") {
      ++classified;
      sum_len += static_cast<double>(rec.at("tokens").size());
      ++len_count;
    }
    if (rec.value("originally_correct", false)) ++correct;
    if (rec.value("attacked", false)) {
      ++attacked;
      sum_gens += rec.value("generations", std::size_t{0});
      if (rec.value("converged", false)) ++converged;
    }
    if (rec.value("success", false)) {
      ++successes;
      const auto& adv = rec.at("adversary");
      const FitnessVector f = fitness_from_json(adv.at("fitness"));
      sum_f2 += f.f2;
      sum_f3 += f.f3;
      sum_lm += adv.at("lm_loss").get<double>();
      sum_replaced += adv.at("words_replaced").get<double>();
      h_f2.add(adv.at("fitness").at(1));
      h_f3.add(adv.at("fitness").at(2));
      h_lm.add(adv.at("lm_loss"));
      if (rec.contains("metrics") && !rec.at("metrics").is_null()) {
        h_bleu.add(rec.at("metrics").at("bleu"));
        h_gms.add(rec.at("metrics").at("gms"));
        h_vecs.add(rec.at("metrics").at("vecs"));
      }
    }
  }

  json agg;
  agg["processed"] = processed;
  agg["classified"] = classified;
  agg["originally_correct"] = correct;
  agg["attacked"] = attacked;
  agg["successes"] = successes;
  agg["converged"] = converged;
  agg["total_queries"] = total_queries;
  agg["mean_sentence_length"] =
      len_count ? json(sum_len / static_cast<double>(len_count)) : json(nullptr);

  const double original_acc =
      classified ? 100.0 * static_cast<double>(correct) / static_cast<double>(classified)
                 : 0.0;
  agg["original_accuracy"] = original_acc;
  if (correct > 0) {
    const double sr =
        100.0 * static_cast<double>(successes) / static_cast<double>(correct);
    agg["success_rate"] = sr;
    agg["degraded_accuracy"] = original_acc * (1.0 - sr / 100.0);
  } else {
    agg["success_rate"] = nullptr;
    agg["degraded_accuracy"] = nullptr;
  }
  if (successes > 0) {
    const double n = static_cast<double>(successes);
    agg["awr"] = sum_replaced / n;
    agg["mean_f2"] = sum_f2 / n;
    agg["mean_f3"] = sum_f3 / n;
    agg["mean_lm"] = sum_lm / n;
  } else {
    agg["awr"] = nullptr;
    agg["mean_f2"] = nullptr;
    agg["mean_f3"] = nullptr;
    agg["mean_lm"] = nullptr;
  }
  agg["mean_generations"] =
      attacked ? json(sum_gens / static_cast<double>(attacked)) : json(nullptr);
  agg["histograms"] = json{{"f2", h_f2.to_json()},   {"f3", h_f3.to_json()},
                           {"lm", h_lm.to_json()},   {"bleu", h_bleu.to_json()},
                           {"gms", h_gms.to_json()}, {"vecs", h_vecs.to_json()}};
  return agg;
}

namespace {

std::string fmt_pct(const json& v) {
  if (v.is_null()) return "n/a";
  std::ostringstream oss;
  oss << std::fixed << std::setprecision(2) << v.get<double>() << "%";
  return oss.str();
}

std::string fmt_num(const json& v) {
  if (v.is_null()) return "n/a";
  std::ostringstream oss;
  oss << std::fixed << std::setprecision(3) << v.get<double>();
  return oss.str();
}

} // namespace

void print_summary(std::ostream& out, const json& agg) {
  out << "processed inputs    " << agg["processed"].get<std::size_t>() << "\n"
      << "attacked            " << agg["attacked"].get<std::size_t>() << "\n"
      << "successes           " << agg["successes"].get<std::size_t>() << "\n"
      << "success rate        " << fmt_pct(agg["success_rate"]) << "\n"
      << "original accuracy   " << fmt_pct(agg["original_accuracy"]) << "\n"
      << "degraded accuracy   " << fmt_pct(agg["degraded_accuracy"]) << "\n"
      << "AWR                 " << fmt_num(agg["awr"]) << "\n"
      << "mean f2             " << fmt_num(agg["mean_f2"]) << "\n"
      << "mean f3             " << fmt_num(agg["mean_f3"]) << "\n"
      << "mean LM loss        " << fmt_num(agg["mean_lm"]) << "\n"
      << "victim queries      " << agg["total_queries"].get<std::uint64_t>() << "\n";
}

void write_run_files(const std::string& out_dir, const RunOutput& output) {
  fs::create_directories(out_dir);
  const auto now = std::chrono::system_clock::now();
  const auto stamp =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();

  json envelope;
  envelope["generated_at"] = stamp;
  envelope["report"] = output.report_body;
  {
    std::ofstream f(fs::path(out_dir) / "report.json");
    if (!f) throw ParseError("cannot write report under " + out_dir);
    f << envelope.dump(2) << "\n";
  }
  {
    std::ofstream f(fs::path(out_dir) / "trace.jsonl");
    if (!f) throw ParseError("cannot write trace under " + out_dir);
    for (const auto& line : output.trace_lines) f << line << "\n";
  }
}

} // namespace evotext
