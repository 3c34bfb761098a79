#include "evotext/engine.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "evotext/errors.hpp"

namespace evotext {

void AttackConfig::validate() const {
  if (popsize < 2 || popsize % 2 != 0)
    throw ConfigError("popsize must be even and >= 2");
  if (mode == AttackMode::Combined && popsize < 4)
    throw ConfigError("combined mode needs popsize >= 4");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must be in (0,1]");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (k_imp < 1) throw ConfigError("k_imp must be >= 1");
  if (k_nn < 1) throw ConfigError("k_nn must be >= 1");
}

bool dominates(const FitnessVector& a, const FitnessVector& b) {
  const bool ge = a.f1 >= b.f1 && a.f2 >= b.f2 && a.f3 >= b.f3;
  const bool gt = a.f1 > b.f1 || a.f2 > b.f2 || a.f3 > b.f3;
  return ge && gt;
}

std::vector<std::vector<std::size_t>>
fast_nondominated_sort(const std::vector<FitnessVector>& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dominator_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;

  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(pop[p], pop[q])) dominated[p].push_back(q);
      else if (dominates(pop[q], pop[p])) ++dominator_count[p];
    }
  }
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p)
    if (dominator_count[p] == 0) current.push_back(p);
  while (!current.empty()) {
    fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated[p]) {
        if (--dominator_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<FitnessVector>& front) {
  const std::size_t m = front.size();
  const double inf = std::numeric_limits<double>::infinity();
  if (m == 0) return {};
  if (m <= 2) return std::vector<double>(m, inf);

  std::vector<double> dist(m, 0.0);
  const auto objective = [&](std::size_t i, int obj) {
    return obj == 0 ? front[i].f1 : obj == 1 ? front[i].f2 : front[i].f3;
  };
  for (int obj = 0; obj < 3; ++obj) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = objective(a, obj), vb = objective(b, obj);
      if (va != vb) return va < vb;
      return a < b;
    });
    const double lo = objective(order.front(), obj);
    const double hi = objective(order.back(), obj);
    if (hi == lo) continue; // zero range: contributes 0, no boundary infinity
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    for (std::size_t k = 1; k + 1 < m; ++k) {
      if (dist[order[k]] == inf) continue;
      dist[order[k]] +=
          (objective(order[k + 1], obj) - objective(order[k - 1], obj)) / (hi - lo);
    }
  }
  return dist;
}

RankedPopulation rank_population(const std::vector<FitnessVector>& pop) {
  RankedPopulation out;
  out.fronts = fast_nondominated_sort(pop);
  out.rank.assign(pop.size(), 0);
  out.crowding.assign(pop.size(), 0.0);
  for (std::size_t f = 0; f < out.fronts.size(); ++f) {
    std::vector<FitnessVector> values;
    values.reserve(out.fronts[f].size());
    for (std::size_t idx : out.fronts[f]) values.push_back(pop[idx]);
    const auto dist = crowding_distance(values);
    for (std::size_t k = 0; k < out.fronts[f].size(); ++k) {
      out.rank[out.fronts[f][k]] = f;
      out.crowding[out.fronts[f][k]] = dist[k];
    }
  }
  return out;
}

std::vector<std::size_t>
environmental_select(const std::vector<FitnessVector>& pool, std::size_t popsize) {
  const auto fronts = fast_nondominated_sort(pool);
  std::vector<std::size_t> selected;
  selected.reserve(popsize);
  for (const auto& front : fronts) {
    if (selected.size() == popsize) break;
    if (selected.size() + front.size() <= popsize) {
      selected.insert(selected.end(), front.begin(), front.end());
      continue;
    }
    std::vector<FitnessVector> values;
    values.reserve(front.size());
    for (std::size_t idx : front) values.push_back(pool[idx]);
    const auto dist = crowding_distance(values);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dist[a] > dist[b];
    });
    for (std::size_t k = 0; selected.size() < popsize; ++k)
      selected.push_back(front[order[k]]);
    break;
  }
  return selected;
}

namespace {

std::size_t fight(const std::vector<FitnessVector>& fitness,
                  const std::vector<double>& crowding, std::size_t i,
                  std::size_t j, Rng& rng) {
  if (i == j) return i;
  if (dominates(fitness[i], fitness[j])) return i;
  if (dominates(fitness[j], fitness[i])) return j;
  if (crowding[i] > crowding[j]) return i;
  if (crowding[j] > crowding[i]) return j;
  return rng.coin() ? i : j;
}

} // namespace

std::vector<std::pair<std::size_t, std::size_t>>
tournament_select(const std::vector<FitnessVector>& fitness,
                  const std::vector<double>& crowding, std::size_t pairs,
                  Rng& rng) {
  const std::size_t n = fitness.size();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(pairs);
  auto run_tournament = [&]() {
    const std::size_t i = rng.index(n);
    const std::size_t j = rng.index(n);
    return fight(fitness, crowding, i, j, rng);
  };
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t a = run_tournament();
    std::size_t b = run_tournament();
    for (int guard = 0; b == a && guard < 1000; ++guard) b = run_tournament();
    if (b == a) b = (a + 1) % n;
    out.emplace_back(a, b);
  }
  return out;
}

std::vector<Candidate> single_point_crossover(const Candidate& p1,
                                              const Candidate& p2, Rng& rng) {
  const std::size_t n = p1.ind.size();
  if (n < 2 || p2.ind.size() != n || p1.ind_mut.size() != n ||
      p2.ind_mut.size() != n)
    throw LengthMismatchError("crossover: need equal lengths >= 2");

  auto splice = [](const TokenSeq& head, const TokenSeq& tail, std::size_t cut) {
    std::vector<std::string> toks(head.tokens.begin(), head.tokens.begin() + cut);
    toks.insert(toks.end(), tail.tokens.begin() + cut, tail.tokens.end());
    return from_tokens(std::move(toks));
  };

  std::vector<Candidate> children(4);
  const std::size_t cut_normal = 1 + rng.index(n - 1);
  children[0].ind = splice(p1.ind, p2.ind, cut_normal);
  children[1].ind = splice(p2.ind, p1.ind, cut_normal);
  const std::size_t cut_mut = 1 + rng.index(n - 1);
  children[2].ind = splice(p1.ind_mut, p2.ind_mut, cut_mut);
  children[3].ind = splice(p2.ind_mut, p1.ind_mut, cut_mut);
  for (auto& child : children) child.ind_mut = child.ind;
  return children;
}

std::string to_string(AttackMode mode) {
  return mode == AttackMode::Single ? "single" : "combined";
}
std::string to_string(MutationMode mode) {
  return mode == MutationMode::Swap ? "swap" : "typo";
}
std::string to_string(MutatorChoice choice) {
  return choice == MutatorChoice::Glove ? "glove" : "sequence";
}

AttackEngine::AttackEngine(const AttackConfig& config, const AttackDeps& deps)
    : config_(config), deps_(deps) {
  config_.validate();
  if (deps_.victim == nullptr || deps_.encoder == nullptr ||
      deps_.importance == nullptr || deps_.general == nullptr ||
      deps_.counterfitted == nullptr || deps_.qwerty == nullptr)
    throw ConfigError("attack deps incomplete");
  if (config_.mutator == MutatorChoice::Sequence && deps_.seq_mutator == nullptr)
    throw ConfigError("sequence mutator selected but not configured");
}

MutationOutcome AttackEngine::mutate_form(const TokenSeq& ind, MutationMode mode,
                                          Rng& rng) {
  if (mode == MutationMode::Typo) return add_typos(ind, *deps_.qwerty, rng);
  if (config_.mutator == MutatorChoice::Sequence) {
    try {
      return seq_mutate(ind, *deps_.seq_mutator, rng);
    } catch (const TransportError&) {
      auto out = glove_mutate(ind, *deps_.general, *deps_.counterfitted,
                              config_.delta, rng, config_.k_nn, &synonym_cache_);
      out.op = out.noop ? "seq_fallback_noop" : "seq_fallback_glove";
      return out;
    }
  }
  return glove_mutate(ind, *deps_.general, *deps_.counterfitted, config_.delta,
                      rng, config_.k_nn, &synonym_cache_);
}

const TokenSeq& AttackEngine::scored_form(const Candidate& cand) const {
  return config_.fitness_form == FitnessForm::Mutated ? cand.ind_mut : cand.ind;
}

FitnessVector AttackEngine::evaluate_one(const Candidate& cand,
                                         const LabelDistribution& dist) const {
  FitnessVector f;
  f.f1 = std::abs(dist.probs[label_index_] - original_posterior_);
  f.f2 = positional_jaccard(scored_form(cand), original_);
  f.f3 = semantic_similarity(scored_form(cand), original_, *deps_.encoder);
  return f;
}

void AttackEngine::evaluate(std::vector<Candidate>& cands) {
  std::vector<TokenSeq> texts;
  texts.reserve(cands.size());
  for (const auto& c : cands) texts.push_back(scored_form(c));
  const auto dists = deps_.victim->classify_batch(texts);
  queries_ += texts.size();
  for (std::size_t i = 0; i < cands.size(); ++i)
    cands[i].fitness = evaluate_one(cands[i], dists[i]);
}

void AttackEngine::bind(const TokenSeq& original) {
  if (original.size() < 2)
    throw TooShortError("attack needs at least 2 tokens");
  original_ = original;
  original_dist_ = deps_.victim->classify(original_);
  queries_ += 1;
  label_index_ = original_dist_.argmax();
  original_posterior_ = original_dist_.probs[label_index_];

  const ImportanceResult imp = deps_.importance->rank(original_);
  queries_ += imp.victim_queries;

  // Positions ordered by importance (descending, ties by position), kept
  // while they have at least one dual-threshold synonym, capped at k_imp.
  std::vector<std::size_t> order(original_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return imp.scores[a] > imp.scores[b];
  });
  slots_.clear();
  synonym_cache_.clear();
  for (std::size_t pos : order) {
    if (slots_.size() >= config_.k_imp) break;
    const std::string& word = original_.tokens[pos];
    auto it = synonym_cache_.find(word);
    if (it == synonym_cache_.end())
      it = synonym_cache_
               .emplace(word, nearest_synonyms(word, *deps_.general,
                                               *deps_.counterfitted,
                                               config_.delta, config_.k_nn))
               .first;
    if (it->second.empty()) continue;
    SubstitutionSlot slot;
    slot.pos = pos;
    slot.options.push_back(word);
    for (const auto& syn : it->second) slot.options.push_back(syn.token);
    slots_.push_back(std::move(slot));
  }
  if (slots_.empty())
    throw NoAttackableWordsError("no word has a qualifying synonym");
}

Population AttackEngine::initialize_population(MutationMode mode,
                                               std::size_t popsize,
                                               std::uint64_t subpop_tag,
                                               SubpopTrace* trace) {
  Population pop;
  pop.mode = mode;

  // The combination space is the product of per-slot choices; choice
  // vector 0...0 is the unmodified original, guaranteed present.
  double total = 1.0;
  for (const auto& slot : slots_)
    total *= static_cast<double>(slot.options.size());

  Rng rng(derive_seed(config_.seed, {stream::kInit, subpop_tag}));
  std::vector<std::vector<std::uint16_t>> choices;

  auto decode = [&](const std::vector<std::uint16_t>& choice) {
    TokenSeq ind = original_;
    for (std::size_t s = 0; s < slots_.size(); ++s)
      if (choice[s] > 0) ind.tokens[slots_[s].pos] = slots_[s].options[choice[s]];
    ind.raw = join_tokens(ind);
    return ind;
  };

  if (total <= static_cast<double>(popsize)) {
    // Enumerate everything, then fill up by sampling with replacement.
    const std::size_t count = static_cast<std::size_t>(total);
    std::vector<std::uint16_t> cur(slots_.size(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      choices.push_back(cur);
      for (std::size_t s = slots_.size(); s-- > 0;) {
        if (++cur[s] < slots_[s].options.size()) break;
        cur[s] = 0;
      }
    }
    while (choices.size() < popsize)
      choices.push_back(choices[rng.index(count)]);
  } else {
    // Uniform sample without replacement; coordinate draws are uniform
    // over the product space, rejection handles duplicates.
    std::set<std::vector<std::uint16_t>> seen;
    seen.insert(std::vector<std::uint16_t>(slots_.size(), 0));
    while (seen.size() < popsize) {
      std::vector<std::uint16_t> draw(slots_.size());
      for (std::size_t s = 0; s < slots_.size(); ++s)
        draw[s] = static_cast<std::uint16_t>(rng.index(slots_[s].options.size()));
      seen.insert(std::move(draw));
    }
    choices.assign(seen.begin(), seen.end());
  }

  pop.members.reserve(popsize);
  for (std::size_t i = 0; i < choices.size(); ++i) {
    Candidate cand;
    cand.ind = decode(choices[i]);
    Rng member_rng(derive_seed(config_.seed, {stream::kMutation, subpop_tag, 0, i}));
    MutationOutcome mut = mutate_form(cand.ind, mode, member_rng);
    cand.ind_mut = std::move(mut.tokens);
    cand.op = mut.op;
    cand.edits = std::move(mut.edits);
    cand.generation = 0;
    if (trace)
      trace->mutations.push_back({cand.ind_mut.size(), cand.op, cand.edits});
    pop.members.push_back(std::move(cand));
  }

  evaluate(pop.members);

  if (trace) {
    trace->mode = to_string(mode);
    for (const auto& m : pop.members) {
      trace->fitness.push_back(*m.fitness);
      trace->lens.push_back(m.ind_mut.size());
    }
    std::vector<FitnessVector> fv;
    for (const auto& m : pop.members) fv.push_back(*m.fitness);
    trace->fronts = fast_nondominated_sort(fv);
  }
  return pop;
}

void AttackEngine::ga_step(Population& pop, std::size_t generation,
                           std::uint64_t subpop_tag, SubpopTrace* trace) {
  const std::size_t popsize = pop.members.size();
  std::vector<FitnessVector> fitness;
  fitness.reserve(popsize);
  for (const auto& m : pop.members) fitness.push_back(*m.fitness);

  const RankedPopulation ranked = rank_population(fitness);
  Rng tour_rng(derive_seed(config_.seed, {stream::kTournament, subpop_tag, generation}));
  const auto pairs =
      tournament_select(fitness, ranked.crowding, popsize / 2, tour_rng);

  std::vector<Candidate> children;
  children.reserve(pairs.size() * 4);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    Rng cross_rng(
        derive_seed(config_.seed, {stream::kCrossover, subpop_tag, generation, p}));
    auto kids = single_point_crossover(pop.members[pairs[p].first],
                                       pop.members[pairs[p].second], cross_rng);
    for (auto& kid : kids) children.push_back(std::move(kid));
  }

  for (std::size_t c = 0; c < children.size(); ++c) {
    Rng mut_rng(
        derive_seed(config_.seed, {stream::kMutation, subpop_tag, generation, c}));
    MutationOutcome mut = mutate_form(children[c].ind, pop.mode, mut_rng);
    children[c].ind_mut = std::move(mut.tokens);
    children[c].op = mut.op;
    children[c].edits = std::move(mut.edits);
    children[c].generation = generation;
    if (trace)
      trace->mutations.push_back(
          {children[c].ind_mut.size(), children[c].op, children[c].edits});
  }

  evaluate(children);

  // Elitist selection over the parent population plus all children.
  std::vector<Candidate> pool = std::move(pop.members);
  for (auto& kid : children) pool.push_back(std::move(kid));
  std::vector<FitnessVector> pool_fitness;
  pool_fitness.reserve(pool.size());
  for (const auto& m : pool) pool_fitness.push_back(*m.fitness);
  const auto keep = environmental_select(pool_fitness, popsize);

  pop.members.clear();
  pop.members.reserve(popsize);
  for (std::size_t idx : keep) pop.members.push_back(std::move(pool[idx]));

  if (trace) {
    trace->mode = to_string(pop.mode);
    std::vector<FitnessVector> fv;
    for (const auto& m : pop.members) {
      trace->fitness.push_back(*m.fitness);
      trace->lens.push_back(m.ind_mut.size());
      fv.push_back(*m.fitness);
    }
    trace->fronts = fast_nondominated_sort(fv);
  }
}

std::vector<std::string>
AttackEngine::union_mutset(const std::vector<Population>& pops) const {
  std::vector<std::string> joined;
  for (const auto& pop : pops)
    for (const auto& m : pop.members) joined.push_back(join_tokens(m.ind_mut));
  std::sort(joined.begin(), joined.end());
  return joined;
}

AttackResult AttackEngine::run(const std::string& raw_text) {
  queries_ = 0;
  const TokenSeq orig = preprocess(raw_text);
  if (orig.empty()) throw EmptyInputError("attack input is empty after preprocessing");
  bind(orig);

  AttackResult result;
  result.original = original_;
  result.original_dist = original_dist_;
  result.original_label_index = label_index_;
  result.original_label = original_dist_.labels[label_index_];
  result.fitness_form = config_.fitness_form;

  GenerationTrace init_trace;
  init_trace.generation = 0;
  if (config_.mode == AttackMode::Single) {
    SubpopTrace st;
    result.subpops.push_back(
        initialize_population(MutationMode::Swap, config_.popsize, 0, &st));
    init_trace.subpops.push_back(std::move(st));
  } else {
    SubpopTrace ss, st;
    result.subpops.push_back(
        initialize_population(MutationMode::Swap, config_.popsize / 2, 0, &ss));
    result.subpops.push_back(
        initialize_population(MutationMode::Typo, config_.popsize / 2, 1, &st));
    init_trace.subpops.push_back(std::move(ss));
    init_trace.subpops.push_back(std::move(st));
  }
  init_trace.queries = queries_;
  result.trace.push_back(std::move(init_trace));

  std::vector<std::string> prev = union_mutset(result.subpops);
  for (std::size_t gen = 1; gen <= config_.max_iters; ++gen) {
    GenerationTrace gt;
    gt.generation = gen;
    for (std::size_t s = 0; s < result.subpops.size(); ++s) {
      SubpopTrace st;
      ga_step(result.subpops[s], gen, s, &st);
      gt.subpops.push_back(std::move(st));
    }
    gt.queries = queries_;
    result.trace.push_back(std::move(gt));
    result.generations_run = gen;

    std::vector<std::string> cur = union_mutset(result.subpops);
    if (cur == prev) {
      result.converged = true;
      break;
    }
    prev = std::move(cur);
  }

  result.queries = queries_;
  return result;
}

} // namespace evotext
