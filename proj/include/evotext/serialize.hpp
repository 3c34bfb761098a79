#ifndef EVOTEXT_SERIALIZE_HPP
#define EVOTEXT_SERIALIZE_HPP

#include <json.hpp>

#include "evotext/engine.hpp"
#include "evotext/selection.hpp"

namespace evotext {

// Trace records (JSON-lines schema; see README for the field list).
nlohmann::json to_json(const FitnessVector& f);
nlohmann::json to_json(const EditRecord& e);
nlohmann::json to_json(const MutationEventTrace& m);
nlohmann::json to_json(const SubpopTrace& s);
nlohmann::json to_json(const GenerationTrace& g);

// Per-attack report record.
nlohmann::json outcome_to_json(const AttackOutcome& outcome, std::size_t index,
                               const nlohmann::json& extra_metrics);

FitnessVector fitness_from_json(const nlohmann::json& j);

} // namespace evotext

#endif
