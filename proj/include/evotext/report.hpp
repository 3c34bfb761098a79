#ifndef EVOTEXT_REPORT_HPP
#define EVOTEXT_REPORT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "evotext/manifest.hpp"
#include "evotext/selection.hpp"

namespace evotext {

struct RunOutput {
  nlohmann::json report_body;           // records + aggregate (no timestamp)
  std::vector<std::string> trace_lines; // JSON-lines, one per attack event
};

// Classifies inputs in order, attacks every correctly classified one
// (up to limit_attacks), and assembles the report body and trace.
// Inputs past the point where the attack limit is reached are left
// unprocessed and do not appear in the report.
RunOutput execute_run(const RunManifest& manifest, const RunAssets& assets);

// Aggregate block recomputed purely from the per-record array, so the
// summary is reproducible from the report file alone.
nlohmann::json aggregate_from_records(const nlohmann::json& records);

void print_summary(std::ostream& out, const nlohmann::json& aggregate);

// Wraps the body with a timestamp envelope and writes report.json plus
// trace.jsonl under out_dir.
void write_run_files(const std::string& out_dir, const RunOutput& output);

} // namespace evotext

#endif
