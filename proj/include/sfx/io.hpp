#pragma once

// File formats. Bit strings use BinaryVector::to_string order (feature 1 first).
//
//   plan.json      all plan parameters, the RNG name, M_c and the shifts as bit strings
//   masks.jsonl    {"id", "mask"} per distinct mask, for external batch inference
//   bank.jsonl     header {"plan_hash", ...} then {"id", "mask", "value"} per (c, i, l)
//   spectra.json   transformed samples U[c][i][j], flattened in query_index order
//   spectrum.json  [{"k", "value", "round", "corr"}]
//   report.json    run report, see schemas/report.schema.json

#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "sfx/indices.hpp"
#include "sfx/metrics.hpp"
#include "sfx/oracle.hpp"
#include "sfx/sampling.hpp"
#include "sfx/spectrum.hpp"

namespace sfx {

using nlohmann::json;

json plan_to_json(const SamplingPlan& plan);
/// Rebuilds the plan from its parameters and checks that the stored matrices
/// and shifts match; throws FormatError on any disagreement.
SamplingPlan plan_from_json(const json& j);
/// Lowercase hex SHA-256 of the canonical plan JSON.
std::string plan_hash(const SamplingPlan& plan);

json spectrum_to_json(const RecoveredSpectrum& spectrum);
RecoveredSpectrum spectrum_from_json(const json& j, std::size_t n);

json index_report_to_json(const IndexReport& report);
json metric_to_json(const MetricResult& metric);

json planted_to_json(const PlantedFunction& f);
PlantedFunction planted_from_json(const json& j);

/// One {"id", "mask", "value"} row per enumerated query, after a header row.
void write_bank(const std::filesystem::path& path, const SampleBank& bank);
/// Reads a bank written by write_bank for `plan`; the header hash must match.
SampleBank read_bank(const std::filesystem::path& path, std::shared_ptr<const SamplingPlan> plan);

void write_spectra(const std::filesystem::path& path, const SampleBank& bank);

/// Rows {"id", "mask", "value"} appended by an interrupted collection; doubles as a replay file.
std::unordered_map<BinaryVector, double> read_journal(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);
/// Writes j.dump(2) plus a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace sfx
