#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

#include "ashield/grpo.hpp"
#include "ashield/policy.hpp"
#include "ashield/types.hpp"

namespace ashield {

// Serialized policy snapshot. The embedded codebook makes a checkpoint
// self-contained for evaluation and inspection.
struct Checkpoint {
  PolicyParams params;
  Codebook codebook;
  nlohmann::json config_echo;
  std::uint64_t rng_state = 0;
  int step = 0;
  std::string id;  // derived from the file name on load
};

inline constexpr const char* kDatasetFormatVersion = "fhvm-1";
inline constexpr const char* kCheckpointFormatVersion = "ashield-ckpt-1";

nlohmann::json generator_config_to_json(const GeneratorConfig& cfg);
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

nlohmann::json grpo_config_to_json(const GrpoConfig& cfg);
GrpoConfig grpo_config_from_json(const nlohmann::json& j);

// Dataset file: one JSON object per line. The header line carries the
// format version, generation config, and codebook seed; each following line
// is one clip record {id, label, family, strength, seed, frames, T, D}.
void write_dataset(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_dataset(const std::string& path);

// Checkpoint file: a single JSON document, round-trip bit-exact.
void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

// Metrics log: one JSON object per training step.
void write_metrics(std::span<const StepMetrics> metrics, const std::string& path);
std::vector<StepMetrics> read_metrics(const std::string& path);

}  // namespace ashield
