#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace stimfolio::pipeline {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kManifestFile = "run_manifest.json";

struct OutputRecord {
  std::string file;  // relative to the run directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct StageRecord {
  std::string name;
  std::string completed_utc;
  std::vector<OutputRecord> outputs;
};

struct RunManifest {
  int schema_version = kSchemaVersion;
  std::string artifact_version;
  std::string config_sha256;
  std::uint64_t master_seed = 0;
  std::string created_utc;
  std::string updated_utc;
  std::vector<StageRecord> stages;  // pipeline order
  std::map<std::string, std::uint64_t> seed_ledger;

  const StageRecord* find(const std::string& stage) const;
  std::string last_completed_stage() const;

  /// Records a stage and drops every stage recorded after it.
  void record(StageRecord rec, const std::vector<std::string>& stage_order);

  /// True if the stage is recorded and each output exists with its digest.
  bool verify(const std::string& run_dir, const std::string& stage) const;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  static bool exists(const std::string& run_dir);
  static RunManifest load(const std::string& run_dir);
  void save(const std::string& run_dir) const;
};

OutputRecord describe_output(const std::string& run_dir, const std::string& file);

std::string utc_now();

}  // namespace stimfolio::pipeline
