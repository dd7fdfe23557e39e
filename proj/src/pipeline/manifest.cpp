#include "stimfolio/pipeline/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "stimfolio/pipeline/csv.hpp"
#include "stimfolio/pipeline/digest.hpp"

namespace stimfolio::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

OutputRecord describe_output(const std::string& run_dir, const std::string& file) {
  const fs::path p = fs::path(run_dir) / file;
  return {file, sha256_file(p.string()), std::uint64_t(fs::file_size(p))};
}

const StageRecord* RunManifest::find(const std::string& stage) const {
  for (const auto& s : stages)
    if (s.name == stage) return &s;
  return nullptr;
}

std::string RunManifest::last_completed_stage() const {
  return stages.empty() ? std::string() : stages.back().name;
}

void RunManifest::record(StageRecord rec, const std::vector<std::string>& order) {
  const auto pos = std::find(order.begin(), order.end(), rec.name);
  if (pos == order.end()) throw std::logic_error("manifest: unknown stage " + rec.name);
  const auto rank = pos - order.begin();
  std::vector<StageRecord> kept;
  for (auto& s : stages) {
    const auto r = std::find(order.begin(), order.end(), s.name) - order.begin();
    if (r < rank) kept.push_back(std::move(s));
  }
  kept.push_back(std::move(rec));
  stages = std::move(kept);
}

bool RunManifest::verify(const std::string& run_dir, const std::string& stage) const {
  const StageRecord* s = find(stage);
  if (!s) return false;
  for (const auto& o : s->outputs) {
    const fs::path p = fs::path(run_dir) / o.file;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) return false;
    if (fs::file_size(p, ec) != o.bytes || ec) return false;
    if (sha256_file(p.string()) != o.sha256) return false;
  }
  return true;
}

json RunManifest::to_json() const {
  json st = json::array();
  for (const auto& s : stages) {
    json outs = json::array();
    for (const auto& o : s.outputs)
      outs.push_back({{"file", o.file}, {"sha256", o.sha256}, {"bytes", o.bytes}});
    st.push_back({{"name", s.name}, {"completed_utc", s.completed_utc}, {"outputs", outs}});
  }
  return {{"schema_version", schema_version},
          {"artifact_version", artifact_version},
          {"config_sha256", config_sha256},
          {"master_seed", master_seed},
          {"created_utc", created_utc},
          {"updated_utc", updated_utc},
          {"last_completed_stage", last_completed_stage()},
          {"stages", st},
          {"seed_ledger", seed_ledger}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    m.artifact_version = j.at("artifact_version").get<std::string>();
    m.config_sha256 = j.at("config_sha256").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.created_utc = j.at("created_utc").get<std::string>();
    m.updated_utc = j.at("updated_utc").get<std::string>();
    for (const auto& s : j.at("stages")) {
      StageRecord rec;
      rec.name = s.at("name").get<std::string>();
      rec.completed_utc = s.at("completed_utc").get<std::string>();
      for (const auto& o : s.at("outputs"))
        rec.outputs.push_back({o.at("file").get<std::string>(), o.at("sha256").get<std::string>(),
                               o.at("bytes").get<std::uint64_t>()});
      m.stages.push_back(std::move(rec));
    }
    m.seed_ledger = j.at("seed_ledger").get<std::map<std::string, std::uint64_t>>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("manifest: malformed: ") + e.what());
  }
  return m;
}

bool RunManifest::exists(const std::string& run_dir) {
  return fs::is_regular_file(fs::path(run_dir) / kManifestFile);
}

RunManifest RunManifest::load(const std::string& run_dir) {
  std::ifstream in(fs::path(run_dir) / kManifestFile);
  if (!in) throw std::runtime_error("cannot read manifest in " + run_dir);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("manifest: ") + e.what());
  }
}

void RunManifest::save(const std::string& run_dir) const {
  write_text_file((fs::path(run_dir) / kManifestFile).string(), to_json().dump(2) + "\n");
}

}  // namespace stimfolio::pipeline
