#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "stimfolio/metrics.hpp"
#include "stimfolio/pipeline/config.hpp"
#include "stimfolio/pipeline/csv.hpp"

namespace stimfolio::pipeline {

/// Stage names in execution order.
const std::vector<std::string>& stage_order();

struct RunContext {
  RunConfig config;
  std::string run_dir;
  std::size_t workers = 1;
  std::ostream* log = nullptr;  // progress messages; may be null
};

/// Runs one stage, then records its outputs in the manifest. Upstream inputs
/// must come from a run with the same config digest.
void run_stage(const RunContext& ctx, const std::string& stage);

/// All stages in order. With `resume`, stages whose recorded outputs still match
/// their digests are skipped.
void run_pipeline(const RunContext& ctx, bool resume = true);

/// Summary of a finished run; also written to report.json.
nlohmann::json build_report(const std::string& run_dir);
void print_report(const nlohmann::json& report, std::ostream& out);

// Pieces shared with tests and the acceptance suite.

struct RealizationRecord {
  std::string design_id;
  std::size_t index = 0;
  std::string realization_id;
  std::uint64_t seed = 0;
  double efficiency = 0.0;
  double variability = 0.0;
  double volume_balance_error = 0.0;
  bool ok = true;
  std::string failure_reason;
};

struct DesignEvaluation {
  DesignStats stats;
  double efficiency_term = 0.0;
  double variability_term = 0.0;
  std::vector<RealizationRecord> realizations;
  bool ok = true;
  std::string failure_reason;
};

/// N_R stochastic realizations per design, evaluated on the worker pool.
std::vector<DesignEvaluation> evaluate_designs(const RunConfig& cfg,
                                               const std::vector<StageDesign>& designs,
                                               std::size_t workers);

StageDesign design_from_row(const CsvTable& table, std::size_t row);

}  // namespace stimfolio::pipeline
