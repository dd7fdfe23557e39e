#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "stimfolio/fracture_model.hpp"
#include "stimfolio/portfolio.hpp"
#include "stimfolio/sampling.hpp"

namespace stimfolio::pipeline {

struct CandidateCounts {
  std::size_t uniform = 500;
  std::size_t nonuniform = 500;
  std::size_t exl = 500;
};

/// The low-risk family: fixed rate, viscosity and stage, uniform spacing, varied
/// perforation loss.
struct ExlScreen {
  double viscosity_pa_s = 0.003;
  double injection_rate_m3_per_s = 0.25;
  double stage_length_m = 20.0;
  ParamRange perforation_loss_pa{5.5e6, 1e8, AxisScale::linear};
};

struct RunConfig {
  std::uint64_t master_seed = 20240601;
  DesignSpace design_space;
  CandidateCounts candidates;
  ExlScreen exl;
  BaseRockProperties rock;
  double uncertainty_level = 0.05;
  /// Every realization uses the base rock (testing aid).
  bool constant_rock_properties = false;
  std::size_t realizations_per_design = 120;
  std::size_t selection_count = 6;
  double inflection_efficiency = 2.5e-4;
  std::size_t mixture_samples = 12500;
  StageDesign base_case;
  SolverControls solver;
  RiskAggregation risk_aggregation = RiskAggregation::quadratic;
  /// 0 picks the hardware concurrency.
  std::size_t workers = 0;

  RunConfig();

  /// Throws ConfigError.
  void validate() const;

  DesignSpace family_space(const std::string& family) const;
  UncertaintyModel uncertainty() const { return {uncertainty_level, master_seed}; }
};

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys are rejected; missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Canonical serialization used for hashing (sorted keys, no whitespace).
std::string canonical_config_text(const RunConfig& cfg);

/// Hash input: the config minus fields that must not change output bytes.
std::string config_digest(const RunConfig& cfg);

}  // namespace stimfolio::pipeline
