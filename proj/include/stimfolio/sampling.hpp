#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stimfolio/fracture_model.hpp"

namespace stimfolio {

enum class AxisScale { linear, log };

/// Closed interval sampled in either linear or log10 space. lo == hi fixes the value.
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  AxisScale scale = AxisScale::linear;

  bool fixed() const noexcept { return lo == hi; }
  void validate(const char* name) const;
  /// Maps u in [0, 1] onto the range in its own scale.
  double from_unit(double u) const;
};

/// Edges of n equal strata of `range` in its own scale (n + 1 values).
std::vector<double> stratum_bounds(const ParamRange& range, std::size_t n);

struct DesignSpace {
  std::string id_prefix = "D";
  /// Perforation loss at the nominal per-cluster rate Qo/n; sets the perforation factor.
  ParamRange perforation_loss_pa{10.0, 1e8, AxisScale::log};
  ParamRange injection_rate_m3_per_s{0.1, 0.25, AxisScale::linear};
  ParamRange viscosity_pa_s{0.00031622776601683794, 10.0, AxisScale::log};
  ParamRange stage_length_m{20.0, 120.0, AxisScale::linear};
  ParamRange spacing_ratio{0.25, 0.5, AxisScale::linear};
  int n_fractures = 5;
  double well_volume_m3 = 14400.0;
  double lateral_length_m = 1000.0;

  void validate() const;
};

/// Per-stage share of the fixed well volume: V_well / floor(L / Z).
double stage_volume_share(double stage_length_m, double well_volume_m3, double lateral_length_m);

/// Perforation factor giving `loss_pa` at the nominal per-cluster rate.
double perf_factor_for_loss(double loss_pa, double injection_rate, int n_fractures);

/// Latin hypercube sample: each axis has exactly one point per stratum. Treating
/// time is derived per design so every design injects the same stage volume.
std::vector<StageDesign> lhs_sample(const DesignSpace& space, std::size_t count,
                                    std::uint64_t seed);

/// Unit-cube LHS (count x dims, row-major); exposed for stratification tests.
std::vector<double> lhs_unit(std::size_t count, std::size_t dims, std::uint64_t seed);

/// Deterministic rock property values.
struct BaseRockProperties {
  double leakoff_reference_m_per_sqrt_s = 3.24e-6;
  double youngs_modulus_pa = 25e9;
  double poisson_ratio = 0.2;
  double closure_stress_pa = 34.47e6;
  double toughness_pa_sqrt_m = 1e6;
};

struct UncertaintyModel {
  /// Full relative width of the uniform ranges (0.05 means +-2.5%).
  double level = 0.05;
  std::uint64_t master_seed = 0;
};

/// Leak-off coefficient scaled by fluid viscosity: C_L0 * sqrt(1 Pa.s / mu).
double leakoff_for_viscosity(double reference_leakoff, double viscosity_pa_s);

/// The unperturbed realization used for deterministic screening.
RockRealization base_realization(const BaseRockProperties& base, const StageDesign& design);

/// One stochastic realization. The stream depends only on
/// (master_seed, design_id, realization_index).
RockRealization draw_realization(const BaseRockProperties& base, const UncertaintyModel& model,
                                 const StageDesign& design, std::uint64_t realization_index);

}  // namespace stimfolio
