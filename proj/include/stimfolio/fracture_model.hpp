#pragma once

// Reduced-order model of N radial hydraulic fractures growing simultaneously
// from one stage. Fractures are penny-shaped cracks in the toughness regime,
// coupled through a shared wellbore pressure. Each entry point adds quadratic
// perforation friction and a lumped viscous resistance; neighbours load each
// other through a cube-decay stress-shadow kernel; fluid is lost by one-term
// Carter leak-off.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace stimfolio {

enum class SpacingMode { uniform, nonuniform };

struct StageDesign {
  std::string design_id;
  int n_fractures = 5;
  double stage_length_m = 50.0;
  /// 2*h1/Z. 0.5 is uniform spacing for a five-cluster stage.
  double spacing_ratio = 0.5;
  double injection_rate_m3_per_s = 0.2;
  double treating_time_s = 3600.0;
  double viscosity_pa_s = 0.003;
  double perf_factor_pa_s2_per_m6 = 1.06e10;

  SpacingMode spacing_mode() const noexcept {
    return spacing_ratio == 0.5 ? SpacingMode::uniform : SpacingMode::nonuniform;
  }
  double injected_volume_m3() const noexcept {
    return injection_rate_m3_per_s * treating_time_s;
  }

  /// Throws DomainError when a field is out of range.
  void validate() const;

  /// Gaps h_k between consecutive clusters; they sum to the stage length.
  std::vector<double> spacings() const;

  /// Cluster positions along the lateral, first cluster at 0.
  std::vector<double> cluster_positions() const;
};

struct RockRealization {
  std::string realization_id;
  std::uint64_t seed = 0;
  double youngs_modulus_pa = 25e9;
  double poisson_ratio = 0.2;
  double leakoff_m_per_sqrt_s = 0.0;
  std::vector<double> closure_stress_pa;    // per cluster
  std::vector<double> toughness_pa_sqrt_m;  // per cluster

  std::size_t cluster_count() const noexcept { return closure_stress_pa.size(); }
  double plane_strain_modulus() const;
  void validate(int n_fractures) const;
};

struct FractureState {
  double radius_m = 0.0;
  double volume_m3 = 0.0;
  double leaked_volume_m3 = 0.0;
  double energy_in_j = 0.0;
  double inflow_m3_per_s = 0.0;
  double net_pressure_pa = 0.0;
  bool growing = false;
  bool opened = false;  // has ever accepted fluid
};

struct SolverControls {
  double initial_time_step_s = 0.1;
  double time_step_growth = 1.05;
  /// Step cap as a fraction of the treating time.
  double max_time_step_fraction = 1.0 / 500.0;
  double viscous_alpha = 50.0;
  double leakoff_min_time_s = 1.0;
  double seed_radius_m = 0.1;
  int max_iterations = 200;
  double pressure_rel_tol = 1e-8;
  double volume_balance_tolerance = 0.005;
};

struct StageOutcome {
  std::string design_id;
  std::string realization_id;
  std::vector<double> final_radii_m;
  std::vector<double> per_cluster_energy_j;
  double total_energy_j = 0.0;
  std::vector<double> per_cluster_efficiency;
  double stage_efficiency = 0.0;
  double volume_balance_error = 0.0;

  /// Integral of p_w * Qo dt over the same step sequence.
  double pumped_energy_j = 0.0;
  /// max over steps and clusters of |Q_i - Qo/n| / (Qo/n).
  double max_flow_deviation = 0.0;
  std::size_t step_count = 0;
  bool accepted = true;
  std::string failure_reason;
};

// ---------------------------------------------------------------------------
// Closed-form building blocks.

double plane_strain_modulus(double youngs_modulus_pa, double poisson_ratio);

/// Net pressure at which a penny crack of radius R propagates: K_I = K_IC.
double penny_pressure_at_propagation(double radius_m, double toughness);

/// Sneddon volume of a penny crack under uniform net pressure.
double penny_volume(double radius_m, double net_pressure_pa, double plane_strain_modulus_pa);

/// Net pressure that holds volume V in a crack of radius R (inverse of penny_volume).
double penny_stiffness_pressure(double radius_m, double volume_m3,
                                double plane_strain_modulus_pa);

/// Radius of a penny crack at the propagation criterion holding volume V.
double radius_from_volume_k(double volume_m3, double toughness, double plane_strain_modulus_pa);

double perforation_drop(double perf_factor, double flow_rate);

double viscous_drop(double viscosity, double flow_rate, double radius_m, double alpha);

/// Stress shadow felt by fracture `target` from every other fracture.
double interaction_stress(std::size_t target, std::span<const FractureState> states,
                          std::span<const double> positions_m);

/// Carter leak-off rate from both faces of a crack of radius R at time t.
double leak_rate(double leakoff_coefficient, double radius_m, double time_s, double min_time_s);

/// Time integral of 1/sqrt(max(t, t_min)) over [t0, t1].
double carter_time_integral(double t0, double t1, double min_time_s);

// ---------------------------------------------------------------------------
// Wellbore coupling.

/// Positive root of f*Q^2 + b*Q = excess for a single entry point. Returns 0 for
/// excess <= 0. Requires f + b > 0.
double inflow_for_excess_pressure(double excess_pa, double viscous_coeff, double perf_factor);

/// Per-fracture quantities that stay fixed while the wellbore pressure is solved.
struct PartitionTerms {
  std::vector<double> threshold_pa;   // closure + shadow + net pressure
  std::vector<double> viscous_coeff;  // alpha * mu / R^3
  double perf_factor = 0.0;
};

PartitionTerms partition_terms(const StageDesign& design, const RockRealization& rock,
                               std::span<const FractureState> states,
                               std::span<const double> positions_m,
                               const SolverControls& controls);

/// Inflow to each fracture for a given wellbore pressure, with the no-backflow clamp.
std::vector<double> solve_flow_partition(double wellbore_pressure_pa, const StageDesign& design,
                                         const RockRealization& rock,
                                         std::span<const FractureState> states,
                                         const SolverControls& controls = {});

struct WellboreSolution {
  double wellbore_pressure_pa = 0.0;
  std::vector<double> inflow_m3_per_s;
  int iterations = 0;
};

/// Wellbore pressure such that the partitioned inflows sum to Qo.
WellboreSolution solve_wellbore_pressure(const PartitionTerms& terms, double total_rate,
                                         const SolverControls& controls,
                                         const std::string& design_id = {},
                                         const std::string& realization_id = {});

WellboreSolution solve_wellbore_pressure(const StageDesign& design, const RockRealization& rock,
                                         std::span<const FractureState> states,
                                         const SolverControls& controls = {});

// ---------------------------------------------------------------------------
// Time integration.

struct StepRecord {
  std::size_t step = 0;
  double time_s = 0.0;
  double dt_s = 0.0;
  double wellbore_pressure_pa = 0.0;
  std::span<const FractureState> states;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Initial state of every cluster: seed radius, empty, not yet opened.
std::vector<FractureState> initial_states(int n_fractures, const SolverControls& controls);

/// Pure function of its arguments; bit-identical output for identical input.
StageOutcome simulate_stage(const StageDesign& design, const RockRealization& rock,
                            const SolverControls& controls = {},
                            const StepObserver& observer = {});

}  // namespace stimfolio
