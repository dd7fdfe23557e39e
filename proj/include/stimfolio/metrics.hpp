#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stimfolio/fracture_model.hpp"

namespace stimfolio {

/// Return and risk of one design over stochastic rock realizations.
struct DesignStats {
  std::string design_id;
  double mean_efficiency = 0.0;  // return r_i
  double risk_sigma = 0.0;       // sum of the two relative standard deviations
  std::vector<double> efficiencies;
  std::vector<double> variabilities;

  std::size_t realization_count() const noexcept { return efficiencies.size(); }
};

struct BaseCaseReference {
  double base_efficiency = 0.0;
  double base_risk = 0.0;
  StageDesign design;
};

/// Fracture energy release rate (1 - nu^2) K^2 / E, J/m^2.
double fracture_energy(double toughness, double youngs_modulus_pa, double poisson_ratio);

/// Created surface energy over total input energy for a whole stage.
double stage_efficiency(std::span<const double> radii_m, const RockRealization& rock,
                        double total_energy_j);

std::vector<double> cluster_efficiencies(std::span<const double> radii_m,
                                         const RockRealization& rock,
                                         std::span<const double> per_cluster_energy_j);

/// Sample standard deviation of values relative to their mean.
/// Returns 0 for a constant series regardless of its mean.
double relative_sample_stddev(std::span<const double> values);

/// Within-stage spread of cluster efficiencies.
double energy_variability(std::span<const double> cluster_efficiency);

double design_risk(std::span<const double> efficiencies, std::span<const double> variabilities);

DesignStats make_design_stats(std::string design_id, std::vector<double> efficiencies,
                              std::vector<double> variabilities);

/// (efficiency / eps*, risk / R*).
std::pair<double, double> normalize_vs_base(double efficiency, double risk,
                                            const BaseCaseReference& ref);

}  // namespace stimfolio
