#include "stimfolio/metrics.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "stimfolio/errors.hpp"

namespace stimfolio {

double fracture_energy(double toughness, double youngs_modulus_pa, double poisson_ratio) {
  return (1.0 - poisson_ratio * poisson_ratio) * toughness * toughness / youngs_modulus_pa;
}

double stage_efficiency(std::span<const double> radii_m, const RockRealization& rock,
                        double total_energy_j) {
  if (!(total_energy_j > 0.0)) throw DomainError("stage_efficiency: total energy must be > 0");
  if (radii_m.size() != rock.toughness_pa_sqrt_m.size())
    throw DomainError("stage_efficiency: radii and toughness sizes differ");
  double surface = 0.0;
  for (std::size_t i = 0; i < radii_m.size(); ++i) {
    const double g = fracture_energy(rock.toughness_pa_sqrt_m[i], rock.youngs_modulus_pa,
                                     rock.poisson_ratio);
    surface += std::numbers::pi * g * radii_m[i] * radii_m[i];
  }
  return surface / total_energy_j;
}

std::vector<double> cluster_efficiencies(std::span<const double> radii_m,
                                         const RockRealization& rock,
                                         std::span<const double> per_cluster_energy_j) {
  if (radii_m.size() != per_cluster_energy_j.size() ||
      radii_m.size() != rock.toughness_pa_sqrt_m.size())
    throw DomainError("cluster_efficiencies: size mismatch");
  std::vector<double> out(radii_m.size(), 0.0);
  for (std::size_t i = 0; i < radii_m.size(); ++i) {
    const double r = radii_m[i];
    const double w = per_cluster_energy_j[i];
    if (r == 0.0) continue;
    if (!(w > 0.0))
      throw DomainError("cluster_efficiencies: cluster " + std::to_string(i) +
                        " has a radius but no input energy");
    const double g = fracture_energy(rock.toughness_pa_sqrt_m[i], rock.youngs_modulus_pa,
                                     rock.poisson_ratio);
    out[i] = std::numbers::pi * g * r * r / w;
  }
  return out;
}

double relative_sample_stddev(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw DomainError("relative_sample_stddev: need at least two values");
  bool constant = true;
  for (double v : values) constant = constant && v == values.front();
  if (constant) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / double(n);
  if (!(mean > 0.0)) throw DomainError("relative_sample_stddev: mean must be > 0");
  double ss = 0.0;
  for (double v : values) {
    const double d = (v - mean) / mean;
    ss += d * d;
  }
  return std::sqrt(ss / double(n - 1));
}

double energy_variability(std::span<const double> cluster_efficiency) {
  if (cluster_efficiency.size() < 2)
    throw DomainError("energy_variability: need at least two clusters");
  const double mean = std::accumulate(cluster_efficiency.begin(), cluster_efficiency.end(), 0.0) /
                      double(cluster_efficiency.size());
  if (!(mean > 0.0)) throw DomainError("energy_variability: mean cluster efficiency must be > 0");
  return relative_sample_stddev(cluster_efficiency);
}

double design_risk(std::span<const double> efficiencies, std::span<const double> variabilities) {
  if (efficiencies.size() != variabilities.size())
    throw DomainError("design_risk: series lengths differ");
  if (efficiencies.size() < 2) throw DomainError("design_risk: need at least two realizations");
  return relative_sample_stddev(variabilities) + relative_sample_stddev(efficiencies);
}

DesignStats make_design_stats(std::string design_id, std::vector<double> efficiencies,
                              std::vector<double> variabilities) {
  DesignStats s;
  s.design_id = std::move(design_id);
  s.risk_sigma = design_risk(efficiencies, variabilities);
  s.mean_efficiency =
      std::accumulate(efficiencies.begin(), efficiencies.end(), 0.0) / double(efficiencies.size());
  s.efficiencies = std::move(efficiencies);
  s.variabilities = std::move(variabilities);
  return s;
}

std::pair<double, double> normalize_vs_base(double efficiency, double risk,
                                            const BaseCaseReference& ref) {
  if (!(ref.base_efficiency > 0.0) || !(ref.base_risk > 0.0))
    throw DomainError("normalize_vs_base: reference values must be > 0");
  return {efficiency / ref.base_efficiency, risk / ref.base_risk};
}

}  // namespace stimfolio
