#include "stimfolio/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "stimfolio/errors.hpp"
#include "stimfolio/random.hpp"

namespace stimfolio {

void ParamRange::validate(const char* name) const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
    throw DomainError(std::string("ParamRange ") + name + ": need finite lo <= hi");
  if (scale == AxisScale::log && !(lo > 0.0))
    throw DomainError(std::string("ParamRange ") + name + ": log axis needs lo > 0");
}

double ParamRange::from_unit(double u) const {
  if (fixed()) return lo;
  if (scale == AxisScale::linear) return lo + (hi - lo) * u;
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  return std::pow(10.0, a + (b - a) * u);
}

std::vector<double> stratum_bounds(const ParamRange& range, std::size_t n) {
  if (n == 0) throw DomainError("stratum_bounds: n must be >= 1");
  std::vector<double> edges(n + 1);
  for (std::size_t k = 0; k <= n; ++k) edges[k] = range.from_unit(double(k) / double(n));
  return edges;
}

void DesignSpace::validate() const {
  perforation_loss_pa.validate("perforation_loss_pa");
  injection_rate_m3_per_s.validate("injection_rate_m3_per_s");
  viscosity_pa_s.validate("viscosity_pa_s");
  stage_length_m.validate("stage_length_m");
  spacing_ratio.validate("spacing_ratio");
  if (!(perforation_loss_pa.lo >= 0.0) || !(injection_rate_m3_per_s.lo > 0.0) ||
      !(viscosity_pa_s.lo > 0.0) || !(stage_length_m.lo > 0.0) || !(spacing_ratio.lo > 0.0) ||
      spacing_ratio.hi > 0.5)
    throw DomainError("DesignSpace " + id_prefix + ": bounds outside the physical domain");
  if (n_fractures < 1) throw DomainError("DesignSpace: n_fractures must be >= 1");
  if (!(well_volume_m3 > 0.0) || !(lateral_length_m >= stage_length_m.hi))
    throw DomainError("DesignSpace: lateral must hold at least one stage of maximum length");
}

double stage_volume_share(double stage_length_m, double well_volume_m3,
                          double lateral_length_m) {
  const double stages = std::floor(lateral_length_m / stage_length_m);
  if (!(stages >= 1.0)) throw DomainError("stage_volume_share: stage longer than the lateral");
  return well_volume_m3 / stages;
}

double perf_factor_for_loss(double loss_pa, double injection_rate, int n_fractures) {
  const double q = injection_rate / double(n_fractures);
  return loss_pa / (q * q);
}

std::vector<double> lhs_unit(std::size_t count, std::size_t dims, std::uint64_t seed) {
  std::vector<double> u(count * dims);
  std::vector<std::size_t> perm(count);
  for (std::size_t d = 0; d < dims; ++d) {
    RandomStream rng(derive_stream_key(seed, {d}));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Fisher-Yates with our own bounded draw; std::shuffle is implementation defined.
    for (std::size_t i = count; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (std::size_t i = 0; i < count; ++i)
      u[i * dims + d] = (double(perm[i]) + rng.uniform01()) / double(count);
  }
  return u;
}

std::vector<StageDesign> lhs_sample(const DesignSpace& space, std::size_t count,
                                    std::uint64_t seed) {
  space.validate();
  if (count == 0) throw DomainError("lhs_sample: count must be >= 1");
  constexpr std::size_t kDims = 5;
  const auto u = lhs_unit(count, kDims, seed);
  std::vector<StageDesign> designs(count);
  const int width = count < 10000 ? 4 : int(std::to_string(count).size());
  for (std::size_t i = 0; i < count; ++i) {
    const double* row = &u[i * kDims];
    StageDesign& d = designs[i];
    char id[64];
    std::snprintf(id, sizeof id, "%s-%0*zu", space.id_prefix.c_str(), width, i + 1);
    d.design_id = id;
    d.n_fractures = space.n_fractures;
    const double loss = space.perforation_loss_pa.from_unit(row[0]);
    d.injection_rate_m3_per_s = space.injection_rate_m3_per_s.from_unit(row[1]);
    d.viscosity_pa_s = space.viscosity_pa_s.from_unit(row[2]);
    d.stage_length_m = space.stage_length_m.from_unit(row[3]);
    d.spacing_ratio = space.n_fractures == 5 ? space.spacing_ratio.from_unit(row[4]) : 0.5;
    d.perf_factor_pa_s2_per_m6 =
        perf_factor_for_loss(loss, d.injection_rate_m3_per_s, d.n_fractures);
    d.treating_time_s =
        stage_volume_share(d.stage_length_m, space.well_volume_m3, space.lateral_length_m) /
        d.injection_rate_m3_per_s;
  }
  return designs;
}

double leakoff_for_viscosity(double reference_leakoff, double viscosity_pa_s) {
  if (!(viscosity_pa_s > 0.0)) throw DomainError("leakoff_for_viscosity: mu must be > 0");
  return reference_leakoff * std::sqrt(1.0 / viscosity_pa_s);
}

RockRealization base_realization(const BaseRockProperties& base, const StageDesign& design) {
  RockRealization r;
  r.realization_id = "base";
  r.youngs_modulus_pa = base.youngs_modulus_pa;
  r.poisson_ratio = base.poisson_ratio;
  r.leakoff_m_per_sqrt_s =
      leakoff_for_viscosity(base.leakoff_reference_m_per_sqrt_s, design.viscosity_pa_s);
  r.closure_stress_pa.assign(std::size_t(design.n_fractures), base.closure_stress_pa);
  r.toughness_pa_sqrt_m.assign(std::size_t(design.n_fractures), base.toughness_pa_sqrt_m);
  return r;
}

RockRealization draw_realization(const BaseRockProperties& base, const UncertaintyModel& model,
                                 const StageDesign& design, std::uint64_t realization_index) {
  if (!(model.level >= 0.0) || !std::isfinite(model.level))
    throw DomainError("draw_realization: uncertainty level must be >= 0");
  RockRealization r = base_realization(base, design);
  const std::uint64_t key = derive_stream_key(
      model.master_seed, {hash_label("rock"), hash_label(design.design_id), realization_index});
  RandomStream rng(key);
  const double half = model.level / 2.0;
  auto perturb = [&](double value) { return value * (1.0 + half * (2.0 * rng.uniform01() - 1.0)); };

  // Fixed draw order: well-level E and leak-off, then per-cluster stress, then toughness.
  r.youngs_modulus_pa = perturb(base.youngs_modulus_pa);
  const double decades = half * (2.0 * rng.uniform01() - 1.0);
  r.leakoff_m_per_sqrt_s *= std::pow(10.0, decades);
  for (double& s : r.closure_stress_pa) s = perturb(base.closure_stress_pa);
  for (double& k : r.toughness_pa_sqrt_m) k = perturb(base.toughness_pa_sqrt_m);

  r.realization_id = design.design_id + "/r" + std::to_string(realization_index);
  r.seed = key;
  return r;
}

}  // namespace stimfolio
