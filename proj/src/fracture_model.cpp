#include "stimfolio/fracture_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stimfolio/errors.hpp"
#include "stimfolio/metrics.hpp"

namespace stimfolio {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void StageDesign::validate() const {
  if (n_fractures < 1) throw DomainError("StageDesign: n_fractures must be >= 1");
  if (!positive_finite(stage_length_m) || !positive_finite(injection_rate_m3_per_s) ||
      !positive_finite(treating_time_s))
    throw DomainError("StageDesign " + design_id + ": physical fields must be > 0");
  if (!(viscosity_pa_s >= 0.0) || !std::isfinite(viscosity_pa_s))
    throw DomainError("StageDesign " + design_id + ": viscosity must be >= 0");
  if (!(perf_factor_pa_s2_per_m6 >= 0.0) || !std::isfinite(perf_factor_pa_s2_per_m6))
    throw DomainError("StageDesign " + design_id + ": perforation factor must be >= 0");
  if (!(spacing_ratio > 0.0 && spacing_ratio <= 0.5 + 1e-15))
    throw DomainError("StageDesign " + design_id + ": spacing ratio must lie in (0, 0.5]");
  if (n_fractures != 5 && n_fractures != 1 && spacing_ratio != 0.5)
    throw DomainError("StageDesign " + design_id +
                      ": non-uniform spacing is defined for five clusters only");
}

std::vector<double> StageDesign::spacings() const {
  if (n_fractures == 1) return {};
  if (n_fractures == 5) {
    const double h1 = spacing_ratio * stage_length_m / 2.0;
    const double h2 = (stage_length_m - 2.0 * h1) / 2.0;
    return {h1, h2, h2, h1};
  }
  return std::vector<double>(std::size_t(n_fractures - 1),
                             stage_length_m / double(n_fractures - 1));
}

std::vector<double> StageDesign::cluster_positions() const {
  std::vector<double> x{0.0};
  for (double h : spacings()) x.push_back(x.back() + h);
  return x;
}

double RockRealization::plane_strain_modulus() const {
  return stimfolio::plane_strain_modulus(youngs_modulus_pa, poisson_ratio);
}

void RockRealization::validate(int n_fractures) const {
  if (closure_stress_pa.size() != std::size_t(n_fractures) ||
      toughness_pa_sqrt_m.size() != std::size_t(n_fractures))
    throw DomainError("RockRealization " + realization_id + ": per-cluster arrays must have " +
                      std::to_string(n_fractures) + " entries");
  if (!positive_finite(youngs_modulus_pa))
    throw DomainError("RockRealization: Young's modulus must be > 0");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
    throw DomainError("RockRealization: Poisson ratio must lie in [0, 0.5)");
  if (!(leakoff_m_per_sqrt_s >= 0.0)) throw DomainError("RockRealization: leak-off must be >= 0");
  for (std::size_t i = 0; i < closure_stress_pa.size(); ++i) {
    if (!positive_finite(closure_stress_pa[i]) || !positive_finite(toughness_pa_sqrt_m[i]))
      throw DomainError("RockRealization: stresses and toughnesses must be > 0");
  }
}

double plane_strain_modulus(double youngs_modulus_pa, double poisson_ratio) {
  if (!positive_finite(youngs_modulus_pa))
    throw DomainError("plane_strain_modulus: E must be > 0");
  // nu = 0 is accepted as the isotropic limit.
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
    throw DomainError("plane_strain_modulus: nu must lie in [0, 0.5)");
  return youngs_modulus_pa / (1.0 - poisson_ratio * poisson_ratio);
}

double penny_pressure_at_propagation(double radius_m, double toughness) {
  if (!(radius_m > 0.0)) throw DomainError("penny_pressure_at_propagation: R must be > 0");
  return toughness * kSqrtPi / (2.0 * std::sqrt(radius_m));
}

double penny_volume(double radius_m, double net_pressure_pa, double plane_strain_modulus_pa) {
  if (!(radius_m > 0.0) || !(net_pressure_pa >= 0.0) || !(plane_strain_modulus_pa > 0.0))
    throw DomainError("penny_volume: R and E' must be > 0, p_net >= 0");
  return 16.0 * net_pressure_pa * radius_m * radius_m * radius_m /
         (3.0 * plane_strain_modulus_pa);
}

double penny_stiffness_pressure(double radius_m, double volume_m3,
                                double plane_strain_modulus_pa) {
  if (!(radius_m > 0.0)) throw DomainError("penny_stiffness_pressure: R must be > 0");
  return 3.0 * plane_strain_modulus_pa * volume_m3 / (16.0 * radius_m * radius_m * radius_m);
}

double radius_from_volume_k(double volume_m3, double toughness, double plane_strain_modulus_pa) {
  if (!(volume_m3 >= 0.0)) throw DomainError("radius_from_volume_k: V must be >= 0");
  if (!(toughness > 0.0) || !(plane_strain_modulus_pa > 0.0))
    throw DomainError("radius_from_volume_k: K_IC and E' must be > 0");
  if (volume_m3 == 0.0) return 0.0;
  return std::pow(3.0 * plane_strain_modulus_pa * volume_m3 / (8.0 * kSqrtPi * toughness), 0.4);
}

double perforation_drop(double perf_factor, double flow_rate) {
  if (!(flow_rate >= 0.0)) throw DomainError("perforation_drop: backflow is not modelled");
  if (!(perf_factor >= 0.0)) throw DomainError("perforation_drop: factor must be >= 0");
  return perf_factor * flow_rate * flow_rate;
}

double viscous_drop(double viscosity, double flow_rate, double radius_m, double alpha) {
  if (!(radius_m > 0.0)) throw DomainError("viscous_drop: R must be > 0");
  if (!(flow_rate >= 0.0)) throw DomainError("viscous_drop: backflow is not modelled");
  return alpha * viscosity * flow_rate / (radius_m * radius_m * radius_m);
}

double interaction_stress(std::size_t target, std::span<const FractureState> states,
                          std::span<const double> positions_m) {
  if (target >= states.size()) throw DomainError("interaction_stress: index out of range");
  if (positions_m.size() != states.size())
    throw DomainError("interaction_stress: positions and states differ in size");
  double sigma = 0.0;
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (j == target) continue;
    const double rj = states[j].radius_m;
    if (rj <= 0.0) continue;
    const double ratio = std::abs(positions_m[target] - positions_m[j]) / rj;
    sigma += states[j].net_pressure_pa / (1.0 + ratio * ratio * ratio);
  }
  return sigma;
}

double leak_rate(double leakoff_coefficient, double radius_m, double time_s, double min_time_s) {
  return 2.0 * leakoff_coefficient * std::numbers::pi * radius_m * radius_m /
         std::sqrt(std::max(time_s, min_time_s));
}

double carter_time_integral(double t0, double t1, double min_time_s) {
  double total = 0.0;
  if (t0 < min_time_s) {
    const double end = std::min(t1, min_time_s);
    total += (end - t0) / std::sqrt(min_time_s);
    t0 = end;
  }
  if (t1 > t0) total += 2.0 * (std::sqrt(t1) - std::sqrt(t0));
  return total;
}

double inflow_for_excess_pressure(double excess_pa, double viscous_coeff, double perf_factor) {
  if (!(excess_pa > 0.0)) return 0.0;
  // 2d / (b + sqrt(b^2 + 4fd)) avoids cancellation when b dominates.
  return 2.0 * excess_pa /
         (viscous_coeff + std::sqrt(viscous_coeff * viscous_coeff + 4.0 * perf_factor * excess_pa));
}

PartitionTerms partition_terms(const StageDesign& design, const RockRealization& rock,
                               std::span<const FractureState> states,
                               std::span<const double> positions_m,
                               const SolverControls& controls) {
  const std::size_t n = states.size();
  PartitionTerms t;
  t.perf_factor = design.perf_factor_pa_s2_per_m6;
  t.threshold_pa.resize(n);
  t.viscous_coeff.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = states[i].radius_m;
    if (!(r > 0.0)) throw DomainError("partition_terms: fracture radius must be > 0");
    t.threshold_pa[i] = rock.closure_stress_pa[i] + interaction_stress(i, states, positions_m) +
                        states[i].net_pressure_pa;
    t.viscous_coeff[i] = controls.viscous_alpha * design.viscosity_pa_s / (r * r * r);
  }
  return t;
}

std::vector<double> solve_flow_partition(double wellbore_pressure_pa, const StageDesign& design,
                                         const RockRealization& rock,
                                         std::span<const FractureState> states,
                                         const SolverControls& controls) {
  if (!(wellbore_pressure_pa >= 0.0))
    throw DomainError("solve_flow_partition: wellbore pressure must be >= 0");
  const auto positions = design.cluster_positions();
  const auto terms = partition_terms(design, rock, states, positions, controls);
  std::vector<double> q(states.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double excess = wellbore_pressure_pa - terms.threshold_pa[i];
    if (excess > 0.0 && terms.viscous_coeff[i] == 0.0 && terms.perf_factor == 0.0)
      q[i] = std::numeric_limits<double>::infinity();
    else
      q[i] = inflow_for_excess_pressure(excess, terms.viscous_coeff[i], terms.perf_factor);
  }
  return q;
}

namespace {

// Solves sum_i Q_i(P) = Qo for the excess P = p_w - min threshold. Working in the
// excess keeps the root resolvable when resistances are tiny compared to the
// absolute pressure level.
WellboreSolution solve_excess(const PartitionTerms& terms, double total_rate,
                              const SolverControls& controls, const std::string& design_id,
                              const std::string& realization_id) {
  const std::size_t n = terms.threshold_pa.size();
  const double base = *std::min_element(terms.threshold_pa.begin(), terms.threshold_pa.end());
  std::vector<double> offset(n);
  for (std::size_t i = 0; i < n; ++i) offset[i] = terms.threshold_pa[i] - base;

  // Entry points with neither friction nor viscous resistance pin the pressure.
  double cap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (terms.perf_factor == 0.0 && terms.viscous_coeff[i] == 0.0) cap = std::min(cap, offset[i]);

  auto flows_at = [&](double excess, std::vector<double>& q) {
    double sum = 0.0;
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double b = terms.viscous_coeff[i];
      const bool free_flow = terms.perf_factor == 0.0 && b == 0.0;
      const double d = excess - offset[i];
      q[i] = free_flow ? 0.0 : inflow_for_excess_pressure(d, b, terms.perf_factor);
      sum += q[i];
      if (q[i] > 0.0) slope += 1.0 / std::sqrt(b * b + 4.0 * terms.perf_factor * d);
    }
    return std::pair{sum, slope};
  };

  WellboreSolution sol;
  sol.inflow_m3_per_s.assign(n, 0.0);
  std::vector<double>& q = sol.inflow_m3_per_s;

  if (std::isfinite(cap)) {
    auto [sum_at_cap, slope_unused] = flows_at(cap, q);
    (void)slope_unused;
    if (sum_at_cap <= total_rate) {
      std::vector<std::size_t> pinned;
      for (std::size_t i = 0; i < n; ++i)
        if (terms.perf_factor == 0.0 && terms.viscous_coeff[i] == 0.0 && offset[i] == cap)
          pinned.push_back(i);
      const double share = (total_rate - sum_at_cap) / double(pinned.size());
      for (std::size_t i : pinned) q[i] = share;
      sol.wellbore_pressure_pa = base + cap;
      return sol;
    }
  }

  const double tol = controls.pressure_rel_tol * total_rate;
  double lo = 0.0;
  double hi = 1.0;
  {
    double bmax = 0.0;
    for (double b : terms.viscous_coeff) bmax = std::max(bmax, b);
    double spread = 0.0;
    for (double o : offset) spread = std::max(spread, o);
    hi = std::max({hi, spread, terms.perf_factor * total_rate * total_rate, bmax * total_rate});
    hi = std::min(hi, cap);
  }
  int expansions = 0;
  while (flows_at(hi, q).first < total_rate) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 2000 || !std::isfinite(hi))
      throw NumericalError("solve_wellbore_pressure: bracket expansion failed", design_id,
                           realization_id);
  }

  // Safeguarded Newton on a monotone, concave residual.
  double x = hi;
  for (int it = 1; it <= controls.max_iterations; ++it) {
    auto [sum, slope] = flows_at(x, q);
    const double g = sum - total_rate;
    sol.iterations = it;
    if (std::abs(g) <= tol) {
      sol.wellbore_pressure_pa = base + x;
      return sol;
    }
    if (g < 0.0)
      lo = x;
    else
      hi = x;
    double next = slope > 0.0 ? x - g / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= std::numeric_limits<double>::min()) {
      // Bracket collapsed to adjacent doubles; accept if the residual is tiny.
      if (std::abs(g) <= 1e3 * tol) {
        sol.wellbore_pressure_pa = base + x;
        return sol;
      }
      break;
    }
    x = next;
  }
  throw NumericalError("solve_wellbore_pressure: no convergence within iteration cap",
                       design_id, realization_id);
}

}  // namespace

WellboreSolution solve_wellbore_pressure(const PartitionTerms& terms, double total_rate,
                                         const SolverControls& controls,
                                         const std::string& design_id,
                                         const std::string& realization_id) {
  if (!(total_rate > 0.0)) throw DomainError("solve_wellbore_pressure: Qo must be > 0");
  if (terms.threshold_pa.empty()) throw DomainError("solve_wellbore_pressure: no fractures");
  return solve_excess(terms, total_rate, controls, design_id, realization_id);
}

WellboreSolution solve_wellbore_pressure(const StageDesign& design, const RockRealization& rock,
                                         std::span<const FractureState> states,
                                         const SolverControls& controls) {
  const auto positions = design.cluster_positions();
  const auto terms = partition_terms(design, rock, states, positions, controls);
  return solve_wellbore_pressure(terms, design.injection_rate_m3_per_s, controls,
                                 design.design_id, rock.realization_id);
}

std::vector<FractureState> initial_states(int n_fractures, const SolverControls& controls) {
  FractureState s;
  s.radius_m = controls.seed_radius_m;
  return std::vector<FractureState>(std::size_t(n_fractures), s);
}

StageOutcome simulate_stage(const StageDesign& design, const RockRealization& rock,
                            const SolverControls& controls, const StepObserver& observer) {
  design.validate();
  rock.validate(design.n_fractures);
  if (!(controls.initial_time_step_s > 0.0) || !(controls.time_step_growth >= 1.0) ||
      !(controls.max_time_step_fraction > 0.0) || !(controls.seed_radius_m > 0.0))
    throw DomainError("simulate_stage: invalid solver controls");

  const std::size_t n = std::size_t(design.n_fractures);
  const double e_prime = rock.plane_strain_modulus();
  const double qo = design.injection_rate_m3_per_s;
  const double total_time = design.treating_time_s;
  const double dt_cap = total_time * controls.max_time_step_fraction;
  const double nominal = qo / double(n);
  const auto positions = design.cluster_positions();

  auto states = initial_states(design.n_fractures, controls);
  StageOutcome out;
  out.design_id = design.design_id;
  out.realization_id = rock.realization_id;

  double t = 0.0;
  double dt = controls.initial_time_step_s;
  std::size_t step = 0;
  while (total_time - t > 1e-12 * total_time) {
    const double h = std::min({dt, dt_cap, total_time - t});
    const auto terms = partition_terms(design, rock, states, positions, controls);
    const auto sol =
        solve_wellbore_pressure(terms, qo, controls, design.design_id, rock.realization_id);
    const double pw = sol.wellbore_pressure_pa;
    const double carter = carter_time_integral(t, t + h, controls.leakoff_min_time_s);

    for (std::size_t i = 0; i < n; ++i) {
      FractureState& s = states[i];
      const double qi = sol.inflow_m3_per_s[i];
      s.inflow_m3_per_s = qi;
      out.max_flow_deviation = std::max(out.max_flow_deviation, std::abs(qi - nominal) / nominal);
      if (qi > 0.0) s.opened = true;

      const double available = s.volume_m3 + qi * h;
      double leaked = s.opened ? 2.0 * rock.leakoff_m_per_sqrt_s * std::numbers::pi *
                                     s.radius_m * s.radius_m * carter
                               : 0.0;
      leaked = std::min(leaked, available);
      s.volume_m3 = available - leaked;
      s.leaked_volume_m3 += leaked;
      s.energy_in_j += pw * qi * h;

      const double k = rock.toughness_pa_sqrt_m[i];
      const double r_k = radius_from_volume_k(s.volume_m3, k, e_prime);
      if (r_k >= s.radius_m) {
        s.radius_m = r_k;
        s.growing = true;
        s.net_pressure_pa = penny_pressure_at_propagation(s.radius_m, k);
      } else {
        s.growing = false;
        s.net_pressure_pa = penny_stiffness_pressure(s.radius_m, s.volume_m3, e_prime);
      }
    }
    out.pumped_energy_j += pw * qo * h;
    t += h;
    dt *= controls.time_step_growth;
    ++step;
    if (observer) observer(StepRecord{step, t, h, pw, states});
  }
  out.step_count = step;

  out.final_radii_m.resize(n);
  out.per_cluster_energy_j.resize(n);
  double stored = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // An unopened cluster never created a fracture; its seed radius is numerical only.
    out.final_radii_m[i] = states[i].opened ? states[i].radius_m : 0.0;
    out.per_cluster_energy_j[i] = states[i].energy_in_j;
    out.total_energy_j += states[i].energy_in_j;
    stored += states[i].volume_m3 + states[i].leaked_volume_m3;
  }
  const double injected = design.injected_volume_m3();
  out.volume_balance_error = std::abs(injected - stored) / injected;
  out.per_cluster_efficiency = cluster_efficiencies(out.final_radii_m, rock,
                                                    out.per_cluster_energy_j);
  out.stage_efficiency = stage_efficiency(out.final_radii_m, rock, out.total_energy_j);
  if (out.volume_balance_error > controls.volume_balance_tolerance) {
    out.accepted = false;
    out.failure_reason = "volume balance error " + std::to_string(out.volume_balance_error) +
                         " exceeds tolerance";
  }
  return out;
}

}  // namespace stimfolio
