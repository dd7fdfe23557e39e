#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "stimfolio/errors.hpp"
#include "stimfolio/fracture_model.hpp"
#include "stimfolio/sampling.hpp"

using namespace stimfolio;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

RockRealization homogeneous(int n, double leakoff = 0.0) {
  RockRealization r;
  r.realization_id = "test";
  r.youngs_modulus_pa = 25e9;
  r.poisson_ratio = 0.2;
  r.leakoff_m_per_sqrt_s = leakoff;
  r.closure_stress_pa.assign(std::size_t(n), 34.47e6);
  r.toughness_pa_sqrt_m.assign(std::size_t(n), 1e6);
  return r;
}

StageDesign base_design() {
  StageDesign d;
  d.design_id = "base";
  d.injection_rate_m3_per_s = 0.2;
  d.stage_length_m = 50.0;
  d.viscosity_pa_s = 0.003;
  d.spacing_ratio = 0.5;
  d.perf_factor_pa_s2_per_m6 = 1.06e10;
  d.treating_time_s = 3600.0;
  return d;
}

// Reference bisection for f Q^2 + b Q = d, independent of the closed form.
double bisect_inflow(double d, double b, double f) {
  double lo = 0.0, hi = 1.0;
  while (f * hi * hi + b * hi < d) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f * mid * mid + b * mid < d ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("plane strain modulus") {
  CHECK(plane_strain_modulus(25e9, 0.2) == Approx(25e9 / 0.96).epsilon(1e-14));
  CHECK(plane_strain_modulus(25e9, 0.2) == Approx(2.6042e10).epsilon(1e-4));
  CHECK(plane_strain_modulus(7.0e9, 0.0) == 7.0e9);
  CHECK_THROWS_AS(plane_strain_modulus(1.0, 0.6), DomainError);
  CHECK_THROWS_AS(plane_strain_modulus(-1.0, 0.2), DomainError);
}

TEST_CASE("penny crack relations") {
  SUBCASE("propagation pressure") {
    CHECK(penny_pressure_at_propagation(25.0, 1e6) ==
          Approx(1e6 * std::sqrt(kPi) / (2.0 * 5.0)).epsilon(1e-14));
    CHECK(penny_pressure_at_propagation(25.0, 1e6) == Approx(1.7725e5).epsilon(1e-4));
    CHECK(penny_pressure_at_propagation(kPi / 4.0, 1e6) == Approx(1e6).epsilon(1e-14));
    double prev = penny_pressure_at_propagation(1.0, 1e6);
    for (double r = 2.0; r < 1e6; r *= 3.0) {
      const double p = penny_pressure_at_propagation(r, 1e6);
      CHECK(p < prev);
      CHECK(p > 0.0);
      prev = p;
    }
    CHECK_THROWS_AS(penny_pressure_at_propagation(0.0, 1e6), DomainError);
  }
  SUBCASE("volume and radius inverse") {
    const double ep = 25e9 / 0.96;
    const double p = penny_pressure_at_propagation(25.0, 1e6);
    const double v = penny_volume(25.0, p, ep);
    CHECK(v == Approx(16.0 * p * 15625.0 / (3.0 * ep)).epsilon(1e-14));
    CHECK(v == Approx(0.5671).epsilon(2e-4));
    CHECK(penny_volume(25.0, 0.0, ep) == 0.0);
    CHECK(radius_from_volume_k(v, 1e6, ep) == Approx(25.0).epsilon(1e-10));
    CHECK(radius_from_volume_k(0.5671, 1e6, ep) == Approx(25.00).epsilon(1e-4));
    CHECK(radius_from_volume_k(0.0, 1e6, ep) == 0.0);
    // K-vertex closed form evaluated independently of the library.
    const double r144 = std::pow(3.0 * ep * 144.0 / (8.0 * std::sqrt(kPi) * 1e6), 0.4);
    CHECK(radius_from_volume_k(144.0, 1e6, ep) == Approx(r144).epsilon(1e-13));
    CHECK(radius_from_volume_k(144.0, 1e6, ep) == Approx(229.0).epsilon(1e-3));
  }
  SUBCASE("round trip over the radius range") {
    const double ep = 25e9 / 0.96;
    for (double r = 1.0; r <= 1000.0; r *= 1.37) {
      const double v = penny_volume(r, penny_pressure_at_propagation(r, 1e6), ep);
      CHECK(radius_from_volume_k(v, 1e6, ep) == Approx(r).epsilon(1e-10));
      CHECK(penny_stiffness_pressure(r, v, ep) ==
            Approx(penny_pressure_at_propagation(r, 1e6)).epsilon(1e-12));
    }
  }
  SUBCASE("radius strictly increasing in volume") {
    const double ep = 25e9 / 0.96;
    double prev = 0.0;
    for (double v = 1e-6; v < 1e4; v *= 2.0) {
      const double r = radius_from_volume_k(v, 1e6, ep);
      CHECK(r > prev);
      prev = r;
    }
  }
}

TEST_CASE("resistance terms") {
  CHECK(perforation_drop(1.06e10, 0.04) == Approx(1.696e7).epsilon(1e-12));
  CHECK(perforation_drop(1.06e10, 0.0) == 0.0);
  CHECK(perforation_drop(0.0, 0.04) == 0.0);
  CHECK_THROWS_AS(perforation_drop(1.0, -0.1), DomainError);

  CHECK(viscous_drop(0.003, 0.04, 25.0, 50.0) == Approx(3.84e-7).epsilon(1e-12));
  CHECK(viscous_drop(0.003, 0.0, 25.0, 50.0) == 0.0);
  CHECK(viscous_drop(0.006, 0.04, 25.0, 50.0) ==
        Approx(2.0 * viscous_drop(0.003, 0.04, 25.0, 50.0)).epsilon(1e-15));
  CHECK_THROWS_AS(viscous_drop(0.003, 0.04, 0.0, 50.0), DomainError);
}

TEST_CASE("stress shadow kernel") {
  std::vector<FractureState> s(2);
  s[0].radius_m = 10.0;
  s[0].net_pressure_pa = 3e5;
  s[1].radius_m = 10.0;
  s[1].net_pressure_pa = 2e5;
  const std::vector<double> x = {0.0, 10.0};
  CHECK(interaction_stress(0, s, x) == Approx(1e5).epsilon(1e-15));  // s = R_j
  CHECK(interaction_stress(1, s, x) == Approx(1.5e5).epsilon(1e-15));

  const std::vector<double> same = {5.0, 5.0};
  CHECK(interaction_stress(0, s, same) == Approx(2e5).epsilon(1e-15));  // saturation

  std::vector<FractureState> one(1);
  one[0].radius_m = 10.0;
  one[0].net_pressure_pa = 1e6;
  CHECK(interaction_stress(0, one, std::vector<double>{0.0}) == 0.0);

  s[1].radius_m = 0.0;
  CHECK(interaction_stress(0, s, x) == 0.0);
  CHECK_THROWS_AS(interaction_stress(2, s, x), DomainError);

  // Far field decays like (R/s)^3.
  s[1].radius_m = 1.0;
  const double far = interaction_stress(0, s, std::vector<double>{0.0, 1000.0});
  CHECK(far == Approx(2e5 * 1e-9).epsilon(1e-6));
}

TEST_CASE("Carter leak-off") {
  const double cl = 3.24e-6 * std::sqrt(1.0 / 0.003);
  CHECK(cl == Approx(5.916e-5).epsilon(1e-4));
  CHECK(leak_rate(5.916e-5, 25.0, 900.0, 1.0) ==
        Approx(2.0 * 5.916e-5 * kPi * 625.0 / 30.0).epsilon(1e-14));
  CHECK(leak_rate(5.916e-5, 25.0, 900.0, 1.0) == Approx(7.744e-3).epsilon(1e-3));
  CHECK(leak_rate(0.0, 25.0, 900.0, 1.0) == 0.0);
  CHECK(leak_rate(cl, 0.0, 900.0, 1.0) == 0.0);
  CHECK(leak_rate(cl, 1.0, 0.0, 1.0) == leak_rate(cl, 1.0, 1.0, 1.0));

  // Exact integral against a fine midpoint rule.
  for (auto [t0, t1] : {std::pair{0.0, 0.5}, {0.3, 7.0}, {5.0, 900.0}}) {
    double acc = 0.0;
    const int n = 200000;
    const double h = (t1 - t0) / n;
    for (int i = 0; i < n; ++i) acc += h / std::sqrt(std::max(t0 + (i + 0.5) * h, 1.0));
    CHECK(carter_time_integral(t0, t1, 1.0) == Approx(acc).epsilon(1e-7));
  }
}

TEST_CASE("stage geometry") {
  StageDesign d = base_design();
  auto h = d.spacings();
  REQUIRE(h.size() == 4);
  for (double v : h) CHECK(v == Approx(12.5).epsilon(1e-15));

  d.spacing_ratio = 0.25;
  h = d.spacings();
  CHECK(h[0] == Approx(0.25 * 50.0 / 2.0));
  CHECK(h[3] == h[0]);
  CHECK(h[1] == h[2]);
  CHECK(h[1] / h[0] == Approx(3.0));  // outer gaps three times smaller
  double sum = 0.0;
  for (double v : h) sum += v;
  CHECK(sum == Approx(50.0).epsilon(1e-15));
  CHECK(d.spacing_mode() == SpacingMode::nonuniform);

  const auto x = d.cluster_positions();
  CHECK(x.front() == 0.0);
  CHECK(x.back() == Approx(50.0));
  CHECK(std::is_sorted(x.begin(), x.end()));

  d.n_fractures = 1;
  CHECK(d.spacings().empty());
  CHECK(d.cluster_positions().size() == 1);
}

TEST_CASE("closed-form inflow matches bisection") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lg(-3.0, 12.0);
  for (int i = 0; i < 500; ++i) {
    const double d = std::pow(10.0, lg(rng) * 0.5);
    const double b = std::pow(10.0, lg(rng) - 4.0);
    const double f = std::pow(10.0, lg(rng));
    CHECK(inflow_for_excess_pressure(d, b, f) == Approx(bisect_inflow(d, b, f)).epsilon(1e-10));
  }
  CHECK(inflow_for_excess_pressure(-1.0, 1.0, 1.0) == 0.0);
  CHECK(inflow_for_excess_pressure(0.0, 1.0, 1.0) == 0.0);
}

TEST_CASE("flow partition") {
  StageDesign d = base_design();
  const auto rock = homogeneous(5);
  auto states = initial_states(5, SolverControls{});
  for (auto& s : states) {
    s.radius_m = 10.0;
    s.net_pressure_pa = 1e5;
  }

  SUBCASE("identical fractures take identical flow") {
    // Symmetric stage: outer and inner pairs mirror each other.
    const auto q = solve_flow_partition(40e6, d, rock, states);
    CHECK(q[0] == Approx(q[4]).epsilon(1e-14));
    CHECK(q[1] == Approx(q[3]).epsilon(1e-14));
  }
  SUBCASE("clamp below threshold") {
    const auto q = solve_flow_partition(1e6, d, rock, states);
    for (double v : q) CHECK(v == 0.0);
  }
  SUBCASE("single fracture, perforation only") {
    StageDesign one = d;
    one.n_fractures = 1;
    one.viscosity_pa_s = 0.0;
    one.perf_factor_pa_s2_per_m6 = 1e12;
    auto st = initial_states(1, SolverControls{});
    st[0].radius_m = 10.0;
    st[0].net_pressure_pa = 2e5;
    const double pw = 34.47e6 + 2e5 + 5e5;
    const auto q = solve_flow_partition(pw, one, homogeneous(1), st);
    CHECK(q[0] == Approx(std::sqrt(5e5 / 1e12)).epsilon(1e-10));
  }
}

TEST_CASE("wellbore pressure") {
  const auto rock1 = homogeneous(1);
  StageDesign one = base_design();
  one.n_fractures = 1;
  auto st = initial_states(1, SolverControls{});
  st[0].radius_m = 20.0;
  st[0].net_pressure_pa = penny_pressure_at_propagation(20.0, 1e6);

  SUBCASE("no resistance") {
    one.viscosity_pa_s = 0.0;
    one.perf_factor_pa_s2_per_m6 = 0.0;
    const auto sol = solve_wellbore_pressure(one, rock1, st);
    CHECK(sol.wellbore_pressure_pa == 34.47e6 + st[0].net_pressure_pa);
  }
  SUBCASE("perforation friction only") {
    one.viscosity_pa_s = 0.0;
    const auto sol = solve_wellbore_pressure(one, rock1, st);
    const double expect = 34.47e6 + st[0].net_pressure_pa + 1.06e10 * 0.2 * 0.2;
    CHECK(sol.wellbore_pressure_pa == Approx(expect).epsilon(1e-9));
    CHECK(sol.inflow_m3_per_s[0] == Approx(0.2).epsilon(1e-8));
  }
  SUBCASE("five identical fractures, no shadow") {
    StageDesign d = base_design();
    d.stage_length_m = 1e5;  // clusters far apart
    auto s5 = initial_states(5, SolverControls{});
    for (auto& s : s5) {
      s.radius_m = 1.0;
      s.net_pressure_pa = 1e5;
    }
    const auto sol = solve_wellbore_pressure(d, homogeneous(5), s5);
    for (double q : sol.inflow_m3_per_s) CHECK(q == Approx(0.04).epsilon(1e-8));
    double total = 0.0;
    for (double q : sol.inflow_m3_per_s) total += q;
    CHECK(total == Approx(0.2).epsilon(1e-8));
  }
}

TEST_CASE("monotone resistance narrows the flow spread") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const StageDesign base = base_design();
  for (int trial = 0; trial < 40; ++trial) {
    auto rock = homogeneous(5);
    for (auto& s : rock.closure_stress_pa) s *= 1.0 + 0.05 * (u(rng) - 0.5);
    auto states = initial_states(5, SolverControls{});
    for (auto& s : states) {
      s.radius_m = 1.0 + 30.0 * u(rng);
      s.net_pressure_pa = penny_pressure_at_propagation(s.radius_m, 1e6);
    }
    auto spread = [&](double f, double mu) {
      StageDesign d = base;
      d.perf_factor_pa_s2_per_m6 = f;
      d.viscosity_pa_s = mu;
      const auto q = solve_wellbore_pressure(d, rock, states).inflow_m3_per_s;
      return *std::max_element(q.begin(), q.end()) - *std::min_element(q.begin(), q.end());
    };
    double prev = spread(1e6, 0.003);
    for (double f : {1e8, 1e10, 1e12}) {
      const double s = spread(f, 0.003);
      CHECK(s <= prev * (1.0 + 1e-6) + 1e-12);
      prev = s;
    }
    prev = spread(1e6, 1e-3);
    for (double mu : {1e-1, 1e1, 1e3}) {
      const double s = spread(1e6, mu);
      CHECK(s <= prev * (1.0 + 1e-6) + 1e-12);
      prev = s;
    }
  }
}

TEST_CASE("simulate_stage: analytic single fracture") {
  StageDesign d;
  d.design_id = "single";
  d.n_fractures = 1;
  d.injection_rate_m3_per_s = 0.04;
  d.treating_time_s = 3600.0;
  d.viscosity_pa_s = 0.0;
  d.perf_factor_pa_s2_per_m6 = 0.0;
  d.stage_length_m = 1.0;
  const auto out = simulate_stage(d, homogeneous(1));
  const double ep = 25e9 / 0.96;
  const double expect = std::pow(3.0 * ep * 144.0 / (8.0 * std::sqrt(kPi) * 1e6), 0.4);
  CHECK(out.final_radii_m[0] == Approx(expect).epsilon(1e-6));
  CHECK(std::abs(out.final_radii_m[0] - 229.0) / 229.0 < 0.01);
  CHECK(out.volume_balance_error < 1e-9);
}

TEST_CASE("simulate_stage: symmetry and invariants on the base case") {
  const StageDesign d = base_design();
  BaseRockProperties base;
  const auto rock = base_realization(base, d);
  double pumped_check = 0.0;
  std::vector<double> prev_energy(5, 0.0);
  bool energy_monotone = true;
  const auto out = simulate_stage(d, rock, SolverControls{}, [&](const StepRecord& s) {
    pumped_check += s.wellbore_pressure_pa * d.injection_rate_m3_per_s * s.dt_s;
    for (std::size_t i = 0; i < 5; ++i) {
      if (s.states[i].energy_in_j < prev_energy[i]) energy_monotone = false;
      prev_energy[i] = s.states[i].energy_in_j;
    }
  });
  const auto& r = out.final_radii_m;
  CHECK(std::abs(r[0] - r[4]) <= 1e-9 * r[0]);
  CHECK(std::abs(r[1] - r[3]) <= 1e-9 * r[1]);
  CHECK(out.per_cluster_efficiency[0] == Approx(out.per_cluster_efficiency[4]).epsilon(1e-9));
  CHECK(out.accepted);
  CHECK(out.volume_balance_error <= 0.005);
  CHECK(energy_monotone);
  double sum = 0.0;
  for (double w : out.per_cluster_energy_j) sum += w;
  CHECK(out.total_energy_j == Approx(sum).epsilon(1e-12));
  CHECK(std::abs(out.total_energy_j - out.pumped_energy_j) <= 1e-6 * out.pumped_energy_j);
  CHECK(out.pumped_energy_j == Approx(pumped_check).epsilon(1e-12));
  CHECK(out.stage_efficiency > 0.0);
  // Middle fractures are shadowed.
  CHECK(r[2] < r[0]);

  // Bit-identical rerun.
  const auto again = simulate_stage(d, rock);
  CHECK(again.stage_efficiency == out.stage_efficiency);
  CHECK(again.final_radii_m == out.final_radii_m);
}

TEST_CASE("simulate_stage: time-step refinement") {
  const StageDesign d = base_design();
  const auto rock = base_realization(BaseRockProperties{}, d);
  SolverControls fine;
  fine.initial_time_step_s /= 2.0;
  fine.max_time_step_fraction /= 2.0;
  fine.time_step_growth = std::sqrt(fine.time_step_growth);
  const double coarse = simulate_stage(d, rock).stage_efficiency;
  const double refined = simulate_stage(d, rock, fine).stage_efficiency;
  CHECK(std::abs(refined - coarse) / coarse < 0.005);
}

TEST_CASE("simulate_stage: extreme limited entry equalizes flow") {
  StageDesign d = base_design();
  d.perf_factor_pa_s2_per_m6 = 1e12;
  auto rock = base_realization(BaseRockProperties{}, d);
  for (std::size_t i = 0; i < 5; ++i) rock.closure_stress_pa[i] *= 1.0 + 0.05 * (i / 4.0 - 0.5);
  const auto out = simulate_stage(d, rock);
  CHECK(out.max_flow_deviation < 0.01);
}

TEST_CASE("simulate_stage: per-cluster flow conservation at each step") {
  StageDesign d = base_design();
  d.perf_factor_pa_s2_per_m6 = 1e3;
  const auto rock = base_realization(BaseRockProperties{}, d);
  double worst = 0.0;
  simulate_stage(d, rock, SolverControls{}, [&](const StepRecord& s) {
    double q = 0.0;
    for (const auto& st : s.states) q += st.inflow_m3_per_s;
    worst = std::max(worst, std::abs(q - 0.2) / 0.2);
  });
  CHECK(worst <= 1e-8);
}

TEST_CASE("simulate_stage: validation") {
  StageDesign d = base_design();
  d.injection_rate_m3_per_s = 0.0;
  CHECK_THROWS_AS(simulate_stage(d, homogeneous(5)), DomainError);
  CHECK_THROWS_AS(simulate_stage(base_design(), homogeneous(3)), DomainError);
}
