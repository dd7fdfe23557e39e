#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "stimfolio/random.hpp"
#include "stimfolio/sampling.hpp"

using namespace stimfolio;
using doctest::Approx;

TEST_CASE("stream keys") {
  const auto a = derive_stream_key(1, {2, 3});
  CHECK(a == derive_stream_key(1, {2, 3}));
  CHECK(a != derive_stream_key(1, {3, 2}));
  CHECK(a != derive_stream_key(2, {2, 3}));
  CHECK(derive_stream_key(1, {2}) != derive_stream_key(1, {2, 0}));
  CHECK(hash_label("") == 0xcbf29ce484222325ULL);
  CHECK(hash_label("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(splitmix64(0) != splitmix64(1));
}

TEST_CASE("random stream transforms") {
  RandomStream s(42), t(42);
  double sum = 0.0, esum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform01();
    CHECK_EQ(u, t.uniform01());
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == Approx(0.5).epsilon(0.01));
  for (int i = 0; i < n; ++i) esum += s.exponential();
  CHECK(esum / n == Approx(1.0).epsilon(0.01));
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = s.below(7);
    REQUIRE(k < 7);
    ++hist[k];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}

TEST_CASE("stratum bounds") {
  ParamRange mu{std::pow(10.0, -3.5), 10.0, AxisScale::log};
  const auto b = stratum_bounds(mu, 7);
  REQUIRE(b.size() == 8);
  for (int k = 0; k <= 7; ++k) CHECK(b[k] == Approx(std::pow(10.0, -3.5 + 4.5 * k / 7.0)).epsilon(1e-12));

  ParamRange z{20.0, 120.0, AxisScale::linear};
  const auto bz = stratum_bounds(z, 4);
  CHECK(bz[1] == Approx(45.0));
  CHECK(bz[4] == Approx(120.0));
}

TEST_CASE("latin hypercube stratification") {
  for (std::size_t n : {1u, 2u, 7u, 100u}) {
    const auto u = lhs_unit(n, 5, 99);
    REQUIRE(u.size() == n * 5);
    for (std::size_t d = 0; d < 5; ++d) {
      std::set<std::size_t> strata;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = u[i * 5 + d];
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
        strata.insert(std::size_t(v * double(n)));
      }
      CHECK(strata.size() == n);
    }
  }
  CHECK(lhs_unit(50, 5, 1) == lhs_unit(50, 5, 1));
  CHECK(lhs_unit(50, 5, 1) != lhs_unit(50, 5, 2));
}

TEST_CASE("design sampling") {
  DesignSpace space;
  SUBCASE("single point inside the box") {
    const auto d = lhs_sample(space, 1, 5);
    REQUIRE(d.size() == 1);
    CHECK(d[0].injection_rate_m3_per_s >= 0.1);
    CHECK(d[0].injection_rate_m3_per_s <= 0.25);
    CHECK(d[0].stage_length_m >= 20.0);
    CHECK(d[0].stage_length_m <= 120.0);
    CHECK(d[0].viscosity_pa_s >= std::pow(10.0, -3.5));
    CHECK(d[0].viscosity_pa_s <= 10.0);
    CHECK(d[0].spacing_ratio >= 0.25);
    CHECK(d[0].spacing_ratio <= 0.5);
  }
  SUBCASE("one sample per stratum on every axis") {
    const std::size_t n = 60;
    const auto d = lhs_sample(space, n, 17);
    auto check_axis = [&](const ParamRange& r, auto get) {
      const auto b = stratum_bounds(r, n);
      std::vector<int> hits(n, 0);
      for (const auto& x : d) {
        const double v = get(x);
        auto it = std::upper_bound(b.begin(), b.end(), v);
        std::size_t k = std::min<std::size_t>(std::size_t(it - b.begin()) - 1, n - 1);
        ++hits[k];
      }
      for (int h : hits) CHECK(h == 1);
    };
    check_axis(space.injection_rate_m3_per_s, [](const StageDesign& s) { return s.injection_rate_m3_per_s; });
    check_axis(space.viscosity_pa_s, [](const StageDesign& s) { return s.viscosity_pa_s; });
    check_axis(space.stage_length_m, [](const StageDesign& s) { return s.stage_length_m; });
    check_axis(space.spacing_ratio, [](const StageDesign& s) { return s.spacing_ratio; });
    check_axis(space.perforation_loss_pa, [](const StageDesign& s) {
      const double q = s.injection_rate_m3_per_s / 5.0;
      return s.perf_factor_pa_s2_per_m6 * q * q;
    });
  }
  SUBCASE("equal stage volume share") {
    for (const auto& s : lhs_sample(space, 20, 3)) {
      const double share = 14400.0 / std::floor(1000.0 / s.stage_length_m);
      CHECK(s.injected_volume_m3() == Approx(share).epsilon(1e-12));
    }
  }
  SUBCASE("ids and determinism") {
    space.id_prefix = "NFS";
    const auto a = lhs_sample(space, 10, 3);
    const auto b = lhs_sample(space, 10, 3);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].design_id == b[i].design_id);
      CHECK(a[i].viscosity_pa_s == b[i].viscosity_pa_s);
      CHECK(a[i].design_id.rfind("NFS", 0) == 0);
      ids.insert(a[i].design_id);
    }
    CHECK(ids.size() == 10);
  }
  SUBCASE("fixed axis") {
    space.spacing_ratio = {0.5, 0.5, AxisScale::linear};
    for (const auto& s : lhs_sample(space, 15, 3)) CHECK(s.spacing_ratio == 0.5);
  }
}

TEST_CASE("perforation factor and leak-off scaling") {
  CHECK(perf_factor_for_loss(1.696e7, 0.2, 5) == Approx(1.06e10).epsilon(1e-12));
  CHECK(leakoff_for_viscosity(3.24e-6, 1.0) == 3.24e-6);
  CHECK(leakoff_for_viscosity(3.24e-6, 0.003) == Approx(5.916e-5).epsilon(1e-4));
  CHECK(leakoff_for_viscosity(3.24e-6, 10.0) == Approx(1.0246e-6).epsilon(1e-4));
  CHECK(stage_volume_share(50.0, 14400.0, 1000.0) == Approx(720.0));
  CHECK(stage_volume_share(120.0, 14400.0, 1000.0) == Approx(1800.0));
}

TEST_CASE("rock realizations") {
  BaseRockProperties base;
  StageDesign d;
  d.design_id = "X1";
  UncertaintyModel m{0.05, 1234};

  for (std::uint64_t k = 0; k < 200; ++k) {
    const auto r = draw_realization(base, m, d, k);
    REQUIRE(r.cluster_count() == 5);
    for (double s : r.closure_stress_pa) {
      CHECK(s >= 33.608e6 - 1e-6);
      CHECK(s <= 35.332e6 + 1e-6);
    }
    for (double t : r.toughness_pa_sqrt_m) {
      CHECK(t >= 0.975e6);
      CHECK(t <= 1.025e6);
    }
    CHECK(r.youngs_modulus_pa >= 25e9 * 0.975);
    CHECK(r.youngs_modulus_pa <= 25e9 * 1.025);
    CHECK(r.poisson_ratio == 0.2);
    const double cl0 = leakoff_for_viscosity(3.24e-6, d.viscosity_pa_s);
    const double dec = std::log10(r.leakoff_m_per_sqrt_s / cl0);
    CHECK(std::abs(dec) <= 0.025 + 1e-12);
  }

  const auto a = draw_realization(base, m, d, 7);
  const auto b = draw_realization(base, m, d, 7);
  CHECK(a.closure_stress_pa == b.closure_stress_pa);
  CHECK(a.leakoff_m_per_sqrt_s == b.leakoff_m_per_sqrt_s);
  CHECK(a.seed == b.seed);
  CHECK(draw_realization(base, m, d, 8).closure_stress_pa != a.closure_stress_pa);

  UncertaintyModel zero{0.0, 1234};
  const auto z = draw_realization(base, zero, d, 3);
  const auto ref = base_realization(base, d);
  CHECK(z.closure_stress_pa == ref.closure_stress_pa);
  CHECK(z.toughness_pa_sqrt_m == ref.toughness_pa_sqrt_m);
  CHECK(z.youngs_modulus_pa == ref.youngs_modulus_pa);
  CHECK(z.leakoff_m_per_sqrt_s == ref.leakoff_m_per_sqrt_s);
}
