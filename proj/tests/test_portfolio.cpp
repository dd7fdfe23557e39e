#include <doctest.h>

#include <cmath>
#include <random>

#include "stimfolio/errors.hpp"
#include "stimfolio/portfolio.hpp"

using namespace stimfolio;
using doctest::Approx;

namespace {

PortfolioWeights pw(std::vector<double> w) {
  PortfolioWeights p;
  for (std::size_t i = 0; i < w.size(); ++i) p.member_ids.push_back("m" + std::to_string(i));
  p.weights = std::move(w);
  return p;
}

std::vector<DesignStats> members(const std::vector<double>& r, const std::vector<double>& s) {
  std::vector<DesignStats> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    DesignStats d;
    d.design_id = "m" + std::to_string(i);
    d.mean_efficiency = r[i];
    d.risk_sigma = s[i];
    out.push_back(d);
  }
  return out;
}

}  // namespace

TEST_CASE("expected return") {
  CHECK(expected_return(pw({1.0, 0.0, 0.0}), std::vector<double>{3e-4, 1e-4, 2e-4}) == 3e-4);
  CHECK(expected_return(pw({0.5, 0.5}), std::vector<double>{2e-4, 1e-4}) ==
        Approx(1.5e-4).epsilon(1e-15));
  CHECK_THROWS_AS(expected_return(pw({0.5, 0.6}), std::vector<double>{1, 1}), DomainError);
  CHECK_THROWS_AS(expected_return(pw({1.5, -0.5}), std::vector<double>{1, 1}), DomainError);
  CHECK_THROWS_AS(expected_return(pw({1.0}), std::vector<double>{1, 1}), DomainError);
}

TEST_CASE("covariance matrix") {
  const auto id = covariance_matrix(std::vector<double>{0.4, 0.2}, SquareMatrix::identity(2));
  CHECK(id(0, 0) == Approx(0.16));
  CHECK(id(1, 1) == Approx(0.04));
  CHECK(id(0, 1) == 0.0);

  SquareMatrix c = SquareMatrix::identity(2);
  c(0, 1) = c(1, 0) = 0.5;
  CHECK(covariance_matrix(std::vector<double>{1.0, 2.0}, c)(0, 1) == Approx(1.0));

  const auto z = covariance_matrix(std::vector<double>{0.0, 0.0, 0.0}, SquareMatrix::identity(3));
  for (double v : z.data()) CHECK(v == 0.0);

  SquareMatrix bad = SquareMatrix::identity(2);
  bad(0, 1) = 0.3;
  CHECK_THROWS_AS(covariance_matrix(std::vector<double>{1, 1}, bad), DomainError);
  bad(1, 0) = 0.3;
  bad(0, 0) = 0.9;
  CHECK_THROWS_AS(covariance_matrix(std::vector<double>{1, 1}, bad), DomainError);
}

TEST_CASE("portfolio variance") {
  const auto cov1 = covariance_matrix(std::vector<double>{0.3}, SquareMatrix::identity(1));
  CHECK(portfolio_variance(pw({1.0}), cov1) == Approx(0.09));

  const auto cov = covariance_matrix(std::vector<double>{0.4, 0.2}, SquareMatrix::identity(2));
  const double v = portfolio_variance(pw({0.5, 0.5}), cov);
  CHECK(v == Approx(0.05).epsilon(1e-14));
  CHECK(std::sqrt(v) == Approx(0.2236).epsilon(1e-4));

  // Random dense instances against an explicit double sum.
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 6;
    SquareMatrix corr = SquareMatrix::identity(n);
    // Correlation from a random Gram matrix of unit vectors.
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (auto& row : a) {
      double nn = 0.0;
      for (auto& x : row) {
        x = u(rng) - 0.5;
        nn += x * x;
      }
      for (auto& x : row) x /= std::sqrt(nn);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) {
          double d = 0.0;
          for (std::size_t k = 0; k < n; ++k) d += a[i][k] * a[j][k];
          corr(i, j) = std::clamp(d, -1.0, 1.0);
        }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) corr(j, i) = corr(i, j);
    std::vector<double> s(n), w(n);
    double ws = 0.0;
    for (auto& x : s) x = u(rng);
    for (auto& x : w) ws += (x = u(rng));
    for (auto& x : w) x /= ws;
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ref += w[i] * w[j] * s[i] * s[j] * corr(i, j);
    const double got = portfolio_variance(pw(w), covariance_matrix(s, corr));
    CHECK(got == Approx(std::max(ref, 0.0)).epsilon(1e-12).scale(1e-15));
  }
}

TEST_CASE("diversification closed form") {
  for (std::size_t n : {2u, 6u, 11u}) {
    const std::vector<double> s(n, 0.37);
    const auto cov = covariance_matrix(s, SquareMatrix::identity(n));
    const double risk = std::sqrt(portfolio_variance(pw(std::vector<double>(n, 1.0 / n)), cov));
    CHECK(std::abs(risk - 0.37 / std::sqrt(double(n))) <= 1e-12);
    CHECK(risk < 0.37);
  }
  CHECK(linear_pooled_risk(pw({0.25, 0.75}), std::vector<double>{0.4, 0.8}) ==
        Approx(0.7).epsilon(1e-15));
}

TEST_CASE("simplex sampling") {
  const std::vector<std::string> one = {"a"};
  for (const auto& p : simplex_sample(one, 50, 1)) CHECK(p.weights == std::vector<double>{1.0});

  const std::vector<std::string> ids = {"a", "b", "c", "d", "e", "f"};
  const std::size_t m = 12500;
  const auto s = simplex_sample(ids, m, 77);
  REQUIRE(s.size() == m);
  std::vector<double> mean(6, 0.0);
  for (const auto& p : s) {
    double sum = 0.0;
    for (double w : p.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    for (std::size_t i = 0; i < 6; ++i) mean[i] += p.weights[i] / m;
  }
  // Dirichlet(1,...,1): Var w_i = (N-1) / (N^2 (N+1)).
  const double se = std::sqrt(5.0 / (36.0 * 7.0) / m);
  for (double mu : mean) CHECK(std::abs(mu - 1.0 / 6.0) < 3.0 * se);

  const auto again = simplex_sample(ids, 100, 77);
  for (std::size_t k = 0; k < 100; ++k) CHECK(again[k].weights == s[k].weights);
}

TEST_CASE("feasibility set") {
  const auto single = feasibility_set(members({2e-4}, {0.3}), 20, 4);
  for (const auto& p : single) {
    CHECK(p.expected_return == Approx(2e-4).epsilon(1e-15));
    CHECK(p.risk == Approx(0.3).epsilon(1e-15));
  }

  const std::vector<double> r = {1e-4, 2e-4, 3e-4, 1.5e-4, 2.5e-4, 1.2e-4};
  const std::vector<double> s = {0.1, 0.5, 0.3, 0.2, 0.4, 0.25};
  const auto m = members(r, s);
  const auto cloud = feasibility_set(m, 2000, 9);
  REQUIRE(cloud.size() == 2000);
  const auto w = simplex_sample(std::vector<std::string>{"m0", "m1", "m2", "m3", "m4", "m5"}, 2000, 9);
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const auto& p = cloud[k];
    CHECK(p.expected_return >= 1e-4 * (1 - 1e-12));
    CHECK(p.expected_return <= 3e-4 * (1 + 1e-12));
    CHECK(p.risk <= 0.5 * (1 + 1e-12));
    double er = 0.0, var = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      er += w[k].weights[i] * r[i];
      var += w[k].weights[i] * w[k].weights[i] * s[i] * s[i];
    }
    CHECK(p.expected_return == Approx(er).epsilon(1e-12));
    CHECK(p.risk == Approx(std::sqrt(var)).epsilon(1e-12));
  }
  const auto again = feasibility_set(m, 2000, 9);
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    CHECK(again[k].expected_return == cloud[k].expected_return);
    CHECK(again[k].risk == cloud[k].risk);
  }

  const auto lin = feasibility_set(m, 50, 9, RiskAggregation::linear);
  for (std::size_t k = 0; k < lin.size(); ++k) {
    double ref = 0.0;
    for (std::size_t i = 0; i < 6; ++i) ref += w[k].weights[i] * s[i];
    CHECK(lin[k].risk == Approx(ref).epsilon(1e-12));
  }

  CHECK(risk_aggregation_from_string(to_string(RiskAggregation::linear)) == RiskAggregation::linear);
  CHECK_THROWS(risk_aggregation_from_string("cubic"));
}
