#include "stimfolio/portfolio.hpp"

#include <cmath>

#include "stimfolio/errors.hpp"
#include "stimfolio/kernels.hpp"
#include "stimfolio/random.hpp"

namespace stimfolio {

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void PortfolioWeights::validate() const {
  if (weights.empty()) throw DomainError("PortfolioWeights: empty weight vector");
  if (!member_ids.empty() && member_ids.size() != weights.size())
    throw DomainError("PortfolioWeights: ids and weights differ in length");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("PortfolioWeights: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("PortfolioWeights: weights must sum to 1");
}

double expected_return(const PortfolioWeights& w, std::span<const double> returns) {
  if (w.weights.size() != returns.size())
    throw DomainError("expected_return: weights and returns differ in length");
  w.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) acc += w.weights[i] * returns[i];
  return acc;
}

SquareMatrix covariance_matrix(std::span<const double> risks, const SquareMatrix& correlation) {
  const std::size_t n = risks.size();
  if (correlation.size() != n) throw DomainError("covariance_matrix: shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (correlation(i, i) != 1.0)
      throw DomainError("covariance_matrix: correlation diagonal must be 1");
    for (std::size_t j = 0; j < n; ++j) {
      const double c = correlation(i, j);
      if (!(c >= -1.0 && c <= 1.0) || c != correlation(j, i))
        throw DomainError("covariance_matrix: invalid correlation matrix");
    }
  }
  SquareMatrix cov(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cov(i, j) = risks[i] * risks[j] * correlation(i, j);
  return cov;
}

double portfolio_variance(const PortfolioWeights& w, const SquareMatrix& cov) {
  const std::size_t n = w.weights.size();
  if (cov.size() != n) throw DomainError("portfolio_variance: shape mismatch");
  w.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += cov(i, j) * w.weights[j];
    acc += w.weights[i] * row;
  }
  if (acc < 0.0) {
    if (acc < -1e-15) throw DomainError("portfolio_variance: covariance is not PSD");
    acc = 0.0;
  }
  return acc;
}

double linear_pooled_risk(const PortfolioWeights& w, std::span<const double> risks) {
  if (w.weights.size() != risks.size())
    throw DomainError("linear_pooled_risk: weights and risks differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < risks.size(); ++i) acc += w.weights[i] * risks[i];
  return acc;
}

std::vector<PortfolioWeights> simplex_sample(std::span<const std::string> member_ids,
                                             std::size_t samples, std::uint64_t seed) {
  const std::size_t n = member_ids.size();
  if (n == 0 || samples == 0) throw DomainError("simplex_sample: need N >= 1 and m >= 1");
  RandomStream rng(derive_stream_key(seed, {n}));
  std::vector<PortfolioWeights> out(samples);
  std::vector<double> e(n);
  for (auto& pw : out) {
    double total = 0.0;
    for (double& x : e) {
      x = rng.exponential();
      total += x;
    }
    pw.member_ids.assign(member_ids.begin(), member_ids.end());
    pw.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) pw.weights[i] = e[i] / total;
  }
  return out;
}

std::vector<PortfolioStats> feasibility_set(std::span<const DesignStats> members,
                                            std::size_t samples, std::uint64_t seed,
                                            RiskAggregation mode,
                                            const SquareMatrix* correlation) {
  const std::size_t n = members.size();
  if (n == 0) throw DomainError("feasibility_set: no members");
  std::vector<std::string> ids;
  std::vector<double> returns, risks, variances;
  for (const auto& m : members) {
    if (!std::isfinite(m.mean_efficiency) || !(m.risk_sigma >= 0.0))
      throw DomainError("feasibility_set: member " + m.design_id + " has invalid stats");
    ids.push_back(m.design_id);
    returns.push_back(m.mean_efficiency);
    risks.push_back(m.risk_sigma);
    variances.push_back(m.risk_sigma * m.risk_sigma);
  }
  auto draws = simplex_sample(ids, samples, seed);

  // Component-major batch for the SIMD kernels.
  std::vector<double> batch(n * samples);
  for (std::size_t k = 0; k < samples; ++k)
    for (std::size_t i = 0; i < n; ++i) batch[i * samples + k] = draws[k].weights[i];
  const kernels::BatchView view{batch, n, samples};

  std::vector<double> ret(samples), spread(samples);
  kernels::weighted_sum(view, returns, ret);
  if (mode == RiskAggregation::linear) {
    kernels::weighted_sum(view, risks, spread);
  } else if (correlation == nullptr) {
    kernels::weighted_square_sum(view, variances, spread);
  } else {
    const auto cov = covariance_matrix(risks, *correlation);
    kernels::quadratic_form(view, cov.data(), spread);
  }

  std::vector<PortfolioStats> out(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    out[k].expected_return = ret[k];
    if (mode == RiskAggregation::linear) {
      out[k].risk = spread[k];
    } else {
      if (spread[k] < -1e-15) throw DomainError("feasibility_set: negative portfolio variance");
      out[k].risk = std::sqrt(std::max(spread[k], 0.0));
    }
    out[k].weights = std::move(draws[k]);
  }
  return out;
}

std::string to_string(RiskAggregation mode) {
  return mode == RiskAggregation::linear ? "linear" : "quadratic";
}

RiskAggregation risk_aggregation_from_string(const std::string& name) {
  if (name == "quadratic") return RiskAggregation::quadratic;
  if (name == "linear") return RiskAggregation::linear;
  throw ConfigError("risk_aggregation must be \"quadratic\" or \"linear\", got \"" + name + "\"");
}

}  // namespace stimfolio
