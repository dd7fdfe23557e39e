#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stimfolio/metrics.hpp"

namespace stimfolio {

/// Dense row-major square matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static SquareMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct PortfolioWeights {
  std::vector<std::string> member_ids;
  std::vector<double> weights;

  /// Non-negative weights summing to one within 1e-12.
  void validate() const;
};

enum class RiskAggregation {
  quadratic,  // square root of the covariance quadratic form
  linear,     // weighted sum of member risks
};

struct PortfolioStats {
  double expected_return = 0.0;
  double risk = 0.0;
  PortfolioWeights weights;
};

double expected_return(const PortfolioWeights& w, std::span<const double> returns);

/// sigma_ij = sigma_i sigma_j c_ij. The correlation matrix must be symmetric
/// with a unit diagonal and entries in [-1, 1].
SquareMatrix covariance_matrix(std::span<const double> risks, const SquareMatrix& correlation);

/// rho' C rho. Slightly negative round-off (>= -1e-15) is clamped to zero.
double portfolio_variance(const PortfolioWeights& w, const SquareMatrix& cov);

double linear_pooled_risk(const PortfolioWeights& w, std::span<const double> risks);

/// Uniform draws on the (N-1)-simplex from normalized unit exponentials.
std::vector<PortfolioWeights> simplex_sample(std::span<const std::string> member_ids,
                                             std::size_t samples, std::uint64_t seed);

/// Return and risk of `samples` random mixtures of the members, in sample order.
/// Uses the identity correlation unless one is supplied.
std::vector<PortfolioStats> feasibility_set(std::span<const DesignStats> members,
                                            std::size_t samples, std::uint64_t seed,
                                            RiskAggregation mode = RiskAggregation::quadratic,
                                            const SquareMatrix* correlation = nullptr);

std::string to_string(RiskAggregation mode);
RiskAggregation risk_aggregation_from_string(const std::string& name);

}  // namespace stimfolio
