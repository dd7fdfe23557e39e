#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stimfolio/portfolio.hpp"

namespace stimfolio {

/// A point in (risk, return) space. `source` indexes the caller's input.
struct RiskReturnPoint {
  double risk = 0.0;
  double ret = 0.0;
  std::size_t source = 0;
};

/// Pareto-maximal subset reduced to its upper concave envelope, ascending risk.
/// Collinear points stay.
std::vector<RiskReturnPoint> upper_frontier(std::span<const RiskReturnPoint> points);

struct TangentResult {
  RiskReturnPoint low;
  RiskReturnPoint high;
  PortfolioWeights low_weights;   // filled by the caller when available
  PortfolioWeights high_weights;
  double slope = 0.0;
  double intercept = 0.0;
  double return_scale = 1.0;         // normalization used for the clearance check
  double low_clearance = 0.0;        // max (r - line) / scale over the low front
  double high_clearance = 0.0;       // same for the high front

  double line_at(double risk) const noexcept { return intercept + slope * risk; }
};

/// Absolute tolerance of the supporting-line test, in normalized return units.
inline constexpr double kTangentTolerance = 1e-9;

/// Supporting line of the union of both fronts through one point of each, with
/// risk_L < risk_H. Ties go to the steeper slope, then the lower risk_L.
/// Throws InsufficientDataError when no pair qualifies.
TangentResult common_tangent(std::span<const RiskReturnPoint> low_front,
                             std::span<const RiskReturnPoint> high_front);

/// max over points of (r - line(risk)) / tangent.return_scale.
double normalized_clearance(const TangentResult& tangent,
                            std::span<const RiskReturnPoint> points);

struct CombinationPoint {
  double lambda = 0.0;  // fraction allocated to the low-risk portfolio
  double risk = 0.0;
  double ret = 0.0;
  PortfolioWeights weights;
};

CombinationPoint combination_point(const TangentResult& tangent, double lambda);

enum class TargetKind { max_risk, min_return };

struct CombinationTarget {
  TargetKind kind = TargetKind::max_risk;
  double value = 0.0;
};

/// Throws DomainError when the target lies outside the segment.
CombinationPoint combination_for_target(const TangentResult& tangent,
                                        const CombinationTarget& target);

}  // namespace stimfolio
