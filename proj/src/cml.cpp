#include "stimfolio/cml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "stimfolio/errors.hpp"
#include "stimfolio/kernels.hpp"

namespace stimfolio {

namespace {

// > 0 when b lies strictly above the segment a-c.
double turn(const RiskReturnPoint& a, const RiskReturnPoint& b, const RiskReturnPoint& c) {
  return (b.ret - a.ret) * (c.risk - a.risk) - (c.ret - a.ret) * (b.risk - a.risk);
}

struct Columns {
  std::vector<double> s, r;
  explicit Columns(std::span<const RiskReturnPoint> pts) {
    s.reserve(pts.size());
    r.reserve(pts.size());
    for (const auto& p : pts) {
      s.push_back(p.risk);
      r.push_back(p.ret);
    }
  }
};

}  // namespace

std::vector<RiskReturnPoint> upper_frontier(std::span<const RiskReturnPoint> points) {
  std::vector<RiskReturnPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.risk != b.risk) return a.risk < b.risk;
    if (a.ret != b.ret) return a.ret > b.ret;
    return a.source < b.source;
  });
  std::vector<RiskReturnPoint> pareto;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : sorted) {
    if (p.ret > best) {
      pareto.push_back(p);
      best = p.ret;
    }
  }
  std::vector<RiskReturnPoint> hull;
  for (const auto& p : pareto) {
    while (hull.size() >= 2 && turn(hull[hull.size() - 2], hull.back(), p) < 0.0)
      hull.pop_back();
    hull.push_back(p);
  }
  return hull;
}

double normalized_clearance(const TangentResult& t, std::span<const RiskReturnPoint> points) {
  if (points.empty()) return -std::numeric_limits<double>::infinity();
  Columns c(points);
  return kernels::max_clearance_above_line(c.s, c.r, t.intercept, t.slope) / t.return_scale;
}

TangentResult common_tangent(std::span<const RiskReturnPoint> low_front,
                             std::span<const RiskReturnPoint> high_front) {
  if (low_front.empty() || high_front.empty())
    throw InsufficientDataError("common_tangent: both frontiers must be nonempty");

  double scale = 0.0;
  for (const auto& p : low_front) scale = std::max(scale, std::abs(p.ret));
  for (const auto& p : high_front) scale = std::max(scale, std::abs(p.ret));
  if (!(scale > 0.0)) scale = 1.0;

  const Columns lo(low_front), hi(high_front);
  bool found = false;
  TangentResult best;
  auto better = [](const TangentResult& a, const TangentResult& b) {
    return std::make_tuple(-a.slope, a.low.risk, a.high.risk, -a.low.ret, -a.high.ret) <
           std::make_tuple(-b.slope, b.low.risk, b.high.risk, -b.low.ret, -b.high.ret);
  };

  for (const auto& L : low_front) {
    for (const auto& H : high_front) {
      if (!(L.risk < H.risk) || !(L.ret < H.ret)) continue;
      TangentResult cand;
      cand.low = L;
      cand.high = H;
      cand.slope = (H.ret - L.ret) / (H.risk - L.risk);
      cand.intercept = L.ret - cand.slope * L.risk;
      cand.return_scale = scale;
      if (found && !better(cand, best)) continue;
      cand.low_clearance =
          kernels::max_clearance_above_line(lo.s, lo.r, cand.intercept, cand.slope) / scale;
      if (cand.low_clearance > kTangentTolerance) continue;
      cand.high_clearance =
          kernels::max_clearance_above_line(hi.s, hi.r, cand.intercept, cand.slope) / scale;
      if (cand.high_clearance > kTangentTolerance) continue;
      best = cand;
      found = true;
    }
  }
  if (!found)
    throw InsufficientDataError(
        "common_tangent: no ascending line supports both frontiers (high frontier dominated)");
  return best;
}

CombinationPoint combination_point(const TangentResult& t, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw DomainError("combination_point: lambda must lie in [0, 1]");
  CombinationPoint c;
  c.lambda = lambda;
  c.risk = lambda * t.low.risk + (1.0 - lambda) * t.high.risk;
  c.ret = lambda * t.low.ret + (1.0 - lambda) * t.high.ret;
  auto& w = c.weights;
  for (std::size_t i = 0; i < t.low_weights.weights.size(); ++i) {
    if (i < t.low_weights.member_ids.size()) w.member_ids.push_back(t.low_weights.member_ids[i]);
    w.weights.push_back(lambda * t.low_weights.weights[i]);
  }
  for (std::size_t i = 0; i < t.high_weights.weights.size(); ++i) {
    if (i < t.high_weights.member_ids.size())
      w.member_ids.push_back(t.high_weights.member_ids[i]);
    w.weights.push_back((1.0 - lambda) * t.high_weights.weights[i]);
  }
  return c;
}

CombinationPoint combination_for_target(const TangentResult& t, const CombinationTarget& target) {
  double lo = 0.0, hi = 0.0;
  if (target.kind == TargetKind::max_risk) {
    lo = t.low.risk;
    hi = t.high.risk;
  } else {
    lo = t.low.ret;
    hi = t.high.ret;
  }
  const double span = hi - lo;
  const double slack = 1e-12 * std::max(std::abs(lo), std::abs(hi));
  if (!(target.value >= lo - slack && target.value <= hi + slack) || !(span > 0.0))
    throw DomainError("combination_for_target: target outside the tangent segment");
  if (target.value <= lo) return combination_point(t, 1.0);
  if (target.value >= hi) return combination_point(t, 0.0);
  const double lambda = std::clamp((hi - target.value) / span, 0.0, 1.0);
  return combination_point(t, lambda);
}

}  // namespace stimfolio
