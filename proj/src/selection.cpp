#include "stimfolio/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stimfolio/errors.hpp"

namespace stimfolio {

bool dominates(const ScoredDesign& a, const ScoredDesign& b) noexcept {
  return a.ret >= b.ret && a.risk <= b.risk && (a.ret > b.ret || a.risk < b.risk);
}

std::vector<ScoredDesign> pareto_front(std::span<const ScoredDesign> points) {
  std::vector<ScoredDesign> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScoredDesign& a, const ScoredDesign& b) {
    if (a.risk != b.risk) return a.risk < b.risk;
    if (a.ret != b.ret) return a.ret > b.ret;
    return a.design_id < b.design_id;
  });
  std::vector<ScoredDesign> front;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : sorted) {
    if (p.ret > best) {
      front.push_back(p);
      best = p.ret;
    }
  }
  return front;
}

std::vector<ScoredDesign> grid_select(std::span<const ScoredDesign> front, std::size_t count) {
  if (count == 0) throw DomainError("grid_select: count must be >= 1");
  if (front.size() < count)
    throw InsufficientDataError("grid_select: frontier has " + std::to_string(front.size()) +
                                " points, " + std::to_string(count) + " requested");
  std::vector<ScoredDesign> pts(front.begin(), front.end());
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.risk < b.risk; });
  const double lo = pts.front().risk;
  const double span = pts.back().risk - lo;

  auto bin_of = [&](double risk) -> std::size_t {
    if (!(span > 0.0)) return 0;
    const double u = (risk - lo) / span;
    return std::min(count - 1, std::size_t(std::floor(u * double(count))));
  };

  std::vector<long> pick(count, -1);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const std::size_t b = bin_of(pts[p].risk);
    if (pick[b] < 0 || pts[p].ret > pts[std::size_t(pick[b])].ret) pick[b] = long(p);
  }
  std::vector<bool> taken(pts.size(), false);
  for (long p : pick)
    if (p >= 0) taken[std::size_t(p)] = true;

  for (std::size_t b = 0; b < count; ++b) {
    if (pick[b] >= 0) continue;
    const double centre = span > 0.0 ? lo + span * (double(b) + 0.5) / double(count) : lo;
    long best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pts.size(); ++p) {
      if (taken[p]) continue;
      const double dist = std::abs(pts[p].risk - centre);
      if (dist < best_dist) {  // strict: earlier (lower-risk) point wins ties
        best_dist = dist;
        best = long(p);
      }
    }
    pick[b] = best;
    taken[std::size_t(best)] = true;
  }

  std::vector<ScoredDesign> out;
  for (std::size_t p = 0; p < pts.size(); ++p)
    if (taken[p]) out.push_back(pts[p]);
  return out;
}

std::vector<ScoredDesign> threshold_select(std::span<const ScoredDesign> points,
                                           double eff_threshold, std::size_t count) {
  std::vector<ScoredDesign> below;
  for (const auto& p : points)
    if (p.ret < eff_threshold) below.push_back(p);
  if (below.size() < count)
    throw InsufficientDataError("threshold_select: only " + std::to_string(below.size()) +
                                " points below the efficiency threshold, " +
                                std::to_string(count) + " requested");
  std::sort(below.begin(), below.end(), [](const ScoredDesign& a, const ScoredDesign& b) {
    if (a.risk != b.risk) return a.risk < b.risk;
    return a.design_id < b.design_id;
  });
  below.resize(count);
  return below;
}

}  // namespace stimfolio
