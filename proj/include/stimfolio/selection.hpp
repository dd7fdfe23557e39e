#pragma once

#include <span>
#include <string>
#include <vector>

namespace stimfolio {

enum class ScoreProvenance { deterministic_screen, stochastic };

/// A design placed in (risk, return) space.
struct ScoredDesign {
  std::string design_id;
  double ret = 0.0;   // efficiency
  double risk = 0.0;  // variability (screen) or combined risk (stochastic)
  ScoreProvenance provenance = ScoreProvenance::deterministic_screen;
};

/// a dominates b iff r_a >= r_b and risk_a <= risk_b with at least one strict.
bool dominates(const ScoredDesign& a, const ScoredDesign& b) noexcept;

/// Non-dominated subset sorted by ascending risk. Exact (risk, return) duplicates
/// keep the lexicographically smallest design_id.
std::vector<ScoredDesign> pareto_front(std::span<const ScoredDesign> points);

/// Splits the front's risk range into `count` equal intervals and picks the
/// highest-return point of each. Empty intervals fall back to the nearest
/// unselected point (ties toward lower risk). Output sorted by ascending risk.
std::vector<ScoredDesign> grid_select(std::span<const ScoredDesign> front, std::size_t count);

/// The `count` lowest-risk points with return strictly below `eff_threshold`.
std::vector<ScoredDesign> threshold_select(std::span<const ScoredDesign> points,
                                           double eff_threshold, std::size_t count);

}  // namespace stimfolio
