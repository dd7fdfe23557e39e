#include <algorithm>
#include <limits>

#include "stimfolio/kernels.hpp"

namespace stimfolio::kernels::scalar {

void weighted_sum(const BatchView& b, std::span<const double> coeff, std::span<double> out) {
  for (std::size_t k = 0; k < b.count; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < b.members; ++i) acc = acc + b.weights[i * b.count + k] * coeff[i];
    out[k] = acc;
  }
}

void weighted_square_sum(const BatchView& b, std::span<const double> coeff,
                         std::span<double> out) {
  for (std::size_t k = 0; k < b.count; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < b.members; ++i) {
      const double w = b.weights[i * b.count + k];
      acc = acc + (w * w) * coeff[i];
    }
    out[k] = acc;
  }
}

void quadratic_form(const BatchView& b, std::span<const double> cov, std::span<double> out) {
  const std::size_t n = b.members;
  for (std::size_t k = 0; k < b.count; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row = row + cov[i * n + j] * b.weights[j * b.count + k];
      acc = acc + b.weights[i * b.count + k] * row;
    }
    out[k] = acc;
  }
}

double max_clearance_above_line(std::span<const double> s, std::span<const double> r,
                                double intercept, double slope) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.size(); ++k)
    best = std::max(best, r[k] - (intercept + slope * s[k]));
  return best;
}

}  // namespace stimfolio::kernels::scalar
