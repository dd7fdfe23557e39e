// Compiled with -mavx2 (no FMA) when the compiler supports it. Only reached after
// the dispatcher has confirmed AVX2 on the running CPU.

#include <algorithm>
#include <limits>

#include "stimfolio/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace stimfolio::kernels::avx2 {

#if defined(__AVX2__)

bool compiled() noexcept { return true; }

void weighted_sum(const BatchView& b, std::span<const double> coeff, std::span<double> out) {
  const double* w = b.weights.data();
  const std::size_t m = b.count;
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < b.members; ++i) {
      const __m256d wi = _mm256_loadu_pd(w + i * m + k);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(wi, _mm256_set1_pd(coeff[i])));
    }
    _mm256_storeu_pd(out.data() + k, acc);
  }
  for (; k < m; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < b.members; ++i) acc = acc + w[i * m + k] * coeff[i];
    out[k] = acc;
  }
}

void weighted_square_sum(const BatchView& b, std::span<const double> coeff,
                         std::span<double> out) {
  const double* w = b.weights.data();
  const std::size_t m = b.count;
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < b.members; ++i) {
      const __m256d wi = _mm256_loadu_pd(w + i * m + k);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_mul_pd(wi, wi), _mm256_set1_pd(coeff[i])));
    }
    _mm256_storeu_pd(out.data() + k, acc);
  }
  for (; k < m; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < b.members; ++i) {
      const double wi = w[i * m + k];
      acc = acc + (wi * wi) * coeff[i];
    }
    out[k] = acc;
  }
}

void quadratic_form(const BatchView& b, std::span<const double> cov, std::span<double> out) {
  const double* w = b.weights.data();
  const std::size_t n = b.members;
  const std::size_t m = b.count;
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < n; ++i) {
      __m256d row = _mm256_setzero_pd();
      for (std::size_t j = 0; j < n; ++j) {
        const __m256d wj = _mm256_loadu_pd(w + j * m + k);
        row = _mm256_add_pd(row, _mm256_mul_pd(_mm256_set1_pd(cov[i * n + j]), wj));
      }
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i * m + k), row));
    }
    _mm256_storeu_pd(out.data() + k, acc);
  }
  for (; k < m; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row = row + cov[i * n + j] * w[j * m + k];
      acc = acc + w[i * m + k] * row;
    }
    out[k] = acc;
  }
}

double max_clearance_above_line(std::span<const double> s, std::span<const double> r,
                                double intercept, double slope) {
  const std::size_t m = s.size();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  if (m >= 4) {
    const __m256d c0 = _mm256_set1_pd(intercept);
    const __m256d c1 = _mm256_set1_pd(slope);
    __m256d vbest = _mm256_set1_pd(best);
    for (; k + 4 <= m; k += 4) {
      const __m256d line = _mm256_add_pd(c0, _mm256_mul_pd(c1, _mm256_loadu_pd(s.data() + k)));
      vbest = _mm256_max_pd(vbest, _mm256_sub_pd(_mm256_loadu_pd(r.data() + k), line));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vbest);
    for (double v : lanes) best = std::max(best, v);
  }
  for (; k < m; ++k) best = std::max(best, r[k] - (intercept + slope * s[k]));
  return best;
}

#else

bool compiled() noexcept { return false; }

void weighted_sum(const BatchView& b, std::span<const double> c, std::span<double> o) {
  scalar::weighted_sum(b, c, o);
}
void weighted_square_sum(const BatchView& b, std::span<const double> c, std::span<double> o) {
  scalar::weighted_square_sum(b, c, o);
}
void quadratic_form(const BatchView& b, std::span<const double> c, std::span<double> o) {
  scalar::quadratic_form(b, c, o);
}
double max_clearance_above_line(std::span<const double> s, std::span<const double> r, double a,
                                double b) {
  return scalar::max_clearance_above_line(s, r, a, b);
}

#endif

}  // namespace stimfolio::kernels::avx2
