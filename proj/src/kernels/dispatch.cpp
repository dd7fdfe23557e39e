#include <atomic>
#include <stdexcept>

#include "stimfolio/errors.hpp"
#include "stimfolio/kernels.hpp"

namespace stimfolio::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if (defined(__GNUC__) || defined(__clang__)) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() noexcept { return avx2::compiled() && cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_batch(const BatchView& b, std::size_t coeff, std::size_t out) {
  if (b.weights.size() != b.members * b.count || out != b.count || coeff < b.members)
    throw DomainError("kernels: batch shape mismatch");
}

}  // namespace

Isa active_isa() noexcept { return selected().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) noexcept {
  return isa == Isa::scalar || (avx2::compiled() && cpu_has_avx2());
}

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw DomainError("kernels: requested ISA not available on this host");
  selected().store(isa, std::memory_order_relaxed);
}

void reset_isa() noexcept { selected().store(detect(), std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void weighted_sum(const BatchView& b, std::span<const double> coeff, std::span<double> out) {
  check_batch(b, coeff.size(), out.size());
  active_isa() == Isa::avx2 ? avx2::weighted_sum(b, coeff, out)
                            : scalar::weighted_sum(b, coeff, out);
}

void weighted_square_sum(const BatchView& b, std::span<const double> coeff,
                         std::span<double> out) {
  check_batch(b, coeff.size(), out.size());
  active_isa() == Isa::avx2 ? avx2::weighted_square_sum(b, coeff, out)
                            : scalar::weighted_square_sum(b, coeff, out);
}

void quadratic_form(const BatchView& b, std::span<const double> cov, std::span<double> out) {
  check_batch(b, cov.size() / (b.members == 0 ? 1 : b.members), out.size());
  if (cov.size() != b.members * b.members) throw DomainError("kernels: covariance shape mismatch");
  active_isa() == Isa::avx2 ? avx2::quadratic_form(b, cov, out)
                            : scalar::quadratic_form(b, cov, out);
}

double max_clearance_above_line(std::span<const double> s, std::span<const double> r,
                                double intercept, double slope) {
  if (s.size() != r.size()) throw DomainError("kernels: clearance inputs differ in size");
  return active_isa() == Isa::avx2 ? avx2::max_clearance_above_line(s, r, intercept, slope)
                                   : scalar::max_clearance_above_line(s, r, intercept, slope);
}

}  // namespace stimfolio::kernels
