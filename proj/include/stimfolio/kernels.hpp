#pragma once

// Batched inner loops for portfolio evaluation and line-dominance audits.
//
// Every kernel has a scalar reference and an AVX2 variant. Batches are laid out
// component-major: the weight of member i in portfolio k lives at
// weights[i * count + k], so one SIMD lane carries one portfolio and each lane
// performs exactly the scalar operation sequence. Both variants therefore
// produce bit-identical results, which keeps run outputs independent of the
// host's instruction set. Translation units are built with -ffp-contract=off.

#include <cstddef>
#include <span>
#include <string_view>

namespace stimfolio::kernels {

enum class Isa { scalar, avx2 };

/// Instruction set selected at runtime (cpuid), unless overridden.
Isa active_isa() noexcept;
bool isa_available(Isa isa) noexcept;
/// Force a variant; passing the detected default restores automatic selection.
/// Throws if the requested variant is not supported on this host.
void force_isa(Isa isa);
void reset_isa() noexcept;
std::string_view isa_name(Isa isa) noexcept;

struct BatchView {
  std::span<const double> weights;  // members * count, component-major
  std::size_t members = 0;
  std::size_t count = 0;
};

/// out[k] = sum_i w[i][k] * coeff[i]
void weighted_sum(const BatchView& batch, std::span<const double> coeff, std::span<double> out);

/// out[k] = sum_i w[i][k]^2 * coeff[i]   (diagonal quadratic form)
void weighted_square_sum(const BatchView& batch, std::span<const double> coeff,
                         std::span<double> out);

/// out[k] = sum_i sum_j w[i][k] w[j][k] cov[i*members + j]
void quadratic_form(const BatchView& batch, std::span<const double> cov, std::span<double> out);

/// max_k (r[k] - (intercept + slope * s[k])); -inf for empty input.
double max_clearance_above_line(std::span<const double> s, std::span<const double> r,
                                double intercept, double slope);

// Variant entry points, used by the dispatcher and by equivalence tests.
namespace scalar {
void weighted_sum(const BatchView&, std::span<const double>, std::span<double>);
void weighted_square_sum(const BatchView&, std::span<const double>, std::span<double>);
void quadratic_form(const BatchView&, std::span<const double>, std::span<double>);
double max_clearance_above_line(std::span<const double>, std::span<const double>, double, double);
}  // namespace scalar

namespace avx2 {
bool compiled() noexcept;
void weighted_sum(const BatchView&, std::span<const double>, std::span<double>);
void weighted_square_sum(const BatchView&, std::span<const double>, std::span<double>);
void quadratic_form(const BatchView&, std::span<const double>, std::span<double>);
double max_clearance_above_line(std::span<const double>, std::span<const double>, double, double);
}  // namespace avx2

}  // namespace stimfolio::kernels
