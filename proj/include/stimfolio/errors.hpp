#pragma once

#include <stdexcept>
#include <string>

namespace stimfolio {

/// Precondition or input-domain violation (bad physical value, wrong size).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to converge or produced an inconsistent state.
/// Carries the identifiers of the unit of work that failed.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::string design_id = {},
                 std::string realization_id = {})
      : std::runtime_error(decorate(what, design_id, realization_id)),
        design_id_(std::move(design_id)),
        realization_id_(std::move(realization_id)) {}

  const std::string& design_id() const noexcept { return design_id_; }
  const std::string& realization_id() const noexcept { return realization_id_; }

 private:
  static std::string decorate(const std::string& what, const std::string& d,
                              const std::string& r) {
    if (d.empty() && r.empty()) return what;
    return what + " [design=" + d + ", realization=" + r + "]";
  }

  std::string design_id_;
  std::string realization_id_;
};

/// Not enough candidates to perform a selection or tangency construction.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stimfolio
