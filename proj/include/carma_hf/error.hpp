#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carma_hf {

enum class ErrorCode {
  // model validation
  bad_orders,
  bad_normalization,
  nonpositive_sigma2,
  unstable_ar,
  common_zeros,
  // numerics
  non_convergence,
  out_of_range,
  not_psd,
  root_pairing_failure,
  omega_too_close_to_zero,
  unsupported_d,
  series_too_short,
  truncation_unreachable,
  invalid_argument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::bad_orders: return "bad_orders";
    case ErrorCode::bad_normalization: return "bad_normalization";
    case ErrorCode::nonpositive_sigma2: return "nonpositive_sigma2";
    case ErrorCode::unstable_ar: return "unstable_ar";
    case ErrorCode::common_zeros: return "common_zeros";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::not_psd: return "not_psd";
    case ErrorCode::root_pairing_failure: return "root_pairing_failure";
    case ErrorCode::omega_too_close_to_zero: return "omega_too_close_to_zero";
    case ErrorCode::unsupported_d: return "unsupported_d";
    case ErrorCode::series_too_short: return "series_too_short";
    case ErrorCode::truncation_unreachable: return "truncation_unreachable";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

/// True for the codes that signal a model violating the CARMA assumptions
/// (as opposed to a numerical failure further down the pipeline).
constexpr bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::bad_orders:
    case ErrorCode::bad_normalization:
    case ErrorCode::nonpositive_sigma2:
    case ErrorCode::unstable_ar:
    case ErrorCode::common_zeros:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace carma_hf
