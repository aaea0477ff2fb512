#ifndef TAILSERIES_ERRORS_HPP
#define TAILSERIES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tailseries {

// Stable error codes; the CLI maps parse_error to exit 1 and everything
// else raised during analysis to exit 2.
enum class errc {
    invalid_parameter,
    invalid_spectral_measure,
    out_of_domain,
    balancing_undefined,
    cannot_center,
    incompatible_measures,
    must_normalize_first,
    boundary_tie,
    convergence_condition_failed,
    sre_noncontractive,
    noncontractive_chain,
    refuse_to_sample,
    degenerate_sample,
    grid_too_deep,
    incomparable,
    unsupported,
    parse_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::invalid_parameter: return "invalid-parameter";
        case errc::invalid_spectral_measure: return "invalid-spectral-measure";
        case errc::out_of_domain: return "out-of-domain";
        case errc::balancing_undefined: return "balancing-undefined";
        case errc::cannot_center: return "cannot-center";
        case errc::incompatible_measures: return "incompatible-measures";
        case errc::must_normalize_first: return "must-normalize-first";
        case errc::boundary_tie: return "boundary-tie";
        case errc::convergence_condition_failed: return "convergence-condition-failed";
        case errc::sre_noncontractive: return "sre-noncontractive";
        case errc::noncontractive_chain: return "noncontractive-chain";
        case errc::refuse_to_sample: return "refuse-to-sample";
        case errc::degenerate_sample: return "degenerate-sample";
        case errc::grid_too_deep: return "grid-too-deep";
        case errc::incomparable: return "incomparable";
        case errc::unsupported: return "unsupported";
        case errc::parse_error: return "parse-error";
    }
    return "unknown";
}

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace tailseries

#endif  // TAILSERIES_ERRORS_HPP
