#ifndef DFAF_ERRORS_HPP
#define DFAF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dfaf {

/// Argument outside the mathematical domain of a function.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative method (series, continued fraction, quadrature) failed to
/// reach its tolerance.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The closed-form AF path CDF only exists for integer fading shapes.
/// Callers should fall back to af_path_cdf_quadrature.
class closed_form_unavailable : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid scenario, preset, or option combination.
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace dfaf

#endif  // DFAF_ERRORS_HPP
