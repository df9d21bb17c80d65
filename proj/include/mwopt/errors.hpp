#ifndef MWOPT_ERRORS_HPP
#define MWOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mwopt {

// Base class for everything thrown by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad indices, mismatched spaces, unknown mode labels.
struct dimension_error : error {
    using error::error;
};

// Invalid user-supplied configuration (CLI exit code 2).
struct validation_error : error {
    using error::error;
};

// A truncated basis cannot hold the requested state within budget
// (CLI exit code 3).
struct truncation_error : error {
    using error::error;
};

// Time evolution lost norm or ran out of basis (CLI exit code 3).
struct propagation_error : error {
    using error::error;
};

// A protocol precondition such as |Lambda*eta|^2 = pi is violated
// (CLI exit code 4).
struct constraint_error : error {
    using error::error;
};

}  // namespace mwopt

#endif
