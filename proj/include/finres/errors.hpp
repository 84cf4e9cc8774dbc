#pragma once

#include <stdexcept>
#include <string>

namespace finres {

// argument outside the physical domain of an operation
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// configuration document or key validation failure
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// quadrature non-convergence, step-size underflow, fit failure
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace finres
