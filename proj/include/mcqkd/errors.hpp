#pragma once

#include <stdexcept>

namespace mcqkd {

// Bad argument values (out of range, wrong length, non-finite).
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a formula, e.g. an unphysical eigenvalue.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Inputs valid in isolation but outside the asymptotic regime the formulas assume.
struct regime_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invariant broken inside a computation; indicates a bug or an inconsistent model.
struct consistency_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Operation not meaningful for the current object state (e.g. empty selection).
struct state_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Measured or supplied statistics that cannot come from a Gaussian model.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incomplete or contradictory configuration.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require(bool ok, const char* what)
{
    if (!ok) throw parameter_error(what);
}

} // namespace detail

} // namespace mcqkd
