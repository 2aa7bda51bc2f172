#ifndef CLMM_ERRORS_HPP
#define CLMM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace clmm {

// Input outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A buy that would drain the Y reserve of the active range.
struct LiquidityExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fee rate below the profitability threshold: the LP should not deposit.
struct NotProfitable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Too few observations, malformed event data or a degenerate regression.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InadmissiblePolicy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace clmm

#endif  // CLMM_ERRORS_HPP
