#pragma once
// Error taxonomy shared by the library and the CLI exit-code mapping.

#include <stdexcept>
#include <string>

namespace mecsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: malformed files, dangling references, out-of-range parameters. CLI exit 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Well-formed input with no feasible answer (quota unreachable, capacity exceeded,
// unschedulable subtask). CLI exit 2.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Instance too large for the exact solver; callers should switch to the heuristic.
class SizeLimitError : public Error {
public:
    using Error::Error;
};

} // namespace mecsim
