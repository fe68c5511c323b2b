// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cspt {

enum class ErrorCode {
    SyntaxError,
    SemanticError,
    EmptyRelation,
    BadEntry,
    ShapeMismatch,
    BadPosition,
    NotBoolean,
    BadProbability,
    TooFewVariables,
    TooMany,
    TooLarge,
    BudgetExceeded,
    NoThreshold,
    Inconclusive,
    IoError,
    UsageError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status and a one-line diagnostic.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace cspt
