#pragma once

#include <stdexcept>
#include <string>

#include "etr/syntax.hpp"

// Surface-syntax reader. Programs are UTF-8 s-expressions; `;` starts a
// comment running to end of line. The `%` character is reserved for
// internally generated names and is rejected in source identifiers.

namespace etr {

struct SyntaxError : std::runtime_error {
    SourceLoc loc;
    SyntaxError(SourceLoc where, const std::string& message)
        : std::runtime_error(message), loc(where) {}
};

// A form had the right head but the wrong number or shape of parts.
struct ArityError : SyntaxError {
    using SyntaxError::SyntaxError;
};

// Parses a whole program: exactly one expression, optionally surrounded by
// whitespace and comments.
ExprRef parse_program(const std::string& source);

// Standalone-entry parsers for the non-expression grammars. Each consumes the
// whole input like parse_program does.
TypeRef parse_type(const std::string& source);
ResultRef parse_result(const std::string& source);
PropRef parse_prop(const std::string& source);
SymObject parse_object(const std::string& source);

}  // namespace etr
