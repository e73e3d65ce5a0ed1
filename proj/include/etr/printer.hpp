#pragma once

#include <string>

#include "etr/syntax.hpp"

// Pretty-printer for every syntax sort. Expression/type/proposition output
// uses the surface grammar and re-parses to an alpha-equivalent node; values
// without a surface form (struct instances and the struct-related operation
// values) print as non-reparseable #<...> descriptions.

namespace etr {

std::string print(const ExprRef& e);
std::string print(const TypeRef& t);
std::string print(const ResultRef& r);
std::string print(const PropRef& p);
std::string print(const SymObject& o);
std::string print_value(const ValueRef& v);

}  // namespace etr
