#pragma once

#include "etr/syntax.hpp"

// Subtyping over types, objects, and full results. Mutually recursive with
// the logic module: function subtyping compares result propositions through
// entailment, and entailment's refinement metafunctions call back into
// subtyping.

namespace etr {

bool subtype(const TypeEnv& env, const TypeRef& sub, const TypeRef& sup);

// Object subsumption: everything is below the null object; otherwise exact.
bool subobject(const SymObject& a, const SymObject& b);

bool subresult(const TypeEnv& env, const ResultRef& a, const ResultRef& b);

}  // namespace etr
