#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "etr/syntax.hpp"

// The proposition logic: environment normalization, entailment, and the
// update/restrict/remove metafunctions over types. Entailment is sound but
// deliberately incomplete; it only derives what the declarative proof rules
// can.

namespace etr {

enum class Polarity { Positive, Negative };

// Raised by update_type when a non-empty path reaches a type that has no
// pair structure to descend into.
struct PathMismatch : std::runtime_error {
    explicit PathMismatch(const std::string& message)
        : std::runtime_error(message) {}
};

// The algorithmic form of the proposition environment: per-object positive
// and negative fact sets (insertion-ordered), object aliasing, and an absurd
// flag set when the facts are contradictory.
struct NormalizedEnv {
    std::map<SymObject, std::vector<TypeRef>> positive;
    std::map<SymObject, std::vector<TypeRef>> negative;
    std::map<SymObject, SymObject> parent;
    bool absurd = false;

    SymObject find(const SymObject& o) const;
    bool aliased(const SymObject& a, const SymObject& b) const;
    const std::vector<TypeRef>* positive_facts(const SymObject& o) const;
    const std::vector<TypeRef>* negative_facts(const SymObject& o) const;
};

NormalizedEnv normalize(const TypeEnv& env);

// Entailment of a proposition from the environment.
bool proves(const TypeEnv& env, const PropRef& goal);
bool proves_normalized(const NormalizedEnv& normalized, const TypeEnv& env,
                       const PropRef& goal);

// The left-to-right restrict-fold of an object's positive facts; null when
// the environment knows nothing about the object. An absurd environment
// yields bottom for every object.
TypeRef lookup_object_type(const NormalizedEnv& normalized, const TypeEnv& env,
                           const SymObject& o);

// Path-directed refinement of a subject type by evidence learned about one
// of its fields (empty path refines the subject itself). The path is stored
// outermost-first; descent consumes it from the back.
TypeRef update_type(const TypeEnv& env, const TypeRef& subject,
                    const std::vector<PathElem>& path, const TypeRef& evidence,
                    Polarity polarity);

TypeRef restrict_type(const TypeEnv& env, const TypeRef& t, const TypeRef& s);
TypeRef remove_type(const TypeEnv& env, const TypeRef& t, const TypeRef& s);

// Conservative intersection test: false only when no value can inhabit both
// types.
bool overlap(const TypeEnv& env, const TypeRef& t, const TypeRef& s);

// Structural emptiness check (false only for types that provably have no
// values).
bool inhabited(const TypeRef& t);

// True for the empty union and unions of bottom-like members: the types the
// proof system recognizes as bottom.
bool is_bottom_like(const TypeRef& t);

}  // namespace etr
