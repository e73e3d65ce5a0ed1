#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "etr/eval.hpp"
#include "etr/syntax.hpp"
#include "etr/typecheck.hpp"

namespace etr {

// Thrown when a symbolic object refers to a variable the runtime environment
// does not bind, or projects a component of a non-pair value.
struct UnresolvableObject : std::runtime_error {
    explicit UnresolvableObject(const std::string& what)
        : std::runtime_error(what) {}
};

// For each existential variable issued at an application, every receiver
// value observed there. A variable accumulates several witnesses when its
// application node runs more than once.
using WitnessMap = std::map<std::string, std::vector<ValueRef>>;

// Types values and decides the satisfaction relation between runtime
// environments and propositions.
class ValueTyping {
  public:
    ValueTyping(std::map<std::string, TypeRef> property_types, WitnessMap witnesses);

    // The value's principal type. Closures are typed by re-checking their
    // lambda under an environment typing every captured value; if that fails
    // the closure is conservatively given Top. Memoized.
    TypeRef type_of_value(const ValueRef& v);

    // Whether the value inhabits the type. An existential variable is
    // inhabited exactly by the witnesses recorded for it.
    bool value_has_type(const ValueRef& v, const TypeRef& type);

    // The satisfaction relation. Throws UnresolvableObject when an atom's
    // object cannot be resolved (both arms of a disjunction must fail for it
    // to escape).
    bool satisfies(const RuntimeEnvRef& env, const PropRef& prop);

    // Pointwise satisfaction of every proposition in the environment.
    bool satisfies_env(const RuntimeEnvRef& env, const TypeEnv& type_env);

    // Looks the object up in the environment, applying projections innermost
    // first. Throws UnresolvableObject.
    ValueRef resolve_object(const RuntimeEnvRef& env, const SymObject& object);

    // Side-condition reports (conjunctions whose arms share type variables).
    const std::vector<std::string>& warnings() const { return warnings_; }

  private:
    std::map<std::string, TypeRef> property_types_;
    WitnessMap witnesses_;
    // Keyed by the owning pointer so a memoized value's address can never be
    // reused by a later allocation.
    std::map<ValueRef, TypeRef> memo_;
    std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// Whole-program soundness checking
// ---------------------------------------------------------------------------

struct SoundnessOptions {
    std::uint64_t fuel = 1'000'000;
    CheckOptions check;
};

// The observable facts a well-typed run is required to exhibit.
struct ProgramVerdict {
    bool well_typed = false;
    bool ran = false;             // produced a value
    bool fuel_exhausted = false;  // stopped by fuel; no claims checked
    bool stuck = false;           // stuck on a non-fuel error despite checking
    bool value_type_ok = true;    // v inhabits the checked type
    bool props_ok = true;         // the branch-appropriate proposition holds
    bool object_ok = true;        // non-null object resolves to v
    std::string note;
    ValueRef value;
    std::vector<std::string> warnings;

    bool violated() const {
        return stuck || !value_type_ok || !props_ok || !object_ok;
    }
};

ProgramVerdict check_soundness(const ExprRef& program,
                               const SoundnessOptions& options = {});

struct SoundnessReport {
    std::uint64_t programs_run = 0;
    std::uint64_t value_type_violations = 0;
    std::uint64_t proposition_violations = 0;
    std::uint64_t object_violations = 0;
    std::uint64_t stuck_well_typed = 0;
    std::uint64_t fuel_exhausted = 0;
    std::vector<std::string> notes;  // capped per-violation details

    bool clean() const {
        return value_type_violations == 0 && proposition_violations == 0 &&
               object_violations == 0 && stuck_well_typed == 0;
    }
};

// Deterministic program generator: the same seed and size always produce the
// same program. Candidates are retried against the checker a bounded number
// of times, so the result is well typed except for pathological seeds, which
// fall back to a literal.
ExprRef generate_program(std::uint64_t seed, int size);

// Generates `count` programs and checks every soundness clause on each run.
SoundnessReport run_fuzz(std::uint64_t count, int size, std::uint64_t seed,
                         std::uint64_t fuel = 1'000'000);

}  // namespace etr
