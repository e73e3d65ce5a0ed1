#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "etr/syntax.hpp"

namespace etr {

// The ways a program can fail to produce a value. Fuel exhaustion is kept
// separate from genuine stuck states by callers that care (a well-typed
// program may legitimately run out of fuel, but must never get stuck).
enum class StuckKind {
    UnboundVariable,
    ApplyNonFunction,
    DeltaDomain,
    ProjectionNonPair,
    MissingProperty,
    Fuel,
};

// Stable machine-readable name ("apply-non-function", "fuel", ...).
const char* stuck_kind_name(StuckKind kind);

struct StuckError {
    StuckKind kind;
    std::string message;
    SourceLoc loc;
};

struct EvalOptions {
    std::uint64_t fuel = 1'000'000;
    // Invoked at every application node right before the operator is applied,
    // with the node's id and the operand value. Used to capture existential
    // witnesses.
    std::function<void(std::uint32_t app_node_id, const ValueRef& argument)> on_apply;
};

struct EvalOutcome {
    ValueRef value;  // non-null on success
    std::optional<StuckError> stuck;

    bool ok() const { return value != nullptr; }
    bool out_of_fuel() const { return stuck && stuck->kind == StuckKind::Fuel; }
};

// Big-step evaluation of a resolved expression (binders renamed, node ids
// assigned). Evaluating an unresolved tree is permitted but witness capture
// and structure identity then key off zero ids.
EvalOutcome evaluate(const ExprRef& resolved, const EvalOptions& options = {});
EvalOutcome evaluate(const RuntimeEnvRef& env, const ExprRef& resolved,
                     const EvalOptions& options = {});

// The primitive operations. Throws StuckError on domain violations.
ValueRef apply_prim(PrimOp op, const ValueRef& arg);

// The structure-related operations (constructor, predicates, accessors).
// Precondition: op_value is one of the five operation values. Throws
// StuckError when the accessor rules do not apply.
ValueRef apply_struct_op(const ValueRef& op_value, const ValueRef& arg);

}  // namespace etr
