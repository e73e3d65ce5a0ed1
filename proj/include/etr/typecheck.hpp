#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "etr/syntax.hpp"

namespace etr {

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

enum class ErrorCode {
    TypeMismatch,
    UnboundVariable,
    NotAFunction,
    PropertyRedeclared,
    SelfOutsideProperty,
    NonPairProjection,
    FreeVariable,
};

// Stable machine-readable name ("type-mismatch", "unbound-variable", ...).
const char* error_code_name(ErrorCode code);

struct Diagnostic {
    ErrorCode code;
    std::string message;
    SourceLoc loc;
    // Populated for TypeMismatch; null otherwise.
    TypeRef expected;
    TypeRef actual;
    // Populated for PropertyRedeclared.
    std::string label;
};

// Thrown by Checker::check when the expression is ill-typed.
struct CheckError {
    Diagnostic diagnostic;
};

// ---------------------------------------------------------------------------
// Name resolution
// ---------------------------------------------------------------------------
//
// Checking and evaluation both run on a resolved tree:
//   - every node gets a unique id (pre-order, starting from the resolver's
//     counter); let-struct node ids double as structure stamps,
//   - every term binder is renamed to a reserved unique name ("x%7"), with
//     references rewritten accordingly, so shadowing cannot confuse the
//     proposition machinery,
//   - structure names used in annotations are replaced by the stamped
//     structure type of the declaration they refer to; names that resolve to
//     nothing are left alone for the checker to diagnose.
// Resolution itself never fails.

class Resolver {
  public:
    Resolver() = default;

    ExprRef resolve(const ExprRef& expr);

  private:
    std::uint32_t next_id_ = 1;
    int next_rename_ = 0;

    friend class Checker;
};

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

struct CheckOptions {
    // Reject a let-struct-property whose label was declared before anywhere
    // in the same session. Disabled only by tests that need to reproduce the
    // unsoundness this rule exists to prevent.
    bool enforce_label_freshness = true;
    // Record the typing environment at every expression node (keyed by node
    // id). Used by tests that compare static environments against runtime
    // environments.
    bool record_node_envs = false;
};

class Checker {
  public:
    explicit Checker(CheckOptions options = {});

    // Resolves `expr` and checks it under `env`. Throws CheckError on the
    // first type error. The resolved tree is available afterwards via
    // last_resolved(); evaluation must run on that tree so that node ids and
    // structure stamps agree with the instantiation records.
    TypeResult check(const TypeEnv& env, const ExprRef& expr);

    const ExprRef& last_resolved() const { return last_resolved_; }

    // Existential variables issued at applications, in issue order.
    const std::vector<std::string>& issued_vars() const { return issued_; }

    // Application node id -> existential variable instantiated there.
    const std::map<std::uint32_t, std::string>& app_instantiations() const {
        return app_instantiations_;
    }

    // Every property label declared in this session with its value type.
    const std::map<std::string, TypeRef>& property_types() const {
        return property_types_;
    }

    // Node id -> typing environment (only when record_node_envs is set).
    const std::map<std::uint32_t, TypeEnv>& node_envs() const {
        return node_envs_;
    }

  private:
    TypeResult check_node(const TypeEnv& env, const ExprRef& e);

    TypeResult check_var(const TypeEnv& env, const VarExpr& v, const ExprRef& e);
    TypeResult check_lambda(const TypeEnv& env, const LambdaExpr& fn, const ExprRef& e);
    TypeResult check_app(const TypeEnv& env, const AppExpr& app, const ExprRef& e);
    TypeResult check_if(const TypeEnv& env, const IfExpr& branch, const ExprRef& e);
    TypeResult check_let(const TypeEnv& env, const LetExpr& let, const ExprRef& e);
    TypeResult check_cons(const TypeEnv& env, const ConsExpr& cons, const ExprRef& e);
    TypeResult check_proj(const TypeEnv& env, const ProjExpr& proj, const ExprRef& e);
    TypeResult check_let_struct(const TypeEnv& env, const LetStructExpr& decl, const ExprRef& e);
    TypeResult check_let_struct_property(const TypeEnv& env, const LetStructPropExpr& decl,
                                         const ExprRef& e);

    void validate_annotation(const TypeRef& type, SourceLoc loc, bool allow_self);

    CheckOptions options_;
    Resolver resolver_;
    FreshNames supply_;
    std::set<std::string> declared_labels_;
    std::map<std::string, TypeRef> property_types_;
    std::vector<std::string> issued_;
    std::map<std::uint32_t, std::string> app_instantiations_;
    std::map<std::uint32_t, TypeEnv> node_envs_;
    ExprRef last_resolved_;
};

struct CheckOutcome {
    // Engaged iff the program is well typed.
    std::optional<TypeResult> result;
    // Existential variables issued at applications, in issue order.
    std::vector<std::string> fresh_vars;
    std::vector<Diagnostic> diagnostics;
    // The resolved tree (produced even when checking fails, so that callers
    // who insist on running an ill-typed program can still evaluate it).
    ExprRef resolved;
    std::map<std::uint32_t, std::string> app_instantiations;
    std::map<std::string, TypeRef> property_types;
    std::map<std::uint32_t, TypeEnv> node_envs;

    bool ok() const { return result.has_value(); }
};

// Checks a closed program under the empty environment. Free variables are
// reported as diagnostics rather than exceptions.
CheckOutcome check_program(const ExprRef& program, const CheckOptions& options = {});

// ---------------------------------------------------------------------------
// Operation types
// ---------------------------------------------------------------------------

// Type of a primitive operation.
TypeRef prim_op_type(PrimOp op);

// Type of a structure-related operation value (constructor, predicate,
// accessor, property predicate, property accessor). Precondition: the value
// is one of those five.
TypeRef struct_op_type(const ValueRef& op_value);

// The type result substitution R[param -> arg_object]. When arg_object is
// null there is nothing to reference the argument by, so the result is
// weakened instead: atomic propositions mentioning the parameter become
// trivial and objects rooted at it become null. arg_type records the static
// type of the argument.
ResultRef subst_result(const ResultRef& result, const std::string& param,
                       const SymObject& arg_object, const TypeRef& arg_type);

}  // namespace etr
