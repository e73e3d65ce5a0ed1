#include "etr/eval.hpp"

#include <algorithm>
#include <utility>

#include "etr/printer.hpp"

namespace etr {

const char* stuck_kind_name(StuckKind kind) {
    switch (kind) {
        case StuckKind::UnboundVariable: return "unbound-variable";
        case StuckKind::ApplyNonFunction: return "apply-non-function";
        case StuckKind::DeltaDomain: return "delta-domain";
        case StuckKind::ProjectionNonPair: return "projection-non-pair";
        case StuckKind::MissingProperty: return "missing-property";
        case StuckKind::Fuel: return "fuel";
    }
    return "unknown";
}

namespace {

[[noreturn]] void stuck(StuckKind kind, std::string message, SourceLoc loc = {}) {
    throw StuckError{kind, std::move(message), loc};
}

bool is_false(const ValueRef& v) {
    return std::holds_alternative<FalseValue>(v->node);
}

const StructInstanceValue* as_instance(const ValueRef& v) {
    return std::get_if<StructInstanceValue>(&v->node);
}

bool instance_carries(const StructInstanceValue& instance, const std::string& property) {
    return std::any_of(instance.properties.begin(), instance.properties.end(),
                       [&](const auto& entry) { return entry.first == property; });
}

struct Interpreter {
    const EvalOptions& options;
    std::uint64_t remaining;

    ValueRef eval(const RuntimeEnvRef& env, const ExprRef& e) {
        if (remaining == 0)
            stuck(StuckKind::Fuel, "evaluation fuel exhausted", e->loc);
        --remaining;
        return std::visit(
            match{
                [&](const NatExpr& n) { return v_nat(n.value); },
                [&](const TrueExpr&) { return v_true(); },
                [&](const FalseExpr&) { return v_false(); },
                [&](const PrimExpr& prim) { return v_prim(prim.op); },
                [&](const VarExpr& v) {
                    const ValueRef* bound = env->lookup(v.name);
                    if (!bound)
                        stuck(StuckKind::UnboundVariable,
                              "unbound variable '" + v.name + "'", e->loc);
                    return *bound;
                },
                [&](const LambdaExpr&) { return v_closure(env, e); },
                [&](const AppExpr& app) {
                    ValueRef fn = eval(env, app.fn);
                    ValueRef arg = eval(env, app.arg);
                    if (options.on_apply) options.on_apply(e->id, arg);
                    return apply(fn, arg, e->loc);
                },
                [&](const IfExpr& branch) {
                    ValueRef test = eval(env, branch.test);
                    return eval(env, is_false(test) ? branch.else_branch
                                                    : branch.then_branch);
                },
                [&](const LetExpr& let) {
                    ValueRef rhs = eval(env, let.rhs);
                    return eval(env->extended(let.name, std::move(rhs)), let.body);
                },
                [&](const ConsExpr& cons) {
                    ValueRef first = eval(env, cons.first);
                    ValueRef second = eval(env, cons.second);
                    return v_pair(std::move(first), std::move(second));
                },
                [&](const ProjExpr& proj) {
                    ValueRef target = eval(env, proj.target);
                    const auto* pair = std::get_if<PairValue>(&target->node);
                    if (!pair)
                        stuck(StuckKind::ProjectionNonPair,
                              "cannot project a component of " + print_value(target),
                              e->loc);
                    return proj.which == PathElem::Fst ? pair->first : pair->second;
                },
                [&](const LetStructExpr& decl) {
                    std::vector<std::string> labels;
                    labels.reserve(decl.properties.size());
                    for (const auto& binding : decl.properties)
                        labels.push_back(binding.property);
                    TypeRef struct_type =
                        t_struct(decl.struct_name, e->id, decl.field_type, labels);

                    ValueRef pred = v_pred(struct_type);
                    ValueRef acc = v_acc(struct_type);

                    // Property values may call the predicate and the accessor
                    // (typically inside method bodies), but not the
                    // constructor.
                    RuntimeEnvRef value_env = env->extended(decl.pred_name, pred);
                    value_env = value_env->extended(decl.acc_name, acc);
                    std::vector<std::pair<std::string, ValueRef>> properties;
                    properties.reserve(decl.properties.size());
                    for (const auto& binding : decl.properties)
                        properties.emplace_back(binding.property,
                                                eval(value_env, binding.value));

                    ValueRef ctor = v_ctor(struct_type, std::move(properties));
                    RuntimeEnvRef body_env = env->extended(decl.ctor_name, ctor);
                    body_env = body_env->extended(decl.pred_name, pred);
                    body_env = body_env->extended(decl.acc_name, acc);
                    return eval(body_env, decl.body);
                },
                [&](const LetStructPropExpr& decl) {
                    RuntimeEnvRef body_env =
                        env->extended(decl.desc_name, v_prop_desc(decl.property));
                    body_env = body_env->extended(decl.pred_name,
                                                  v_prop_pred(decl.property));
                    body_env = body_env->extended(
                        decl.acc_name, v_prop_acc(decl.property, decl.value_type));
                    return eval(body_env, decl.body);
                },
            },
            e->node);
    }

    ValueRef apply(const ValueRef& fn, const ValueRef& arg, SourceLoc loc) {
        return std::visit(
            match{
                [&](const ClosureValue& closure) {
                    const auto& lambda = std::get<LambdaExpr>(closure.lambda->node);
                    return eval(closure.env->extended(lambda.param, arg), lambda.body);
                },
                [&](const PrimValue& prim) {
                    try {
                        return apply_prim(prim.op, arg);
                    } catch (StuckError& err) {
                        if (!err.loc.known()) err.loc = loc;
                        throw;
                    }
                },
                [&](const CtorValue&) { return dispatch_struct_op(fn, arg, loc); },
                [&](const PredValue&) { return dispatch_struct_op(fn, arg, loc); },
                [&](const AccValue&) { return dispatch_struct_op(fn, arg, loc); },
                [&](const PropPredValue&) { return dispatch_struct_op(fn, arg, loc); },
                [&](const PropAccValue&) { return dispatch_struct_op(fn, arg, loc); },
                [&](const auto&) -> ValueRef {
                    stuck(StuckKind::ApplyNonFunction,
                          "cannot apply " + print_value(fn), loc);
                },
            },
            fn->node);
    }

    ValueRef dispatch_struct_op(const ValueRef& fn, const ValueRef& arg, SourceLoc loc) {
        try {
            return apply_struct_op(fn, arg);
        } catch (StuckError& err) {
            if (!err.loc.known()) err.loc = loc;
            throw;
        }
    }
};

}  // namespace

ValueRef apply_prim(PrimOp op, const ValueRef& arg) {
    switch (op) {
        case PrimOp::Not:
            return v_bool(is_false(arg));
        case PrimOp::Add1: {
            const auto* n = std::get_if<NatValue>(&arg->node);
            if (!n)
                stuck(StuckKind::DeltaDomain,
                      "add1 expects a natural number, got " + print_value(arg));
            return v_nat(n->value + 1);
        }
        case PrimOp::IsNat:
            return v_bool(std::holds_alternative<NatValue>(arg->node));
        case PrimOp::IsBool:
            return v_bool(std::holds_alternative<TrueValue>(arg->node) ||
                          std::holds_alternative<FalseValue>(arg->node));
        case PrimOp::IsPair:
            return v_bool(std::holds_alternative<PairValue>(arg->node));
    }
    stuck(StuckKind::DeltaDomain, "unknown primitive");
}

ValueRef apply_struct_op(const ValueRef& op_value, const ValueRef& arg) {
    return std::visit(
        match{
            [&](const CtorValue& op) {
                return v_instance(op.struct_type, arg, op.properties);
            },
            [&](const PredValue& op) {
                const auto* instance = as_instance(arg);
                return v_bool(instance &&
                              alpha_equal(instance->struct_type, op.struct_type));
            },
            [&](const AccValue& op) -> ValueRef {
                const auto* instance = as_instance(arg);
                if (!instance || !alpha_equal(instance->struct_type, op.struct_type))
                    stuck(StuckKind::MissingProperty,
                          "field accessor for " + print(op.struct_type) +
                              " does not apply to " + print_value(arg));
                return instance->field;
            },
            [&](const PropPredValue& op) {
                const auto* instance = as_instance(arg);
                return v_bool(instance && instance_carries(*instance, op.property));
            },
            [&](const PropAccValue& op) -> ValueRef {
                const auto* instance = as_instance(arg);
                if (instance) {
                    for (const auto& entry : instance->properties)
                        if (entry.first == op.property) return entry.second;
                }
                stuck(StuckKind::MissingProperty,
                      print_value(arg) + " has no value for property '" + op.property +
                          "'");
            },
            [&](const auto&) -> ValueRef {
                stuck(StuckKind::ApplyNonFunction,
                      "cannot apply " + print_value(op_value));
            },
        },
        op_value->node);
}

EvalOutcome evaluate(const RuntimeEnvRef& env, const ExprRef& resolved,
                     const EvalOptions& options) {
    Interpreter interp{options, options.fuel};
    EvalOutcome out;
    try {
        out.value = interp.eval(env, resolved);
    } catch (const StuckError& err) {
        out.stuck = err;
    }
    return out;
}

EvalOutcome evaluate(const ExprRef& resolved, const EvalOptions& options) {
    return evaluate(RuntimeEnv::empty(), resolved, options);
}

}  // namespace etr
