#include "etr/typecheck.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "etr/logic.hpp"
#include "etr/printer.hpp"
#include "etr/subtyping.hpp"

namespace etr {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::TypeMismatch: return "type-mismatch";
        case ErrorCode::UnboundVariable: return "unbound-variable";
        case ErrorCode::NotAFunction: return "not-a-function";
        case ErrorCode::PropertyRedeclared: return "property-redeclared";
        case ErrorCode::SelfOutsideProperty: return "self-outside-property";
        case ErrorCode::NonPairProjection: return "non-pair-projection";
        case ErrorCode::FreeVariable: return "free-variable";
    }
    return "unknown";
}

namespace {

// Binder renaming appends "%<n>"; strip that for user-facing messages.
std::string display_name(const std::string& name) {
    auto cut = name.find('%');
    return cut == std::string::npos ? name : name.substr(0, cut);
}

ExprRef mk_node(ExprNode node, SourceLoc loc, std::uint32_t id) {
    return std::make_shared<const Expr>(Expr{std::move(node), loc, id});
}

[[noreturn]] void fail(ErrorCode code, std::string message, SourceLoc loc,
                       TypeRef expected = nullptr, TypeRef actual = nullptr,
                       std::string label = std::string()) {
    throw CheckError{Diagnostic{code, std::move(message), loc,
                                std::move(expected), std::move(actual),
                                std::move(label)}};
}

bool mentions(const SymObject& o, const std::string& name) {
    return o.non_null() && o.base == name;
}

// Conjunction and disjunction with the obvious unit/absorption collapses.
// These only discard logically redundant structure.
PropRef conj(PropRef left, PropRef right) {
    if (std::holds_alternative<TrivialProp>(left->node)) return right;
    if (std::holds_alternative<TrivialProp>(right->node)) return left;
    if (std::holds_alternative<AbsurdProp>(left->node)) return left;
    if (std::holds_alternative<AbsurdProp>(right->node)) return right;
    if (alpha_equal(left, right)) return left;
    return p_and(std::move(left), std::move(right));
}

PropRef disj(PropRef left, PropRef right) {
    if (std::holds_alternative<TrivialProp>(left->node)) return left;
    if (std::holds_alternative<TrivialProp>(right->node)) return right;
    if (std::holds_alternative<AbsurdProp>(left->node)) return right;
    if (std::holds_alternative<AbsurdProp>(right->node)) return left;
    if (alpha_equal(left, right)) return left;
    return p_or(std::move(left), std::move(right));
}

// ---------------------------------------------------------------------------
// Parameter erasure: R[param -> null]
// ---------------------------------------------------------------------------

TypeRef erase_param_type(const TypeRef& t, const std::string& param);
ResultRef erase_param_result(const ResultRef& r, const std::string& param);

PropRef erase_param_prop(const PropRef& p, const std::string& param) {
    return std::visit(
        match{
            [&](const TrivialProp&) { return p; },
            [&](const AbsurdProp&) { return p; },
            [&](const TypeOfProp& a) {
                if (mentions(a.object, param)) return p_tt();
                return p_is(a.object, erase_param_type(a.type, param));
            },
            [&](const NotTypeOfProp& a) {
                if (mentions(a.object, param)) return p_tt();
                return p_not(a.object, erase_param_type(a.type, param));
            },
            [&](const AndProp& a) {
                return conj(erase_param_prop(a.left, param),
                            erase_param_prop(a.right, param));
            },
            [&](const OrProp& a) {
                return disj(erase_param_prop(a.left, param),
                            erase_param_prop(a.right, param));
            },
            [&](const AliasProp& a) {
                if (mentions(a.left, param) || mentions(a.right, param)) return p_tt();
                return p;
            },
        },
        p->node);
}

TypeRef erase_param_type(const TypeRef& t, const std::string& param) {
    return std::visit(
        match{
            [&](const PairType& p) {
                return t_pair(erase_param_type(p.first, param),
                              erase_param_type(p.second, param));
            },
            [&](const UnionType& u) {
                std::vector<TypeRef> members;
                members.reserve(u.members.size());
                for (const auto& m : u.members)
                    members.push_back(erase_param_type(m, param));
                return t_union(std::move(members));
            },
            [&](const PropDescType& d) {
                return t_prop_desc(erase_param_type(d.value, param));
            },
            [&](const ArrowType& f) {
                TypeRef domain = erase_param_type(f.domain, param);
                ResultRef result =
                    f.param == param ? f.result : erase_param_result(f.result, param);
                return t_arrow(f.quantifier, f.param, std::move(domain), result);
            },
            [&](const auto&) { return t; },
        },
        t->node);
}

ResultRef erase_param_result(const ResultRef& r, const std::string& param) {
    return mk_result(erase_param_type(r->type, param),
                     erase_param_prop(r->when_true, param),
                     erase_param_prop(r->when_false, param),
                     mentions(r->object, param) ? SymObject::null() : r->object);
}

// ---------------------------------------------------------------------------
// Operation type builders
// ---------------------------------------------------------------------------

TypeRef ctor_type(const TypeRef& struct_type) {
    const auto& st = std::get<StructType>(struct_type->node);
    return t_arrow("", "x", st.field,
                   mk_result(struct_type, p_tt(), p_ff(), SymObject::null()));
}

TypeRef pred_type(const TypeRef& struct_type) {
    SymObject x = SymObject::var("x");
    return t_arrow("", "x", t_top(),
                   mk_result(t_bool(), p_is(x, struct_type), p_not(x, struct_type),
                             SymObject::null()));
}

TypeRef acc_type(const TypeRef& struct_type) {
    const auto& st = std::get<StructType>(struct_type->node);
    return t_arrow("", "x", struct_type,
                   mk_result(st.field, p_tt(), p_tt(), SymObject::null()));
}

TypeRef prop_pred_type(const std::string& property) {
    SymObject x = SymObject::var("x");
    TypeRef has = t_has_prop(property);
    return t_arrow("", "x", t_top(),
                   mk_result(t_bool(), p_is(x, has), p_not(x, has), SymObject::null()));
}

TypeRef prop_acc_type(const std::string& property, const TypeRef& value_type,
                      const std::string& quantifier) {
    SymObject x = SymObject::var("x");
    TypeRef witness = t_tvar(quantifier);
    return t_arrow(quantifier, "x", t_has_prop(property),
                   mk_result(replace_self(value_type, witness), p_is(x, witness),
                             p_tt(), SymObject::null()));
}

// The component type of a pair or of a union of pairs; null otherwise.
TypeRef project_type(const TypeRef& t, PathElem which) {
    if (const auto* p = std::get_if<PairType>(&t->node))
        return which == PathElem::Fst ? p->first : p->second;
    if (const auto* u = std::get_if<UnionType>(&t->node)) {
        std::vector<TypeRef> members;
        members.reserve(u->members.size());
        for (const auto& m : u->members) {
            TypeRef c = project_type(m, which);
            if (!c) return nullptr;
            members.push_back(std::move(c));
        }
        return t_union(std::move(members));
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Name resolution
// ---------------------------------------------------------------------------

struct ResolveState {
    std::uint32_t& next_id;
    int& next_rename;
    std::vector<std::pair<std::string, std::string>> terms;
    std::vector<std::pair<std::string, TypeRef>> structs;

    std::string rename(const std::string& name) {
        return name + "%" + std::to_string(next_rename++);
    }

    std::string lookup_term(const std::string& name) const {
        for (auto it = terms.rbegin(); it != terms.rend(); ++it)
            if (it->first == name) return it->second;
        return name;
    }

    TypeRef lookup_struct(const std::string& name) const {
        for (auto it = structs.rbegin(); it != structs.rend(); ++it)
            if (it->first == name) return it->second;
        return nullptr;
    }

    SymObject walk_object(const SymObject& o, const std::vector<std::string>& params) const {
        if (o.is_null) return o;
        if (std::find(params.begin(), params.end(), o.base) != params.end()) return o;
        SymObject out = o;
        out.base = lookup_term(o.base);
        return out;
    }

    TypeRef walk_type(const TypeRef& t, std::vector<std::string>& tvars,
                      std::vector<std::string>& params) {
        return std::visit(
            match{
                [&](const VarType& v) {
                    if (std::find(tvars.begin(), tvars.end(), v.name) != tvars.end())
                        return t;
                    if (TypeRef s = lookup_struct(v.name)) return s;
                    return t;
                },
                [&](const PairType& p) {
                    return t_pair(walk_type(p.first, tvars, params),
                                  walk_type(p.second, tvars, params));
                },
                [&](const UnionType& u) {
                    std::vector<TypeRef> members;
                    members.reserve(u.members.size());
                    for (const auto& m : u.members)
                        members.push_back(walk_type(m, tvars, params));
                    return t_union(std::move(members));
                },
                [&](const PropDescType& d) {
                    return t_prop_desc(walk_type(d.value, tvars, params));
                },
                [&](const ArrowType& f) {
                    std::size_t tvar_base = tvars.size();
                    std::size_t param_base = params.size();
                    if (!f.quantifier.empty()) tvars.push_back(f.quantifier);
                    TypeRef domain = walk_type(f.domain, tvars, params);
                    params.push_back(f.param);
                    ResultRef result = walk_result(f.result, tvars, params);
                    params.resize(param_base);
                    tvars.resize(tvar_base);
                    return t_arrow(f.quantifier, f.param, std::move(domain), result);
                },
                [&](const auto&) { return t; },
            },
            t->node);
    }

    PropRef walk_prop(const PropRef& p, std::vector<std::string>& tvars,
                      std::vector<std::string>& params) {
        return std::visit(
            match{
                [&](const TypeOfProp& a) {
                    return p_is(walk_object(a.object, params),
                                walk_type(a.type, tvars, params));
                },
                [&](const NotTypeOfProp& a) {
                    return p_not(walk_object(a.object, params),
                                 walk_type(a.type, tvars, params));
                },
                [&](const AndProp& a) {
                    return p_and(walk_prop(a.left, tvars, params),
                                 walk_prop(a.right, tvars, params));
                },
                [&](const OrProp& a) {
                    return p_or(walk_prop(a.left, tvars, params),
                                walk_prop(a.right, tvars, params));
                },
                [&](const AliasProp& a) {
                    return p_alias(walk_object(a.left, params),
                                   walk_object(a.right, params));
                },
                [&](const auto&) { return p; },
            },
            p->node);
    }

    ResultRef walk_result(const ResultRef& r, std::vector<std::string>& tvars,
                          std::vector<std::string>& params) {
        return mk_result(walk_type(r->type, tvars, params),
                         walk_prop(r->when_true, tvars, params),
                         walk_prop(r->when_false, tvars, params),
                         walk_object(r->object, params));
    }

    TypeRef annotation(const TypeRef& t) {
        std::vector<std::string> tvars;
        std::vector<std::string> params;
        return walk_type(t, tvars, params);
    }

    ExprRef walk(const ExprRef& e) {
        std::uint32_t id = next_id++;
        SourceLoc loc = e->loc;
        return std::visit(
            match{
                [&](const NatExpr& n) { return mk_node(n, loc, id); },
                [&](const TrueExpr& n) { return mk_node(n, loc, id); },
                [&](const FalseExpr& n) { return mk_node(n, loc, id); },
                [&](const PrimExpr& n) { return mk_node(n, loc, id); },
                [&](const VarExpr& v) {
                    return mk_node(VarExpr{lookup_term(v.name)}, loc, id);
                },
                [&](const LambdaExpr& fn) {
                    TypeRef ann = annotation(fn.annotation);
                    std::string param = rename(fn.param);
                    terms.emplace_back(fn.param, param);
                    ExprRef body = walk(fn.body);
                    terms.pop_back();
                    return mk_node(LambdaExpr{std::move(param), std::move(ann), std::move(body)},
                                   loc, id);
                },
                [&](const AppExpr& app) {
                    ExprRef fn = walk(app.fn);
                    ExprRef arg = walk(app.arg);
                    return mk_node(AppExpr{std::move(fn), std::move(arg)}, loc, id);
                },
                [&](const IfExpr& branch) {
                    ExprRef test = walk(branch.test);
                    ExprRef then_branch = walk(branch.then_branch);
                    ExprRef else_branch = walk(branch.else_branch);
                    return mk_node(IfExpr{std::move(test), std::move(then_branch),
                                          std::move(else_branch)},
                                   loc, id);
                },
                [&](const LetExpr& let) {
                    ExprRef rhs = walk(let.rhs);
                    std::string name = rename(let.name);
                    terms.emplace_back(let.name, name);
                    ExprRef body = walk(let.body);
                    terms.pop_back();
                    return mk_node(LetExpr{std::move(name), std::move(rhs), std::move(body)},
                                   loc, id);
                },
                [&](const ConsExpr& cons) {
                    ExprRef first = walk(cons.first);
                    ExprRef second = walk(cons.second);
                    return mk_node(ConsExpr{std::move(first), std::move(second)}, loc, id);
                },
                [&](const ProjExpr& proj) {
                    return mk_node(ProjExpr{proj.which, walk(proj.target)}, loc, id);
                },
                [&](const LetStructExpr& decl) {
                    TypeRef field = annotation(decl.field_type);
                    std::vector<std::string> labels;
                    labels.reserve(decl.properties.size());
                    for (const auto& binding : decl.properties)
                        labels.push_back(binding.property);
                    TypeRef struct_type =
                        t_struct(decl.struct_name, id, field, std::move(labels));
                    structs.emplace_back(decl.struct_name, struct_type);

                    std::string ctor = rename(decl.ctor_name);
                    std::string pred = rename(decl.pred_name);
                    std::string acc = rename(decl.acc_name);

                    std::size_t base = terms.size();
                    terms.emplace_back(decl.pred_name, pred);
                    terms.emplace_back(decl.acc_name, acc);
                    std::vector<PropertyBinding> properties;
                    properties.reserve(decl.properties.size());
                    for (const auto& binding : decl.properties)
                        properties.push_back({binding.property, walk(binding.value)});
                    terms.resize(base);

                    terms.emplace_back(decl.ctor_name, ctor);
                    terms.emplace_back(decl.pred_name, pred);
                    terms.emplace_back(decl.acc_name, acc);
                    ExprRef body = walk(decl.body);
                    terms.resize(base);
                    structs.pop_back();

                    return mk_node(LetStructExpr{std::move(ctor), std::move(pred),
                                                 std::move(acc), decl.struct_name,
                                                 std::move(field), std::move(properties),
                                                 std::move(body)},
                                   loc, id);
                },
                [&](const LetStructPropExpr& decl) {
                    TypeRef value_type = annotation(decl.value_type);
                    std::string desc = rename(decl.desc_name);
                    std::string pred = rename(decl.pred_name);
                    std::string acc = rename(decl.acc_name);
                    std::size_t base = terms.size();
                    terms.emplace_back(decl.desc_name, desc);
                    terms.emplace_back(decl.pred_name, pred);
                    terms.emplace_back(decl.acc_name, acc);
                    ExprRef body = walk(decl.body);
                    terms.resize(base);
                    return mk_node(LetStructPropExpr{std::move(desc), std::move(pred),
                                                     std::move(acc), decl.property,
                                                     std::move(value_type), std::move(body)},
                                   loc, id);
                },
            },
            e->node);
    }
};

// Pre-order search for the first free variable of the (unresolved) tree.
std::optional<Diagnostic> find_free_variable(const ExprRef& e,
                                             std::vector<std::string>& bound) {
    struct Frame {
        std::vector<std::string>& bound;
        std::size_t base;
        explicit Frame(std::vector<std::string>& b) : bound(b), base(b.size()) {}
        ~Frame() { bound.resize(base); }
    };
    return std::visit(
        match{
            [&](const VarExpr& v) -> std::optional<Diagnostic> {
                if (std::find(bound.begin(), bound.end(), v.name) != bound.end())
                    return std::nullopt;
                return Diagnostic{ErrorCode::FreeVariable,
                                  "free variable '" + display_name(v.name) + "'",
                                  e->loc, nullptr, nullptr, ""};
            },
            [&](const LambdaExpr& fn) {
                Frame frame(bound);
                bound.push_back(fn.param);
                return find_free_variable(fn.body, bound);
            },
            [&](const AppExpr& app) {
                if (auto d = find_free_variable(app.fn, bound)) return d;
                return find_free_variable(app.arg, bound);
            },
            [&](const IfExpr& branch) {
                if (auto d = find_free_variable(branch.test, bound)) return d;
                if (auto d = find_free_variable(branch.then_branch, bound)) return d;
                return find_free_variable(branch.else_branch, bound);
            },
            [&](const LetExpr& let) {
                if (auto d = find_free_variable(let.rhs, bound)) return d;
                Frame frame(bound);
                bound.push_back(let.name);
                return find_free_variable(let.body, bound);
            },
            [&](const ConsExpr& cons) {
                if (auto d = find_free_variable(cons.first, bound)) return d;
                return find_free_variable(cons.second, bound);
            },
            [&](const ProjExpr& proj) { return find_free_variable(proj.target, bound); },
            [&](const LetStructExpr& decl) -> std::optional<Diagnostic> {
                {
                    Frame frame(bound);
                    bound.push_back(decl.pred_name);
                    bound.push_back(decl.acc_name);
                    for (const auto& binding : decl.properties)
                        if (auto d = find_free_variable(binding.value, bound)) return d;
                }
                Frame frame(bound);
                bound.push_back(decl.ctor_name);
                bound.push_back(decl.pred_name);
                bound.push_back(decl.acc_name);
                return find_free_variable(decl.body, bound);
            },
            [&](const LetStructPropExpr& decl) {
                Frame frame(bound);
                bound.push_back(decl.desc_name);
                bound.push_back(decl.pred_name);
                bound.push_back(decl.acc_name);
                return find_free_variable(decl.body, bound);
            },
            [&](const auto&) -> std::optional<Diagnostic> { return std::nullopt; },
        },
        e->node);
}

}  // namespace

ExprRef Resolver::resolve(const ExprRef& expr) {
    ResolveState state{next_id_, next_rename_, {}, {}};
    return state.walk(expr);
}

// ---------------------------------------------------------------------------
// Operation types
// ---------------------------------------------------------------------------

TypeRef prim_op_type(PrimOp op) {
    SymObject x = SymObject::var("x");
    switch (op) {
        case PrimOp::Not:
            return t_arrow("", "x", t_top(),
                           mk_result(t_bool(), p_is(x, t_false()), p_not(x, t_false()),
                                     SymObject::null()));
        case PrimOp::Add1:
            return t_arrow("", "x", t_nat(),
                           mk_result(t_nat(), p_tt(), p_ff(), SymObject::null()));
        case PrimOp::IsNat:
            return t_arrow("", "x", t_top(),
                           mk_result(t_bool(), p_is(x, t_nat()), p_not(x, t_nat()),
                                     SymObject::null()));
        case PrimOp::IsBool:
            return t_arrow("", "x", t_top(),
                           mk_result(t_bool(), p_is(x, t_bool()), p_not(x, t_bool()),
                                     SymObject::null()));
        case PrimOp::IsPair: {
            TypeRef any_pair = t_pair(t_top(), t_top());
            return t_arrow("", "x", t_top(),
                           mk_result(t_bool(), p_is(x, any_pair), p_not(x, any_pair),
                                     SymObject::null()));
        }
    }
    throw std::logic_error("unknown primitive");
}

TypeRef struct_op_type(const ValueRef& op_value) {
    return std::visit(
        match{
            [&](const CtorValue& op) { return ctor_type(op.struct_type); },
            [&](const PredValue& op) { return pred_type(op.struct_type); },
            [&](const AccValue& op) { return acc_type(op.struct_type); },
            [&](const PropPredValue& op) { return prop_pred_type(op.property); },
            [&](const PropAccValue& op) {
                // "%X" is reserved, so it can never capture a quantifier
                // written in the property's value type.
                return prop_acc_type(op.property, op.value_type, "%X");
            },
            [&](const auto&) -> TypeRef {
                throw std::logic_error("not a structure operation value");
            },
        },
        op_value->node);
}

ResultRef subst_result(const ResultRef& result, const std::string& param,
                       const SymObject& arg_object, const TypeRef& arg_type) {
    (void)arg_type;
    if (arg_object.non_null()) return subst_object(result, param, arg_object);
    return erase_param_result(result, param);
}

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

Checker::Checker(CheckOptions options) : options_(std::move(options)) {}

TypeResult Checker::check(const TypeEnv& env, const ExprRef& expr) {
    last_resolved_ = resolver_.resolve(expr);
    return check_node(env, last_resolved_);
}

TypeResult Checker::check_node(const TypeEnv& env, const ExprRef& e) {
    if (options_.record_node_envs) node_envs_.emplace(e->id, env);
    return std::visit(
        match{
            [&](const NatExpr&) {
                return TypeResult{t_nat(), p_tt(), p_ff(), SymObject::null()};
            },
            [&](const TrueExpr&) {
                return TypeResult{t_true(), p_tt(), p_ff(), SymObject::null()};
            },
            [&](const FalseExpr&) {
                return TypeResult{t_false(), p_ff(), p_tt(), SymObject::null()};
            },
            [&](const PrimExpr& prim) {
                return TypeResult{prim_op_type(prim.op), p_tt(), p_ff(), SymObject::null()};
            },
            [&](const VarExpr& v) { return check_var(env, v, e); },
            [&](const LambdaExpr& fn) { return check_lambda(env, fn, e); },
            [&](const AppExpr& app) { return check_app(env, app, e); },
            [&](const IfExpr& branch) { return check_if(env, branch, e); },
            [&](const LetExpr& let) { return check_let(env, let, e); },
            [&](const ConsExpr& cons) { return check_cons(env, cons, e); },
            [&](const ProjExpr& proj) { return check_proj(env, proj, e); },
            [&](const LetStructExpr& decl) { return check_let_struct(env, decl, e); },
            [&](const LetStructPropExpr& decl) {
                return check_let_struct_property(env, decl, e);
            },
        },
        e->node);
}

TypeResult Checker::check_var(const TypeEnv& env, const VarExpr& v, const ExprRef& e) {
    NormalizedEnv norm = normalize(env);
    SymObject obj = SymObject::var(v.name);
    TypeRef type = lookup_object_type(norm, env, obj);
    if (!type)
        fail(ErrorCode::UnboundVariable,
             "unbound variable '" + display_name(v.name) + "'", e->loc);
    return TypeResult{std::move(type), p_not(obj, t_false()), p_is(obj, t_false()), obj};
}

TypeResult Checker::check_lambda(const TypeEnv& env, const LambdaExpr& fn,
                                 const ExprRef& e) {
    validate_annotation(fn.annotation, e->loc, false);
    std::string quantifier = supply_.fresh("X");
    SymObject x = SymObject::var(fn.param);
    TypeEnv body_env = env.with_var(quantifier).with_prop(p_is(x, fn.annotation));
    TypeResult body = check_node(body_env, fn.body);
    TypeRef arrow = t_arrow(std::move(quantifier), fn.param, fn.annotation,
                            mk_result(body.type, body.when_true, body.when_false,
                                      body.object));
    return TypeResult{std::move(arrow), p_tt(), p_ff(), SymObject::null()};
}

TypeResult Checker::check_app(const TypeEnv& env, const AppExpr& app, const ExprRef& e) {
    TypeResult fn = check_node(env, app.fn);
    // The operator has already evaluated to a (non-false) value by the time
    // the operand runs, so its true proposition is in force.
    TypeEnv arg_env = env.with_prop(fn.when_true);
    TypeResult arg = check_node(arg_env, app.arg);

    if (is_bottom_like(fn.type))
        return TypeResult{t_bottom(), p_ff(), p_ff(), SymObject::null()};

    const auto* arrow = std::get_if<ArrowType>(&fn.type->node);
    if (!arrow)
        fail(ErrorCode::NotAFunction,
             "cannot apply a value of type " + print(fn.type), e->loc, nullptr, fn.type);

    bool domain_ok = subtype(arg_env, arg.type, arrow->domain);
    if (!domain_ok && arg.object.non_null())
        domain_ok = proves(arg_env, p_is(arg.object, arrow->domain));
    if (!domain_ok) {
        std::string message = "argument of type " + print(arg.type) +
                              " does not match the domain " + print(arrow->domain);
        const auto* want = std::get_if<StructType>(&arrow->domain->node);
        const auto* have = std::get_if<StructType>(&arg.type->node);
        if (want && have && want->name == have->name && want->stamp != have->stamp)
            message += " (distinct declarations of structure '" + want->name + "')";
        fail(ErrorCode::TypeMismatch, message, e->loc, arrow->domain, arg.type);
    }

    ResultRef result = subst_result(arrow->result, arrow->param, arg.object, arg.type);
    if (!arrow->quantifier.empty() && mentions_tvar(result, arrow->quantifier)) {
        std::string fresh = supply_.fresh("X");
        issued_.push_back(fresh);
        app_instantiations_[e->id] = fresh;
        result = subst_tvar(result, arrow->quantifier, t_tvar(std::move(fresh)));
    }
    return TypeResult{result->type, result->when_true, result->when_false, result->object};
}

TypeResult Checker::check_if(const TypeEnv& env, const IfExpr& branch, const ExprRef& e) {
    (void)e;
    TypeResult test = check_node(env, branch.test);
    TypeResult then_r = check_node(env.with_prop(test.when_true), branch.then_branch);
    TypeResult else_r = check_node(env.with_prop(test.when_false), branch.else_branch);

    TypeRef type;
    if (subtype(env, then_r.type, else_r.type)) type = else_r.type;
    else if (subtype(env, else_r.type, then_r.type)) type = then_r.type;
    else type = t_union({then_r.type, else_r.type});

    SymObject object =
        then_r.object == else_r.object ? then_r.object : SymObject::null();
    return TypeResult{std::move(type), disj(then_r.when_true, else_r.when_true),
                      disj(then_r.when_false, else_r.when_false), std::move(object)};
}

TypeResult Checker::check_let(const TypeEnv& env, const LetExpr& let, const ExprRef& e) {
    (void)e;
    TypeResult rhs = check_node(env, let.rhs);
    SymObject x = SymObject::var(let.name);
    PropRef bound_cases = disj(conj(p_not(x, t_false()), rhs.when_true),
                               conj(p_is(x, t_false()), rhs.when_false));
    TypeEnv body_env = env.with_prop(p_is(x, rhs.type)).with_prop(bound_cases);
    if (rhs.object.non_null()) body_env = body_env.with_prop(p_alias(x, rhs.object));
    TypeResult body = check_node(body_env, let.body);
    ResultRef out = subst_result(
        mk_result(body.type, body.when_true, body.when_false, body.object), let.name,
        rhs.object, rhs.type);
    return TypeResult{out->type, out->when_true, out->when_false, out->object};
}

TypeResult Checker::check_cons(const TypeEnv& env, const ConsExpr& cons, const ExprRef& e) {
    (void)e;
    TypeResult first = check_node(env, cons.first);
    TypeResult second = check_node(env, cons.second);
    return TypeResult{t_pair(first.type, second.type), p_tt(), p_tt(), SymObject::null()};
}

TypeResult Checker::check_proj(const TypeEnv& env, const ProjExpr& proj, const ExprRef& e) {
    TypeResult target = check_node(env, proj.target);
    if (is_bottom_like(target.type))
        return TypeResult{t_bottom(), p_ff(), p_ff(), SymObject::null()};
    TypeRef component = project_type(target.type, proj.which);
    if (!component)
        fail(ErrorCode::NonPairProjection,
             std::string("cannot take the ") +
                 (proj.which == PathElem::Fst ? "first" : "second") +
                 " component of type " + print(target.type),
             e->loc, nullptr, target.type);
    SymObject object = target.object.non_null() ? target.object.extended(proj.which)
                                                : SymObject::null();
    return TypeResult{std::move(component), p_tt(), p_tt(), std::move(object)};
}

TypeResult Checker::check_let_struct(const TypeEnv& env, const LetStructExpr& decl,
                                     const ExprRef& e) {
    validate_annotation(decl.field_type, e->loc, false);

    std::vector<std::string> labels;
    labels.reserve(decl.properties.size());
    for (const auto& binding : decl.properties) {
        if (!env.declares_property(binding.property))
            fail(ErrorCode::UnboundVariable,
                 "undeclared structure property '" + binding.property + "'",
                 binding.value->loc);
        labels.push_back(binding.property);
    }

    TypeRef struct_type = t_struct(decl.struct_name, e->id, decl.field_type, labels);
    TypeRef ctor_t = ctor_type(struct_type);
    TypeRef pred_t = pred_type(struct_type);
    TypeRef acc_t = acc_type(struct_type);

    // Property values may use the predicate and the accessor, but not the
    // constructor; this matches the order the bindings come into existence.
    TypeEnv value_env = env.with_prop(p_is(SymObject::var(decl.pred_name), pred_t))
                            .with_prop(p_is(SymObject::var(decl.acc_name), acc_t));
    for (const auto& binding : decl.properties) {
        TypeRef declared = env.property_table.at(binding.property);
        TypeRef expected = replace_self(declared, struct_type);
        TypeResult value = check_node(value_env, binding.value);
        if (!subtype(env, value.type, expected))
            fail(ErrorCode::TypeMismatch,
                 "value for property '" + binding.property + "' has type " +
                     print(value.type) + ", expected " + print(expected),
                 binding.value->loc, expected, value.type);
    }

    TypeEnv body_env = env.with_prop(p_is(SymObject::var(decl.ctor_name), ctor_t))
                           .with_prop(p_is(SymObject::var(decl.pred_name), pred_t))
                           .with_prop(p_is(SymObject::var(decl.acc_name), acc_t));
    TypeResult body = check_node(body_env, decl.body);

    ResultRef out = mk_result(body.type, body.when_true, body.when_false, body.object);
    out = subst_result(out, decl.ctor_name, SymObject::null(), ctor_t);
    out = subst_result(out, decl.pred_name, SymObject::null(), pred_t);
    out = subst_result(out, decl.acc_name, SymObject::null(), acc_t);
    return TypeResult{out->type, out->when_true, out->when_false, out->object};
}

TypeResult Checker::check_let_struct_property(const TypeEnv& env,
                                              const LetStructPropExpr& decl,
                                              const ExprRef& e) {
    validate_annotation(decl.value_type, e->loc, true);

    if (options_.enforce_label_freshness && declared_labels_.count(decl.property))
        fail(ErrorCode::PropertyRedeclared,
             "structure property '" + decl.property + "' is already declared", e->loc,
             nullptr, nullptr, decl.property);
    declared_labels_.insert(decl.property);
    property_types_[decl.property] = decl.value_type;

    TypeRef desc_t = t_prop_desc(decl.value_type);
    TypeRef pred_t = prop_pred_type(decl.property);
    TypeRef acc_t = prop_acc_type(decl.property, decl.value_type, supply_.fresh("X"));

    TypeEnv body_env =
        env.with_property(decl.property, decl.value_type)
            .with_prop(p_is(SymObject::var(decl.desc_name), desc_t))
            .with_prop(p_is(SymObject::var(decl.pred_name), pred_t))
            .with_prop(p_is(SymObject::var(decl.acc_name), acc_t));
    TypeResult body = check_node(body_env, decl.body);

    ResultRef out = mk_result(body.type, body.when_true, body.when_false, body.object);
    out = subst_result(out, decl.desc_name, SymObject::null(), desc_t);
    out = subst_result(out, decl.pred_name, SymObject::null(), pred_t);
    out = subst_result(out, decl.acc_name, SymObject::null(), acc_t);
    return TypeResult{out->type, out->when_true, out->when_false, out->object};
}

void Checker::validate_annotation(const TypeRef& type, SourceLoc loc, bool allow_self) {
    struct Walk {
        SourceLoc loc;
        std::vector<std::string> bound;

        void type(const TypeRef& t, bool self_ok) {
            std::visit(
                match{
                    [&](const SelfType&) {
                        if (!self_ok)
                            fail(ErrorCode::SelfOutsideProperty,
                                 "Self is only valid inside a structure property's "
                                 "value type",
                                 loc);
                    },
                    [&](const VarType& v) {
                        if (std::find(bound.begin(), bound.end(), v.name) == bound.end())
                            fail(ErrorCode::UnboundVariable,
                                 "unknown type name '" + display_name(v.name) + "'", loc);
                    },
                    [&](const PairType& p) {
                        type(p.first, self_ok);
                        type(p.second, self_ok);
                    },
                    [&](const UnionType& u) {
                        for (const auto& m : u.members) type(m, self_ok);
                    },
                    [&](const PropDescType& d) { type(d.value, true); },
                    [&](const ArrowType& f) {
                        std::size_t base = bound.size();
                        if (!f.quantifier.empty()) bound.push_back(f.quantifier);
                        type(f.domain, self_ok);
                        result(f.result, self_ok);
                        bound.resize(base);
                    },
                    [&](const auto&) {},
                },
                t->node);
        }

        void prop(const PropRef& p, bool self_ok) {
            std::visit(
                match{
                    [&](const TypeOfProp& a) { type(a.type, self_ok); },
                    [&](const NotTypeOfProp& a) { type(a.type, self_ok); },
                    [&](const AndProp& a) {
                        prop(a.left, self_ok);
                        prop(a.right, self_ok);
                    },
                    [&](const OrProp& a) {
                        prop(a.left, self_ok);
                        prop(a.right, self_ok);
                    },
                    [&](const auto&) {},
                },
                p->node);
        }

        void result(const ResultRef& r, bool self_ok) {
            type(r->type, self_ok);
            prop(r->when_true, self_ok);
            prop(r->when_false, self_ok);
        }
    };
    Walk walk{loc, {}};
    walk.type(type, allow_self);
}

CheckOutcome check_program(const ExprRef& program, const CheckOptions& options) {
    CheckOutcome out;

    std::vector<std::string> bound;
    if (auto free = find_free_variable(program, bound)) {
        out.diagnostics.push_back(*free);
        Resolver resolver;
        out.resolved = resolver.resolve(program);
        return out;
    }

    Checker checker(options);
    try {
        out.result = checker.check(TypeEnv{}, program);
    } catch (const CheckError& err) {
        out.diagnostics.push_back(err.diagnostic);
    }
    out.resolved = checker.last_resolved();
    out.fresh_vars = checker.issued_vars();
    out.app_instantiations = checker.app_instantiations();
    out.property_types = checker.property_types();
    out.node_envs = checker.node_envs();
    return out;
}

}  // namespace etr
