#include "etr/syntax.hpp"

#include <algorithm>

namespace etr {

const char* prim_op_name(PrimOp op) {
    switch (op) {
        case PrimOp::Not: return "not";
        case PrimOp::Add1: return "add1";
        case PrimOp::IsNat: return "nat?";
        case PrimOp::IsBool: return "bool?";
        case PrimOp::IsPair: return "pair?";
    }
    return "?";
}

std::optional<PrimOp> prim_op_from_name(const std::string& name) {
    if (name == "not") return PrimOp::Not;
    if (name == "add1") return PrimOp::Add1;
    if (name == "nat?") return PrimOp::IsNat;
    if (name == "bool?") return PrimOp::IsBool;
    if (name == "pair?") return PrimOp::IsPair;
    return std::nullopt;
}

SymObject SymObject::extended(PathElem outer) const {
    SymObject out = *this;
    out.path.insert(out.path.begin(), outer);
    return out;
}

// ---------------------------------------------------------------------------
// Runtime environments
// ---------------------------------------------------------------------------

RuntimeEnvRef RuntimeEnv::empty() {
    static const RuntimeEnvRef e = std::make_shared<const RuntimeEnv>();
    return e;
}

RuntimeEnvRef RuntimeEnv::extended(const std::string& name, ValueRef v) const {
    auto out = std::make_shared<RuntimeEnv>(*this);
    out->bindings[name] = std::move(v);
    return out;
}

const ValueRef* RuntimeEnv::lookup(const std::string& name) const {
    auto it = bindings.find(name);
    if (it == bindings.end()) return nullptr;
    return &it->second;
}

TypeEnv TypeEnv::with_prop(PropRef p) const {
    TypeEnv out = *this;
    out.props.push_back(std::move(p));
    return out;
}

TypeEnv TypeEnv::with_property(const std::string& name,
                               TypeRef value_type) const {
    TypeEnv out = *this;
    out.property_table[name] = std::move(value_type);
    return out;
}

TypeEnv TypeEnv::with_var(const std::string& name) const {
    TypeEnv out = *this;
    out.var_store.insert(name);
    return out;
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

namespace {
TypeRef mk_type(TypeNode node) {
    return std::make_shared<const Type>(Type{std::move(node)});
}
PropRef mk_prop(PropNode node) {
    return std::make_shared<const Prop>(Prop{std::move(node)});
}
ExprRef mk_expr(ExprNode node, SourceLoc loc) {
    return std::make_shared<const Expr>(Expr{std::move(node), loc, 0});
}
ValueRef mk_value(ValueNode node) {
    return std::make_shared<const Value>(Value{std::move(node)});
}
}  // namespace

TypeRef t_top() {
    static const TypeRef t = mk_type(TopType{});
    return t;
}
TypeRef t_nat() {
    static const TypeRef t = mk_type(NatType{});
    return t;
}
TypeRef t_true() {
    static const TypeRef t = mk_type(TrueType{});
    return t;
}
TypeRef t_false() {
    static const TypeRef t = mk_type(FalseType{});
    return t;
}
TypeRef t_bool() {
    static const TypeRef t = t_union({t_true(), t_false()});
    return t;
}
TypeRef t_bottom() {
    static const TypeRef t = t_union({});
    return t;
}
TypeRef t_self() {
    static const TypeRef t = mk_type(SelfType{});
    return t;
}
TypeRef t_pair(TypeRef first, TypeRef second) {
    return mk_type(PairType{std::move(first), std::move(second)});
}
TypeRef t_union(std::vector<TypeRef> members) {
    return mk_type(UnionType{std::move(members)});
}
TypeRef t_struct(std::string name, std::uint64_t stamp, TypeRef field,
                 std::vector<std::string> properties) {
    return mk_type(StructType{std::move(name), stamp, std::move(field),
                              std::move(properties)});
}
TypeRef t_prop_desc(TypeRef value) {
    return mk_type(PropDescType{std::move(value)});
}
TypeRef t_has_prop(std::string property) {
    return mk_type(HasPropType{std::move(property)});
}
TypeRef t_tvar(std::string name) {
    return mk_type(VarType{std::move(name)});
}
TypeRef t_arrow(std::string quantifier, std::string param, TypeRef domain,
                ResultRef result) {
    return mk_type(ArrowType{std::move(quantifier), std::move(param),
                             std::move(domain), std::move(result)});
}

ResultRef mk_result(TypeRef type, PropRef when_true, PropRef when_false,
                    SymObject object) {
    return std::make_shared<const TypeResult>(TypeResult{
        std::move(type), std::move(when_true), std::move(when_false),
        std::move(object)});
}

ResultRef plain_result(TypeRef type) {
    return mk_result(std::move(type), p_tt(), p_tt(), SymObject::null());
}

PropRef p_tt() {
    static const PropRef p = mk_prop(TrivialProp{});
    return p;
}
PropRef p_ff() {
    static const PropRef p = mk_prop(AbsurdProp{});
    return p;
}
PropRef p_is(SymObject object, TypeRef type) {
    return mk_prop(TypeOfProp{std::move(object), std::move(type)});
}
PropRef p_not(SymObject object, TypeRef type) {
    return mk_prop(NotTypeOfProp{std::move(object), std::move(type)});
}
PropRef p_and(PropRef left, PropRef right) {
    return mk_prop(AndProp{std::move(left), std::move(right)});
}
PropRef p_or(PropRef left, PropRef right) {
    return mk_prop(OrProp{std::move(left), std::move(right)});
}
PropRef p_alias(SymObject left, SymObject right) {
    return mk_prop(AliasProp{std::move(left), std::move(right)});
}

ExprRef e_nat(Nat value, SourceLoc loc) {
    return mk_expr(NatExpr{std::move(value)}, loc);
}
ExprRef e_true(SourceLoc loc) { return mk_expr(TrueExpr{}, loc); }
ExprRef e_false(SourceLoc loc) { return mk_expr(FalseExpr{}, loc); }
ExprRef e_prim(PrimOp op, SourceLoc loc) { return mk_expr(PrimExpr{op}, loc); }
ExprRef e_var(std::string name, SourceLoc loc) {
    return mk_expr(VarExpr{std::move(name)}, loc);
}
ExprRef e_lambda(std::string param, TypeRef annotation, ExprRef body,
                 SourceLoc loc) {
    return mk_expr(LambdaExpr{std::move(param), std::move(annotation),
                              std::move(body)},
                   loc);
}
ExprRef e_app(ExprRef fn, ExprRef arg, SourceLoc loc) {
    return mk_expr(AppExpr{std::move(fn), std::move(arg)}, loc);
}
ExprRef e_if(ExprRef test, ExprRef then_branch, ExprRef else_branch,
             SourceLoc loc) {
    return mk_expr(IfExpr{std::move(test), std::move(then_branch),
                          std::move(else_branch)},
                   loc);
}
ExprRef e_let(std::string name, ExprRef rhs, ExprRef body, SourceLoc loc) {
    return mk_expr(LetExpr{std::move(name), std::move(rhs), std::move(body)},
                   loc);
}
ExprRef e_cons(ExprRef first, ExprRef second, SourceLoc loc) {
    return mk_expr(ConsExpr{std::move(first), std::move(second)}, loc);
}
ExprRef e_proj(PathElem which, ExprRef target, SourceLoc loc) {
    return mk_expr(ProjExpr{which, std::move(target)}, loc);
}
ExprRef e_let_struct(std::string ctor_name, std::string pred_name,
                     std::string acc_name, std::string struct_name,
                     TypeRef field_type, std::vector<PropertyBinding> props,
                     ExprRef body, SourceLoc loc) {
    return mk_expr(LetStructExpr{std::move(ctor_name), std::move(pred_name),
                                 std::move(acc_name), std::move(struct_name),
                                 std::move(field_type), std::move(props),
                                 std::move(body)},
                   loc);
}
ExprRef e_let_struct_prop(std::string desc_name, std::string pred_name,
                          std::string acc_name, std::string property,
                          TypeRef value_type, ExprRef body, SourceLoc loc) {
    return mk_expr(
        LetStructPropExpr{std::move(desc_name), std::move(pred_name),
                          std::move(acc_name), std::move(property),
                          std::move(value_type), std::move(body)},
        loc);
}

ValueRef v_nat(Nat n) { return mk_value(NatValue{std::move(n)}); }
ValueRef v_true() {
    static const ValueRef v = mk_value(TrueValue{});
    return v;
}
ValueRef v_false() {
    static const ValueRef v = mk_value(FalseValue{});
    return v;
}
ValueRef v_bool(bool b) { return b ? v_true() : v_false(); }
ValueRef v_prim(PrimOp op) { return mk_value(PrimValue{op}); }
ValueRef v_pair(ValueRef first, ValueRef second) {
    return mk_value(PairValue{std::move(first), std::move(second)});
}
ValueRef v_closure(RuntimeEnvRef env, ExprRef lambda) {
    return mk_value(ClosureValue{std::move(env), std::move(lambda)});
}
ValueRef v_instance(TypeRef struct_type, ValueRef field,
                    std::vector<std::pair<std::string, ValueRef>> properties) {
    return mk_value(StructInstanceValue{std::move(struct_type),
                                        std::move(field),
                                        std::move(properties)});
}
ValueRef v_prop_desc(std::string property) {
    return mk_value(PropDescValue{std::move(property)});
}
ValueRef v_ctor(TypeRef struct_type,
                std::vector<std::pair<std::string, ValueRef>> properties) {
    return mk_value(CtorValue{std::move(struct_type), std::move(properties)});
}
ValueRef v_pred(TypeRef struct_type) {
    return mk_value(PredValue{std::move(struct_type)});
}
ValueRef v_acc(TypeRef struct_type) {
    return mk_value(AccValue{std::move(struct_type)});
}
ValueRef v_prop_pred(std::string property) {
    return mk_value(PropPredValue{std::move(property)});
}
ValueRef v_prop_acc(std::string property, TypeRef value_type) {
    return mk_value(PropAccValue{std::move(property), std::move(value_type)});
}

// ---------------------------------------------------------------------------
// Alpha equality
// ---------------------------------------------------------------------------

namespace {

// Parallel scopes of bound names. Lookup scans from the most recent binding;
// two names are equivalent when they are bound by the same entry, or when
// neither is bound and they are identical.
struct Scope {
    std::vector<std::pair<std::string, std::string>> tvars;
    std::vector<std::pair<std::string, std::string>> objs;

    static bool names_match(
        const std::vector<std::pair<std::string, std::string>>& frames,
        const std::string& a, const std::string& b) {
        for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
            const bool la = it->first == a;
            const bool rb = it->second == b;
            if (la || rb) return la && rb;
        }
        return a == b;
    }

    bool tvar_match(const std::string& a, const std::string& b) const {
        return names_match(tvars, a, b);
    }
    bool obj_match(const std::string& a, const std::string& b) const {
        return names_match(objs, a, b);
    }
};

bool type_alpha(const TypeRef& a, const TypeRef& b, Scope& scope);
bool result_alpha(const ResultRef& a, const ResultRef& b, Scope& scope);
bool prop_alpha(const PropRef& a, const PropRef& b, Scope& scope);

bool object_alpha(const SymObject& a, const SymObject& b, const Scope& scope) {
    if (a.is_null != b.is_null) return false;
    if (a.is_null) return true;
    if (a.path != b.path) return false;
    return scope.obj_match(a.base, b.base);
}

// The quantifier is treated as absent when it does not occur in the arrow's
// domain or result, so a vacuously quantified arrow equals the plain one.
bool arrow_quantifier_used(const ArrowType& f) {
    if (f.quantifier.empty()) return false;
    return mentions_tvar(f.domain, f.quantifier) ||
           mentions_tvar(f.result, f.quantifier);
}

bool type_alpha(const TypeRef& a, const TypeRef& b, Scope& scope) {
    if (a == b && scope.tvars.empty() && scope.objs.empty()) return true;
    if (!a || !b) return a == b;
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        match{
            [](const TopType&) { return true; },
            [](const NatType&) { return true; },
            [](const TrueType&) { return true; },
            [](const FalseType&) { return true; },
            [](const SelfType&) { return true; },
            [&](const PairType& pa) {
                const auto& pb = std::get<PairType>(b->node);
                return type_alpha(pa.first, pb.first, scope) &&
                       type_alpha(pa.second, pb.second, scope);
            },
            [&](const UnionType& ua) {
                const auto& ub = std::get<UnionType>(b->node);
                if (ua.members.size() != ub.members.size()) return false;
                for (std::size_t i = 0; i < ua.members.size(); ++i) {
                    if (!type_alpha(ua.members[i], ub.members[i], scope))
                        return false;
                }
                return true;
            },
            [&](const StructType& sa) {
                const auto& sb = std::get<StructType>(b->node);
                return sa.stamp == sb.stamp && sa.name == sb.name &&
                       sa.properties == sb.properties &&
                       type_alpha(sa.field, sb.field, scope);
            },
            [&](const PropDescType& da) {
                const auto& db = std::get<PropDescType>(b->node);
                return type_alpha(da.value, db.value, scope);
            },
            [&](const HasPropType& ha) {
                const auto& hb = std::get<HasPropType>(b->node);
                return ha.property == hb.property;
            },
            [&](const VarType& va) {
                const auto& vb = std::get<VarType>(b->node);
                return scope.tvar_match(va.name, vb.name);
            },
            [&](const ArrowType& fa) {
                const auto& fb = std::get<ArrowType>(b->node);
                const bool qa = arrow_quantifier_used(fa);
                const bool qb = arrow_quantifier_used(fb);
                if (qa != qb) return false;
                std::size_t tdepth = scope.tvars.size();
                std::size_t odepth = scope.objs.size();
                if (qa) scope.tvars.emplace_back(fa.quantifier, fb.quantifier);
                scope.objs.emplace_back(fa.param, fb.param);
                bool ok = type_alpha(fa.domain, fb.domain, scope) &&
                          result_alpha(fa.result, fb.result, scope);
                scope.tvars.resize(tdepth);
                scope.objs.resize(odepth);
                return ok;
            },
        },
        a->node);
}

bool result_alpha(const ResultRef& a, const ResultRef& b, Scope& scope) {
    if (!a || !b) return a == b;
    return type_alpha(a->type, b->type, scope) &&
           prop_alpha(a->when_true, b->when_true, scope) &&
           prop_alpha(a->when_false, b->when_false, scope) &&
           object_alpha(a->object, b->object, scope);
}

bool prop_alpha(const PropRef& a, const PropRef& b, Scope& scope) {
    if (!a || !b) return a == b;
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        match{
            [](const TrivialProp&) { return true; },
            [](const AbsurdProp&) { return true; },
            [&](const TypeOfProp& pa) {
                const auto& pb = std::get<TypeOfProp>(b->node);
                return object_alpha(pa.object, pb.object, scope) &&
                       type_alpha(pa.type, pb.type, scope);
            },
            [&](const NotTypeOfProp& pa) {
                const auto& pb = std::get<NotTypeOfProp>(b->node);
                return object_alpha(pa.object, pb.object, scope) &&
                       type_alpha(pa.type, pb.type, scope);
            },
            [&](const AndProp& pa) {
                const auto& pb = std::get<AndProp>(b->node);
                return prop_alpha(pa.left, pb.left, scope) &&
                       prop_alpha(pa.right, pb.right, scope);
            },
            [&](const OrProp& pa) {
                const auto& pb = std::get<OrProp>(b->node);
                return prop_alpha(pa.left, pb.left, scope) &&
                       prop_alpha(pa.right, pb.right, scope);
            },
            [&](const AliasProp& pa) {
                const auto& pb = std::get<AliasProp>(b->node);
                return object_alpha(pa.left, pb.left, scope) &&
                       object_alpha(pa.right, pb.right, scope);
            },
        },
        a->node);
}

bool expr_alpha(const ExprRef& a, const ExprRef& b, Scope& scope) {
    if (!a || !b) return a == b;
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        match{
            [&](const NatExpr& ea) {
                return ea.value == std::get<NatExpr>(b->node).value;
            },
            [](const TrueExpr&) { return true; },
            [](const FalseExpr&) { return true; },
            [&](const PrimExpr& ea) {
                return ea.op == std::get<PrimExpr>(b->node).op;
            },
            [&](const VarExpr& ea) {
                return scope.obj_match(ea.name,
                                       std::get<VarExpr>(b->node).name);
            },
            [&](const LambdaExpr& ea) {
                const auto& eb = std::get<LambdaExpr>(b->node);
                if (!type_alpha(ea.annotation, eb.annotation, scope))
                    return false;
                scope.objs.emplace_back(ea.param, eb.param);
                bool ok = expr_alpha(ea.body, eb.body, scope);
                scope.objs.pop_back();
                return ok;
            },
            [&](const AppExpr& ea) {
                const auto& eb = std::get<AppExpr>(b->node);
                return expr_alpha(ea.fn, eb.fn, scope) &&
                       expr_alpha(ea.arg, eb.arg, scope);
            },
            [&](const IfExpr& ea) {
                const auto& eb = std::get<IfExpr>(b->node);
                return expr_alpha(ea.test, eb.test, scope) &&
                       expr_alpha(ea.then_branch, eb.then_branch, scope) &&
                       expr_alpha(ea.else_branch, eb.else_branch, scope);
            },
            [&](const LetExpr& ea) {
                const auto& eb = std::get<LetExpr>(b->node);
                if (!expr_alpha(ea.rhs, eb.rhs, scope)) return false;
                scope.objs.emplace_back(ea.name, eb.name);
                bool ok = expr_alpha(ea.body, eb.body, scope);
                scope.objs.pop_back();
                return ok;
            },
            [&](const ConsExpr& ea) {
                const auto& eb = std::get<ConsExpr>(b->node);
                return expr_alpha(ea.first, eb.first, scope) &&
                       expr_alpha(ea.second, eb.second, scope);
            },
            [&](const ProjExpr& ea) {
                const auto& eb = std::get<ProjExpr>(b->node);
                return ea.which == eb.which &&
                       expr_alpha(ea.target, eb.target, scope);
            },
            [&](const LetStructExpr& ea) {
                const auto& eb = std::get<LetStructExpr>(b->node);
                if (ea.properties.size() != eb.properties.size()) return false;
                if (!type_alpha(ea.field_type, eb.field_type, scope))
                    return false;
                for (std::size_t i = 0; i < ea.properties.size(); ++i) {
                    if (ea.properties[i].property !=
                        eb.properties[i].property)
                        return false;
                    if (!expr_alpha(ea.properties[i].value,
                                    eb.properties[i].value, scope))
                        return false;
                }
                std::size_t tdepth = scope.tvars.size();
                std::size_t odepth = scope.objs.size();
                scope.tvars.emplace_back(ea.struct_name, eb.struct_name);
                scope.objs.emplace_back(ea.ctor_name, eb.ctor_name);
                scope.objs.emplace_back(ea.pred_name, eb.pred_name);
                scope.objs.emplace_back(ea.acc_name, eb.acc_name);
                bool ok = expr_alpha(ea.body, eb.body, scope);
                scope.tvars.resize(tdepth);
                scope.objs.resize(odepth);
                return ok;
            },
            [&](const LetStructPropExpr& ea) {
                const auto& eb = std::get<LetStructPropExpr>(b->node);
                if (ea.property != eb.property) return false;
                if (!type_alpha(ea.value_type, eb.value_type, scope))
                    return false;
                std::size_t odepth = scope.objs.size();
                scope.objs.emplace_back(ea.desc_name, eb.desc_name);
                scope.objs.emplace_back(ea.pred_name, eb.pred_name);
                scope.objs.emplace_back(ea.acc_name, eb.acc_name);
                bool ok = expr_alpha(ea.body, eb.body, scope);
                scope.objs.resize(odepth);
                return ok;
            },
        },
        a->node);
}

}  // namespace

bool alpha_equal(const TypeRef& a, const TypeRef& b) {
    Scope scope;
    return type_alpha(a, b, scope);
}
bool alpha_equal(const ResultRef& a, const ResultRef& b) {
    Scope scope;
    return result_alpha(a, b, scope);
}
bool alpha_equal(const PropRef& a, const PropRef& b) {
    Scope scope;
    return prop_alpha(a, b, scope);
}
bool alpha_equal(const ExprRef& a, const ExprRef& b) {
    Scope scope;
    return expr_alpha(a, b, scope);
}

// ---------------------------------------------------------------------------
// Value equality
// ---------------------------------------------------------------------------

bool value_equal(const ValueRef& a, const ValueRef& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        match{
            [&](const NatValue& va) {
                return va.value == std::get<NatValue>(b->node).value;
            },
            [](const TrueValue&) { return true; },
            [](const FalseValue&) { return true; },
            [&](const PrimValue& va) {
                return va.op == std::get<PrimValue>(b->node).op;
            },
            [&](const PairValue& va) {
                const auto& vb = std::get<PairValue>(b->node);
                return value_equal(va.first, vb.first) &&
                       value_equal(va.second, vb.second);
            },
            [&](const ClosureValue& va) {
                const auto& vb = std::get<ClosureValue>(b->node);
                if (va.lambda != vb.lambda) return false;
                if (va.env == vb.env) return true;
                if (va.env->bindings.size() != vb.env->bindings.size())
                    return false;
                auto ia = va.env->bindings.begin();
                auto ib = vb.env->bindings.begin();
                for (; ia != va.env->bindings.end(); ++ia, ++ib) {
                    if (ia->first != ib->first) return false;
                    if (!value_equal(ia->second, ib->second)) return false;
                }
                return true;
            },
            [&](const StructInstanceValue& va) {
                const auto& vb = std::get<StructInstanceValue>(b->node);
                if (!alpha_equal(va.struct_type, vb.struct_type)) return false;
                if (!value_equal(va.field, vb.field)) return false;
                if (va.properties.size() != vb.properties.size()) return false;
                for (std::size_t i = 0; i < va.properties.size(); ++i) {
                    if (va.properties[i].first != vb.properties[i].first)
                        return false;
                    if (!value_equal(va.properties[i].second,
                                     vb.properties[i].second))
                        return false;
                }
                return true;
            },
            [&](const PropDescValue& va) {
                return va.property == std::get<PropDescValue>(b->node).property;
            },
            [&](const CtorValue& va) {
                const auto& vb = std::get<CtorValue>(b->node);
                if (!alpha_equal(va.struct_type, vb.struct_type)) return false;
                if (va.properties.size() != vb.properties.size()) return false;
                for (std::size_t i = 0; i < va.properties.size(); ++i) {
                    if (va.properties[i].first != vb.properties[i].first)
                        return false;
                    if (!value_equal(va.properties[i].second,
                                     vb.properties[i].second))
                        return false;
                }
                return true;
            },
            [&](const PredValue& va) {
                return alpha_equal(va.struct_type,
                                   std::get<PredValue>(b->node).struct_type);
            },
            [&](const AccValue& va) {
                return alpha_equal(va.struct_type,
                                   std::get<AccValue>(b->node).struct_type);
            },
            [&](const PropPredValue& va) {
                return va.property == std::get<PropPredValue>(b->node).property;
            },
            [&](const PropAccValue& va) {
                const auto& vb = std::get<PropAccValue>(b->node);
                return va.property == vb.property &&
                       alpha_equal(va.value_type, vb.value_type);
            },
        },
        a->node);
}

// ---------------------------------------------------------------------------
// Occurrence queries
// ---------------------------------------------------------------------------

namespace {

bool prop_mentions_tvar(const PropRef& p, const std::string& name);

bool type_mentions_tvar(const TypeRef& t, const std::string& name) {
    if (!t) return false;
    return std::visit(
        match{
            [](const TopType&) { return false; },
            [](const NatType&) { return false; },
            [](const TrueType&) { return false; },
            [](const FalseType&) { return false; },
            [](const SelfType&) { return false; },
            [&](const PairType& p) {
                return type_mentions_tvar(p.first, name) ||
                       type_mentions_tvar(p.second, name);
            },
            [&](const UnionType& u) {
                return std::any_of(u.members.begin(), u.members.end(),
                                   [&](const TypeRef& m) {
                                       return type_mentions_tvar(m, name);
                                   });
            },
            [&](const StructType& s) {
                return type_mentions_tvar(s.field, name);
            },
            [&](const PropDescType& d) {
                return type_mentions_tvar(d.value, name);
            },
            [](const HasPropType&) { return false; },
            [&](const VarType& v) { return v.name == name; },
            [&](const ArrowType& f) {
                if (f.quantifier == name) return false;
                return type_mentions_tvar(f.domain, name) ||
                       mentions_tvar(f.result, name);
            },
        },
        t->node);
}

bool prop_mentions_tvar(const PropRef& p, const std::string& name) {
    if (!p) return false;
    return std::visit(
        match{
            [](const TrivialProp&) { return false; },
            [](const AbsurdProp&) { return false; },
            [&](const TypeOfProp& tp) {
                return type_mentions_tvar(tp.type, name);
            },
            [&](const NotTypeOfProp& tp) {
                return type_mentions_tvar(tp.type, name);
            },
            [&](const AndProp& ap) {
                return prop_mentions_tvar(ap.left, name) ||
                       prop_mentions_tvar(ap.right, name);
            },
            [&](const OrProp& op) {
                return prop_mentions_tvar(op.left, name) ||
                       prop_mentions_tvar(op.right, name);
            },
            [](const AliasProp&) { return false; },
        },
        p->node);
}

}  // namespace

bool mentions_tvar(const TypeRef& t, const std::string& name) {
    return type_mentions_tvar(t, name);
}

bool mentions_tvar(const ResultRef& r, const std::string& name) {
    if (!r) return false;
    return type_mentions_tvar(r->type, name) ||
           prop_mentions_tvar(r->when_true, name) ||
           prop_mentions_tvar(r->when_false, name);
}

namespace {

bool type_mentions_base(const TypeRef& t, const std::string& name);

bool prop_mentions_base(const PropRef& p, const std::string& name) {
    if (!p) return false;
    return std::visit(
        match{
            [](const TrivialProp&) { return false; },
            [](const AbsurdProp&) { return false; },
            [&](const TypeOfProp& tp) {
                return (tp.object.non_null() && tp.object.base == name) ||
                       type_mentions_base(tp.type, name);
            },
            [&](const NotTypeOfProp& tp) {
                return (tp.object.non_null() && tp.object.base == name) ||
                       type_mentions_base(tp.type, name);
            },
            [&](const AndProp& ap) {
                return prop_mentions_base(ap.left, name) ||
                       prop_mentions_base(ap.right, name);
            },
            [&](const OrProp& op) {
                return prop_mentions_base(op.left, name) ||
                       prop_mentions_base(op.right, name);
            },
            [&](const AliasProp& al) {
                return al.left.base == name || al.right.base == name;
            },
        },
        p->node);
}

bool result_mentions_base(const ResultRef& r, const std::string& name) {
    if (!r) return false;
    return type_mentions_base(r->type, name) ||
           prop_mentions_base(r->when_true, name) ||
           prop_mentions_base(r->when_false, name) ||
           (r->object.non_null() && r->object.base == name);
}

bool type_mentions_base(const TypeRef& t, const std::string& name) {
    if (!t) return false;
    return std::visit(
        match{
            [&](const PairType& p) {
                return type_mentions_base(p.first, name) ||
                       type_mentions_base(p.second, name);
            },
            [&](const UnionType& u) {
                return std::any_of(u.members.begin(), u.members.end(),
                                   [&](const TypeRef& m) {
                                       return type_mentions_base(m, name);
                                   });
            },
            [&](const StructType& s) {
                return type_mentions_base(s.field, name);
            },
            [&](const PropDescType& d) {
                return type_mentions_base(d.value, name);
            },
            [&](const ArrowType& f) {
                if (f.param == name)
                    return type_mentions_base(f.domain, name);
                return type_mentions_base(f.domain, name) ||
                       result_mentions_base(f.result, name);
            },
            [](const auto&) { return false; },
        },
        t->node);
}

}  // namespace

bool mentions_object_base(const ResultRef& r, const std::string& name) {
    return result_mentions_base(r, name);
}

// ---------------------------------------------------------------------------
// Type variable substitution
// ---------------------------------------------------------------------------

namespace {

struct TvarSubst {
    const std::string& name;
    const TypeRef& replacement;
    bool replacement_free_vars_ready = false;
    std::vector<std::string> replacement_free = {};

    bool captures(const std::string& binder) {
        if (!replacement_free_vars_ready) {
            free_tvars(replacement, replacement_free);
            replacement_free_vars_ready = true;
        }
        return std::find(replacement_free.begin(), replacement_free.end(),
                         binder) != replacement_free.end();
    }
};

TypeRef subst_tvar_type(const TypeRef& t, TvarSubst& s);
ResultRef subst_tvar_result(const ResultRef& r, TvarSubst& s);
PropRef subst_tvar_prop(const PropRef& p, TvarSubst& s);

std::string rename_binder_for(const ArrowType& f, TvarSubst& s) {
    // Picks a deterministic replacement binder that avoids capture.
    for (int i = 0;; ++i) {
        std::string candidate = f.quantifier + "%c" + std::to_string(i);
        if (candidate == s.name) continue;
        if (s.captures(candidate)) continue;
        if (type_mentions_tvar(f.domain, candidate)) continue;
        if (mentions_tvar(f.result, candidate)) continue;
        return candidate;
    }
}

TypeRef subst_tvar_type(const TypeRef& t, TvarSubst& s) {
    if (!t || !type_mentions_tvar(t, s.name)) return t;
    return std::visit(
        match{
            [&](const PairType& p) {
                return t_pair(subst_tvar_type(p.first, s),
                              subst_tvar_type(p.second, s));
            },
            [&](const UnionType& u) {
                std::vector<TypeRef> members;
                members.reserve(u.members.size());
                for (const auto& m : u.members)
                    members.push_back(subst_tvar_type(m, s));
                return t_union(std::move(members));
            },
            [&](const StructType& st) {
                return t_struct(st.name, st.stamp,
                                subst_tvar_type(st.field, s), st.properties);
            },
            [&](const PropDescType& d) {
                return t_prop_desc(subst_tvar_type(d.value, s));
            },
            [&](const VarType& v) {
                return v.name == s.name ? s.replacement : t;
            },
            [&](const ArrowType& f) {
                std::string quantifier = f.quantifier;
                TypeRef domain = f.domain;
                ResultRef result = f.result;
                if (!quantifier.empty() && s.captures(quantifier)) {
                    std::string renamed = rename_binder_for(f, s);
                    TvarSubst inner{quantifier, t_tvar(renamed)};
                    domain = subst_tvar_type(domain, inner);
                    result = subst_tvar_result(result, inner);
                    quantifier = renamed;
                }
                return t_arrow(quantifier, f.param,
                               subst_tvar_type(domain, s),
                               subst_tvar_result(result, s));
            },
            [&](const auto&) { return t; },
        },
        t->node);
}

PropRef subst_tvar_prop(const PropRef& p, TvarSubst& s) {
    if (!p) return p;
    return std::visit(
        match{
            [&](const TypeOfProp& tp) {
                return p_is(tp.object, subst_tvar_type(tp.type, s));
            },
            [&](const NotTypeOfProp& tp) {
                return p_not(tp.object, subst_tvar_type(tp.type, s));
            },
            [&](const AndProp& ap) {
                return p_and(subst_tvar_prop(ap.left, s),
                             subst_tvar_prop(ap.right, s));
            },
            [&](const OrProp& op) {
                return p_or(subst_tvar_prop(op.left, s),
                            subst_tvar_prop(op.right, s));
            },
            [&](const auto&) { return p; },
        },
        p->node);
}

ResultRef subst_tvar_result(const ResultRef& r, TvarSubst& s) {
    if (!r || !mentions_tvar(r, s.name)) return r;
    return mk_result(subst_tvar_type(r->type, s),
                     subst_tvar_prop(r->when_true, s),
                     subst_tvar_prop(r->when_false, s), r->object);
}

}  // namespace

TypeRef subst_tvar(const TypeRef& t, const std::string& name,
                   const TypeRef& replacement) {
    TvarSubst s{name, replacement};
    return subst_tvar_type(t, s);
}
ResultRef subst_tvar(const ResultRef& r, const std::string& name,
                     const TypeRef& replacement) {
    TvarSubst s{name, replacement};
    return subst_tvar_result(r, s);
}
PropRef subst_tvar(const PropRef& p, const std::string& name,
                   const TypeRef& replacement) {
    TvarSubst s{name, replacement};
    return subst_tvar_prop(p, s);
}

// ---------------------------------------------------------------------------
// Object substitution
// ---------------------------------------------------------------------------

namespace {

struct ObjSubst {
    const std::string& name;
    const SymObject& replacement;
};

SymObject subst_in_object(const SymObject& o, const ObjSubst& s) {
    if (o.is_null || o.base != s.name) return o;
    SymObject out = s.replacement;
    out.path.insert(out.path.begin(), o.path.begin(), o.path.end());
    return out;
}

TypeRef subst_object_type(const TypeRef& t, const ObjSubst& s);
ResultRef subst_object_result(const ResultRef& r, const ObjSubst& s);

PropRef subst_object_prop(const PropRef& p, const ObjSubst& s) {
    if (!p) return p;
    return std::visit(
        match{
            [&](const TypeOfProp& tp) {
                return p_is(subst_in_object(tp.object, s),
                            subst_object_type(tp.type, s));
            },
            [&](const NotTypeOfProp& tp) {
                return p_not(subst_in_object(tp.object, s),
                             subst_object_type(tp.type, s));
            },
            [&](const AndProp& ap) {
                return p_and(subst_object_prop(ap.left, s),
                             subst_object_prop(ap.right, s));
            },
            [&](const OrProp& op) {
                return p_or(subst_object_prop(op.left, s),
                            subst_object_prop(op.right, s));
            },
            [&](const AliasProp& al) {
                return p_alias(subst_in_object(al.left, s),
                               subst_in_object(al.right, s));
            },
            [&](const auto&) { return p; },
        },
        p->node);
}

ResultRef subst_object_result(const ResultRef& r, const ObjSubst& s) {
    if (!r) return r;
    return mk_result(subst_object_type(r->type, s),
                     subst_object_prop(r->when_true, s),
                     subst_object_prop(r->when_false, s),
                     subst_in_object(r->object, s));
}

TypeRef subst_object_type(const TypeRef& t, const ObjSubst& s) {
    if (!t) return t;
    return std::visit(
        match{
            [&](const PairType& p) {
                return t_pair(subst_object_type(p.first, s),
                              subst_object_type(p.second, s));
            },
            [&](const UnionType& u) {
                std::vector<TypeRef> members;
                members.reserve(u.members.size());
                for (const auto& m : u.members)
                    members.push_back(subst_object_type(m, s));
                return t_union(std::move(members));
            },
            [&](const StructType& st) {
                return t_struct(st.name, st.stamp,
                                subst_object_type(st.field, s), st.properties);
            },
            [&](const PropDescType& d) {
                return t_prop_desc(subst_object_type(d.value, s));
            },
            [&](const ArrowType& f) {
                TypeRef domain = subst_object_type(f.domain, s);
                ResultRef result =
                    f.param == s.name ? f.result : subst_object_result(f.result, s);
                return t_arrow(f.quantifier, f.param, std::move(domain),
                               std::move(result));
            },
            [&](const auto&) { return t; },
        },
        t->node);
}

}  // namespace

TypeRef subst_object(const TypeRef& t, const std::string& name,
                     const SymObject& replacement) {
    ObjSubst s{name, replacement};
    return subst_object_type(t, s);
}
ResultRef subst_object(const ResultRef& r, const std::string& name,
                       const SymObject& replacement) {
    ObjSubst s{name, replacement};
    return subst_object_result(r, s);
}
PropRef subst_object(const PropRef& p, const std::string& name,
                     const SymObject& replacement) {
    ObjSubst s{name, replacement};
    return subst_object_prop(p, s);
}

// ---------------------------------------------------------------------------
// Self replacement
// ---------------------------------------------------------------------------

namespace {

bool type_has_self(const TypeRef& t);

bool prop_has_self(const PropRef& p) {
    if (!p) return false;
    return std::visit(
        match{
            [](const TypeOfProp& tp) { return type_has_self(tp.type); },
            [](const NotTypeOfProp& tp) { return type_has_self(tp.type); },
            [](const AndProp& ap) {
                return prop_has_self(ap.left) || prop_has_self(ap.right);
            },
            [](const OrProp& op) {
                return prop_has_self(op.left) || prop_has_self(op.right);
            },
            [](const auto&) { return false; },
        },
        p->node);
}

bool type_has_self(const TypeRef& t) {
    if (!t) return false;
    return std::visit(
        match{
            [](const SelfType&) { return true; },
            [](const PairType& p) {
                return type_has_self(p.first) || type_has_self(p.second);
            },
            [](const UnionType& u) {
                return std::any_of(u.members.begin(), u.members.end(),
                                   type_has_self);
            },
            [](const StructType& s) { return type_has_self(s.field); },
            [](const PropDescType& d) { return type_has_self(d.value); },
            [](const ArrowType& f) {
                return type_has_self(f.domain) ||
                       type_has_self(f.result->type) ||
                       prop_has_self(f.result->when_true) ||
                       prop_has_self(f.result->when_false);
            },
            [](const auto&) { return false; },
        },
        t->node);
}

PropRef prop_replace_self(const PropRef& p, const TypeRef& with);

TypeRef type_replace_self(const TypeRef& t, const TypeRef& with) {
    if (!t || !type_has_self(t)) return t;
    return std::visit(
        match{
            [&](const SelfType&) { return with; },
            [&](const PairType& p) {
                return t_pair(type_replace_self(p.first, with),
                              type_replace_self(p.second, with));
            },
            [&](const UnionType& u) {
                std::vector<TypeRef> members;
                members.reserve(u.members.size());
                for (const auto& m : u.members)
                    members.push_back(type_replace_self(m, with));
                return t_union(std::move(members));
            },
            [&](const StructType& s) {
                return t_struct(s.name, s.stamp,
                                type_replace_self(s.field, with),
                                s.properties);
            },
            [&](const PropDescType& d) {
                return t_prop_desc(type_replace_self(d.value, with));
            },
            [&](const ArrowType& f) {
                return t_arrow(f.quantifier, f.param,
                               type_replace_self(f.domain, with),
                               replace_self(f.result, with));
            },
            [&](const auto&) { return t; },
        },
        t->node);
}

PropRef prop_replace_self(const PropRef& p, const TypeRef& with) {
    if (!p || !prop_has_self(p)) return p;
    return std::visit(
        match{
            [&](const TypeOfProp& tp) {
                return p_is(tp.object, type_replace_self(tp.type, with));
            },
            [&](const NotTypeOfProp& tp) {
                return p_not(tp.object, type_replace_self(tp.type, with));
            },
            [&](const AndProp& ap) {
                return p_and(prop_replace_self(ap.left, with),
                             prop_replace_self(ap.right, with));
            },
            [&](const OrProp& op) {
                return p_or(prop_replace_self(op.left, with),
                            prop_replace_self(op.right, with));
            },
            [&](const auto&) { return p; },
        },
        p->node);
}

}  // namespace

TypeRef replace_self(const TypeRef& t, const TypeRef& with) {
    return type_replace_self(t, with);
}

ResultRef replace_self(const ResultRef& r, const TypeRef& with) {
    if (!r) return r;
    return mk_result(type_replace_self(r->type, with),
                     prop_replace_self(r->when_true, with),
                     prop_replace_self(r->when_false, with), r->object);
}

// ---------------------------------------------------------------------------
// Free type variables
// ---------------------------------------------------------------------------

namespace {

void collect_free_tvars(const TypeRef& t, std::vector<std::string>& bound,
                        std::vector<std::string>& out);

void collect_free_tvars_prop(const PropRef& p, std::vector<std::string>& bound,
                             std::vector<std::string>& out) {
    if (!p) return;
    std::visit(match{
                   [&](const TypeOfProp& tp) {
                       collect_free_tvars(tp.type, bound, out);
                   },
                   [&](const NotTypeOfProp& tp) {
                       collect_free_tvars(tp.type, bound, out);
                   },
                   [&](const AndProp& ap) {
                       collect_free_tvars_prop(ap.left, bound, out);
                       collect_free_tvars_prop(ap.right, bound, out);
                   },
                   [&](const OrProp& op) {
                       collect_free_tvars_prop(op.left, bound, out);
                       collect_free_tvars_prop(op.right, bound, out);
                   },
                   [](const auto&) {},
               },
               p->node);
}

void collect_free_tvars(const TypeRef& t, std::vector<std::string>& bound,
                        std::vector<std::string>& out) {
    if (!t) return;
    std::visit(
        match{
            [&](const PairType& p) {
                collect_free_tvars(p.first, bound, out);
                collect_free_tvars(p.second, bound, out);
            },
            [&](const UnionType& u) {
                for (const auto& m : u.members)
                    collect_free_tvars(m, bound, out);
            },
            [&](const StructType& s) {
                collect_free_tvars(s.field, bound, out);
            },
            [&](const PropDescType& d) {
                collect_free_tvars(d.value, bound, out);
            },
            [&](const VarType& v) {
                if (std::find(bound.begin(), bound.end(), v.name) !=
                    bound.end())
                    return;
                if (std::find(out.begin(), out.end(), v.name) == out.end())
                    out.push_back(v.name);
            },
            [&](const ArrowType& f) {
                bool pushed = false;
                if (!f.quantifier.empty()) {
                    bound.push_back(f.quantifier);
                    pushed = true;
                }
                collect_free_tvars(f.domain, bound, out);
                collect_free_tvars(f.result->type, bound, out);
                collect_free_tvars_prop(f.result->when_true, bound, out);
                collect_free_tvars_prop(f.result->when_false, bound, out);
                if (pushed) bound.pop_back();
            },
            [](const auto&) {},
        },
        t->node);
}

}  // namespace

void free_tvars(const TypeRef& t, std::vector<std::string>& out) {
    std::vector<std::string> bound;
    collect_free_tvars(t, bound, out);
}

// ---------------------------------------------------------------------------
// Fresh names
// ---------------------------------------------------------------------------

std::string FreshNames::fresh(const std::string& hint) {
    int n = counters_[hint]++;
    return hint + "%" + std::to_string(n);
}

}  // namespace etr
