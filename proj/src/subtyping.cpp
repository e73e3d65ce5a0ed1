#include "etr/subtyping.hpp"

#include <algorithm>
#include <string>

#include "etr/logic.hpp"

namespace etr {

namespace {

// Function subtyping compares the two sides under one shared quantifier and
// one shared parameter name. The names are depth-indexed so nested
// comparisons never collide, and drawn from the reserved '%' namespace so
// they never collide with source identifiers.
thread_local int arrow_depth = 0;

struct DepthGuard {
    DepthGuard() { ++arrow_depth; }
    ~DepthGuard() { --arrow_depth; }
};

bool arrow_subtype(const TypeEnv& env, const ArrowType& fa,
                   const ArrowType& fb) {
    DepthGuard guard;
    const std::string shared_var = "%s" + std::to_string(arrow_depth);
    const std::string shared_param = "%p" + std::to_string(arrow_depth);

    TypeRef dom_a = fa.domain;
    ResultRef res_a = fa.result;
    if (!fa.quantifier.empty() && fa.quantifier != shared_var) {
        TypeRef fresh = t_tvar(shared_var);
        dom_a = subst_tvar(dom_a, fa.quantifier, fresh);
        res_a = subst_tvar(res_a, fa.quantifier, fresh);
    }
    TypeRef dom_b = fb.domain;
    ResultRef res_b = fb.result;
    if (!fb.quantifier.empty() && fb.quantifier != shared_var) {
        TypeRef fresh = t_tvar(shared_var);
        dom_b = subst_tvar(dom_b, fb.quantifier, fresh);
        res_b = subst_tvar(res_b, fb.quantifier, fresh);
    }
    if (fa.param != shared_param)
        res_a = subst_object(res_a, fa.param, SymObject::var(shared_param));
    if (fb.param != shared_param)
        res_b = subst_object(res_b, fb.param, SymObject::var(shared_param));

    if (!subtype(env, dom_b, dom_a)) return false;
    TypeEnv inner = env.with_var(shared_var)
                        .with_prop(p_is(SymObject::var(shared_param), dom_b));
    return subresult(inner, res_a, res_b);
}

}  // namespace

bool subobject(const SymObject& a, const SymObject& b) {
    return b.is_null || a == b;
}

bool subtype(const TypeEnv& env, const TypeRef& sub, const TypeRef& sup) {
    if (alpha_equal(sub, sup)) return true;
    if (std::holds_alternative<TopType>(sup->node)) return true;
    if (const auto* u = std::get_if<UnionType>(&sub->node)) {
        return std::all_of(
            u->members.begin(), u->members.end(),
            [&](const TypeRef& m) { return subtype(env, m, sup); });
    }
    if (const auto* u = std::get_if<UnionType>(&sup->node)) {
        return std::any_of(
            u->members.begin(), u->members.end(),
            [&](const TypeRef& m) { return subtype(env, sub, m); });
    }
    if (const auto* pa = std::get_if<PairType>(&sub->node)) {
        if (const auto* pb = std::get_if<PairType>(&sup->node))
            return subtype(env, pa->first, pb->first) &&
                   subtype(env, pa->second, pb->second);
        return false;
    }
    if (const auto* fa = std::get_if<ArrowType>(&sub->node)) {
        if (const auto* fb = std::get_if<ArrowType>(&sup->node))
            return arrow_subtype(env, *fa, *fb);
        return false;
    }
    if (const auto* st = std::get_if<StructType>(&sub->node)) {
        // A struct is below Has-Prop(sp) when its declaration attaches sp
        // and the environment declares the property.
        if (const auto* h = std::get_if<HasPropType>(&sup->node))
            return std::find(st->properties.begin(), st->properties.end(),
                             h->property) != st->properties.end() &&
                   env.declares_property(h->property);
        return false;
    }
    return false;
}

bool subresult(const TypeEnv& env, const ResultRef& a, const ResultRef& b) {
    if (!subtype(env, a->type, b->type)) return false;
    if (!subobject(a->object, b->object)) return false;
    return proves(env.with_prop(a->when_true), b->when_true) &&
           proves(env.with_prop(a->when_false), b->when_false);
}

}  // namespace etr
