#include "etr/soundness.hpp"

#include <algorithm>
#include <random>
#include <utility>

#include "etr/logic.hpp"
#include "etr/printer.hpp"
#include "etr/subtyping.hpp"

namespace etr {

namespace {

bool is_callable(const ValueRef& v) {
    return std::visit(
        match{
            [](const PrimValue&) { return true; },
            [](const ClosureValue&) { return true; },
            [](const CtorValue&) { return true; },
            [](const PredValue&) { return true; },
            [](const AccValue&) { return true; },
            [](const PropPredValue&) { return true; },
            [](const PropAccValue&) { return true; },
            [](const auto&) { return false; },
        },
        v->node);
}

void collect_prop_tvars(const PropRef& p, std::vector<std::string>& out) {
    std::visit(match{
                   [&](const TypeOfProp& a) { free_tvars(a.type, out); },
                   [&](const NotTypeOfProp& a) { free_tvars(a.type, out); },
                   [&](const AndProp& a) {
                       collect_prop_tvars(a.left, out);
                       collect_prop_tvars(a.right, out);
                   },
                   [&](const OrProp& a) {
                       collect_prop_tvars(a.left, out);
                       collect_prop_tvars(a.right, out);
                   },
                   [&](const auto&) {},
               },
               p->node);
}

}  // namespace

ValueTyping::ValueTyping(std::map<std::string, TypeRef> property_types,
                         WitnessMap witnesses)
    : property_types_(std::move(property_types)),
      witnesses_(std::move(witnesses)) {}

TypeRef ValueTyping::type_of_value(const ValueRef& v) {
    auto hit = memo_.find(v);
    if (hit != memo_.end()) return hit->second;
    TypeRef type = std::visit(
        match{
            [&](const NatValue&) { return t_nat(); },
            [&](const TrueValue&) { return t_true(); },
            [&](const FalseValue&) { return t_false(); },
            [&](const PrimValue& p) { return prim_op_type(p.op); },
            [&](const PairValue& p) {
                return t_pair(type_of_value(p.first), type_of_value(p.second));
            },
            [&](const ClosureValue& c) {
                TypeEnv env;
                env.property_table = property_types_;
                for (const auto& [name, bound] : c.env->bindings) {
                    env = env.with_prop(
                        p_is(SymObject::var(name), type_of_value(bound)));
                }
                try {
                    Checker checker;
                    return checker.check(env, c.lambda).type;
                } catch (const CheckError&) {
                    return t_top();
                }
            },
            [&](const StructInstanceValue& s) { return s.struct_type; },
            [&](const PropDescValue& d) {
                auto declared = property_types_.find(d.property);
                return t_prop_desc(declared != property_types_.end()
                                       ? declared->second
                                       : t_top());
            },
            [&](const auto&) { return struct_op_type(v); },
        },
        v->node);
    memo_.emplace(v, type);
    return type;
}

bool ValueTyping::value_has_type(const ValueRef& v, const TypeRef& type) {
    bool direct = std::visit(
        match{
            [&](const TopType&) { return true; },
            [&](const NatType&) {
                return std::holds_alternative<NatValue>(v->node);
            },
            [&](const TrueType&) {
                return std::holds_alternative<TrueValue>(v->node);
            },
            [&](const FalseType&) {
                return std::holds_alternative<FalseValue>(v->node);
            },
            [&](const SelfType&) { return false; },
            [&](const VarType& x) {
                auto found = witnesses_.find(x.name);
                if (found == witnesses_.end()) return false;
                return std::any_of(
                    found->second.begin(), found->second.end(),
                    [&](const ValueRef& w) { return value_equal(v, w); });
            },
            [&](const UnionType& u) {
                return std::any_of(u.members.begin(), u.members.end(),
                                   [&](const TypeRef& member) {
                                       return value_has_type(v, member);
                                   });
            },
            [&](const PairType& p) {
                const auto* pair = std::get_if<PairValue>(&v->node);
                return pair && value_has_type(pair->first, p.first) &&
                       value_has_type(pair->second, p.second);
            },
            [&](const StructType&) {
                const auto* instance =
                    std::get_if<StructInstanceValue>(&v->node);
                return instance && alpha_equal(instance->struct_type, type);
            },
            [&](const HasPropType& h) {
                const auto* instance =
                    std::get_if<StructInstanceValue>(&v->node);
                if (!instance) return false;
                return std::any_of(
                    instance->properties.begin(), instance->properties.end(),
                    [&](const auto& entry) { return entry.first == h.property; });
            },
            [&](const PropDescType& d) {
                const auto* desc = std::get_if<PropDescValue>(&v->node);
                if (!desc) return false;
                auto declared = property_types_.find(desc->property);
                return declared != property_types_.end() &&
                       alpha_equal(declared->second, d.value);
            },
            [&](const ArrowType&) {
                if (!is_callable(v)) return false;
                TypeEnv env;
                env.property_table = property_types_;
                return subtype(env, type_of_value(v), type);
            },
        },
        type->node);
    if (direct) return true;

    // An existential variable stands for some type; the checker never learns
    // which one. Try the types of the witnesses observed at the issuing
    // application (and their union), which is how the variable got into the
    // result in the first place.
    std::vector<std::string> vars;
    free_tvars(type, vars);
    for (const auto& var : vars) {
        auto found = witnesses_.find(var);
        if (found == witnesses_.end() || found->second.empty()) continue;
        std::vector<TypeRef> candidates;
        for (const ValueRef& w : found->second) {
            candidates.push_back(type_of_value(w));
        }
        if (candidates.size() > 1) candidates.push_back(t_union(candidates));
        for (const TypeRef& candidate : candidates) {
            if (value_has_type(v, subst_tvar(type, var, candidate))) {
                return true;
            }
        }
        break;
    }
    return false;
}

bool ValueTyping::satisfies(const RuntimeEnvRef& env, const PropRef& prop) {
    return std::visit(
        match{
            [&](const TrivialProp&) { return true; },
            [&](const AbsurdProp&) { return false; },
            [&](const TypeOfProp& a) {
                return value_has_type(resolve_object(env, a.object), a.type);
            },
            [&](const NotTypeOfProp& a) {
                ValueRef value = resolve_object(env, a.object);
                TypeEnv tenv;
                tenv.property_table = property_types_;
                return !overlap(tenv, type_of_value(value), a.type);
            },
            [&](const AndProp& a) {
                std::vector<std::string> left_vars;
                std::vector<std::string> right_vars;
                collect_prop_tvars(a.left, left_vars);
                collect_prop_tvars(a.right, right_vars);
                for (const auto& var : left_vars) {
                    if (std::find(right_vars.begin(), right_vars.end(), var) !=
                        right_vars.end()) {
                        warnings_.push_back(
                            "conjunction arms share type variable " + var);
                        break;
                    }
                }
                return satisfies(env, a.left) && satisfies(env, a.right);
            },
            [&](const OrProp& a) {
                try {
                    if (satisfies(env, a.left)) return true;
                } catch (const UnresolvableObject&) {
                    return satisfies(env, a.right);
                }
                return satisfies(env, a.right);
            },
            [&](const AliasProp& a) {
                return value_equal(resolve_object(env, a.left),
                                   resolve_object(env, a.right));
            },
        },
        prop->node);
}

bool ValueTyping::satisfies_env(const RuntimeEnvRef& env,
                                const TypeEnv& type_env) {
    return std::all_of(
        type_env.props.begin(), type_env.props.end(),
        [&](const PropRef& prop) { return satisfies(env, prop); });
}

ValueRef ValueTyping::resolve_object(const RuntimeEnvRef& env,
                                     const SymObject& object) {
    if (object.is_null) {
        throw UnresolvableObject("the null object has no value");
    }
    const ValueRef* bound = env->lookup(object.base);
    if (!bound) {
        throw UnresolvableObject("object base '" + object.base +
                                 "' is not bound at runtime");
    }
    ValueRef value = *bound;
    for (auto it = object.path.rbegin(); it != object.path.rend(); ++it) {
        const auto* pair = std::get_if<PairValue>(&value->node);
        if (!pair) {
            throw UnresolvableObject("object path projects the non-pair " +
                                     print_value(value));
        }
        value = (*it == PathElem::Fst) ? pair->first : pair->second;
    }
    return value;
}

// ---------------------------------------------------------------------------
// Whole-program soundness checking
// ---------------------------------------------------------------------------

ProgramVerdict check_soundness(const ExprRef& program,
                               const SoundnessOptions& options) {
    ProgramVerdict verdict;
    CheckOutcome checked = check_program(program, options.check);
    if (!checked.ok()) return verdict;
    verdict.well_typed = true;

    WitnessMap witnesses;
    EvalOptions eval_options;
    eval_options.fuel = options.fuel;
    eval_options.on_apply = [&](std::uint32_t node_id, const ValueRef& arg) {
        auto site = checked.app_instantiations.find(node_id);
        if (site != checked.app_instantiations.end()) {
            witnesses[site->second].push_back(arg);
        }
    };
    EvalOutcome run = evaluate(checked.resolved, eval_options);

    if (run.out_of_fuel()) {
        verdict.fuel_exhausted = true;
        return verdict;
    }
    if (!run.ok()) {
        verdict.stuck = true;
        verdict.note = std::string(stuck_kind_name(run.stuck->kind)) + ": " +
                       run.stuck->message;
        return verdict;
    }
    verdict.ran = true;
    verdict.value = run.value;

    ValueTyping typing(checked.property_types, std::move(witnesses));
    const TypeResult& result = *checked.result;
    RuntimeEnvRef top = RuntimeEnv::empty();

    if (!typing.value_has_type(run.value, result.type)) {
        verdict.value_type_ok = false;
        verdict.note = "value " + print_value(run.value) +
                       " does not inhabit " + print(result.type);
    }

    bool is_false = std::holds_alternative<FalseValue>(run.value->node);
    const PropRef& claim = is_false ? result.when_false : result.when_true;
    try {
        if (!typing.satisfies(top, claim)) {
            verdict.props_ok = false;
            if (verdict.note.empty()) {
                verdict.note = "proposition " + print(claim) + " fails for " +
                               print_value(run.value);
            }
        }
    } catch (const UnresolvableObject& err) {
        verdict.props_ok = false;
        if (verdict.note.empty()) {
            verdict.note = std::string("proposition ") + print(claim) +
                           " is unresolvable: " + err.what();
        }
    }

    if (result.object.non_null()) {
        bool reproduces = false;
        try {
            reproduces = value_equal(typing.resolve_object(top, result.object),
                                     run.value);
        } catch (const UnresolvableObject&) {
        }
        if (!reproduces) {
            verdict.object_ok = false;
            if (verdict.note.empty()) {
                verdict.note = "object " + print(result.object) +
                               " does not resolve to the result value";
            }
        }
    }

    verdict.warnings = typing.warnings();
    return verdict;
}

// ---------------------------------------------------------------------------
// Program generation
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct StructScope {
    std::string name;
    std::string ctor;
    std::string pred;
    std::string acc;
    TypeRef field;
    std::vector<std::string> labels;
};

struct PropertyScope {
    std::string label;
    std::string pred;
    std::string acc;
    bool method = false;  // value type mentions Self
};

// Goal-directed generator. Annotations reference structure types by name
// (VarType), exactly as parsed source would; scope tracking mirrors what the
// checker will later conclude, so most candidates type-check first try.
struct Generator {
    std::mt19937_64 rng;
    int budget;
    int counter = 0;
    std::vector<std::pair<std::string, TypeRef>> scope;
    std::vector<StructScope> structs;
    std::vector<PropertyScope> properties;

    Generator(std::uint64_t seed, int size) : rng(seed), budget(size) {}

    // std::uniform_int_distribution is not specified bit-for-bit across
    // standard libraries; plain modulo keeps seeds portable.
    int roll(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
    bool chance(double p) {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
    }
    std::string fresh(const char* stem) {
        return std::string(stem) + std::to_string(counter++);
    }

    TypeRef pick_type() {
        switch (roll(6)) {
            case 0: return t_nat();
            case 1: return t_bool();
            case 2: return t_top();
            case 3: return t_pair(t_nat(), t_bool());
            case 4: return t_pair(t_top(), t_nat());
            default: return t_nat();
        }
    }

    const StructScope* struct_attaching(const std::string& label) {
        for (auto it = structs.rbegin(); it != structs.rend(); ++it) {
            if (std::find(it->labels.begin(), it->labels.end(), label) !=
                it->labels.end()) {
                return &*it;
            }
        }
        return nullptr;
    }

    bool var_matches(const TypeRef& have, const TypeRef& goal) {
        if (alpha_equal(have, goal)) return true;
        if (std::holds_alternative<TopType>(goal->node)) return true;
        const auto* want = std::get_if<HasPropType>(&goal->node);
        const auto* name = std::get_if<VarType>(&have->node);
        if (want && name) {
            const StructScope* s = struct_attaching(want->property);
            return s && s->name == name->name;
        }
        return false;
    }

    ExprRef pick_var(const TypeRef& goal) {
        std::vector<const std::string*> matches;
        for (const auto& [name, type] : scope) {
            if (var_matches(type, goal)) matches.push_back(&name);
        }
        if (matches.empty()) return nullptr;
        return e_var(*matches[static_cast<std::size_t>(roll(
            static_cast<int>(matches.size())))]);
    }

    ExprRef literal(const TypeRef& goal) {
        return std::visit(
            match{
                [&](const NatType&) { return e_nat(Nat(roll(100))); },
                [&](const TrueType&) { return e_true(); },
                [&](const FalseType&) { return e_false(); },
                [&](const UnionType& u) {
                    if (u.members.empty()) return e_nat(Nat(0));
                    return literal(u.members[static_cast<std::size_t>(
                        roll(static_cast<int>(u.members.size())))]);
                },
                [&](const PairType& p) {
                    return e_cons(literal(p.first), literal(p.second));
                },
                [&](const TopType&) {
                    switch (roll(4)) {
                        case 0: return e_true();
                        case 1: return e_false();
                        case 2:
                            return e_cons(e_nat(Nat(roll(10))),
                                          e_nat(Nat(roll(10))));
                        default: return e_nat(Nat(roll(100)));
                    }
                },
                [&](const VarType& x) {
                    for (const auto& s : structs) {
                        if (s.name == x.name) {
                            return e_app(e_var(s.ctor), literal(s.field));
                        }
                    }
                    return e_nat(Nat(0));
                },
                [&](const HasPropType& h) {
                    const StructScope* s = struct_attaching(h.property);
                    if (s) return e_app(e_var(s->ctor), literal(s->field));
                    return e_nat(Nat(0));
                },
                [&](const auto&) { return e_nat(Nat(0)); },
            },
            goal->node);
    }

    ExprRef let_around(const TypeRef& goal) {
        TypeRef bound_type = pick_type();
        std::string name = fresh("v");
        ExprRef rhs = expr(bound_type);
        scope.emplace_back(name, bound_type);
        ExprRef body = expr(goal);
        scope.pop_back();
        return e_let(name, std::move(rhs), std::move(body));
    }

    ExprRef apply_lambda(const TypeRef& goal) {
        TypeRef domain = pick_type();
        std::string param = fresh("x");
        scope.emplace_back(param, domain);
        ExprRef body = expr(goal);
        scope.pop_back();
        return e_app(e_lambda(param, domain, std::move(body)), expr(domain));
    }

    ExprRef branch_on_test(const TypeRef& goal) {
        return e_if(expr(t_bool()), expr(goal), expr(goal));
    }

    // (if (nat? x) (add1 x) _) on an opaque variable, when one is in scope.
    ExprRef narrow_nat() {
        ExprRef opaque = pick_var(t_top());
        if (!opaque) return e_app(e_prim(PrimOp::Add1), expr(t_nat()));
        return e_if(e_app(e_prim(PrimOp::IsNat), opaque),
                    e_app(e_prim(PrimOp::Add1), opaque), literal(t_nat()));
    }

    ExprRef expr(const TypeRef& goal) {
        if (budget <= 0) return literal(goal);
        --budget;
        if (chance(0.25)) {
            if (ExprRef var = pick_var(goal)) return var;
        }
        return std::visit(
            match{
                [&](const NatType&) {
                    switch (roll(7)) {
                        case 0: return e_app(e_prim(PrimOp::Add1), expr(t_nat()));
                        case 1: return branch_on_test(t_nat());
                        case 2: return let_around(t_nat());
                        case 3: return apply_lambda(t_nat());
                        case 4:
                            return e_proj(PathElem::Fst,
                                          e_cons(expr(t_nat()), expr(pick_type())));
                        case 5: return narrow_nat();
                        default: return literal(t_nat());
                    }
                },
                [&](const UnionType&) {
                    switch (roll(6)) {
                        case 0: return e_app(e_prim(PrimOp::Not), expr(t_top()));
                        case 1: return e_app(e_prim(PrimOp::IsNat), expr(t_top()));
                        case 2: return e_app(e_prim(PrimOp::IsBool), expr(t_top()));
                        case 3: return e_app(e_prim(PrimOp::IsPair), expr(t_top()));
                        case 4: return let_around(goal);
                        default: return literal(goal);
                    }
                },
                [&](const PairType& p) {
                    switch (roll(4)) {
                        case 0: return e_cons(expr(p.first), expr(p.second));
                        case 1: return let_around(goal);
                        case 2: return branch_on_test(goal);
                        default: return literal(goal);
                    }
                },
                [&](const TopType&) { return expr(pick_type()); },
                [&](const VarType&) { return literal(goal); },
                [&](const HasPropType&) { return literal(goal); },
                [&](const auto&) { return literal(goal); },
            },
            goal->node);
    }

    // The method-extraction shapes: a property declaration, one or two
    // structures attaching it, and a body that retrieves the property value
    // through the descriptor's accessor.
    ExprRef structured_program() {
        PropertyScope prop;
        prop.label = fresh("prop");
        prop.pred = fresh("attached");
        prop.acc = fresh("fetch");
        prop.method = chance(0.7);
        std::string desc = fresh("pd");
        TypeRef value_type =
            prop.method
                ? t_arrow("", fresh("self"), t_self(), plain_result(t_nat()))
                : t_nat();
        properties.push_back(prop);
        ExprRef body = struct_under(prop, chance(0.3) ? 2 : 1);
        properties.pop_back();
        return e_let_struct_prop(desc, prop.pred, prop.acc, prop.label,
                                 value_type, std::move(body));
    }

    ExprRef struct_under(const PropertyScope& prop, int remaining) {
        StructScope s;
        s.name = fresh("s");
        s.ctor = "mk" + s.name;
        s.pred = s.name + "?";
        s.acc = s.name + "-f";
        s.field = roll(4) == 0 ? t_bool() : t_nat();
        s.labels = {prop.label};

        ExprRef property_value;
        if (prop.method) {
            std::string receiver = fresh("this");
            ExprRef method_body;
            bool nat_field = std::holds_alternative<NatType>(s.field->node);
            if (nat_field && chance(0.7)) {
                ExprRef read = e_app(e_var(s.acc), e_var(receiver));
                method_body = chance(0.5)
                                  ? std::move(read)
                                  : e_app(e_prim(PrimOp::Add1), std::move(read));
            } else {
                method_body = e_nat(Nat(roll(50)));
            }
            property_value =
                e_lambda(receiver, t_tvar(s.name), std::move(method_body));
        } else {
            property_value = e_nat(Nat(roll(50)));
        }

        structs.push_back(s);
        ExprRef body = remaining > 1 ? struct_under(prop, remaining - 1)
                                     : extraction_body(prop);
        structs.pop_back();
        return e_let_struct(s.ctor, s.pred, s.acc, s.name, s.field,
                            {PropertyBinding{prop.label, std::move(property_value)}},
                            std::move(body));
    }

    ExprRef extraction_body(const PropertyScope& prop) {
        const StructScope& s =
            structs[static_cast<std::size_t>(roll(static_cast<int>(structs.size())))];
        ExprRef receiver = e_app(e_var(s.ctor), expr(s.field));
        std::string v = fresh("inst");

        if (!prop.method) {
            // Plain data property: read it, directly or behind a boundary.
            if (chance(0.5)) {
                return e_app(e_var(prop.acc), std::move(receiver));
            }
            return e_app(e_lambda(v, t_has_prop(prop.label),
                                  e_app(e_var(prop.acc), e_var(v))),
                         std::move(receiver));
        }

        switch (roll(6)) {
            case 0: {
                // Extraction behind a Has-Prop boundary, then invocation.
                ExprRef call =
                    e_app(e_app(e_var(prop.acc), e_var(v)), e_var(v));
                return e_app(
                    e_lambda(v, t_has_prop(prop.label), std::move(call)),
                    std::move(receiver));
            }
            case 1: {
                // Opaque receiver narrowed by the property predicate.
                ExprRef call =
                    e_app(e_app(e_var(prop.acc), e_var(v)), e_var(v));
                ExprRef guarded = e_if(e_app(e_var(prop.pred), e_var(v)),
                                       std::move(call), e_nat(Nat(roll(20))));
                return e_app(e_lambda(v, t_top(), std::move(guarded)),
                             std::move(receiver));
            }
            case 2: {
                // Invocation result flows through further arithmetic.
                ExprRef call =
                    e_app(e_app(e_var(prop.acc), e_var(v)), e_var(v));
                std::string r = fresh("r");
                ExprRef sum = e_let(r, std::move(call),
                                    e_app(e_prim(PrimOp::Add1), e_var(r)));
                return e_let(v, std::move(receiver), std::move(sum));
            }
            case 3: {
                // The extracted method escapes as the program's value.
                return e_let(v, std::move(receiver),
                             e_app(e_var(prop.acc), e_var(v)));
            }
            case 4: {
                // Structure predicate narrowing and a field read.
                ExprRef read = e_app(e_var(s.acc), e_var(v));
                ExprRef fallback = literal(s.field);
                return e_let(v, std::move(receiver),
                             e_if(e_app(e_var(s.pred), e_var(v)),
                                  std::move(read), std::move(fallback)));
            }
            default: {
                // Invoke on a let-bound instance without a boundary.
                ExprRef call =
                    e_app(e_app(e_var(prop.acc), e_var(v)), e_var(v));
                return e_let(v, std::move(receiver), std::move(call));
            }
        }
    }

    ExprRef program() {
        if (chance(0.6)) return structured_program();
        switch (roll(5)) {
            case 0: return expr(t_bool());
            case 1: return expr(t_pair(t_nat(), t_bool()));
            case 2: return expr(t_top());
            default: return expr(t_nat());
        }
    }
};

}  // namespace

ExprRef generate_program(std::uint64_t seed, int size) {
    if (size < 4) size = 4;
    for (int attempt = 0; attempt < 20; ++attempt) {
        Generator gen(splitmix(splitmix(seed) +
                               static_cast<std::uint64_t>(attempt)),
                      size);
        ExprRef candidate = gen.program();
        if (check_program(candidate).ok()) return candidate;
    }
    return e_nat(Nat(seed % 100));
}

SoundnessReport run_fuzz(std::uint64_t count, int size, std::uint64_t seed,
                         std::uint64_t fuel) {
    SoundnessReport report;
    SoundnessOptions options;
    options.fuel = fuel;
    for (std::uint64_t i = 0; i < count; ++i) {
        ExprRef program = generate_program(seed + i, size);
        ProgramVerdict verdict = check_soundness(program, options);
        if (!verdict.well_typed) continue;
        if (verdict.fuel_exhausted) {
            ++report.fuel_exhausted;
            continue;
        }
        ++report.programs_run;
        if (verdict.stuck) ++report.stuck_well_typed;
        if (!verdict.value_type_ok) ++report.value_type_violations;
        if (!verdict.props_ok) ++report.proposition_violations;
        if (!verdict.object_ok) ++report.object_violations;
        if (verdict.violated() && report.notes.size() < 20) {
            report.notes.push_back("seed " + std::to_string(seed + i) + ": " +
                                   verdict.note + "\n  " + print(program));
        }
    }
    return report;
}

}  // namespace etr
