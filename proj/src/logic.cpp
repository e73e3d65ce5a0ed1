#include "etr/logic.hpp"

#include <algorithm>
#include <optional>

#include "etr/subtyping.hpp"

namespace etr {

// ---------------------------------------------------------------------------
// Emptiness
// ---------------------------------------------------------------------------

bool inhabited(const TypeRef& t) {
    if (!t) return false;
    return std::visit(
        match{
            [](const PairType& p) {
                return inhabited(p.first) && inhabited(p.second);
            },
            [](const UnionType& u) {
                return std::any_of(u.members.begin(), u.members.end(),
                                   inhabited);
            },
            [](const StructType& s) { return inhabited(s.field); },
            [](const auto&) { return true; },
        },
        t->node);
}

bool is_bottom_like(const TypeRef& t) {
    if (!t) return false;
    if (const auto* u = std::get_if<UnionType>(&t->node))
        return std::all_of(u->members.begin(), u->members.end(),
                           is_bottom_like);
    return false;
}

// ---------------------------------------------------------------------------
// Overlap
// ---------------------------------------------------------------------------

namespace {

enum class Kind {
    Top,
    Nat,
    True,
    False,
    SelfK,
    Pair,
    Union,
    Struct,
    PropDesc,
    HasProp,
    Var,
    Arrow
};

Kind kind_of(const TypeRef& t) {
    return std::visit(match{
                          [](const TopType&) { return Kind::Top; },
                          [](const NatType&) { return Kind::Nat; },
                          [](const TrueType&) { return Kind::True; },
                          [](const FalseType&) { return Kind::False; },
                          [](const SelfType&) { return Kind::SelfK; },
                          [](const PairType&) { return Kind::Pair; },
                          [](const UnionType&) { return Kind::Union; },
                          [](const StructType&) { return Kind::Struct; },
                          [](const PropDescType&) { return Kind::PropDesc; },
                          [](const HasPropType&) { return Kind::HasProp; },
                          [](const VarType&) { return Kind::Var; },
                          [](const ArrowType&) { return Kind::Arrow; },
                      },
                      t->node);
}

bool union_overlaps(const TypeEnv& env, const UnionType& u, const TypeRef& other) {
    return std::any_of(u.members.begin(), u.members.end(),
                       [&](const TypeRef& m) { return overlap(env, m, other); });
}

}  // namespace

bool overlap(const TypeEnv& env, const TypeRef& t, const TypeRef& s) {
    if (!inhabited(t) || !inhabited(s)) return false;
    Kind kt = kind_of(t);
    Kind ks = kind_of(s);
    // A type variable or Self stands for an unknown witness type; any
    // inhabited type may intersect it.
    if (kt == Kind::Var || ks == Kind::Var) return true;
    if (kt == Kind::SelfK || ks == Kind::SelfK) return true;
    if (kt == Kind::Top || ks == Kind::Top) return true;
    if (kt == Kind::Union)
        return union_overlaps(env, std::get<UnionType>(t->node), s);
    if (ks == Kind::Union)
        return union_overlaps(env, std::get<UnionType>(s->node), t);
    switch (kt) {
        case Kind::Nat:
        case Kind::True:
        case Kind::False:
            return ks == kt;
        case Kind::Pair: {
            if (ks != Kind::Pair) return false;
            const auto& pt = std::get<PairType>(t->node);
            const auto& ps = std::get<PairType>(s->node);
            return overlap(env, pt.first, ps.first) &&
                   overlap(env, pt.second, ps.second);
        }
        case Kind::Struct: {
            const auto& st = std::get<StructType>(t->node);
            if (ks == Kind::Struct)
                return st.stamp == std::get<StructType>(s->node).stamp;
            if (ks == Kind::HasProp) {
                const auto& h = std::get<HasPropType>(s->node);
                return std::find(st.properties.begin(), st.properties.end(),
                                 h.property) != st.properties.end();
            }
            return false;
        }
        case Kind::HasProp: {
            if (ks == Kind::HasProp) return true;
            if (ks == Kind::Struct) return overlap(env, s, t);
            return false;
        }
        case Kind::PropDesc:
            // Descriptors inhabit exactly the Prop type of their declared
            // value type, so distinct Prop types are disjoint.
            return ks == Kind::PropDesc && alpha_equal(t, s);
        case Kind::Arrow:
            return ks == Kind::Arrow;
        default:
            return false;
    }
}

// ---------------------------------------------------------------------------
// restrict / remove / update
// ---------------------------------------------------------------------------

TypeRef restrict_type(const TypeEnv& env, const TypeRef& t, const TypeRef& s) {
    if (!overlap(env, t, s)) return t_bottom();
    if (const auto* u = std::get_if<UnionType>(&t->node)) {
        std::vector<TypeRef> members;
        members.reserve(u->members.size());
        for (const auto& m : u->members)
            members.push_back(restrict_type(env, m, s));
        return t_union(std::move(members));
    }
    if (subtype(env, t, s)) return t;
    return s;
}

TypeRef remove_type(const TypeEnv& env, const TypeRef& t, const TypeRef& s) {
    if (subtype(env, t, s)) return t_bottom();
    if (const auto* u = std::get_if<UnionType>(&t->node)) {
        std::vector<TypeRef> members;
        members.reserve(u->members.size());
        for (const auto& m : u->members)
            members.push_back(remove_type(env, m, s));
        return t_union(std::move(members));
    }
    return t;
}

namespace {

// Shared descent for update_type and normalize's refinement step. The public
// entry throws on a path mismatch; normalization skips the pair instead.
std::optional<TypeRef> update_impl(const TypeEnv& env, const TypeRef& subject,
                                   const std::vector<PathElem>& path,
                                   std::size_t length, const TypeRef& evidence,
                                   Polarity polarity, bool throwing) {
    if (length == 0)
        return polarity == Polarity::Positive
                   ? restrict_type(env, subject, evidence)
                   : remove_type(env, subject, evidence);
    if (const auto* p = std::get_if<PairType>(&subject->node)) {
        PathElem elem = path[length - 1];
        auto inner = update_impl(env,
                                 elem == PathElem::Fst ? p->first : p->second,
                                 path, length - 1, evidence, polarity,
                                 throwing);
        if (!inner) return std::nullopt;
        return elem == PathElem::Fst ? t_pair(*inner, p->second)
                                     : t_pair(p->first, *inner);
    }
    if (const auto* u = std::get_if<UnionType>(&subject->node)) {
        std::vector<TypeRef> members;
        members.reserve(u->members.size());
        for (const auto& m : u->members) {
            auto updated =
                update_impl(env, m, path, length, evidence, polarity, throwing);
            if (!updated) return std::nullopt;
            members.push_back(*updated);
        }
        return t_union(std::move(members));
    }
    // Top could be any pair; no component refinement is recorded.
    if (std::holds_alternative<TopType>(subject->node)) return subject;
    if (throwing)
        throw PathMismatch("path selects a pair field of a non-pair type");
    return std::nullopt;
}

}  // namespace

TypeRef update_type(const TypeEnv& env, const TypeRef& subject,
                    const std::vector<PathElem>& path, const TypeRef& evidence,
                    Polarity polarity) {
    return *update_impl(env, subject, path, path.size(), evidence, polarity,
                        true);
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

SymObject NormalizedEnv::find(const SymObject& o) const {
    SymObject current = o;
    for (;;) {
        auto it = parent.find(current);
        if (it == parent.end()) return current;
        current = it->second;
    }
}

bool NormalizedEnv::aliased(const SymObject& a, const SymObject& b) const {
    if (a.is_null || b.is_null) return false;
    return find(a) == find(b);
}

const std::vector<TypeRef>* NormalizedEnv::positive_facts(
    const SymObject& o) const {
    auto it = positive.find(find(o));
    if (it == positive.end() || it->second.empty()) return nullptr;
    return &it->second;
}

const std::vector<TypeRef>* NormalizedEnv::negative_facts(
    const SymObject& o) const {
    auto it = negative.find(find(o));
    if (it == negative.end() || it->second.empty()) return nullptr;
    return &it->second;
}

namespace {

void add_fact(std::map<SymObject, std::vector<TypeRef>>& table,
              const SymObject& key, const TypeRef& type) {
    auto& facts = table[key];
    for (const auto& existing : facts)
        if (alpha_equal(existing, type)) return;
    facts.push_back(type);
}

void union_objects(NormalizedEnv& env, const SymObject& a, const SymObject& b) {
    SymObject ra = env.find(a);
    SymObject rb = env.find(b);
    if (ra == rb) return;
    env.parent[rb] = ra;
    auto move_facts = [&](std::map<SymObject, std::vector<TypeRef>>& table) {
        auto it = table.find(rb);
        if (it == table.end()) return;
        for (const auto& t : it->second) add_fact(table, ra, t);
        table.erase(it);
    };
    move_facts(env.positive);
    move_facts(env.negative);
}

// True when extended = prefix ++ base for the same variable; fills the
// leading path segment that the extended object adds.
bool extends_object(const SymObject& base, const SymObject& extended,
                    std::vector<PathElem>& prefix) {
    if (base.is_null || extended.is_null) return false;
    if (base.base != extended.base) return false;
    if (extended.path.size() < base.path.size()) return false;
    std::size_t extra = extended.path.size() - base.path.size();
    if (!std::equal(base.path.begin(), base.path.end(),
                    extended.path.begin() + static_cast<std::ptrdiff_t>(extra)))
        return false;
    prefix.assign(extended.path.begin(),
                  extended.path.begin() + static_cast<std::ptrdiff_t>(extra));
    return true;
}

TypeRef fold_positive(const TypeEnv& env, const std::vector<TypeRef>& facts) {
    TypeRef acc = facts.front();
    for (std::size_t i = 1; i < facts.size(); ++i)
        acc = restrict_type(env, acc, facts[i]);
    return acc;
}

// Applies the refinement rules until no new fact appears, then decides
// absurdity from the folded facts.
void finalize(NormalizedEnv& norm, const TypeEnv& env) {
    if (norm.absurd) return;
    const int kMaxSweeps = 64;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool changed = false;
        // Snapshot keys/facts: refinement appends to existing entries only.
        std::vector<std::pair<SymObject, std::vector<TypeRef>>> pos_snapshot(
            norm.positive.begin(), norm.positive.end());
        std::vector<std::pair<SymObject, std::vector<TypeRef>>> neg_snapshot(
            norm.negative.begin(), norm.negative.end());
        for (const auto& [base_obj, base_facts] : pos_snapshot) {
            for (const auto& [ext_obj, ext_facts] : pos_snapshot) {
                std::vector<PathElem> prefix;
                if (!extends_object(base_obj, ext_obj, prefix)) continue;
                if (prefix.empty() && base_obj == ext_obj &&
                    base_facts.size() < 2 && ext_facts.size() < 2)
                    continue;
                for (const auto& base_fact : base_facts) {
                    for (const auto& evidence : ext_facts) {
                        if (prefix.empty() && base_fact == evidence) continue;
                        auto refined = update_impl(env, base_fact, prefix,
                                                   prefix.size(), evidence,
                                                   Polarity::Positive, false);
                        if (!refined || alpha_equal(*refined, base_fact))
                            continue;
                        auto& facts = norm.positive[base_obj];
                        bool known = false;
                        for (const auto& f : facts)
                            if (alpha_equal(f, *refined)) known = true;
                        if (!known) {
                            facts.push_back(*refined);
                            changed = true;
                        }
                    }
                }
            }
            for (const auto& [ext_obj, ext_facts] : neg_snapshot) {
                std::vector<PathElem> prefix;
                if (!extends_object(base_obj, ext_obj, prefix)) continue;
                for (const auto& base_fact : base_facts) {
                    for (const auto& evidence : ext_facts) {
                        auto refined = update_impl(env, base_fact, prefix,
                                                   prefix.size(), evidence,
                                                   Polarity::Negative, false);
                        if (!refined || alpha_equal(*refined, base_fact))
                            continue;
                        auto& facts = norm.positive[base_obj];
                        bool known = false;
                        for (const auto& f : facts)
                            if (alpha_equal(f, *refined)) known = true;
                        if (!known) {
                            facts.push_back(*refined);
                            changed = true;
                        }
                    }
                }
            }
        }
        if (!changed) break;
    }
    for (const auto& [obj, facts] : norm.positive) {
        if (facts.empty()) continue;
        if (is_bottom_like(fold_positive(env, facts))) {
            norm.absurd = true;
            return;
        }
    }
}

NormalizedEnv merge_branches(const NormalizedEnv& a, const NormalizedEnv& b,
                             const TypeEnv& env) {
    if (a.absurd) return b;
    if (b.absurd) return a;
    NormalizedEnv out;
    // An object's merged positive knowledge is the union of what each branch
    // proves about it; objects known on one side only are dropped.
    for (const auto& [obj, facts_a] : a.positive) {
        if (facts_a.empty()) continue;
        const auto* facts_b = b.positive_facts(obj);
        if (!facts_b) continue;
        TypeRef fold_a = fold_positive(env, facts_a);
        TypeRef fold_b = fold_positive(env, *facts_b);
        add_fact(out.positive, obj,
                 alpha_equal(fold_a, fold_b) ? fold_a
                                             : t_union({fold_a, fold_b}));
    }
    for (const auto& [obj, negs_a] : a.negative) {
        const auto* negs_b = b.negative_facts(obj);
        if (!negs_b) continue;
        for (const auto& na : negs_a)
            for (const auto& nb : *negs_b)
                if (alpha_equal(na, nb)) add_fact(out.negative, obj, na);
    }
    std::vector<SymObject> objects;
    auto note = [&](const SymObject& o) {
        if (std::find(objects.begin(), objects.end(), o) == objects.end())
            objects.push_back(o);
    };
    for (const auto& entry : a.parent) {
        note(entry.first);
        note(entry.second);
    }
    for (std::size_t i = 0; i < objects.size(); ++i)
        for (std::size_t j = i + 1; j < objects.size(); ++j)
            if (a.aliased(objects[i], objects[j]) &&
                b.aliased(objects[i], objects[j]))
                union_objects(out, objects[i], objects[j]);
    finalize(out, env);
    return out;
}

NormalizedEnv normalize_props(NormalizedEnv norm, std::vector<PropRef> todo,
                              const TypeEnv& env) {
    while (!todo.empty()) {
        PropRef prop = todo.back();
        todo.pop_back();
        if (norm.absurd) return norm;
        bool split = false;
        NormalizedEnv result;
        std::visit(
            match{
                [&](const TrivialProp&) {},
                [&](const AbsurdProp&) { norm.absurd = true; },
                [&](const TypeOfProp& tp) {
                    if (tp.object.non_null())
                        add_fact(norm.positive, norm.find(tp.object), tp.type);
                },
                [&](const NotTypeOfProp& tp) {
                    if (tp.object.non_null())
                        add_fact(norm.negative, norm.find(tp.object), tp.type);
                },
                [&](const AliasProp& al) {
                    union_objects(norm, al.left, al.right);
                },
                [&](const AndProp& ap) {
                    todo.push_back(ap.left);
                    todo.push_back(ap.right);
                },
                [&](const OrProp& op) {
                    std::vector<PropRef> left_todo = todo;
                    left_todo.push_back(op.left);
                    std::vector<PropRef> right_todo = std::move(todo);
                    right_todo.push_back(op.right);
                    NormalizedEnv left =
                        normalize_props(norm, std::move(left_todo), env);
                    NormalizedEnv right =
                        normalize_props(std::move(norm), std::move(right_todo),
                                        env);
                    result = merge_branches(left, right, env);
                    split = true;
                },
            },
            prop->node);
        if (split) return result;
        if (norm.absurd) return norm;
    }
    finalize(norm, env);
    return norm;
}

}  // namespace

NormalizedEnv normalize(const TypeEnv& env) {
    // The worklist is consumed from the back; push in reverse to process
    // propositions in their environment order.
    std::vector<PropRef> todo(env.props.rbegin(), env.props.rend());
    return normalize_props(NormalizedEnv{}, std::move(todo), env);
}

// ---------------------------------------------------------------------------
// Entailment
// ---------------------------------------------------------------------------

TypeRef lookup_object_type(const NormalizedEnv& normalized, const TypeEnv& env,
                           const SymObject& o) {
    if (normalized.absurd) return t_bottom();
    const auto* facts = normalized.positive_facts(o);
    if (!facts) return nullptr;
    return fold_positive(env, *facts);
}

namespace {

// The component of `t` selected by one projection, or null when `t` does not
// determine it (non-pair shapes).
TypeRef pair_component(const TypeRef& t, PathElem which) {
    if (const auto* pair = std::get_if<PairType>(&t->node))
        return which == PathElem::Fst ? pair->first : pair->second;
    if (const auto* u = std::get_if<UnionType>(&t->node)) {
        std::vector<TypeRef> members;
        for (const TypeRef& member : u->members) {
            if (is_bottom_like(member)) continue;
            TypeRef component = pair_component(member, which);
            if (!component) return nullptr;
            members.push_back(component);
        }
        return t_union(std::move(members));
    }
    return nullptr;
}

// What the base variable's facts say about a path object: the base type
// projected through the path, innermost projection first. Null when the base
// is unknown or some step is not pair-shaped.
TypeRef projected_object_type(const NormalizedEnv& normalized,
                              const TypeEnv& env, const SymObject& o) {
    if (o.is_null || o.path.empty()) return nullptr;
    TypeRef current =
        lookup_object_type(normalized, env, SymObject::var(o.base));
    for (auto it = o.path.rbegin(); current && it != o.path.rend(); ++it)
        current = pair_component(current, *it);
    return current;
}

}  // namespace

bool proves_normalized(const NormalizedEnv& normalized, const TypeEnv& env,
                       const PropRef& goal) {
    if (normalized.absurd) return true;
    return std::visit(
        match{
            [&](const TrivialProp&) { return true; },
            [&](const AbsurdProp&) { return false; },
            [&](const AndProp& ap) {
                return proves_normalized(normalized, env, ap.left) &&
                       proves_normalized(normalized, env, ap.right);
            },
            [&](const OrProp& op) {
                return proves_normalized(normalized, env, op.left) ||
                       proves_normalized(normalized, env, op.right);
            },
            [&](const TypeOfProp& tp) {
                if (tp.object.is_null) return true;
                if (const auto* facts =
                        normalized.positive_facts(tp.object)) {
                    for (const auto& fact : *facts)
                        if (subtype(env, fact, tp.type)) return true;
                    if (subtype(env, fold_positive(env, *facts), tp.type))
                        return true;
                }
                // A pair-typed base also fixes the types of its projections.
                TypeRef projected =
                    projected_object_type(normalized, env, tp.object);
                return projected && subtype(env, projected, tp.type);
            },
            [&](const NotTypeOfProp& tp) {
                if (tp.object.is_null) return true;
                if (const auto* negs = normalized.negative_facts(tp.object)) {
                    for (const auto& neg : *negs)
                        if (subtype(env, tp.type, neg)) return true;
                }
                if (const auto* facts =
                        normalized.positive_facts(tp.object)) {
                    if (!overlap(env, fold_positive(env, *facts), tp.type))
                        return true;
                }
                TypeRef projected =
                    projected_object_type(normalized, env, tp.object);
                return projected && !overlap(env, projected, tp.type);
            },
            [&](const AliasProp& al) {
                return normalized.aliased(al.left, al.right);
            },
        },
        goal->node);
}

bool proves(const TypeEnv& env, const PropRef& goal) {
    return proves_normalized(normalize(env), env, goal);
}

}  // namespace etr
