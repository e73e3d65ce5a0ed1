#include <doctest.h>

#include <cstddef>
#include <vector>

#include "etr/logic.hpp"
#include "etr/parser.hpp"
#include "etr/printer.hpp"
#include "etr/subtyping.hpp"
#include "etr/syntax.hpp"

using namespace etr;

namespace {

// ---------------------------------------------------------------------------
// Brute-force oracle. Everything below is independent of the implementation
// under test: membership is decided by structural recursion on the type, and
// the universe enumerates every value of depth at most two built from
// Nat 0..2, true, false, and pairs.
// ---------------------------------------------------------------------------

std::vector<ValueRef> value_universe() {
    std::vector<ValueRef> scalars = {v_nat(0), v_nat(1), v_nat(2), v_true(),
                                     v_false()};
    std::vector<ValueRef> depth1 = scalars;
    for (const auto& a : scalars)
        for (const auto& b : scalars) depth1.push_back(v_pair(a, b));
    std::vector<ValueRef> depth2 = depth1;
    for (const auto& a : depth1)
        for (const auto& b : depth1) depth2.push_back(v_pair(a, b));
    return depth2;  // 5 + 25 + 900 values
}

bool oracle_member(const ValueRef& v, const TypeRef& t) {
    return std::visit(
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
            [&](const UnionType& u) {
                for (const auto& m : u.members)
                    if (oracle_member(v, m)) return true;
                return false;
            },
            [&](const PairType& p) {
                const auto* pair = std::get_if<PairValue>(&v->node);
                return pair && oracle_member(pair->first, p.first) &&
                       oracle_member(pair->second, p.second);
            },
            [&](const auto&) { return false; },
        },
        t->node);
}

// Projects along a stored-outermost-first path, innermost projection first.
// Returns nullptr when the value lacks pair structure on the way.
ValueRef oracle_project(const ValueRef& v, const std::vector<PathElem>& path) {
    ValueRef current = v;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        const auto* pair = std::get_if<PairValue>(&current->node);
        if (!pair) return nullptr;
        current = (*it == PathElem::Fst) ? pair->first : pair->second;
    }
    return current;
}

std::vector<std::size_t> members_of(const std::vector<ValueRef>& universe,
                                    const TypeRef& t) {
    std::vector<std::size_t> found;
    for (std::size_t i = 0; i < universe.size(); ++i)
        if (oracle_member(universe[i], t)) found.push_back(i);
    return found;
}

std::vector<TypeRef> type_grammar() {
    std::vector<TypeRef> base = {
        t_nat(), t_true(), t_false(), t_top(), t_bool(), t_bottom(),
    };
    std::vector<TypeRef> out = base;
    std::vector<TypeRef> pair_sides = {t_nat(), t_true(), t_top(), t_bool()};
    for (const auto& a : pair_sides)
        for (const auto& b : pair_sides) out.push_back(t_pair(a, b));
    out.push_back(t_union({t_nat(), t_pair(t_nat(), t_nat())}));
    out.push_back(t_union({t_true(), t_nat()}));
    out.push_back(t_union({t_pair(t_nat(), t_true()), t_pair(t_true(), t_nat())}));
    out.push_back(t_pair(t_pair(t_nat(), t_nat()), t_bool()));
    out.push_back(t_pair(t_top(), t_pair(t_true(), t_true())));
    return out;
}

bool subset(const std::vector<std::size_t>& inner,
            const std::vector<std::size_t>& outer) {
    std::size_t j = 0;
    for (std::size_t i : inner) {
        while (j < outer.size() && outer[j] < i) ++j;
        if (j == outer.size() || outer[j] != i) return false;
    }
    return true;
}

std::vector<std::size_t> intersect(const std::vector<std::size_t>& a,
                                   const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::size_t j = 0;
    for (std::size_t i : a) {
        while (j < b.size() && b[j] < i) ++j;
        if (j < b.size() && b[j] == i) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> difference(const std::vector<std::size_t>& a,
                                    const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::size_t j = 0;
    for (std::size_t i : a) {
        while (j < b.size() && b[j] < i) ++j;
        if (j == b.size() || b[j] != i) out.push_back(i);
    }
    return out;
}

const TypeEnv empty_env;

}  // namespace

TEST_CASE("restrict agrees with the value-set oracle") {
    std::vector<ValueRef> universe = value_universe();
    std::vector<TypeRef> grammar = type_grammar();
    std::vector<std::vector<std::size_t>> sets;
    sets.reserve(grammar.size());
    for (const auto& t : grammar) sets.push_back(members_of(universe, t));

    for (std::size_t i = 0; i < grammar.size(); ++i) {
        for (std::size_t j = 0; j < grammar.size(); ++j) {
            TypeRef restricted = restrict_type(empty_env, grammar[i], grammar[j]);
            std::vector<std::size_t> got = members_of(universe, restricted);
            std::vector<std::size_t> want = intersect(sets[i], sets[j]);
            // Never loses a value that inhabits both types.
            REQUIRE_MESSAGE(subset(want, got), print(grammar[i]), " restricted to ",
                            print(grammar[j]), " = ", print(restricted));
            // Collapses to bottom exactly when the types share no value.
            REQUIRE_MESSAGE(is_bottom_like(restricted) == want.empty(),
                            print(grammar[i]), " restricted to ", print(grammar[j]),
                            " = ", print(restricted));
        }
    }
}

TEST_CASE("remove agrees with the value-set oracle") {
    std::vector<ValueRef> universe = value_universe();
    std::vector<TypeRef> grammar = type_grammar();
    std::vector<std::vector<std::size_t>> sets;
    sets.reserve(grammar.size());
    for (const auto& t : grammar) sets.push_back(members_of(universe, t));

    for (std::size_t i = 0; i < grammar.size(); ++i) {
        for (std::size_t j = 0; j < grammar.size(); ++j) {
            TypeRef removed = remove_type(empty_env, grammar[i], grammar[j]);
            std::vector<std::size_t> got = members_of(universe, removed);
            // Keeps every value of t outside s, and invents nothing beyond t.
            REQUIRE_MESSAGE(subset(difference(sets[i], sets[j]), got),
                            print(grammar[i]), " minus ", print(grammar[j]), " = ",
                            print(removed));
            REQUIRE_MESSAGE(subset(got, sets[i]), print(grammar[i]), " minus ",
                            print(grammar[j]), " = ", print(removed));
        }
    }
}

TEST_CASE("path-directed update agrees with the value-set oracle") {
    std::vector<ValueRef> universe = value_universe();
    std::vector<TypeRef> grammar = type_grammar();
    std::vector<std::vector<PathElem>> paths = {
        {},
        {PathElem::Fst},
        {PathElem::Snd},
        {PathElem::Snd, PathElem::Fst},  // fst, then snd of the result
    };

    for (const auto& subject : grammar) {
        std::vector<std::size_t> subject_set = members_of(universe, subject);
        for (const auto& evidence : grammar) {
            for (const auto& path : paths) {
                TypeRef positive;
                try {
                    positive = update_type(empty_env, subject, path, evidence,
                                           Polarity::Positive);
                } catch (const PathMismatch&) {
                    continue;  // the subject has no such component
                }
                TypeRef negative = update_type(empty_env, subject, path,
                                               evidence, Polarity::Negative);

                std::vector<std::size_t> want_pos;
                std::vector<std::size_t> want_neg;
                for (std::size_t index : subject_set) {
                    ValueRef component = oracle_project(universe[index], path);
                    if (!component) continue;  // value too shallow to project
                    if (oracle_member(component, evidence))
                        want_pos.push_back(index);
                    else
                        want_neg.push_back(index);
                }
                REQUIRE_MESSAGE(
                    subset(want_pos, members_of(universe, positive)),
                    "update+ ", print(subject), " at path ", path.size(),
                    " with ", print(evidence), " = ", print(positive));
                REQUIRE_MESSAGE(
                    subset(want_neg, members_of(universe, negative)),
                    "update- ", print(subject), " at path ", path.size(),
                    " with ", print(evidence), " = ", print(negative));
            }
        }
    }
}

TEST_CASE("normalization folds positive facts into object types") {
    TypeEnv env;
    env = env.with_prop(parse_prop("(in x (U Nat True))"));
    env = env.with_prop(parse_prop("(not-in x Nat)"));
    NormalizedEnv normalized = normalize(env);
    TypeRef folded = lookup_object_type(normalized, env, SymObject::var("x"));
    REQUIRE(folded != nullptr);
    CHECK(subtype(env, folded, t_true()));
    CHECK(proves(env, parse_prop("(in x True)")));
}

TEST_CASE("a union with an empty member denotes the same values as without it") {
    TypeEnv env;
    env = env.with_prop(p_is(SymObject::var("x"), t_union({t_nat(), t_bottom()})));
    CHECK(proves(env, parse_prop("(in x Nat)")));
    TypeEnv plain;
    plain = plain.with_prop(p_is(SymObject::var("x"), t_nat()));
    CHECK(proves(plain, parse_prop("(in x (U Nat (U)))")));
}

TEST_CASE("contradictory facts make the environment absurd") {
    TypeEnv env;
    env = env.with_prop(parse_prop("(in x Nat)"));
    env = env.with_prop(parse_prop("(in x True)"));
    CHECK(normalize(env).absurd);
    CHECK(proves(env, p_ff()));
    CHECK(proves(env, parse_prop("(in y (U))")));
}

TEST_CASE("negative facts alone refute membership") {
    TypeEnv env;
    env = env.with_prop(parse_prop("(in x Nat)"));
    CHECK(proves(env, parse_prop("(not-in x True)")));
    CHECK_FALSE(proves(env, parse_prop("(not-in x Top)")));
}

TEST_CASE("aliasing shares facts between objects") {
    TypeEnv env;
    env = env.with_prop(parse_prop("(alias y x)"));
    env = env.with_prop(parse_prop("(in x Nat)"));
    CHECK(proves(env, parse_prop("(in y Nat)")));
    CHECK(proves(env, parse_prop("(alias x y)")));
}

TEST_CASE("path facts refine the component of a pair-typed object") {
    TypeEnv env;
    env = env.with_prop(parse_prop("(in p (Pair Top Nat))"));
    env = env.with_prop(parse_prop("(in (path (fst) p) Nat)"));
    CHECK(proves(env, parse_prop("(in p (Pair Nat Nat))")));
    CHECK(proves(env, parse_prop("(in (path (snd) p) Nat)")));
}

TEST_CASE("disjunction proves what both arms prove") {
    TypeEnv env;
    env = env.with_prop(parse_prop("(or (in x Nat) (in x True))"));
    CHECK(proves(env, parse_prop("(in x (U Nat True))")));
    CHECK_FALSE(proves(env, parse_prop("(in x Nat)")));
}

TEST_CASE("conjunction decomposes") {
    TypeEnv env;
    env = env.with_prop(parse_prop("(and (in x Nat) (in y True))"));
    CHECK(proves(env, parse_prop("(in x Nat)")));
    CHECK(proves(env, parse_prop("(in y True)")));
    CHECK(proves(env, parse_prop("(and (in y True) (in x Nat))")));
}

TEST_CASE("overlap is exact on the oracle grammar") {
    std::vector<ValueRef> universe = value_universe();
    std::vector<TypeRef> grammar = type_grammar();
    for (const auto& t : grammar) {
        for (const auto& s : grammar) {
            bool shared = false;
            for (const auto& v : universe) {
                if (oracle_member(v, t) && oracle_member(v, s)) {
                    shared = true;
                    break;
                }
            }
            CHECK_MESSAGE(overlap(empty_env, t, s) == shared, print(t), " vs ",
                          print(s));
        }
    }
}

TEST_CASE("inhabitation matches the oracle grammar") {
    std::vector<ValueRef> universe = value_universe();
    for (const auto& t : type_grammar()) {
        bool witnessed = false;
        for (const auto& v : universe) {
            if (oracle_member(v, t)) {
                witnessed = true;
                break;
            }
        }
        CHECK_MESSAGE(inhabited(t) == witnessed, print(t));
    }
}
