// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Every oracle here is recomputed locally so the gate stands on its own.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "etr/eval.hpp"
#include "etr/logic.hpp"
#include "etr/parser.hpp"
#include "etr/printer.hpp"
#include "etr/soundness.hpp"
#include "etr/subtyping.hpp"
#include "etr/typecheck.hpp"

#if !defined(_WIN32)
#include <sys/wait.h>
#endif

using namespace etr;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Harness

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s (%s)\n", n, pass ? "PASS" : "FAIL",
                detail.c_str());
    if (!pass) ++failures;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_seconds(double s) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2fs", s);
    return buffer;
}

std::vector<std::string> corpus_sources() {
    std::vector<std::filesystem::path> paths;
    for (const auto& entry :
         std::filesystem::directory_iterator(ETR_CORPUS_DIR)) {
        if (entry.path().extension() == ".etr") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<std::string> sources;
    for (const auto& path : paths) {
        std::ifstream in(path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        sources.push_back(buffer.str());
    }
    return sources;
}

SourceLoc position_of(const std::string& source, const std::string& needle) {
    std::size_t at = source.find(needle);
    SourceLoc loc{1, 1};
    if (at == std::string::npos) return SourceLoc{};
    for (std::size_t i = 0; i < at; ++i) {
        if (source[i] == '\n') {
            ++loc.line;
            loc.col = 1;
        } else {
            ++loc.col;
        }
    }
    return loc;
}

struct CommandResult {
    int status = -1;
    std::string output;
};

CommandResult run_command(const std::string& args) {
    std::string command =
        "ETR_COLOR=0 \"" + std::string(ETR_BIN_PATH) + "\" " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    CommandResult result;
    if (pipe == nullptr) return result;
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof buffer, pipe)) {
        result.output.append(buffer, n);
    }
    int raw = pclose(pipe);
#if defined(_WIN32)
    result.status = raw;
#else
    result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#endif
    return result;
}

void walk(const ExprRef& e, const std::function<void(const ExprRef&)>& fn) {
    if (e == nullptr) return;
    fn(e);
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, LambdaExpr>) {
                walk(node.body, fn);
            } else if constexpr (std::is_same_v<T, AppExpr>) {
                walk(node.fn, fn);
                walk(node.arg, fn);
            } else if constexpr (std::is_same_v<T, IfExpr>) {
                walk(node.test, fn);
                walk(node.then_branch, fn);
                walk(node.else_branch, fn);
            } else if constexpr (std::is_same_v<T, LetExpr>) {
                walk(node.rhs, fn);
                walk(node.body, fn);
            } else if constexpr (std::is_same_v<T, ConsExpr>) {
                walk(node.first, fn);
                walk(node.second, fn);
            } else if constexpr (std::is_same_v<T, ProjExpr>) {
                walk(node.target, fn);
            } else if constexpr (std::is_same_v<T, LetStructExpr>) {
                for (const auto& binding : node.properties) {
                    walk(binding.value, fn);
                }
                walk(node.body, fn);
            } else if constexpr (std::is_same_v<T, LetStructPropExpr>) {
                walk(node.body, fn);
            }
        },
        e->node);
}

// ---------------------------------------------------------------------------
// The pinned programs

const std::string kWorkedExample =
    "(let-struct-property ((pnorm norm? norm-accessor)\n"
    "                      (norm (-> (x : Self) Nat)))\n"
    "  (let-struct ((mkpoint point? point-x)\n"
    "               (point Nat ((norm (lambda (this : point) (point-x "
    "this))))))\n"
    "    ((lambda (v : (Has-Prop norm))\n"
    "       ((norm-accessor v) v))\n"
    "     (mkpoint 3))))\n";

const std::string kReceiverSwap =
    "(let-struct-property ((pnorm norm? norm-accessor)\n"
    "                      (norm (-> (x : Self) Nat)))\n"
    "  (let-struct ((mkpoint point? point-x)\n"
    "               (point Nat ((norm (lambda (this : point) (point-x "
    "this))))))\n"
    "    ((lambda (v : (Has-Prop norm))\n"
    "       ((lambda (w : (Has-Prop norm))\n"
    "          ((norm-accessor v) w))\n"
    "        (mkpoint 4)))\n"
    "     (mkpoint 3))))\n";

const std::string kGenerativeStructs =
    "(let-struct ((mkfoo foo? foo-a) (foo Nat ()))\n"
    "  (let (y (let-struct ((mkfoo2 foo2? foo-b) (foo Bool ()))\n"
    "            (mkfoo2 true)))\n"
    "    (foo-a y)))\n";

const std::string kRedeclaredLabel =
    "(let-struct-property ((p p? p-acc) (prop Nat))\n"
    "  (let-struct ((mkfoo foo? foo-b) (foo Nat ((prop 42))))\n"
    "    (let (v (mkfoo 10))\n"
    "      (let-struct-property ((p1 p1? p-acc1) (prop (-> (x : Self) Nat)))\n"
    "        ((p-acc1 v) v)))))\n";

// ---------------------------------------------------------------------------
// Criterion 1: the worked example types at Nat and evaluates to 3.

void criterion_1() {
    Clock::time_point start = Clock::now();
    std::string detail;
    bool pass = false;
    CheckOutcome outcome = check_program(parse_program(kWorkedExample));
    if (!outcome.ok()) {
        detail = "did not type-check: " + outcome.diagnostics.front().message;
    } else if (print(outcome.result->type) != "Nat") {
        detail = "type " + print(outcome.result->type) + ", expected Nat";
    } else {
        EvalOutcome run = evaluate(outcome.resolved);
        if (!run.ok()) {
            detail = "evaluation stuck: " + run.stuck->message;
        } else if (!value_equal(run.value, v_nat(3))) {
            detail = "value " + print_value(run.value) + ", expected 3";
        } else {
            double elapsed = seconds_since(start);
            pass = elapsed < 1.0;
            detail = "type Nat, value 3, " + format_seconds(elapsed);
            if (!pass) detail += " exceeds 1s";
        }
    }
    report(1, pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 2: generativity rejections and the unsafe runtime failure.

void criterion_2() {
    std::vector<std::string> problems;

    CheckOutcome structs = check_program(parse_program(kGenerativeStructs));
    SourceLoc want = position_of(kGenerativeStructs, "(foo-a y)");
    if (structs.ok()) {
        problems.push_back("distinct-struct program accepted");
    } else {
        const Diagnostic& d = structs.diagnostics.front();
        if (d.code != ErrorCode::TypeMismatch) {
            problems.push_back(std::string("struct rejection code ") +
                               error_code_name(d.code));
        }
        if (d.loc.line != want.line || d.loc.col != want.col) {
            problems.push_back(
                "struct rejection at " + std::to_string(d.loc.line) + ":" +
                std::to_string(d.loc.col) + ", expected " +
                std::to_string(want.line) + ":" + std::to_string(want.col));
        }
    }

    CheckOutcome labels = check_program(parse_program(kRedeclaredLabel));
    SourceLoc inner =
        position_of(kRedeclaredLabel, "(let-struct-property ((p1");
    if (labels.ok()) {
        problems.push_back("redeclared-label program accepted");
    } else {
        const Diagnostic& d = labels.diagnostics.front();
        if (d.code != ErrorCode::PropertyRedeclared) {
            problems.push_back(std::string("label rejection code ") +
                               error_code_name(d.code));
        }
        if (d.loc.line != inner.line || d.loc.col != inner.col) {
            problems.push_back("label rejection not at the inner declaration");
        }
    }

    // Running the rejected program anyway reproduces the runtime failure.
    if (labels.resolved == nullptr) {
        problems.push_back("no resolved tree for the rejected program");
    } else {
        EvalOutcome run = evaluate(labels.resolved);
        if (run.ok() || run.stuck->kind != StuckKind::ApplyNonFunction) {
            problems.push_back("unsafe run did not stop at apply-non-function");
        }
    }
    std::filesystem::path file =
        std::filesystem::temp_directory_path() / "etr_acceptance_label.etr";
    {
        std::ofstream out(file);
        out << kRedeclaredLabel;
    }
    CommandResult unsafe = run_command("run --unsafe " + file.string());
    if (unsafe.status != 3 ||
        unsafe.output.find("apply-non-function") == std::string::npos) {
        problems.push_back("cli --unsafe run exited " +
                           std::to_string(unsafe.status));
    }

    if (problems.empty()) {
        report(2, true,
               "both programs rejected at the pinned locations, unsafe run "
               "stuck at apply-non-function");
    } else {
        report(2, false, problems.front());
    }
}

// ---------------------------------------------------------------------------
// Criterion 3: extracted methods only accept their own receiver.

void criterion_3() {
    CheckOutcome original = check_program(parse_program(kWorkedExample));
    CheckOutcome swapped = check_program(parse_program(kReceiverSwap));
    bool pass = original.ok() && !swapped.ok();
    std::string detail;
    if (!original.ok()) {
        detail = "original extraction rejected";
    } else if (swapped.ok()) {
        detail = "receiver swap accepted";
    } else {
        detail = "original accepted, swapped receiver rejected with " +
                 std::string(error_code_name(swapped.diagnostics.front().code));
    }
    report(3, pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 4: the operation tables match their definitions exhaustively.

std::optional<ValueRef> oracle_prim(PrimOp op, const ValueRef& v) {
    switch (op) {
        case PrimOp::Not:
            return std::holds_alternative<FalseValue>(v->node) ? v_true()
                                                               : v_false();
        case PrimOp::Add1:
            if (const auto* n = std::get_if<NatValue>(&v->node)) {
                return v_nat(n->value + 1);
            }
            return std::nullopt;
        case PrimOp::IsNat:
            return v_bool(std::holds_alternative<NatValue>(v->node));
        case PrimOp::IsBool:
            return v_bool(std::holds_alternative<TrueValue>(v->node) ||
                          std::holds_alternative<FalseValue>(v->node));
        case PrimOp::IsPair:
            return v_bool(std::holds_alternative<PairValue>(v->node));
    }
    return std::nullopt;
}

bool oracle_is_instance_of(const ValueRef& v, const TypeRef& struct_type) {
    const auto* inst = std::get_if<StructInstanceValue>(&v->node);
    return inst != nullptr && alpha_equal(inst->struct_type, struct_type);
}

const ValueRef* oracle_property_slot(const ValueRef& v,
                                     const std::string& label) {
    const auto* inst = std::get_if<StructInstanceValue>(&v->node);
    if (inst == nullptr) return nullptr;
    for (const auto& [name, stored] : inst->properties) {
        if (name == label) return &stored;
    }
    return nullptr;
}

std::optional<ValueRef> oracle_struct_op(const ValueRef& op,
                                         const ValueRef& arg) {
    if (const auto* ctor = std::get_if<CtorValue>(&op->node)) {
        return v_instance(ctor->struct_type, arg, ctor->properties);
    }
    if (const auto* pred = std::get_if<PredValue>(&op->node)) {
        return v_bool(oracle_is_instance_of(arg, pred->struct_type));
    }
    if (const auto* acc = std::get_if<AccValue>(&op->node)) {
        if (!oracle_is_instance_of(arg, acc->struct_type)) return std::nullopt;
        return std::get<StructInstanceValue>(arg->node).field;
    }
    if (const auto* ppred = std::get_if<PropPredValue>(&op->node)) {
        return v_bool(oracle_property_slot(arg, ppred->property) != nullptr);
    }
    const auto& pacc = std::get<PropAccValue>(op->node);
    const ValueRef* slot = oracle_property_slot(arg, pacc.property);
    if (slot == nullptr) return std::nullopt;
    return *slot;
}

std::vector<ValueRef> operation_arguments() {
    TypeRef s_type = t_struct("s", 1, t_nat(), {"m"});
    TypeRef s_other_stamp = t_struct("s", 2, t_nat(), {"m"});
    TypeRef u_type = t_struct("u", 3, t_bool(), {});
    ValueRef closure =
        evaluate(check_program(parse_program("(lambda (x : Top) x)")).resolved)
            .value;

    std::vector<ValueRef> values;
    values.push_back(v_nat(0));
    values.push_back(v_nat(1));
    values.push_back(v_nat(7));
    values.push_back(v_true());
    values.push_back(v_false());
    values.push_back(v_prim(PrimOp::Not));
    values.push_back(v_prim(PrimOp::Add1));
    values.push_back(v_pair(v_nat(1), v_true()));
    values.push_back(v_pair(v_pair(v_nat(0), v_nat(0)), v_false()));
    values.push_back(closure);
    values.push_back(v_instance(s_type, v_nat(3), {{"m", v_nat(42)}}));
    values.push_back(v_instance(s_type, v_nat(4), {}));
    values.push_back(v_instance(s_other_stamp, v_nat(3), {{"m", v_nat(42)}}));
    values.push_back(v_instance(u_type, v_true(), {}));
    values.push_back(v_prop_desc("m"));
    values.push_back(v_ctor(s_type, {{"m", v_nat(42)}}));
    values.push_back(v_pred(s_type));
    values.push_back(v_acc(s_type));
    values.push_back(v_prop_pred("m"));
    values.push_back(v_prop_acc("m", t_nat()));
    return values;
}

void criterion_4() {
    const std::vector<ValueRef> values = operation_arguments();
    int prim_cases = 0;
    int prim_mismatches = 0;
    for (PrimOp op : {PrimOp::Not, PrimOp::Add1, PrimOp::IsNat, PrimOp::IsBool,
                      PrimOp::IsPair}) {
        for (const ValueRef& arg : values) {
            ++prim_cases;
            std::optional<ValueRef> expected = oracle_prim(op, arg);
            ValueRef actual;
            std::optional<StuckKind> stuck;
            try {
                actual = apply_prim(op, arg);
            } catch (const StuckError& e) {
                stuck = e.kind;
            }
            bool agrees =
                expected.has_value()
                    ? (actual != nullptr && value_equal(actual, *expected))
                    : (stuck == StuckKind::DeltaDomain);
            if (!agrees) ++prim_mismatches;
        }
    }

    TypeRef s_type = t_struct("s", 1, t_nat(), {"m"});
    const std::vector<ValueRef> ops = {
        v_ctor(s_type, {{"m", v_nat(42)}}), v_pred(s_type), v_acc(s_type),
        v_prop_pred("m"), v_prop_acc("m", t_nat())};
    int struct_cases = 0;
    int struct_mismatches = 0;
    for (const ValueRef& op : ops) {
        for (const ValueRef& arg : values) {
            ++struct_cases;
            std::optional<ValueRef> expected = oracle_struct_op(op, arg);
            ValueRef actual;
            std::optional<StuckKind> stuck;
            try {
                actual = apply_struct_op(op, arg);
            } catch (const StuckError& e) {
                stuck = e.kind;
            }
            bool agrees =
                expected.has_value()
                    ? (actual != nullptr && value_equal(actual, *expected))
                    : (stuck == StuckKind::MissingProperty);
            if (!agrees) ++struct_mismatches;
        }
    }

    bool pass = prim_mismatches == 0 && struct_mismatches == 0 &&
                prim_cases <= 200 && struct_cases <= 200;
    report(4, pass,
           std::to_string(prim_cases) + " primitive and " +
               std::to_string(struct_cases) + " structure cases, " +
               std::to_string(prim_mismatches + struct_mismatches) +
               " mismatches");
}

// ---------------------------------------------------------------------------
// Criterion 5: update/restrict/remove against value-set enumeration.

bool oracle_member(const ValueRef& v, const TypeRef& t);

bool oracle_member(const ValueRef& v, const TypeRef& t) {
    return std::visit(
        [&](const auto& node) -> bool {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, TopType>) {
                return true;
            } else if constexpr (std::is_same_v<T, NatType>) {
                return std::holds_alternative<NatValue>(v->node);
            } else if constexpr (std::is_same_v<T, TrueType>) {
                return std::holds_alternative<TrueValue>(v->node);
            } else if constexpr (std::is_same_v<T, FalseType>) {
                return std::holds_alternative<FalseValue>(v->node);
            } else if constexpr (std::is_same_v<T, UnionType>) {
                for (const TypeRef& member : node.members) {
                    if (oracle_member(v, member)) return true;
                }
                return false;
            } else if constexpr (std::is_same_v<T, PairType>) {
                const auto* pair = std::get_if<PairValue>(&v->node);
                return pair != nullptr && oracle_member(pair->first, node.first) &&
                       oracle_member(pair->second, node.second);
            } else {
                return false;
            }
        },
        t->node);
}

ValueRef oracle_project(ValueRef v, const std::vector<PathElem>& path) {
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        const auto* pair = std::get_if<PairValue>(&v->node);
        if (pair == nullptr) return nullptr;
        v = (*it == PathElem::Fst) ? pair->first : pair->second;
    }
    return v;
}

void criterion_5() {
    Clock::time_point start = Clock::now();

    std::vector<ValueRef> scalars = {v_nat(0), v_nat(1), v_nat(2), v_true(),
                                     v_false()};
    std::vector<ValueRef> universe = scalars;
    std::vector<ValueRef> depth1;
    for (const ValueRef& a : scalars) {
        for (const ValueRef& b : scalars) depth1.push_back(v_pair(a, b));
    }
    universe.insert(universe.end(), depth1.begin(), depth1.end());
    std::vector<ValueRef> shallow = universe;
    for (const ValueRef& a : shallow) {
        for (const ValueRef& b : shallow) {
            bool both_scalar = !std::holds_alternative<PairValue>(a->node) &&
                               !std::holds_alternative<PairValue>(b->node);
            if (!both_scalar) universe.push_back(v_pair(a, b));
        }
    }

    std::vector<TypeRef> types = {t_top(),  t_nat(),    t_true(),
                                  t_false(), t_bool(), t_bottom()};
    const std::vector<TypeRef> pair_bases = {t_nat(), t_true(), t_top(),
                                             t_bool()};
    for (const TypeRef& a : pair_bases) {
        for (const TypeRef& b : pair_bases) types.push_back(t_pair(a, b));
    }
    types.push_back(t_union({t_nat(), t_true()}));
    types.push_back(t_union({t_true(), t_false(), t_nat()}));
    types.push_back(t_union({t_pair(t_nat(), t_nat()), t_false()}));
    types.push_back(t_pair(t_pair(t_nat(), t_top()), t_true()));
    types.push_back(t_pair(t_bool(), t_pair(t_nat(), t_nat())));

    std::vector<std::vector<char>> members(
        types.size(), std::vector<char>(universe.size(), 0));
    for (std::size_t ti = 0; ti < types.size(); ++ti) {
        for (std::size_t vi = 0; vi < universe.size(); ++vi) {
            members[ti][vi] = oracle_member(universe[vi], types[ti]);
        }
    }

    const TypeEnv env;
    long long mismatches = 0;
    long long checks = 0;

    for (std::size_t ti = 0; ti < types.size(); ++ti) {
        for (std::size_t si = 0; si < types.size(); ++si) {
            TypeRef restricted = restrict_type(env, types[ti], types[si]);
            TypeRef removed = remove_type(env, types[ti], types[si]);
            bool any_shared = false;
            for (std::size_t vi = 0; vi < universe.size(); ++vi) {
                ++checks;
                bool in_both = members[ti][vi] && members[si][vi];
                any_shared = any_shared || in_both;
                if (in_both && !oracle_member(universe[vi], restricted)) {
                    ++mismatches;
                }
                bool in_difference = members[ti][vi] && !members[si][vi];
                bool in_removed = oracle_member(universe[vi], removed);
                if (in_difference && !in_removed) ++mismatches;
                if (in_removed && !members[ti][vi]) ++mismatches;
            }
            // restrict is bottom exactly when the enumeration is disjoint.
            if (is_bottom_like(restricted) == any_shared) ++mismatches;
        }
    }

    const std::vector<std::vector<PathElem>> paths = {
        {},
        {PathElem::Fst},
        {PathElem::Snd},
        {PathElem::Snd, PathElem::Fst}};
    for (std::size_t ti = 0; ti < types.size(); ++ti) {
        for (const auto& path : paths) {
            for (std::size_t si = 0; si < types.size(); ++si) {
                for (Polarity polarity :
                     {Polarity::Positive, Polarity::Negative}) {
                    TypeRef updated;
                    try {
                        updated = update_type(env, types[ti], path, types[si],
                                              polarity);
                    } catch (const PathMismatch&) {
                        continue;
                    }
                    for (std::size_t vi = 0; vi < universe.size(); ++vi) {
                        if (!members[ti][vi]) continue;
                        ValueRef component =
                            oracle_project(universe[vi], path);
                        if (component == nullptr) continue;
                        ++checks;
                        bool component_in =
                            oracle_member(component, types[si]);
                        bool keep = polarity == Polarity::Positive
                                        ? component_in
                                        : !component_in;
                        if (keep && !oracle_member(universe[vi], updated)) {
                            ++mismatches;
                        }
                    }
                }
            }
        }
    }

    double elapsed = seconds_since(start);
    bool pass = mismatches == 0 && elapsed < 30.0;
    report(5, pass,
           std::to_string(universe.size()) + " values, " +
               std::to_string(types.size()) + " types, " +
               std::to_string(checks) + " checks, " +
               std::to_string(mismatches) + " mismatches, " +
               format_seconds(elapsed));
}

// ---------------------------------------------------------------------------
// Criterion 6: the fuzz gate through the real binary.

void criterion_6() {
    Clock::time_point start = Clock::now();
    CommandResult result =
        run_command("fuzz --count 10000 --size 25 --seed 0 --json");
    double elapsed = seconds_since(start);
    bool pass = false;
    std::string detail;
    if (result.status != 0) {
        detail = "exit " + std::to_string(result.status);
    } else {
        json reportj = json::parse(result.output, nullptr, false);
        if (reportj.is_discarded()) {
            detail = "unparseable fuzz report";
        } else {
            pass = elapsed < 300.0 && reportj["stuckWellTyped"] == 0 &&
                   reportj["valueTypeViolations"] == 0 &&
                   reportj["propositionViolations"] == 0 &&
                   reportj["objectViolations"] == 0;
            detail = std::to_string(
                         reportj["programsRun"].get<std::uint64_t>()) +
                     " programs, " +
                     std::to_string(
                         reportj["fuelExhausted"].get<std::uint64_t>()) +
                     " fuel-exhausted, " + format_seconds(elapsed);
            if (elapsed >= 300.0) detail += " exceeds 5min";
        }
    }
    report(6, pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 7: per-run claims on the corpus.

void criterion_7() {
    std::vector<std::string> sources = corpus_sources();
    std::vector<bool> form_seen(std::variant_size_v<ExprNode>, false);
    int violations = 0;
    std::string first_note;
    for (const std::string& source : sources) {
        ExprRef program = parse_program(source);
        walk(program,
             [&](const ExprRef& e) { form_seen[e->node.index()] = true; });
        ProgramVerdict verdict = check_soundness(program);
        if (!verdict.well_typed || !verdict.ran || verdict.violated()) {
            ++violations;
            if (first_note.empty()) {
                first_note = verdict.note.empty() ? "corpus program failed"
                                                  : verdict.note;
            }
        }
    }
    int forms = 0;
    for (bool seen : form_seen) forms += seen;
    bool pass = sources.size() >= 30 && violations == 0 &&
                forms == static_cast<int>(std::variant_size_v<ExprNode>);
    std::string detail = std::to_string(sources.size()) + " programs, " +
                         std::to_string(forms) + "/" +
                         std::to_string(std::variant_size_v<ExprNode>) +
                         " expression forms, " + std::to_string(violations) +
                         " violations";
    if (!first_note.empty()) detail += "; " + first_note;
    report(7, pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 8: subtyping properties.

struct TypeGen {
    std::mt19937_64 rng;
    explicit TypeGen(std::uint64_t seed) : rng(seed) {}

    std::size_t roll(std::size_t n) { return rng() % n; }

    TypeRef base() {
        switch (roll(8)) {
            case 0: return t_top();
            case 1: return t_nat();
            case 2: return t_true();
            case 3: return t_false();
            case 4: return t_bool();
            case 5: return t_bottom();
            case 6: return t_struct("gen", 11, t_nat(), {"mark"});
            default: return t_has_prop("mark");
        }
    }

    TypeRef type(int depth) {
        if (depth <= 0) return base();
        switch (roll(6)) {
            case 0:
                return t_pair(type(depth - 1), type(depth - 1));
            case 1: {
                std::vector<TypeRef> members;
                std::size_t n = 2 + roll(2);
                for (std::size_t i = 0; i < n; ++i) {
                    members.push_back(type(depth - 1));
                }
                return t_union(std::move(members));
            }
            case 2: {
                bool quantified = roll(2) == 0;
                TypeRef result_type =
                    quantified && roll(2) == 0 ? t_tvar("X") : type(depth - 1);
                PropRef when_true = roll(2) == 0
                                        ? p_is(SymObject::var("p"), t_nat())
                                        : p_tt();
                PropRef when_false = roll(2) == 0
                                         ? p_not(SymObject::var("p"), t_nat())
                                         : p_tt();
                SymObject object = roll(2) == 0 ? SymObject::var("p")
                                                : SymObject::null();
                return t_arrow(quantified ? "X" : "", "p", type(depth - 1),
                               mk_result(result_type, when_true, when_false,
                                         object));
            }
            case 3:
                return t_prop_desc(type(depth - 1));
            default:
                return base();
        }
    }
};

void criterion_8() {
    const TypeEnv env;
    auto sub = [&](const std::string& a, const std::string& b) {
        return subtype(env, parse_type(a), parse_type(b));
    };
    int checked = 0;
    int failed = 0;
    auto expect = [&](bool condition) {
        ++checked;
        if (!condition) ++failed;
    };

    TypeGen gen(0xE7A);
    for (int i = 0; i < 1000; ++i) {
        TypeRef t = gen.type(3);
        expect(subtype(env, t, t));
    }

    // Function subtyping: contravariant domain, covariant result.
    expect(sub("(-> (x : (U Nat True)) Nat)", "(-> (x : Nat) Nat)"));
    expect(!sub("(-> (x : Nat) Nat)", "(-> (x : (U Nat True)) Nat)"));
    expect(sub("(-> (x : Nat) True)", "(-> (x : Nat) (U True False))"));
    expect(!sub("(-> (x : Nat) (U True False))", "(-> (x : Nat) True)"));
    // Latent propositions and objects may be weakened, not strengthened.
    expect(sub("(-> (x : Top) ((U True False) (in x Nat) (not-in x Nat) _))",
               "(-> (x : Top) ((U True False) TT TT _))"));
    expect(!sub("(-> (x : Top) ((U True False) TT TT _))",
                "(-> (x : Top) ((U True False) (in x Nat) (not-in x Nat) _))"));
    expect(sub("(-> (x : Top) (Nat TT TT x))", "(-> (x : Top) (Nat TT TT _))"));
    expect(!sub("(-> (x : Top) (Nat TT TT _))", "(-> (x : Top) (Nat TT TT x))"));
    // Alpha-renaming of the parameter is invisible.
    expect(sub("(-> (x : Nat) (Nat (in x Nat) TT x))",
               "(-> (y : Nat) (Nat (in y Nat) TT y))"));
    expect(sub("(Exists (X) (-> (x : X) Nat))",
               "(Exists (Y) (-> (z : Y) Nat))"));

    // Structure subtyping: stamps decide, attached properties give Has-Prop
    // once the property label is declared in the environment.
    TypeEnv prop_env = env.with_property("norm", t_nat());
    TypeRef point_a = t_struct("point", 1, t_nat(), {"norm"});
    TypeRef point_b = t_struct("point", 2, t_nat(), {"norm"});
    TypeRef bare = t_struct("bare", 3, t_nat(), {});
    expect(subtype(env, point_a, point_a));
    expect(!subtype(env, point_a, point_b));
    expect(!subtype(env, point_b, point_a));
    expect(subtype(env, point_a, t_top()));
    expect(subtype(prop_env, point_a, t_has_prop("norm")));
    expect(!subtype(env, point_a, t_has_prop("norm")));
    expect(!subtype(prop_env, t_has_prop("norm"), point_a));
    expect(!subtype(prop_env, bare, t_has_prop("norm")));

    // Union laws.
    expect(sub("Nat", "(U Nat True)"));
    expect(sub("(U Nat True)", "(U True Nat)"));
    expect(!sub("(U Nat True)", "Nat"));
    expect(sub("(U Nat (U True False))", "(U Nat True False)"));
    expect(sub("(U Nat True False)", "(U Nat (U True False))"));
    expect(sub("(U)", "Nat"));
    expect(sub("(U Nat (U))", "Nat"));
    expect(sub("Nat", "(U Nat (U))"));
    expect(sub("Bool", "(U True False)"));

    report(8, failed == 0,
           std::to_string(checked) + " checks, " + std::to_string(failed) +
               " failures");
}

// ---------------------------------------------------------------------------
// Criterion 9: parse/print round trips.

void criterion_9() {
    int corpus_failures = 0;
    std::vector<std::string> sources = corpus_sources();
    for (const std::string& source : sources) {
        ExprRef tree = parse_program(source);
        std::string printed = print(tree);
        ExprRef reparsed = parse_program(printed);
        if (!alpha_equal(tree, reparsed) || print(reparsed) != printed) {
            ++corpus_failures;
        }
    }

    int generated_failures = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        ExprRef program = generate_program(seed, 25);
        std::string printed = print(program);
        ExprRef reparsed = parse_program(printed);
        if (!alpha_equal(program, reparsed) || print(reparsed) != printed) {
            ++generated_failures;
        }
    }

    bool pass = corpus_failures == 0 && generated_failures == 0;
    report(9, pass,
           std::to_string(sources.size()) + " corpus + 1000 generated, " +
               std::to_string(corpus_failures + generated_failures) +
               " failures");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (failures != 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
