#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

// Core term and type representation: expressions, types, propositions,
// symbolic objects, results, values, and the fresh-name supply. Everything
// here is immutable after construction; all operations are pure.

namespace etr {

using Nat = boost::multiprecision::cpp_int;

struct SourceLoc {
    int line = 0;
    int col = 0;
    bool known() const { return line > 0; }
    bool operator==(const SourceLoc&) const = default;
};

enum class PrimOp { Not, Add1, IsNat, IsBool, IsPair };

const char* prim_op_name(PrimOp op);
std::optional<PrimOp> prim_op_from_name(const std::string& name);

enum class PathElem { Fst, Snd };

// A symbolic object: the null object, a variable, or a fst/snd path over a
// variable. Path fields are ordered outermost first, so {Fst, Snd} over x
// denotes (fst (snd x)). A reference with an empty path is a plain variable.
struct SymObject {
    bool is_null = true;
    std::vector<PathElem> path;
    std::string base;

    static SymObject null() { return SymObject{}; }
    static SymObject var(std::string name) {
        return SymObject{false, {}, std::move(name)};
    }
    static SymObject path_ref(std::vector<PathElem> fields, std::string name) {
        return SymObject{false, std::move(fields), std::move(name)};
    }

    bool non_null() const { return !is_null; }
    bool is_var() const { return !is_null && path.empty(); }

    // Extends this object with an outer projection, as T-FST/T-SND do when
    // substituting the target's object into (fst x).
    SymObject extended(PathElem outer) const;

    bool operator==(const SymObject&) const = default;
    auto operator<=>(const SymObject&) const = default;
};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct Type;
using TypeRef = std::shared_ptr<const Type>;

struct TypeResult;
using ResultRef = std::shared_ptr<const TypeResult>;

struct TopType {};
struct NatType {};
struct TrueType {};
struct FalseType {};
struct SelfType {};

struct PairType {
    TypeRef first;
    TypeRef second;
};

// Bool is Union[True, False]; bottom is the empty union.
struct UnionType {
    std::vector<TypeRef> members;
};

// Structure types are nominal and generative: the stamp identifies the
// declaration occurrence, the surface name is for display.
struct StructType {
    std::string name;
    std::uint64_t stamp = 0;
    TypeRef field;
    std::vector<std::string> properties;
};

// The type of a property descriptor, Prop(tau).
struct PropDescType {
    TypeRef value;
};

// Has-Prop(sp): instances of any struct whose declaration attaches sp.
struct HasPropType {
    std::string property;
};

// A type variable: an existential quantifier occurrence, an instantiation
// witness, or (before resolution) a surface type name.
struct VarType {
    std::string name;
};

// The existential function type Exists quantifier. param:domain -> result.
// A quantifier that does not occur in domain/result is the plain arrow.
struct ArrowType {
    std::string quantifier;
    std::string param;
    TypeRef domain;
    ResultRef result;
};

using TypeNode = std::variant<TopType, NatType, TrueType, FalseType, SelfType,
                              PairType, UnionType, StructType, PropDescType,
                              HasPropType, VarType, ArrowType>;

struct Type {
    TypeNode node;
};

// ---------------------------------------------------------------------------
// Propositions
// ---------------------------------------------------------------------------

struct Prop;
using PropRef = std::shared_ptr<const Prop>;

struct TrivialProp {};  // TT
struct AbsurdProp {};   // FF

struct TypeOfProp {  // o in tau
    SymObject object;
    TypeRef type;
};

struct NotTypeOfProp {  // o not-in tau
    SymObject object;
    TypeRef type;
};

struct AndProp {
    PropRef left;
    PropRef right;
};

struct OrProp {
    PropRef left;
    PropRef right;
};

struct AliasProp {  // o1 == o2; both objects non-null
    SymObject left;
    SymObject right;
};

using PropNode = std::variant<TrivialProp, AbsurdProp, TypeOfProp,
                              NotTypeOfProp, AndProp, OrProp, AliasProp>;

struct Prop {
    PropNode node;
};

// A full type result (tau; psi+ | psi-; o).
struct TypeResult {
    TypeRef type;
    PropRef when_true;
    PropRef when_false;
    SymObject object;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct NatExpr {
    Nat value;
};
struct TrueExpr {};
struct FalseExpr {};
struct PrimExpr {
    PrimOp op;
};

// Identifier reference. Covers variables as well as bare struct/property
// names; the sort is determined by the binding context.
struct VarExpr {
    std::string name;
};

struct LambdaExpr {
    std::string param;
    TypeRef annotation;
    ExprRef body;
};

struct AppExpr {
    ExprRef fn;
    ExprRef arg;
};

struct IfExpr {
    ExprRef test;
    ExprRef then_branch;
    ExprRef else_branch;
};

struct LetExpr {
    std::string name;
    ExprRef rhs;
    ExprRef body;
};

struct ConsExpr {
    ExprRef first;
    ExprRef second;
};

struct ProjExpr {
    PathElem which;
    ExprRef target;
};

struct PropertyBinding {
    std::string property;
    ExprRef value;
};

struct LetStructExpr {
    std::string ctor_name;
    std::string pred_name;
    std::string acc_name;
    std::string struct_name;
    TypeRef field_type;
    std::vector<PropertyBinding> properties;
    ExprRef body;
};

struct LetStructPropExpr {
    std::string desc_name;
    std::string pred_name;
    std::string acc_name;
    std::string property;
    TypeRef value_type;
    ExprRef body;
};

using ExprNode =
    std::variant<NatExpr, TrueExpr, FalseExpr, PrimExpr, VarExpr, LambdaExpr,
                 AppExpr, IfExpr, LetExpr, ConsExpr, ProjExpr, LetStructExpr,
                 LetStructPropExpr>;

struct Expr {
    ExprNode node;
    SourceLoc loc;
    std::uint32_t id = 0;  // assigned by resolve(); 0 on freshly parsed trees
};

// ---------------------------------------------------------------------------
// Values and runtime environments
// ---------------------------------------------------------------------------

struct Value;
using ValueRef = std::shared_ptr<const Value>;

struct RuntimeEnv;
using RuntimeEnvRef = std::shared_ptr<const RuntimeEnv>;

struct RuntimeEnv {
    std::map<std::string, ValueRef> bindings;

    static RuntimeEnvRef empty();
    RuntimeEnvRef extended(const std::string& name, ValueRef v) const;
    const ValueRef* lookup(const std::string& name) const;
};

// The proposition environment Gamma: propositions in scope, the table of
// declared property labels with their value types, and the in-scope fresh
// type variables issued by instantiation.
struct TypeEnv {
    std::vector<PropRef> props;
    std::map<std::string, TypeRef> property_table;
    std::set<std::string> var_store;

    TypeEnv with_prop(PropRef p) const;
    TypeEnv with_property(const std::string& name, TypeRef value_type) const;
    TypeEnv with_var(const std::string& name) const;
    bool declares_property(const std::string& name) const {
        return property_table.count(name) != 0;
    }
};

struct NatValue {
    Nat value;
};
struct TrueValue {};
struct FalseValue {};
struct PrimValue {
    PrimOp op;
};

struct PairValue {
    ValueRef first;
    ValueRef second;
};

struct ClosureValue {
    RuntimeEnvRef env;
    ExprRef lambda;  // always a LambdaExpr node
};

struct StructInstanceValue {
    TypeRef struct_type;  // the stamped StructType of the defining declaration
    ValueRef field;
    std::vector<std::pair<std::string, ValueRef>> properties;
};

struct PropDescValue {
    std::string property;
};

// The five structure-related operation values.
struct CtorValue {
    TypeRef struct_type;
    std::vector<std::pair<std::string, ValueRef>> properties;
};
struct PredValue {
    TypeRef struct_type;
};
struct AccValue {
    TypeRef struct_type;
};
struct PropPredValue {
    std::string property;
};
struct PropAccValue {
    std::string property;
    TypeRef value_type;
};

using ValueNode =
    std::variant<NatValue, TrueValue, FalseValue, PrimValue, PairValue,
                 ClosureValue, StructInstanceValue, PropDescValue, CtorValue,
                 PredValue, AccValue, PropPredValue, PropAccValue>;

struct Value {
    ValueNode node;
};

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

TypeRef t_top();
TypeRef t_nat();
TypeRef t_true();
TypeRef t_false();
TypeRef t_bool();    // (U True False)
TypeRef t_bottom();  // (U)
TypeRef t_self();
TypeRef t_pair(TypeRef first, TypeRef second);
TypeRef t_union(std::vector<TypeRef> members);
TypeRef t_struct(std::string name, std::uint64_t stamp, TypeRef field,
                 std::vector<std::string> properties);
TypeRef t_prop_desc(TypeRef value);
TypeRef t_has_prop(std::string property);
TypeRef t_tvar(std::string name);
TypeRef t_arrow(std::string quantifier, std::string param, TypeRef domain,
                ResultRef result);

ResultRef mk_result(TypeRef type, PropRef when_true, PropRef when_false,
                    SymObject object);
// A result with TT|TT propositions and the null object.
ResultRef plain_result(TypeRef type);

PropRef p_tt();
PropRef p_ff();
PropRef p_is(SymObject object, TypeRef type);
PropRef p_not(SymObject object, TypeRef type);
PropRef p_and(PropRef left, PropRef right);
PropRef p_or(PropRef left, PropRef right);
PropRef p_alias(SymObject left, SymObject right);

ExprRef e_nat(Nat value, SourceLoc loc = {});
ExprRef e_true(SourceLoc loc = {});
ExprRef e_false(SourceLoc loc = {});
ExprRef e_prim(PrimOp op, SourceLoc loc = {});
ExprRef e_var(std::string name, SourceLoc loc = {});
ExprRef e_lambda(std::string param, TypeRef annotation, ExprRef body,
                 SourceLoc loc = {});
ExprRef e_app(ExprRef fn, ExprRef arg, SourceLoc loc = {});
ExprRef e_if(ExprRef test, ExprRef then_branch, ExprRef else_branch,
             SourceLoc loc = {});
ExprRef e_let(std::string name, ExprRef rhs, ExprRef body, SourceLoc loc = {});
ExprRef e_cons(ExprRef first, ExprRef second, SourceLoc loc = {});
ExprRef e_proj(PathElem which, ExprRef target, SourceLoc loc = {});
ExprRef e_let_struct(std::string ctor_name, std::string pred_name,
                     std::string acc_name, std::string struct_name,
                     TypeRef field_type, std::vector<PropertyBinding> props,
                     ExprRef body, SourceLoc loc = {});
ExprRef e_let_struct_prop(std::string desc_name, std::string pred_name,
                          std::string acc_name, std::string property,
                          TypeRef value_type, ExprRef body, SourceLoc loc = {});

ValueRef v_nat(Nat n);
ValueRef v_true();
ValueRef v_false();
ValueRef v_bool(bool b);
ValueRef v_prim(PrimOp op);
ValueRef v_pair(ValueRef first, ValueRef second);
ValueRef v_closure(RuntimeEnvRef env, ExprRef lambda);
ValueRef v_instance(TypeRef struct_type, ValueRef field,
                    std::vector<std::pair<std::string, ValueRef>> properties);
ValueRef v_prop_desc(std::string property);
ValueRef v_ctor(TypeRef struct_type,
                std::vector<std::pair<std::string, ValueRef>> properties);
ValueRef v_pred(TypeRef struct_type);
ValueRef v_acc(TypeRef struct_type);
ValueRef v_prop_pred(std::string property);
ValueRef v_prop_acc(std::string property, TypeRef value_type);

// ---------------------------------------------------------------------------
// Equality and structure queries
// ---------------------------------------------------------------------------

// Syntactic equality up to consistent renaming of bound quantifiers and bound
// arrow parameters. Unions are order-sensitive.
bool alpha_equal(const TypeRef& a, const TypeRef& b);
bool alpha_equal(const ResultRef& a, const ResultRef& b);
bool alpha_equal(const PropRef& a, const PropRef& b);

// Expression equality up to consistent renaming of term binders (lambda/let
// parameters and the let-struct / let-struct-property binders) and of bound
// names inside type annotations. Struct names and property labels compare
// by name.
bool alpha_equal(const ExprRef& a, const ExprRef& b);

// Structural value equality. Closures compare by body identity and captured
// environment equality.
bool value_equal(const ValueRef& a, const ValueRef& b);

// True when the type variable occurs free in the type/result.
bool mentions_tvar(const TypeRef& t, const std::string& name);
bool mentions_tvar(const ResultRef& r, const std::string& name);

// True when the name occurs as the base of any symbolic object in the
// result's propositions/object, including latent propositions inside types.
bool mentions_object_base(const ResultRef& r, const std::string& name);

// Capture-avoiding substitution of a type for a free type variable.
TypeRef subst_tvar(const TypeRef& t, const std::string& name, const TypeRef& replacement);
ResultRef subst_tvar(const ResultRef& r, const std::string& name, const TypeRef& replacement);
PropRef subst_tvar(const PropRef& p, const std::string& name, const TypeRef& replacement);

// Substitutes a non-null object for every free occurrence of the named
// variable in object positions, composing paths: (fst x)[x -> (snd y)] is
// (fst (snd y)). Arrow parameters shadow the name inside their results.
TypeRef subst_object(const TypeRef& t, const std::string& name, const SymObject& replacement);
ResultRef subst_object(const ResultRef& r, const std::string& name, const SymObject& replacement);
PropRef subst_object(const PropRef& p, const std::string& name, const SymObject& replacement);

// Replaces every occurrence of Self.
TypeRef replace_self(const TypeRef& t, const TypeRef& with);
ResultRef replace_self(const ResultRef& r, const TypeRef& with);

// Collects the free type variables of a type (quantifiers bind).
void free_tvars(const TypeRef& t, std::vector<std::string>& out);

// Fresh-name supply. Issued names use the reserved '%' character, which the
// surface syntax rejects in identifiers, so they can never collide with
// user-written names. Counters are per hint: "X" -> X%0, X%1, ...
class FreshNames {
public:
    std::string fresh(const std::string& hint);

private:
    std::map<std::string, int> counters_;
};

// Visitor helper.
template <class... Fs>
struct match : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
match(Fs...) -> match<Fs...>;

}  // namespace etr
