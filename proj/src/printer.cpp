#include "etr/printer.hpp"

#include <sstream>

namespace etr {

namespace {

void print_type_to(std::ostream& out, const TypeRef& t);
void print_result_to(std::ostream& out, const ResultRef& r);
void print_prop_to(std::ostream& out, const PropRef& p);
void print_object_to(std::ostream& out, const SymObject& o);
void print_expr_to(std::ostream& out, const ExprRef& e);
void print_value_to(std::ostream& out, const ValueRef& v);

void print_object_to(std::ostream& out, const SymObject& o) {
    if (o.is_null) {
        out << "_";
        return;
    }
    if (o.path.empty()) {
        out << o.base;
        return;
    }
    out << "(path (";
    for (std::size_t i = 0; i < o.path.size(); ++i) {
        if (i) out << " ";
        out << (o.path[i] == PathElem::Fst ? "fst" : "snd");
    }
    out << ") " << o.base << ")";
}

void print_prop_to(std::ostream& out, const PropRef& p) {
    std::visit(match{
                   [&](const TrivialProp&) { out << "TT"; },
                   [&](const AbsurdProp&) { out << "FF"; },
                   [&](const TypeOfProp& tp) {
                       out << "(in ";
                       print_object_to(out, tp.object);
                       out << " ";
                       print_type_to(out, tp.type);
                       out << ")";
                   },
                   [&](const NotTypeOfProp& tp) {
                       out << "(not-in ";
                       print_object_to(out, tp.object);
                       out << " ";
                       print_type_to(out, tp.type);
                       out << ")";
                   },
                   [&](const AndProp& ap) {
                       out << "(and ";
                       print_prop_to(out, ap.left);
                       out << " ";
                       print_prop_to(out, ap.right);
                       out << ")";
                   },
                   [&](const OrProp& op) {
                       out << "(or ";
                       print_prop_to(out, op.left);
                       out << " ";
                       print_prop_to(out, op.right);
                       out << ")";
                   },
                   [&](const AliasProp& al) {
                       out << "(alias ";
                       print_object_to(out, al.left);
                       out << " ";
                       print_object_to(out, al.right);
                       out << ")";
                   },
               },
               p->node);
}

bool trivial_result(const TypeResult& r) {
    return r.object.is_null &&
           std::holds_alternative<TrivialProp>(r.when_true->node) &&
           std::holds_alternative<TrivialProp>(r.when_false->node);
}

void print_result_to(std::ostream& out, const ResultRef& r) {
    if (trivial_result(*r)) {
        print_type_to(out, r->type);
        return;
    }
    out << "(";
    print_type_to(out, r->type);
    out << " ";
    print_prop_to(out, r->when_true);
    out << " ";
    print_prop_to(out, r->when_false);
    out << " ";
    print_object_to(out, r->object);
    out << ")";
}

void print_arrow_to(std::ostream& out, const ArrowType& f) {
    bool quantified = !f.quantifier.empty() &&
                      (mentions_tvar(f.domain, f.quantifier) ||
                       mentions_tvar(f.result, f.quantifier));
    if (quantified) out << "(Exists (" << f.quantifier << ") ";
    out << "(-> (" << f.param << " : ";
    print_type_to(out, f.domain);
    out << ") ";
    print_result_to(out, f.result);
    out << ")";
    if (quantified) out << ")";
}

void print_type_to(std::ostream& out, const TypeRef& t) {
    std::visit(match{
                   [&](const TopType&) { out << "Top"; },
                   [&](const NatType&) { out << "Nat"; },
                   [&](const TrueType&) { out << "True"; },
                   [&](const FalseType&) { out << "False"; },
                   [&](const SelfType&) { out << "Self"; },
                   [&](const PairType& p) {
                       out << "(Pair ";
                       print_type_to(out, p.first);
                       out << " ";
                       print_type_to(out, p.second);
                       out << ")";
                   },
                   [&](const UnionType& u) {
                       out << "(U";
                       for (const auto& m : u.members) {
                           out << " ";
                           print_type_to(out, m);
                       }
                       out << ")";
                   },
                   [&](const StructType& s) { out << s.name; },
                   [&](const PropDescType& d) {
                       out << "(Prop ";
                       print_type_to(out, d.value);
                       out << ")";
                   },
                   [&](const HasPropType& h) {
                       out << "(Has-Prop " << h.property << ")";
                   },
                   [&](const VarType& v) { out << v.name; },
                   [&](const ArrowType& f) { print_arrow_to(out, f); },
               },
               t->node);
}

void print_expr_to(std::ostream& out, const ExprRef& e) {
    std::visit(
        match{
            [&](const NatExpr& n) { out << n.value.str(); },
            [&](const TrueExpr&) { out << "true"; },
            [&](const FalseExpr&) { out << "false"; },
            [&](const PrimExpr& p) { out << prim_op_name(p.op); },
            [&](const VarExpr& v) { out << v.name; },
            [&](const LambdaExpr& l) {
                out << "(lambda (" << l.param << " : ";
                print_type_to(out, l.annotation);
                out << ") ";
                print_expr_to(out, l.body);
                out << ")";
            },
            [&](const AppExpr& a) {
                out << "(";
                print_expr_to(out, a.fn);
                out << " ";
                print_expr_to(out, a.arg);
                out << ")";
            },
            [&](const IfExpr& i) {
                out << "(if ";
                print_expr_to(out, i.test);
                out << " ";
                print_expr_to(out, i.then_branch);
                out << " ";
                print_expr_to(out, i.else_branch);
                out << ")";
            },
            [&](const LetExpr& l) {
                out << "(let (" << l.name << " ";
                print_expr_to(out, l.rhs);
                out << ") ";
                print_expr_to(out, l.body);
                out << ")";
            },
            [&](const ConsExpr& c) {
                out << "(cons ";
                print_expr_to(out, c.first);
                out << " ";
                print_expr_to(out, c.second);
                out << ")";
            },
            [&](const ProjExpr& p) {
                out << (p.which == PathElem::Fst ? "(fst " : "(snd ");
                print_expr_to(out, p.target);
                out << ")";
            },
            [&](const LetStructExpr& s) {
                out << "(let-struct ((" << s.ctor_name << " " << s.pred_name
                    << " " << s.acc_name << ") (" << s.struct_name << " ";
                print_type_to(out, s.field_type);
                out << " (";
                for (std::size_t i = 0; i < s.properties.size(); ++i) {
                    if (i) out << " ";
                    out << "(" << s.properties[i].property << " ";
                    print_expr_to(out, s.properties[i].value);
                    out << ")";
                }
                out << "))) ";
                print_expr_to(out, s.body);
                out << ")";
            },
            [&](const LetStructPropExpr& s) {
                out << "(let-struct-property ((" << s.desc_name << " "
                    << s.pred_name << " " << s.acc_name << ") (" << s.property
                    << " ";
                print_type_to(out, s.value_type);
                out << ")) ";
                print_expr_to(out, s.body);
                out << ")";
            },
        },
        e->node);
}

void print_value_to(std::ostream& out, const ValueRef& v) {
    std::visit(match{
                   [&](const NatValue& n) { out << n.value.str(); },
                   [&](const TrueValue&) { out << "true"; },
                   [&](const FalseValue&) { out << "false"; },
                   [&](const PrimValue& p) { out << prim_op_name(p.op); },
                   [&](const PairValue& p) {
                       out << "(cons ";
                       print_value_to(out, p.first);
                       out << " ";
                       print_value_to(out, p.second);
                       out << ")";
                   },
                   [&](const ClosureValue& c) { print_expr_to(out, c.lambda); },
                   [&](const StructInstanceValue& s) {
                       out << "#<"
                           << std::get<StructType>(s.struct_type->node).name
                           << " ";
                       print_value_to(out, s.field);
                       out << ">";
                   },
                   [&](const PropDescValue& d) {
                       out << "#<property " << d.property << ">";
                   },
                   [&](const CtorValue& c) {
                       out << "#<constructor "
                           << std::get<StructType>(c.struct_type->node).name
                           << ">";
                   },
                   [&](const PredValue& p) {
                       out << "#<predicate "
                           << std::get<StructType>(p.struct_type->node).name
                           << ">";
                   },
                   [&](const AccValue& a) {
                       out << "#<accessor "
                           << std::get<StructType>(a.struct_type->node).name
                           << ">";
                   },
                   [&](const PropPredValue& p) {
                       out << "#<property-predicate " << p.property << ">";
                   },
                   [&](const PropAccValue& a) {
                       out << "#<property-accessor " << a.property << ">";
                   },
               },
               v->node);
}

}  // namespace

std::string print(const ExprRef& e) {
    std::ostringstream out;
    print_expr_to(out, e);
    return out.str();
}

std::string print(const TypeRef& t) {
    std::ostringstream out;
    print_type_to(out, t);
    return out.str();
}

std::string print(const ResultRef& r) {
    std::ostringstream out;
    print_result_to(out, r);
    return out.str();
}

std::string print(const PropRef& p) {
    std::ostringstream out;
    print_prop_to(out, p);
    return out.str();
}

std::string print(const SymObject& o) {
    std::ostringstream out;
    print_object_to(out, o);
    return out.str();
}

std::string print_value(const ValueRef& v) {
    std::ostringstream out;
    print_value_to(out, v);
    return out.str();
}

}  // namespace etr
