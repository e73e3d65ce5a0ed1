#include "etr/parser.hpp"

#include <cctype>
#include <set>
#include <variant>
#include <vector>

namespace etr {

namespace {

constexpr int kMaxNesting = 2000;

// ---------------------------------------------------------------------------
// S-expression reader
// ---------------------------------------------------------------------------

struct Sexp;

struct Atom {
    std::string text;
};
struct List {
    std::vector<Sexp> items;
};

struct Sexp {
    std::variant<Atom, List> node;
    SourceLoc loc;

    bool is_atom() const { return node.index() == 0; }
    const std::string& atom() const { return std::get<Atom>(node).text; }
    const std::vector<Sexp>& items() const {
        return std::get<List>(node).items;
    }
};

class Reader {
public:
    explicit Reader(const std::string& source) : src_(source) {}

    // Reads one datum; returns false at end of input.
    bool read(Sexp& out) {
        skip_trivia();
        if (pos_ >= src_.size()) return false;
        out = read_datum(0);
        return true;
    }

    SourceLoc here() const { return SourceLoc{line_, col_}; }

private:
    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    char peek() const { return src_[pos_]; }

    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == ';') {
                while (pos_ < src_.size() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }

    static bool is_delimiter(char c) {
        return c == '(' || c == ')' || c == ';' ||
               std::isspace(static_cast<unsigned char>(c));
    }

    Sexp read_datum(int depth) {
        if (depth > kMaxNesting)
            throw SyntaxError(here(), "nesting depth limit exceeded");
        skip_trivia();
        if (pos_ >= src_.size())
            throw SyntaxError(here(), "unexpected end of input");
        SourceLoc loc = here();
        char c = peek();
        if (c == '(') {
            advance();
            List list;
            for (;;) {
                skip_trivia();
                if (pos_ >= src_.size())
                    throw SyntaxError(here(), "unterminated list");
                if (peek() == ')') {
                    advance();
                    return Sexp{std::move(list), loc};
                }
                list.items.push_back(read_datum(depth + 1));
            }
        }
        if (c == ')') throw SyntaxError(loc, "unexpected ')'");
        std::string text;
        while (pos_ < src_.size() && !is_delimiter(peek())) {
            char a = advance();
            if (a == '%')
                throw SyntaxError(loc, "'%' is reserved and cannot appear in identifiers");
            text.push_back(a);
        }
        return Sexp{Atom{std::move(text)}, loc};
    }
};

// ---------------------------------------------------------------------------
// Form parsers
// ---------------------------------------------------------------------------

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

bool starts_with_digit(const std::string& s) {
    return !s.empty() && std::isdigit(static_cast<unsigned char>(s[0]));
}

const std::set<std::string>& expr_keywords() {
    static const std::set<std::string> kw = {
        "lambda", "if",  "let", "cons",
        "fst",    "snd", "let-struct", "let-struct-property"};
    return kw;
}

std::string parse_ident(const Sexp& s, const char* what) {
    if (!s.is_atom())
        throw SyntaxError(s.loc, std::string("expected ") + what +
                                     ", found a list");
    const std::string& text = s.atom();
    if (starts_with_digit(text) || text == "true" || text == "false")
        throw SyntaxError(s.loc, std::string("expected ") + what +
                                     ", found '" + text + "'");
    return text;
}

TypeRef parse_type_sexp(const Sexp& s);
ExprRef parse_expr_sexp(const Sexp& s);
PropRef parse_prop_sexp(const Sexp& s);
SymObject parse_object_sexp(const Sexp& s);
ResultRef parse_result_sexp(const Sexp& s);

SymObject parse_object_sexp(const Sexp& s) {
    if (s.is_atom()) {
        const std::string& text = s.atom();
        if (text == "_") return SymObject::null();
        return SymObject::var(parse_ident(s, "an object"));
    }
    const auto& items = s.items();
    if (items.empty() || !items[0].is_atom() || items[0].atom() != "path")
        throw SyntaxError(s.loc, "expected an object: '_', a variable, or (path (...) x)");
    if (items.size() != 3)
        throw ArityError(s.loc, "path takes a field list and a variable");
    if (items[1].is_atom())
        throw SyntaxError(items[1].loc, "expected a (fst/snd ...) field list");
    std::vector<PathElem> fields;
    for (const Sexp& f : items[1].items()) {
        if (f.is_atom() && f.atom() == "fst")
            fields.push_back(PathElem::Fst);
        else if (f.is_atom() && f.atom() == "snd")
            fields.push_back(PathElem::Snd);
        else
            throw SyntaxError(f.loc, "path fields must be fst or snd");
    }
    std::string base = parse_ident(items[2], "a variable");
    if (fields.empty()) return SymObject::var(std::move(base));
    return SymObject::path_ref(std::move(fields), std::move(base));
}

bool looks_like_prop(const Sexp& s) {
    if (s.is_atom()) return s.atom() == "TT" || s.atom() == "FF";
    const auto& items = s.items();
    if (items.empty() || !items[0].is_atom()) return false;
    const std::string& head = items[0].atom();
    return head == "in" || head == "not-in" || head == "and" || head == "or" ||
           head == "alias";
}

PropRef parse_prop_sexp(const Sexp& s) {
    if (s.is_atom()) {
        if (s.atom() == "TT") return p_tt();
        if (s.atom() == "FF") return p_ff();
        throw SyntaxError(s.loc, "expected a proposition, found '" + s.atom() + "'");
    }
    const auto& items = s.items();
    if (items.empty() || !items[0].is_atom())
        throw SyntaxError(s.loc, "expected a proposition form");
    const std::string& head = items[0].atom();
    if (head == "in" || head == "not-in") {
        if (items.size() != 3)
            throw ArityError(s.loc, head + " takes an object and a type");
        SymObject obj = parse_object_sexp(items[1]);
        TypeRef type = parse_type_sexp(items[2]);
        return head == "in" ? p_is(std::move(obj), std::move(type))
                            : p_not(std::move(obj), std::move(type));
    }
    if (head == "and" || head == "or") {
        if (items.size() != 3)
            throw ArityError(s.loc, head + " takes two propositions");
        PropRef left = parse_prop_sexp(items[1]);
        PropRef right = parse_prop_sexp(items[2]);
        return head == "and" ? p_and(std::move(left), std::move(right))
                             : p_or(std::move(left), std::move(right));
    }
    if (head == "alias") {
        if (items.size() != 3)
            throw ArityError(s.loc, "alias takes two objects");
        SymObject left = parse_object_sexp(items[1]);
        SymObject right = parse_object_sexp(items[2]);
        if (left.is_null || right.is_null)
            throw SyntaxError(s.loc, "alias objects must be non-null");
        return p_alias(std::move(left), std::move(right));
    }
    throw SyntaxError(s.loc, "unknown proposition form '" + head + "'");
}

ResultRef parse_result_sexp(const Sexp& s) {
    // A four-part list whose second part is proposition-shaped is the full
    // (TYPE PROP PROP OBJ) tuple; everything else is a bare type with the
    // default trivial propositions and null object.
    if (!s.is_atom() && s.items().size() == 4 && looks_like_prop(s.items()[1])) {
        const auto& items = s.items();
        TypeRef type = parse_type_sexp(items[0]);
        PropRef when_true = parse_prop_sexp(items[1]);
        PropRef when_false = parse_prop_sexp(items[2]);
        SymObject object = parse_object_sexp(items[3]);
        return mk_result(std::move(type), std::move(when_true),
                         std::move(when_false), std::move(object));
    }
    return plain_result(parse_type_sexp(s));
}

// Parses the (IDENT : TYPE) parameter group shared by lambda and arrows.
void parse_param_group(const Sexp& s, std::string& param, TypeRef& type) {
    if (s.is_atom())
        throw SyntaxError(s.loc, "expected a (name : type) group");
    const auto& items = s.items();
    if (items.size() != 3 || !items[1].is_atom() || items[1].atom() != ":")
        throw ArityError(s.loc, "parameter group must be (name : type)");
    param = parse_ident(items[0], "a parameter name");
    type = parse_type_sexp(items[2]);
}

TypeRef parse_arrow_sexp(const Sexp& s, const std::string& quantifier) {
    const auto& items = s.items();
    if (items.size() != 3)
        throw ArityError(s.loc, "-> takes a parameter group and a result");
    std::string param;
    TypeRef domain;
    parse_param_group(items[1], param, domain);
    ResultRef result = parse_result_sexp(items[2]);
    return t_arrow(quantifier, std::move(param), std::move(domain),
                   std::move(result));
}

TypeRef parse_type_sexp(const Sexp& s) {
    if (s.is_atom()) {
        const std::string& text = s.atom();
        if (text == "Top") return t_top();
        if (text == "Nat") return t_nat();
        if (text == "True") return t_true();
        if (text == "False") return t_false();
        if (text == "Bool") return t_bool();
        if (text == "Self") return t_self();
        if (starts_with_digit(text))
            throw SyntaxError(s.loc, "expected a type, found '" + text + "'");
        return t_tvar(text);
    }
    const auto& items = s.items();
    if (items.empty())
        throw SyntaxError(s.loc, "expected a type, found ()");
    if (!items[0].is_atom())
        throw SyntaxError(s.loc, "expected a type form");
    const std::string& head = items[0].atom();
    if (head == "Pair") {
        if (items.size() != 3)
            throw ArityError(s.loc, "Pair takes two types");
        TypeRef first = parse_type_sexp(items[1]);
        TypeRef second = parse_type_sexp(items[2]);
        return t_pair(std::move(first), std::move(second));
    }
    if (head == "U") {
        std::vector<TypeRef> members;
        members.reserve(items.size() - 1);
        for (std::size_t i = 1; i < items.size(); ++i)
            members.push_back(parse_type_sexp(items[i]));
        return t_union(std::move(members));
    }
    if (head == "Prop") {
        if (items.size() != 2)
            throw ArityError(s.loc, "Prop takes one type");
        return t_prop_desc(parse_type_sexp(items[1]));
    }
    if (head == "Has-Prop") {
        if (items.size() != 2)
            throw ArityError(s.loc, "Has-Prop takes a property name");
        return t_has_prop(parse_ident(items[1], "a property name"));
    }
    if (head == "->") return parse_arrow_sexp(s, "");
    if (head == "Exists") {
        if (items.size() != 3)
            throw ArityError(s.loc, "Exists takes a quantifier group and an arrow type");
        if (items[1].is_atom() || items[1].items().size() != 1)
            throw ArityError(items[1].loc, "Exists quantifier group must be (X)");
        std::string quantifier =
            parse_ident(items[1].items()[0], "a type variable");
        const Sexp& arrow = items[2];
        if (arrow.is_atom() || arrow.items().empty() ||
            !arrow.items()[0].is_atom() || arrow.items()[0].atom() != "->")
            throw SyntaxError(arrow.loc, "Exists body must be an -> type");
        return parse_arrow_sexp(arrow, quantifier);
    }
    throw SyntaxError(s.loc, "unknown type form '" + head + "'");
}

ExprRef parse_let_struct(const Sexp& s) {
    const auto& items = s.items();
    if (items.size() != 3)
        throw ArityError(s.loc, "let-struct takes a declaration group and a body");
    const Sexp& group = items[1];
    if (group.is_atom() || group.items().size() != 2)
        throw ArityError(group.loc,
                         "let-struct declaration must be ((ctor pred acc) (name type (props...)))");
    const Sexp& names = group.items()[0];
    if (names.is_atom() || names.items().size() != 3)
        throw ArityError(names.loc, "let-struct binds exactly (ctor pred acc)");
    std::string ctor_name = parse_ident(names.items()[0], "a binder");
    std::string pred_name = parse_ident(names.items()[1], "a binder");
    std::string acc_name = parse_ident(names.items()[2], "a binder");
    const Sexp& decl = group.items()[1];
    if (decl.is_atom() || decl.items().size() != 3)
        throw ArityError(decl.loc,
                         "struct declaration must be (name type (props...))");
    std::string struct_name = parse_ident(decl.items()[0], "a struct name");
    TypeRef field_type = parse_type_sexp(decl.items()[1]);
    const Sexp& props = decl.items()[2];
    if (props.is_atom())
        throw SyntaxError(props.loc, "expected a property binding list");
    std::vector<PropertyBinding> bindings;
    std::set<std::string> seen;
    for (const Sexp& binding : props.items()) {
        if (binding.is_atom() || binding.items().size() != 2)
            throw ArityError(binding.loc, "property binding must be (name expr)");
        std::string prop = parse_ident(binding.items()[0], "a property name");
        if (!seen.insert(prop).second)
            throw SyntaxError(binding.loc,
                              "duplicate property binding '" + prop + "'");
        bindings.push_back(
            PropertyBinding{std::move(prop), parse_expr_sexp(binding.items()[1])});
    }
    ExprRef body = parse_expr_sexp(items[2]);
    return e_let_struct(std::move(ctor_name), std::move(pred_name),
                        std::move(acc_name), std::move(struct_name),
                        std::move(field_type), std::move(bindings),
                        std::move(body), s.loc);
}

ExprRef parse_let_struct_property(const Sexp& s) {
    const auto& items = s.items();
    if (items.size() != 3)
        throw ArityError(s.loc,
                         "let-struct-property takes a declaration group and a body");
    const Sexp& group = items[1];
    if (group.is_atom() || group.items().size() != 2)
        throw ArityError(group.loc,
                         "let-struct-property declaration must be ((desc pred acc) (prop type))");
    const Sexp& names = group.items()[0];
    if (names.is_atom() || names.items().size() != 3)
        throw ArityError(names.loc,
                         "let-struct-property binds exactly (desc pred acc)");
    std::string desc_name = parse_ident(names.items()[0], "a binder");
    std::string pred_name = parse_ident(names.items()[1], "a binder");
    std::string acc_name = parse_ident(names.items()[2], "a binder");
    const Sexp& decl = group.items()[1];
    if (decl.is_atom() || decl.items().size() != 2)
        throw ArityError(decl.loc, "property declaration must be (prop type)");
    std::string property = parse_ident(decl.items()[0], "a property name");
    TypeRef value_type = parse_type_sexp(decl.items()[1]);
    ExprRef body = parse_expr_sexp(items[2]);
    return e_let_struct_prop(std::move(desc_name), std::move(pred_name),
                             std::move(acc_name), std::move(property),
                             std::move(value_type), std::move(body), s.loc);
}

ExprRef parse_expr_sexp(const Sexp& s) {
    if (s.is_atom()) {
        const std::string& text = s.atom();
        if (all_digits(text)) return e_nat(Nat(text), s.loc);
        if (starts_with_digit(text))
            throw SyntaxError(s.loc, "malformed number '" + text + "'");
        if (text == "true") return e_true(s.loc);
        if (text == "false") return e_false(s.loc);
        if (auto op = prim_op_from_name(text)) return e_prim(*op, s.loc);
        return e_var(text, s.loc);
    }
    const auto& items = s.items();
    if (items.empty()) throw SyntaxError(s.loc, "empty form");
    if (items[0].is_atom()) {
        const std::string& head = items[0].atom();
        if (head == "lambda") {
            if (items.size() != 3)
                throw ArityError(s.loc, "lambda takes a parameter group and a body");
            std::string param;
            TypeRef annotation;
            parse_param_group(items[1], param, annotation);
            return e_lambda(std::move(param), std::move(annotation),
                            parse_expr_sexp(items[2]), s.loc);
        }
        if (head == "if") {
            if (items.size() != 4)
                throw ArityError(s.loc, "if takes a test and two branches");
            return e_if(parse_expr_sexp(items[1]), parse_expr_sexp(items[2]),
                        parse_expr_sexp(items[3]), s.loc);
        }
        if (head == "let") {
            if (items.size() != 3)
                throw ArityError(s.loc, "let takes a binding group and a body");
            const Sexp& binding = items[1];
            if (binding.is_atom() || binding.items().size() != 2)
                throw ArityError(binding.loc, "let binding must be (name expr)");
            std::string name = parse_ident(binding.items()[0], "a binder");
            return e_let(std::move(name), parse_expr_sexp(binding.items()[1]),
                         parse_expr_sexp(items[2]), s.loc);
        }
        if (head == "cons") {
            if (items.size() != 3)
                throw ArityError(s.loc, "cons takes two expressions");
            return e_cons(parse_expr_sexp(items[1]), parse_expr_sexp(items[2]),
                          s.loc);
        }
        if (head == "fst" || head == "snd") {
            if (items.size() != 2)
                throw ArityError(s.loc, head + " takes one expression");
            return e_proj(head == "fst" ? PathElem::Fst : PathElem::Snd,
                          parse_expr_sexp(items[1]), s.loc);
        }
        if (head == "let-struct") return parse_let_struct(s);
        if (head == "let-struct-property") return parse_let_struct_property(s);
    }
    if (items.size() != 2) {
        if (items[0].is_atom() && expr_keywords().count(items[0].atom()))
            throw ArityError(s.loc, "malformed " + items[0].atom() + " form");
        throw ArityError(s.loc, "application takes exactly one operand");
    }
    return e_app(parse_expr_sexp(items[0]), parse_expr_sexp(items[1]), s.loc);
}

// Reads exactly one datum and rejects trailing content.
Sexp read_single(const std::string& source, const char* what) {
    Reader reader(source);
    Sexp datum;
    if (!reader.read(datum))
        throw SyntaxError(reader.here(), std::string("empty input, expected ") + what);
    Sexp extra;
    if (reader.read(extra))
        throw SyntaxError(extra.loc, "trailing content after the first form");
    return datum;
}

}  // namespace

ExprRef parse_program(const std::string& source) {
    return parse_expr_sexp(read_single(source, "a program"));
}

TypeRef parse_type(const std::string& source) {
    return parse_type_sexp(read_single(source, "a type"));
}

ResultRef parse_result(const std::string& source) {
    return parse_result_sexp(read_single(source, "a result"));
}

PropRef parse_prop(const std::string& source) {
    return parse_prop_sexp(read_single(source, "a proposition"));
}

SymObject parse_object(const std::string& source) {
    return parse_object_sexp(read_single(source, "an object"));
}

}  // namespace etr
