#include "c_frontend.hpp"

#include <array>
#include <cctype>
#include <cstdlib>

namespace tpnn::cfront {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

constexpr std::array<std::string_view, 38> kPuncts = {
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&",
    "||",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "{",  "}",  "(",  ")",
    "[",   "]",   ";",   ",",  ":",  "?",  "=",  "<",  ">",  "+",  "-",  "*"};
constexpr std::string_view kSinglePuncts = "/%&|^!~.";

struct Lexed {
    std::vector<Token> tokens;
    std::vector<Directive> directives;
};

Lexed lex(std::string_view src) {
    Lexed out;
    int line = 1;
    bool line_start = true;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            line_start = true;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') {
                ++i;
            }
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            const int start = line;
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
                line += src[i] == '\n';
                ++i;
            }
            if (i + 1 >= n) {
                throw ParseError(start, "unterminated comment");
            }
            i += 2;
            continue;
        }
        if (c == '#' && line_start) {
            Directive d{line, {}};
            ++i;
            while (i < n && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') {
                    i += 2;
                    ++line;
                    d.text += ' ';
                    continue;
                }
                d.text += src[i++];
            }
            out.directives.push_back(std::move(d));
            continue;
        }
        line_start = false;
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < n && is_ident_char(src[j])) {
                ++j;
            }
            out.tokens.push_back({TokenKind::Identifier, std::string(src.substr(i, j - i)), line});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < n) {
                const char d = src[j];
                if (is_ident_char(d) || d == '.') {
                    ++j;
                } else if ((d == '+' || d == '-') &&
                           (src[j - 1] == 'e' || src[j - 1] == 'E' || src[j - 1] == 'p' || src[j - 1] == 'P') &&
                           !(src[i] == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X') &&
                             (src[j - 1] == 'e' || src[j - 1] == 'E'))) {
                    ++j;
                } else {
                    break;
                }
            }
            out.tokens.push_back({TokenKind::Number, std::string(src.substr(i, j - i)), line});
            i = j;
            continue;
        }
        if (c == '"' || c == '\'') {
            std::size_t j = i + 1;
            while (j < n && src[j] != c) {
                if (src[j] == '\\') {
                    ++j;
                }
                if (j < n && src[j] == '\n') {
                    throw ParseError(line, "newline in literal");
                }
                ++j;
            }
            if (j >= n) {
                throw ParseError(line, "unterminated literal");
            }
            out.tokens.push_back({c == '"' ? TokenKind::String : TokenKind::Char,
                                  std::string(src.substr(i, j + 1 - i)), line});
            i = j + 1;
            continue;
        }
        bool matched = false;
        for (std::string_view p : kPuncts) {
            if (src.substr(i, p.size()) == p) {
                out.tokens.push_back({TokenKind::Punct, std::string(p), line});
                i += p.size();
                matched = true;
                break;
            }
        }
        if (matched) {
            continue;
        }
        if (kSinglePuncts.find(c) != std::string_view::npos) {
            out.tokens.push_back({TokenKind::Punct, std::string(1, c), line});
            ++i;
            continue;
        }
        throw ParseError(line, std::string("unexpected character '") + c + "'");
    }
    out.tokens.push_back({TokenKind::End, "", line});
    return out;
}

const std::set<std::string_view> kTypeKeywords = {
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool"};
const std::set<std::string_view> kQualifiers = {"const", "volatile", "restrict"};
const std::set<std::string_view> kStorage = {"typedef", "extern", "static", "inline", "register", "auto"};
const std::set<std::string_view> kUnsupported = {"struct", "union", "enum", "_Complex", "_Imaginary"};

bool is_reserved_word(std::string_view t) {
    return kTypeKeywords.contains(t) || kQualifiers.contains(t) || kStorage.contains(t) || kUnsupported.contains(t);
}

int binary_precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
}

bool is_assign_op(std::string_view op) {
    return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" ||
           op == "<<=" || op == ">>=" || op == "&=" || op == "|=" || op == "^=";
}

bool is_float_literal(std::string_view t) {
    const bool hex = t.size() > 1 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X');
    if (hex) {
        return t.find_first_of("pP") != std::string_view::npos;
    }
    return t.find_first_of(".eE") != std::string_view::npos;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, std::set<std::string>& typedefs)
        : tokens_(std::move(tokens)), typedefs_(typedefs) {}

    void parse_unit(TranslationUnit& unit) {
        while (!at_end()) {
            parse_external(unit);
        }
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t k = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[k];
    }
    bool at_end() const { return peek().kind == TokenKind::End; }
    bool is(std::string_view text) const {
        const Token& t = peek();
        return (t.kind == TokenKind::Punct || t.kind == TokenKind::Identifier) && t.text == text;
    }
    Token take() {
        Token t = peek();
        if (pos_ < tokens_.size() - 1) {
            ++pos_;
        }
        return t;
    }
    bool accept(std::string_view text) {
        if (is(text)) {
            take();
            return true;
        }
        return false;
    }
    Token expect(std::string_view text) {
        if (!is(text)) {
            fail("expected '" + std::string(text) + "'");
        }
        return take();
    }
    [[noreturn]] void fail(const std::string& what) const {
        const Token& t = peek();
        throw ParseError(t.line, what + (t.kind == TokenKind::End ? " at end of file" : " near '" + t.text + "'"));
    }
    std::string expect_identifier() {
        if (peek().kind != TokenKind::Identifier) {
            fail("expected identifier");
        }
        return take().text;
    }

    bool starts_declaration(std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        if (t.kind != TokenKind::Identifier) {
            return false;
        }
        return kTypeKeywords.contains(t.text) || kQualifiers.contains(t.text) || kStorage.contains(t.text) ||
               kUnsupported.contains(t.text) || typedefs_.contains(t.text);
    }

    // A typedef name only counts as a specifier before any other type
    // specifier, so `typedef int32_t fix16_t;` redeclares cleanly.
    void parse_specifiers(Declaration& d) {
        bool saw_type = false;
        while (peek().kind == TokenKind::Identifier) {
            const std::string& t = peek().text;
            if (kUnsupported.contains(t)) {
                fail("'" + t + "' is outside the supported C subset");
            }
            if (kStorage.contains(t) || kQualifiers.contains(t)) {
                d.is_typedef |= t == "typedef";
                d.is_static |= t == "static";
                d.is_extern |= t == "extern";
                d.specifiers.push_back(take().text);
                continue;
            }
            if (kTypeKeywords.contains(t)) {
                saw_type = true;
                d.specifiers.push_back(take().text);
                continue;
            }
            if (!saw_type && typedefs_.contains(t)) {
                saw_type = true;
                d.specifiers.push_back(take().text);
                continue;
            }
            break;
        }
        if (!saw_type) {
            fail("expected a type specifier");
        }
    }

    void parse_params(Declarator& owner) {
        expect("(");
        if (accept(")")) {
            return;
        }
        if (is("void") && peek(1).kind == TokenKind::Punct && peek(1).text == ")") {
            take();
            take();
            return;
        }
        while (true) {
            if (accept("...")) {
                break;
            }
            Declaration pd;
            pd.line = peek().line;
            parse_specifiers(pd);
            Declarator param = parse_declarator(true);
            owner.params.push_back(std::move(param));
            if (!accept(",")) {
                break;
            }
        }
        expect(")");
    }

    Declarator parse_declarator(bool allow_abstract) {
        Declarator d;
        d.line = peek().line;
        while (accept("*")) {
            ++d.pointer_depth;
            while (kQualifiers.contains(peek().text) && peek().kind == TokenKind::Identifier) {
                take();
            }
        }
        bool grouped_pointer = false;
        if (is("(") && peek(1).kind == TokenKind::Punct && peek(1).text == "*") {
            take();
            Declarator inner = parse_declarator(allow_abstract);
            expect(")");
            d.name = inner.name;
            d.line = inner.line;
            d.pointer_depth += inner.pointer_depth;
            d.array_dims = std::move(inner.array_dims);
            grouped_pointer = true;
        } else if (peek().kind == TokenKind::Identifier && !is_reserved_word(peek().text)) {
            d.line = peek().line;
            d.name = take().text;
        } else if (!allow_abstract) {
            fail("expected declarator");
        }
        while (true) {
            if (is("[")) {
                take();
                if (accept("]")) {
                    d.array_dims.push_back(nullptr);
                    d.unsized_array = true;
                } else {
                    d.array_dims.push_back(parse_assignment());
                    expect("]");
                }
            } else if (is("(")) {
                if (grouped_pointer) {
                    d.function_pointer = true;
                } else {
                    d.is_function = true;
                }
                parse_params(d);
            } else {
                break;
            }
        }
        return d;
    }

    ExprPtr parse_initializer() {
        if (!is("{")) {
            return parse_assignment();
        }
        auto list = std::make_unique<Expr>();
        list->kind = Expr::Kind::InitList;
        list->line = take().line;
        while (!is("}")) {
            list->children.push_back(parse_initializer());
            if (!accept(",")) {
                break;
            }
        }
        expect("}");
        return list;
    }

    // After specifiers: declarators separated by commas, then ';'.
    void parse_declarator_list(Declaration& d) {
        while (true) {
            Declarator decl = parse_declarator(false);
            if (accept("=")) {
                decl.init = parse_initializer();
            }
            d.declarators.push_back(std::move(decl));
            if (!accept(",")) {
                break;
            }
        }
        expect(";");
        if (d.is_typedef) {
            for (const auto& decl : d.declarators) {
                typedefs_.insert(decl.name);
            }
        }
    }

    std::unique_ptr<Declaration> parse_declaration() {
        auto d = std::make_unique<Declaration>();
        d->line = peek().line;
        parse_specifiers(*d);
        parse_declarator_list(*d);
        return d;
    }

    void parse_external(TranslationUnit& unit) {
        Declaration d;
        d.line = peek().line;
        parse_specifiers(d);
        if (accept(";")) {
            unit.globals.push_back(std::move(d));
            return;
        }
        Declarator first = parse_declarator(false);
        if (first.is_function && is("{")) {
            FunctionDef f;
            f.name = first.name;
            f.line = first.line;
            f.is_static = d.is_static;
            f.params = std::move(first.params);
            f.body = parse_compound();
            unit.functions.push_back(std::move(f));
            return;
        }
        if (accept("=")) {
            first.init = parse_initializer();
        }
        d.declarators.push_back(std::move(first));
        if (accept(",")) {
            parse_declarator_list(d);
        } else {
            expect(";");
            if (d.is_typedef) {
                typedefs_.insert(d.declarators.front().name);
            }
        }
        unit.globals.push_back(std::move(d));
    }

    StmtPtr make_stmt(Stmt::Kind kind, int line) {
        auto s = std::make_unique<Stmt>();
        s->kind = kind;
        s->line = line;
        return s;
    }

    StmtPtr parse_compound() {
        auto s = make_stmt(Stmt::Kind::Compound, expect("{").line);
        while (!is("}")) {
            if (at_end()) {
                fail("unterminated block");
            }
            s->body.push_back(parse_statement());
        }
        take();
        return s;
    }

    StmtPtr parse_statement() {
        const int line = peek().line;
        if (is("{")) {
            return parse_compound();
        }
        if (accept(";")) {
            return make_stmt(Stmt::Kind::Empty, line);
        }
        if (peek().kind == TokenKind::Identifier) {
            const std::string& t = peek().text;
            if (t == "if") {
                take();
                auto s = make_stmt(Stmt::Kind::If, line);
                expect("(");
                s->expr = parse_expression();
                expect(")");
                s->body.push_back(parse_statement());
                if (accept("else")) {
                    s->body.push_back(parse_statement());
                }
                return s;
            }
            if (t == "for") {
                take();
                auto s = make_stmt(Stmt::Kind::For, line);
                expect("(");
                if (starts_declaration()) {
                    s->decl = parse_declaration();
                } else {
                    if (!is(";")) {
                        s->init = parse_expression();
                    }
                    expect(";");
                }
                if (!is(";")) {
                    s->expr = parse_expression();
                }
                expect(";");
                if (!is(")")) {
                    s->step = parse_expression();
                }
                expect(")");
                s->body.push_back(parse_statement());
                return s;
            }
            if (t == "while") {
                take();
                auto s = make_stmt(Stmt::Kind::While, line);
                expect("(");
                s->expr = parse_expression();
                expect(")");
                s->body.push_back(parse_statement());
                return s;
            }
            if (t == "do") {
                take();
                auto s = make_stmt(Stmt::Kind::DoWhile, line);
                s->body.push_back(parse_statement());
                expect("while");
                expect("(");
                s->expr = parse_expression();
                expect(")");
                expect(";");
                return s;
            }
            if (t == "switch") {
                take();
                auto s = make_stmt(Stmt::Kind::Switch, line);
                expect("(");
                s->expr = parse_expression();
                expect(")");
                s->body.push_back(parse_statement());
                return s;
            }
            if (t == "case" || t == "default") {
                take();
                auto s = make_stmt(Stmt::Kind::Case, line);
                if (t == "case") {
                    s->expr = parse_conditional();
                }
                expect(":");
                return s;
            }
            if (t == "goto") {
                take();
                auto s = make_stmt(Stmt::Kind::Goto, line);
                s->label = expect_identifier();
                expect(";");
                return s;
            }
            if (t == "return") {
                take();
                auto s = make_stmt(Stmt::Kind::Return, line);
                if (!is(";")) {
                    s->expr = parse_expression();
                }
                expect(";");
                return s;
            }
            if (t == "break" || t == "continue") {
                take();
                expect(";");
                return make_stmt(t == "break" ? Stmt::Kind::Break : Stmt::Kind::Continue, line);
            }
            if (peek(1).kind == TokenKind::Punct && peek(1).text == ":" && !starts_declaration()) {
                auto s = make_stmt(Stmt::Kind::Label, line);
                s->label = take().text;
                take();
                return s;
            }
            if (starts_declaration()) {
                auto s = make_stmt(Stmt::Kind::Declaration, line);
                s->decl = parse_declaration();
                return s;
            }
        }
        auto s = make_stmt(Stmt::Kind::Expression, line);
        s->expr = parse_expression();
        expect(";");
        return s;
    }

    ExprPtr node(Expr::Kind kind, std::string text, int line) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->text = std::move(text);
        e->line = line;
        return e;
    }

    ExprPtr parse_expression() {
        ExprPtr e = parse_assignment();
        while (is(",")) {
            const int line = take().line;
            auto comma = node(Expr::Kind::Binary, ",", line);
            comma->children.push_back(std::move(e));
            comma->children.push_back(parse_assignment());
            e = std::move(comma);
        }
        return e;
    }

    ExprPtr parse_assignment() {
        ExprPtr lhs = parse_conditional();
        if (peek().kind == TokenKind::Punct && is_assign_op(peek().text)) {
            Token op = take();
            auto a = node(Expr::Kind::Assign, op.text, op.line);
            a->children.push_back(std::move(lhs));
            a->children.push_back(parse_assignment());
            return a;
        }
        return lhs;
    }

    ExprPtr parse_conditional() {
        ExprPtr cond = parse_binary(1);
        if (is("?")) {
            const int line = take().line;
            auto c = node(Expr::Kind::Conditional, "?", line);
            c->children.push_back(std::move(cond));
            c->children.push_back(parse_expression());
            expect(":");
            c->children.push_back(parse_conditional());
            return c;
        }
        return cond;
    }

    ExprPtr parse_binary(int min_prec) {
        ExprPtr lhs = parse_unary();
        while (peek().kind == TokenKind::Punct) {
            const int prec = binary_precedence(peek().text);
            if (prec == 0 || prec < min_prec) {
                break;
            }
            Token op = take();
            ExprPtr rhs = parse_binary(prec + 1);
            auto b = node(Expr::Kind::Binary, op.text, op.line);
            b->children.push_back(std::move(lhs));
            b->children.push_back(std::move(rhs));
            lhs = std::move(b);
        }
        return lhs;
    }

    bool type_name_follows() const {
        return is("(") && starts_declaration(1);
    }

    // Parses "(type-name)"; returns whether the type is a function pointer.
    bool parse_type_name() {
        expect("(");
        Declaration d;
        parse_specifiers(d);
        Declarator abs = parse_declarator(true);
        expect(")");
        return abs.function_pointer;
    }

    ExprPtr parse_unary() {
        const Token& t = peek();
        if (t.kind == TokenKind::Punct &&
            (t.text == "++" || t.text == "--" || t.text == "+" || t.text == "-" || t.text == "!" ||
             t.text == "~" || t.text == "*" || t.text == "&")) {
            Token op = take();
            auto u = node(Expr::Kind::Unary, op.text, op.line);
            u->children.push_back(parse_unary());
            return u;
        }
        if (t.kind == TokenKind::Identifier && t.text == "sizeof") {
            const int line = take().line;
            auto s = node(Expr::Kind::Sizeof, "sizeof", line);
            if (type_name_follows()) {
                s->function_pointer_type = parse_type_name();
            } else {
                s->children.push_back(parse_unary());
            }
            return s;
        }
        if (type_name_follows()) {
            const int line = peek().line;
            auto c = node(Expr::Kind::Cast, "cast", line);
            c->function_pointer_type = parse_type_name();
            c->children.push_back(parse_unary());
            return c;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (true) {
            if (is("[")) {
                const int line = take().line;
                auto idx = node(Expr::Kind::Index, "[]", line);
                idx->children.push_back(std::move(e));
                idx->children.push_back(parse_expression());
                expect("]");
                e = std::move(idx);
            } else if (is("(")) {
                const int line = take().line;
                auto call = node(Expr::Kind::Call, "()", line);
                call->children.push_back(std::move(e));
                if (!is(")")) {
                    do {
                        call->children.push_back(parse_assignment());
                    } while (accept(","));
                }
                expect(")");
                e = std::move(call);
            } else if (is(".") || is("->")) {
                Token op = take();
                auto m = node(Expr::Kind::Member, op.text + expect_identifier(), op.line);
                m->children.push_back(std::move(e));
                e = std::move(m);
            } else if (is("++") || is("--")) {
                Token op = take();
                auto p = node(Expr::Kind::Postfix, op.text, op.line);
                p->children.push_back(std::move(e));
                e = std::move(p);
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
        case TokenKind::Number: {
            Token tok = take();
            return node(is_float_literal(tok.text) ? Expr::Kind::FloatLiteral : Expr::Kind::IntLiteral, tok.text,
                        tok.line);
        }
        case TokenKind::String: {
            Token tok = take();
            auto s = node(Expr::Kind::StringLiteral, tok.text, tok.line);
            while (peek().kind == TokenKind::String) {
                s->text += take().text;
            }
            return s;
        }
        case TokenKind::Char: {
            Token tok = take();
            return node(Expr::Kind::CharLiteral, tok.text, tok.line);
        }
        case TokenKind::Identifier: {
            if (starts_declaration()) {
                fail("unexpected type name in expression");
            }
            Token tok = take();
            return node(Expr::Kind::Identifier, tok.text, tok.line);
        }
        case TokenKind::Punct:
            if (t.text == "(") {
                take();
                ExprPtr inner = parse_expression();
                expect(")");
                return inner;
            }
            break;
        case TokenKind::End:
            break;
        }
        fail("expected expression");
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::set<std::string>& typedefs_;
};

} // namespace

std::set<std::string> default_typedef_names() {
    return {"int8_t",   "int16_t",  "int32_t",   "int64_t",  "uint8_t", "uint16_t",
            "uint32_t", "uint64_t", "intptr_t",  "uintptr_t", "size_t", "ptrdiff_t", "fix16_t"};
}

TranslationUnit parse(std::string file, std::string_view text, std::set<std::string>& typedefs) {
    Lexed lexed = lex(text);
    TranslationUnit unit;
    unit.file = std::move(file);
    unit.directives = std::move(lexed.directives);
    Parser parser(std::move(lexed.tokens), typedefs);
    parser.parse_unit(unit);
    return unit;
}

long long int_literal_value(std::string_view text) {
    std::string digits(text);
    while (!digits.empty() && (digits.back() == 'u' || digits.back() == 'U' || digits.back() == 'l' ||
                               digits.back() == 'L')) {
        digits.pop_back();
    }
    return std::strtoll(digits.c_str(), nullptr, 0);
}

} // namespace tpnn::cfront
