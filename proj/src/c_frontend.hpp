#pragma once

// Restricted C99 front end used by the predictability linter. It accepts the
// constructs the code generator emits plus the ones the lint rules must be
// able to see (while/do/goto, function pointers, VLAs, arbitrary calls).
// Anything else raises ParseError.

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tpnn::cfront {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error(message), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

enum class TokenKind { Identifier, Number, String, Char, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    int line = 0;
};

struct Directive {
    int line = 0;
    std::string text; // without the leading '#'
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind {
        IntLiteral,
        FloatLiteral,
        StringLiteral,
        CharLiteral,
        Identifier,
        Call,        // children[0] = callee, rest = arguments
        Index,       // children[0][children[1]]
        Member,      // children[0] . / -> text
        Unary,       // prefix operator `text`
        Postfix,     // postfix ++ / --
        Binary,
        Assign,      // text is the assignment operator
        Conditional,
        Cast,        // children[0] = operand; function_pointer_type set when casting to one
        Sizeof,
        InitList,
    };

    Kind kind;
    std::string text;
    int line = 0;
    std::vector<ExprPtr> children;
    bool function_pointer_type = false;
};

struct Declarator {
    std::string name; // empty for abstract declarators
    int line = 0;
    int pointer_depth = 0;
    bool function_pointer = false;
    bool is_function = false; // prototype: name(params)
    bool unsized_array = false;
    std::vector<ExprPtr> array_dims; // nullptr entry for []
    std::vector<Declarator> params;  // for prototypes / function pointers
    ExprPtr init;
};

struct Declaration {
    int line = 0;
    bool is_typedef = false;
    bool is_static = false;
    bool is_extern = false;
    std::vector<std::string> specifiers;
    std::vector<Declarator> declarators;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
    enum class Kind {
        Compound,
        Declaration,
        Expression,
        If,
        For,
        While,
        DoWhile,
        Switch,
        Case,
        Goto,
        Label,
        Return,
        Break,
        Continue,
        Empty,
    };

    Kind kind;
    int line = 0;
    std::vector<StmtPtr> body; // compound items; If: then[, else]; loops: body
    std::unique_ptr<Declaration> decl; // Declaration stmt, or For init
    ExprPtr expr;                      // expression / condition / return value
    ExprPtr init;                      // For init expression
    ExprPtr step;                      // For step
    std::string label;
};

struct FunctionDef {
    std::string name;
    int line = 0;
    bool is_static = false;
    std::vector<Declarator> params;
    StmtPtr body;
};

struct TranslationUnit {
    std::string file;
    std::vector<Directive> directives;
    std::vector<Declaration> globals;
    std::vector<FunctionDef> functions;
};

/// Names that parse as type specifiers in addition to the C keywords.
std::set<std::string> default_typedef_names();

/// Parses one file. Typedef names discovered are added to `typedefs` so
/// later files see them.
TranslationUnit parse(std::string file, std::string_view text, std::set<std::string>& typedefs);

/// Integer value of an integer literal token (decimal, hex or octal, with
/// optional u/l suffixes).
long long int_literal_value(std::string_view text);

} // namespace tpnn::cfront
