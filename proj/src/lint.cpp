#include "tpnn/analyzer.hpp"

#include "c_frontend.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <stdexcept>

namespace tpnn {

namespace {

using namespace cfront;

const std::set<std::string_view> kAllocators = {
    "malloc", "calloc", "realloc",  "free",    "alloca", "__builtin_alloca", "aligned_alloc",
    "posix_memalign", "valloc", "memalign", "strdup", "strndup"};

using Macros = std::map<std::string, long long>;

std::string strip_directive_comments(std::string_view text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text.substr(i, 2) == "/*") {
            const auto close = text.find("*/", i + 2);
            if (close == std::string_view::npos) {
                break;
            }
            out += ' ';
            i = close + 1;
        } else if (text.substr(i, 2) == "//") {
            break;
        } else {
            out += text[i];
        }
    }
    return out;
}

/// Checks one directive; records integer macros. Returns an error message
/// for anything outside include guards, includes and integer constants.
std::optional<std::string> check_directive(const Directive& d, Macros& macros) {
    static const std::regex kInclude(R"(^\s*include\s*("[^"]+"|<[^>]+>)\s*$)");
    static const std::regex kGuard(R"(^\s*(ifndef|ifdef)\s+[A-Za-z_]\w*\s*$)");
    static const std::regex kEndif(R"(^\s*endif\s*$)");
    static const std::regex kDefine(R"(^\s*define\s+([A-Za-z_]\w*)(.*)$)");
    static const std::regex kIntValue(
        R"(^\s*(\(\s*)?(-\s*)?(0[xX][0-9a-fA-F]+|[0-9]+)[uUlL]*(\s*\))?\s*$)");

    const std::string text = strip_directive_comments(d.text);
    std::smatch m;
    if (std::regex_match(text, kInclude) || std::regex_match(text, kGuard) || std::regex_match(text, kEndif)) {
        return std::nullopt;
    }
    if (std::regex_match(text, m, kDefine)) {
        const std::string name = m[1];
        const std::string rest = m[2];
        if (!rest.empty() && rest.front() == '(') {
            return "function-like macro '" + name + "'";
        }
        if (rest.find_first_not_of(" \t") == std::string::npos) {
            return std::nullopt;
        }
        std::smatch v;
        if (!std::regex_match(rest, v, kIntValue) || v[1].matched != v[4].matched) {
            return "macro '" + name + "' is not an integer constant";
        }
        long long value = int_literal_value(v[3].str());
        macros[name] = v[2].matched ? -value : value;
        return std::nullopt;
    }
    return "unsupported preprocessor directive '#" + text + "'";
}

std::optional<long long> eval_const(const Expr& e, const Macros& macros) {
    switch (e.kind) {
    case Expr::Kind::IntLiteral: return int_literal_value(e.text);
    case Expr::Kind::Identifier: {
        const auto it = macros.find(e.text);
        return it == macros.end() ? std::nullopt : std::optional(it->second);
    }
    case Expr::Kind::Unary: {
        const auto v = eval_const(*e.children[0], macros);
        if (!v) return std::nullopt;
        if (e.text == "-") return -*v;
        if (e.text == "+") return *v;
        if (e.text == "~") return ~*v;
        return std::nullopt;
    }
    case Expr::Kind::Binary: {
        const auto a = eval_const(*e.children[0], macros);
        const auto b = eval_const(*e.children[1], macros);
        if (!a || !b) return std::nullopt;
        if (e.text == "+") return *a + *b;
        if (e.text == "-") return *a - *b;
        if (e.text == "*") return *a * *b;
        if ((e.text == "/" || e.text == "%") && *b != 0) return e.text == "/" ? *a / *b : *a % *b;
        if (e.text == "<<" && *b >= 0 && *b < 63) return *a << *b;
        if (e.text == ">>" && *b >= 0 && *b < 63) return *a >> *b;
        return std::nullopt;
    }
    default: return std::nullopt;
    }
}

/// Integer constant expression in the sense R7 needs: literals, integer
/// macros and sizeof, combined with arithmetic.
bool is_constant(const Expr& e, const Macros& macros) {
    switch (e.kind) {
    case Expr::Kind::IntLiteral:
    case Expr::Kind::CharLiteral:
    case Expr::Kind::Sizeof: return true;
    case Expr::Kind::Identifier: return macros.contains(e.text);
    case Expr::Kind::Unary:
        if (e.text == "+" || e.text == "-" || e.text == "~" || e.text == "!") {
            return is_constant(*e.children[0], macros);
        }
        return false;
    case Expr::Kind::Binary:
        return e.text != "," && is_constant(*e.children[0], macros) && is_constant(*e.children[1], macros);
    case Expr::Kind::Conditional:
    case Expr::Kind::Cast:
        return !e.function_pointer_type &&
               std::all_of(e.children.begin(), e.children.end(),
                           [&](const ExprPtr& c) { return is_constant(*c, macros); });
    default: return false;
    }
}

struct LoopBounds {
    std::string var;
    long long start = 0;
    long long bound = 0;
    std::string op; // <, <=, >, >=
    long long step = 0; // signed
};

long long trip_count(const LoopBounds& b) {
    const long long s = b.step < 0 ? -b.step : b.step;
    const long long span = b.op[0] == '<' ? b.bound - b.start : b.start - b.bound;
    if (b.op.size() == 1) {
        return span <= 0 ? 0 : (span + s - 1) / s;
    }
    return span < 0 ? 0 : span / s + 1;
}

/// Recognizes `for (v = A; v < B; ++v)` and its variants. On failure the
/// string says what is wrong.
std::variant<LoopBounds, std::string> loop_bounds(const Stmt& loop, const Macros& macros) {
    LoopBounds b;
    std::optional<long long> start;
    if (loop.decl) {
        if (loop.decl->declarators.size() != 1 || !loop.decl->declarators[0].init) {
            return std::string("loop initializer must declare one variable with a constant value");
        }
        b.var = loop.decl->declarators[0].name;
        start = eval_const(*loop.decl->declarators[0].init, macros);
    } else if (loop.init && loop.init->kind == Expr::Kind::Assign && loop.init->text == "=" &&
               loop.init->children[0]->kind == Expr::Kind::Identifier) {
        b.var = loop.init->children[0]->text;
        start = eval_const(*loop.init->children[1], macros);
    } else {
        return std::string("loop initializer must assign a constant to the induction variable");
    }
    if (!start) {
        return "loop variable '" + b.var + "' does not start at an integer constant";
    }
    b.start = *start;

    const Expr* cond = loop.expr.get();
    if (!cond || cond->kind != Expr::Kind::Binary ||
        !(cond->text == "<" || cond->text == "<=" || cond->text == ">" || cond->text == ">=") ||
        cond->children[0]->kind != Expr::Kind::Identifier || cond->children[0]->text != b.var) {
        return "loop condition must compare '" + b.var + "' against an integer literal";
    }
    const auto bound = eval_const(*cond->children[1], macros);
    if (!bound) {
        return "loop bound for '" + b.var + "' is not an integer literal";
    }
    b.bound = *bound;
    b.op = cond->text;

    const Expr* step = loop.step.get();
    if (step && (step->kind == Expr::Kind::Unary || step->kind == Expr::Kind::Postfix) &&
        (step->text == "++" || step->text == "--") && step->children[0]->kind == Expr::Kind::Identifier &&
        step->children[0]->text == b.var) {
        b.step = step->text == "++" ? 1 : -1;
    } else if (step && step->kind == Expr::Kind::Assign && (step->text == "+=" || step->text == "-=") &&
               step->children[0]->kind == Expr::Kind::Identifier && step->children[0]->text == b.var) {
        const auto amount = eval_const(*step->children[1], macros);
        if (!amount || *amount <= 0) {
            return "loop step for '" + b.var + "' is not a positive integer literal";
        }
        b.step = step->text == "+=" ? *amount : -*amount;
    } else {
        return "loop step must increment or decrement '" + b.var + "' by a literal";
    }
    if ((b.op[0] == '<') != (b.step > 0)) {
        return "loop variable '" + b.var + "' moves away from its bound";
    }
    return b;
}

void for_each_expr(const Stmt& s, const std::function<void(const Expr&)>& fn);

void for_each_expr(const Declaration& d, const std::function<void(const Expr&)>& fn) {
    for (const auto& decl : d.declarators) {
        for (const auto& dim : decl.array_dims) {
            if (dim) fn(*dim);
        }
        if (decl.init) fn(*decl.init);
    }
}

/// Visits every top-level expression of a statement tree.
void for_each_expr(const Stmt& s, const std::function<void(const Expr&)>& fn) {
    if (s.decl) for_each_expr(*s.decl, fn);
    if (s.init) fn(*s.init);
    if (s.expr) fn(*s.expr);
    if (s.step) fn(*s.step);
    for (const auto& child : s.body) {
        for_each_expr(*child, fn);
    }
}

bool writes_variable(const Expr& e, const std::string& var) {
    auto is_var = [&](const Expr& x) { return x.kind == Expr::Kind::Identifier && x.text == var; };
    if (e.kind == Expr::Kind::Assign && is_var(*e.children[0])) return true;
    if ((e.kind == Expr::Kind::Unary || e.kind == Expr::Kind::Postfix) &&
        (e.text == "++" || e.text == "--" || e.text == "&") && is_var(*e.children[0])) {
        return true;
    }
    return std::any_of(e.children.begin(), e.children.end(),
                       [&](const ExprPtr& c) { return writes_variable(*c, var); });
}

struct CallSite {
    std::string caller;
    std::string callee;
    std::string file;
    int line = 0;
};

class Linter {
public:
    explicit Linter(std::span<const EmittedFile> files) : files_(files) {}

    LintReport run() {
        std::set<std::string> typedefs = default_typedef_names();
        std::vector<std::optional<TranslationUnit>> units;
        for (const auto& f : files_) {
            try {
                units.emplace_back(parse(f.name, f.text, typedefs));
            } catch (const ParseError& e) {
                add("R0", f.name, e.line(), std::string("parse failure: ") + e.what());
                units.emplace_back(std::nullopt);
            }
        }
        for (const auto& u : units) {
            if (!u) continue;
            for (const auto& d : u->directives) {
                if (auto problem = check_directive(d, macros_)) {
                    add("R0", u->file, d.line, *problem);
                }
            }
            for (const auto& f : u->functions) {
                defined_.insert(f.name);
                functions_.insert(f.name);
            }
            for (const auto& g : u->globals) {
                for (const auto& d : g.declarators) {
                    (d.is_function ? functions_ : globals_).insert(d.name);
                }
            }
        }
        for (const auto& u : units) {
            if (!u) continue;
            for (const auto& g : u->globals) {
                check_declaration(g, u->file, {});
            }
            for (const auto& f : u->functions) {
                check_function(f, u->file);
            }
        }
        check_recursion();

        std::map<std::string, std::size_t> file_order;
        for (std::size_t i = 0; i < files_.size(); ++i) {
            file_order.emplace(files_[i].name, i);
        }
        std::stable_sort(findings_.begin(), findings_.end(), [&](const LintFinding& a, const LintFinding& b) {
            return std::tie(file_order[a.file], a.line, a.rule) < std::tie(file_order[b.file], b.line, b.rule);
        });
        return LintReport{std::move(findings_)};
    }

private:
    void add(std::string rule, const std::string& file, int line, std::string message) {
        findings_.push_back(LintFinding{std::move(rule), file, line, std::move(message)});
    }

    void check_declarator(const Declarator& d, const std::string& file, const std::set<std::string>& locals) {
        if (d.function_pointer) {
            add("R5", file, d.line, "function pointer '" + (d.name.empty() ? std::string("<abstract>") : d.name) + "'");
        }
        for (const auto& dim : d.array_dims) {
            if (dim && !is_constant(*dim, macros_)) {
                add("R7", file, d.line, "array '" + d.name + "' has a non-constant dimension");
            }
        }
        for (const auto& p : d.params) {
            check_declarator(p, file, locals);
        }
        if (d.init) {
            check_expr(*d.init, file, "", locals, false);
        }
    }

    void check_declaration(const Declaration& decl, const std::string& file, const std::set<std::string>& locals) {
        for (const auto& d : decl.declarators) {
            check_declarator(d, file, locals);
        }
    }

    bool is_variable(const std::string& name, const std::set<std::string>& locals) const {
        return locals.contains(name) || globals_.contains(name);
    }

    void check_expr(const Expr& e, const std::string& file, const std::string& caller,
                    const std::set<std::string>& locals, bool callee_position) {
        switch (e.kind) {
        case Expr::Kind::Call: {
            const Expr& callee = *e.children[0];
            if (callee.kind == Expr::Kind::Identifier) {
                const std::string& name = callee.text;
                if (is_variable(name, locals)) {
                    add("R5", file, e.line, "call through function pointer '" + name + "'");
                } else if (kAllocators.contains(name)) {
                    add("R1", file, e.line, "call to allocation function '" + name + "'");
                } else if (!defined_.contains(name)) {
                    add("R6", file, e.line, "call to '" + name + "', which the unit does not define");
                } else if (!caller.empty()) {
                    calls_.push_back(CallSite{caller, name, file, e.line});
                }
            } else {
                add("R5", file, e.line, "call through a computed function expression");
                check_expr(callee, file, caller, locals, true);
            }
            for (std::size_t i = 1; i < e.children.size(); ++i) {
                check_expr(*e.children[i], file, caller, locals, false);
            }
            return;
        }
        case Expr::Kind::Identifier:
            if (!callee_position && functions_.contains(e.text) && !is_variable(e.text, locals)) {
                add("R5", file, e.line, "function '" + e.text + "' used as a value");
            }
            return;
        case Expr::Kind::Cast:
        case Expr::Kind::Sizeof:
            if (e.function_pointer_type) {
                add("R5", file, e.line, "function pointer type in " + std::string(e.kind == Expr::Kind::Cast ? "cast" : "sizeof"));
            }
            break;
        default: break;
        }
        for (const auto& c : e.children) {
            check_expr(*c, file, caller, locals, false);
        }
    }

    void collect_locals(const Stmt& s, std::set<std::string>& locals) {
        if (s.decl) {
            for (const auto& d : s.decl->declarators) {
                locals.insert(d.name);
            }
        }
        for (const auto& c : s.body) {
            collect_locals(*c, locals);
        }
    }

    void check_stmt(const Stmt& s, const std::string& file, const std::string& fn, const std::set<std::string>& locals) {
        switch (s.kind) {
        case Stmt::Kind::While: add("R4", file, s.line, "while loop"); break;
        case Stmt::Kind::DoWhile: add("R4", file, s.line, "do/while loop"); break;
        case Stmt::Kind::Goto: add("R4", file, s.line, "goto '" + s.label + "'"); break;
        case Stmt::Kind::For: {
            auto bounds = loop_bounds(s, macros_);
            if (auto* problem = std::get_if<std::string>(&bounds)) {
                add("R3", file, s.line, *problem);
            } else {
                const std::string& var = std::get<LoopBounds>(bounds).var;
                bool written = false;
                for_each_expr(*s.body[0], [&](const Expr& e) { written = written || writes_variable(e, var); });
                if (written) {
                    add("R3", file, s.line, "loop variable '" + var + "' is modified in the loop body");
                }
            }
            break;
        }
        default: break;
        }
        if (s.decl) {
            check_declaration(*s.decl, file, locals);
        }
        for (const Expr* e : {s.init.get(), s.expr.get(), s.step.get()}) {
            if (e) check_expr(*e, file, fn, locals, false);
        }
        for (const auto& c : s.body) {
            check_stmt(*c, file, fn, locals);
        }
    }

    void check_function(const FunctionDef& f, const std::string& file) {
        std::set<std::string> locals;
        for (const auto& p : f.params) {
            check_declarator(p, file, locals);
            locals.insert(p.name);
        }
        collect_locals(*f.body, locals);
        check_stmt(*f.body, file, f.name, locals);
    }

    // Tarjan's strongly connected components over defined functions.
    void check_recursion() {
        std::map<std::string, std::vector<std::string>> graph;
        for (const auto& c : calls_) {
            graph[c.caller].push_back(c.callee);
        }
        std::map<std::string, int> index;
        std::map<std::string, int> low;
        std::map<std::string, int> component;
        std::vector<std::string> stack;
        std::set<std::string> on_stack;
        int counter = 0;
        int components = 0;
        std::function<void(const std::string&)> visit = [&](const std::string& v) {
            index[v] = low[v] = counter++;
            stack.push_back(v);
            on_stack.insert(v);
            for (const auto& w : graph[v]) {
                if (!index.contains(w)) {
                    visit(w);
                    low[v] = std::min(low[v], low[w]);
                } else if (on_stack.contains(w)) {
                    low[v] = std::min(low[v], index[w]);
                }
            }
            if (low[v] == index[v]) {
                std::string w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack.erase(w);
                    component[w] = components;
                } while (w != v);
                ++components;
            }
        };
        for (const auto& name : defined_) {
            if (!index.contains(name)) {
                visit(name);
            }
        }
        std::map<int, int> sizes;
        for (const auto& [name, c] : component) {
            ++sizes[c];
        }
        for (const auto& c : calls_) {
            const int cu = component[c.caller];
            if (cu == component[c.callee] && (c.caller == c.callee || sizes[cu] > 1)) {
                add("R2", c.file, c.line,
                    c.caller == c.callee ? "'" + c.caller + "' calls itself"
                                         : "recursive call from '" + c.caller + "' to '" + c.callee + "'");
            }
        }
    }

    std::span<const EmittedFile> files_;
    Macros macros_;
    std::set<std::string> defined_;
    std::set<std::string> functions_;
    std::set<std::string> globals_;
    std::vector<CallSite> calls_;
    std::vector<LintFinding> findings_;
};

// --- static MAC count ------------------------------------------------------

bool has_multiply(const Expr& e) {
    if (e.kind == Expr::Kind::Binary && e.text == "*") return true;
    if (e.kind == Expr::Kind::Call && e.children[0]->kind == Expr::Kind::Identifier &&
        e.children[0]->text == "tp_fx_mul") {
        return true;
    }
    if (e.kind == Expr::Kind::Index) {
        return has_multiply(*e.children[0]);
    }
    return std::any_of(e.children.begin(), e.children.end(), [](const ExprPtr& c) { return has_multiply(*c); });
}

bool is_mac_statement(const Stmt& s) {
    if (s.kind != Stmt::Kind::Expression || !s.expr || s.expr->kind != Expr::Kind::Assign) return false;
    const Expr& lhs = *s.expr->children[0];
    return (s.expr->text == "=" || s.expr->text == "+=") && lhs.kind == Expr::Kind::Identifier &&
           lhs.text == "acc" && has_multiply(*s.expr->children[1]);
}

class MacCounter {
public:
    MacCounter(std::map<std::string, const FunctionDef*> functions, Macros macros)
        : functions_(std::move(functions)), macros_(std::move(macros)) {}

    std::uint64_t function_cost(const std::string& name) {
        if (auto it = memo_.find(name); it != memo_.end()) {
            return it->second;
        }
        if (!active_.insert(name).second) {
            throw std::invalid_argument("recursive call to '" + name + "'");
        }
        const std::uint64_t cost = stmt_cost(*functions_.at(name)->body);
        active_.erase(name);
        memo_[name] = cost;
        return cost;
    }

private:
    std::uint64_t calls_cost(const Expr& e) {
        std::uint64_t total = 0;
        if (e.kind == Expr::Kind::Call && e.children[0]->kind == Expr::Kind::Identifier &&
            functions_.contains(e.children[0]->text)) {
            total += function_cost(e.children[0]->text);
        }
        for (const auto& c : e.children) {
            total += calls_cost(*c);
        }
        return total;
    }

    std::uint64_t stmt_cost(const Stmt& s) {
        switch (s.kind) {
        case Stmt::Kind::While:
        case Stmt::Kind::DoWhile:
        case Stmt::Kind::Goto: throw std::invalid_argument("unbounded control flow at line " + std::to_string(s.line));
        case Stmt::Kind::For: {
            auto bounds = loop_bounds(s, macros_);
            if (auto* problem = std::get_if<std::string>(&bounds)) {
                throw std::invalid_argument(*problem);
            }
            const auto trips = static_cast<std::uint64_t>(trip_count(std::get<LoopBounds>(bounds)));
            return trips * stmt_cost(*s.body[0]);
        }
        default: break;
        }
        std::uint64_t total = is_mac_statement(s) ? 1 : 0;
        if (s.decl) {
            for (const auto& d : s.decl->declarators) {
                if (d.init) total += calls_cost(*d.init);
            }
        }
        if (s.expr) total += calls_cost(*s.expr);
        for (const auto& c : s.body) {
            total += stmt_cost(*c);
        }
        return total;
    }

    std::map<std::string, const FunctionDef*> functions_;
    Macros macros_;
    std::map<std::string, std::uint64_t> memo_;
    std::set<std::string> active_;
};

} // namespace

LintReport lint(std::span<const EmittedFile> files) {
    return Linter(files).run();
}

LintReport lint(const EmittedUnit& unit) {
    std::vector<EmittedFile> files;
    if (unit.runtime) {
        files.push_back(*unit.runtime);
    }
    files.push_back(unit.header);
    files.push_back(unit.source);
    files.push_back(unit.weights);
    return lint(files);
}

std::string to_text(const LintReport& report) {
    std::string out;
    for (const auto& f : report.findings) {
        out += f.rule + " " + f.file + ":" + std::to_string(f.line) + ": " + f.message + "\n";
    }
    out += std::string("lint: ") + (report.passed() ? "PASS" : "FAIL") + " (" +
           std::to_string(report.findings.size()) + (report.findings.size() == 1 ? " finding" : " findings") + ")\n";
    return out;
}

std::uint64_t count_emitted_macs(const EmittedUnit& unit) {
    std::set<std::string> typedefs = default_typedef_names();
    std::vector<TranslationUnit> units;
    try {
        if (unit.runtime) {
            units.push_back(parse(unit.runtime->name, unit.runtime->text, typedefs));
        }
        units.push_back(parse(unit.header.name, unit.header.text, typedefs));
        units.push_back(parse(unit.source.name, unit.source.text, typedefs));
    } catch (const ParseError& e) {
        throw std::invalid_argument(std::string("emitted code does not parse: ") + e.what());
    }
    Macros macros;
    std::map<std::string, const FunctionDef*> functions;
    for (const auto& u : units) {
        for (const auto& d : u.directives) {
            check_directive(d, macros);
        }
        for (const auto& f : u.functions) {
            functions[f.name] = &f;
        }
    }
    const std::string entry = unit.prefix + "_run";
    if (!functions.contains(entry)) {
        throw std::invalid_argument("no definition of " + entry);
    }
    return MacCounter(std::move(functions), std::move(macros)).function_cost(entry);
}

} // namespace tpnn
