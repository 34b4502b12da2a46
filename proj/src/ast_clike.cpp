// Error-tolerant parser for brace-and-semicolon languages (C, C++, Java,
// JavaScript, PHP). It recognizes the statement and expression skeleton,
// recovers from garbage by skipping to the next statement boundary, and
// makes no attempt at semantic fidelity: PoC files are routinely truncated,
// concatenated or plain wrong, and the output only feeds tree statistics.

#include <cstring>
#include <unordered_set>

#include "ast_internal.hpp"
#include "ee/common.hpp"

namespace ee::ast {

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$'; }

const std::unordered_set<std::string>& type_keywords() {
    static const std::unordered_set<std::string> set = {
        "int",      "char",   "long",   "short", "float",  "double", "void",     "unsigned",
        "signed",   "struct", "union",  "enum",  "const",  "static", "volatile", "register",
        "extern",   "bool",   "size_t", "auto",  "let",    "var",    "inline",   "uint8_t",
        "uint16_t", "uint32_t", "uint64_t", "int8_t", "int16_t", "int32_t", "int64_t",
    };
    return set;
}

class Lexer {
public:
    explicit Lexer(const std::string& src) : s_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        std::size_t i = 0, n = s_.size();
        int line = 1;
        while (i < n) {
            unsigned char c = s_[i];
            if (c == '\n') {
                ++line;
                ++i;
                continue;
            }
            if (std::isspace(c)) {
                ++i;
                continue;
            }
            if (c == '/' && i + 1 < n && s_[i + 1] == '/') {
                while (i < n && s_[i] != '\n') ++i;
                continue;
            }
            if (c == '/' && i + 1 < n && s_[i + 1] == '*') {
                i += 2;
                while (i + 1 < n && !(s_[i] == '*' && s_[i + 1] == '/')) {
                    if (s_[i] == '\n') ++line;
                    ++i;
                }
                i = i + 1 < n ? i + 2 : n;
                continue;
            }
            if (ident_start(c)) {
                std::size_t j = i + 1;
                while (j < n && ident_char(s_[j])) ++j;
                out.push_back({Token::Type::Ident, s_.substr(i, j - i), line});
                i = j;
                continue;
            }
            if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s_[i + 1])))) {
                std::size_t j = i;
                while (j < n && (ident_char(s_[j]) || s_[j] == '.')) ++j;
                out.push_back({Token::Type::Number, s_.substr(i, j - i), line});
                i = j;
                continue;
            }
            if (c == '"' || c == '\'') {
                char quote = static_cast<char>(c);
                std::size_t j = i + 1;
                while (j < n && s_[j] != quote && s_[j] != '\n') {
                    if (s_[j] == '\\' && j + 1 < n) ++j;
                    ++j;
                }
                out.push_back({Token::Type::String, s_.substr(i, std::min(j + 1, n) - i), line});
                i = j < n ? j + 1 : n;
                continue;
            }
            static const char* three[] = {"<<=", ">>=", "...", "===", "!=="};
            static const char* two[] = {"->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
                                        "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
                                        "^=", "::", "=>"};
            bool matched = false;
            for (const char* op : three) {
                if (s_.compare(i, 3, op) == 0) {
                    out.push_back({Token::Type::Punct, op, line});
                    i += 3;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            for (const char* op : two) {
                if (s_.compare(i, 2, op) == 0) {
                    out.push_back({Token::Type::Punct, op, line});
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            out.push_back({Token::Type::Punct, std::string(1, static_cast<char>(c)), line});
            ++i;
        }
        out.push_back({Token::Type::End, "", line});
        return out;
    }

private:
    const std::string& s_;
};

class Parser {
public:
    Parser(const std::string& code, const ParseBudget& budget)
        : clock_(budget.time_limit), max_depth_(budget.max_depth) {
        toks_ = Lexer(code).run();
    }

    ParseResult run() {
        ParseResult out;
        try {
            while (!at_end()) {
                clock_.tick();
                parse_element_guarded(out.root.children);
            }
        } catch (const BudgetExceeded&) {
            out.budget_exceeded = true;
        }
        out.error_count = errors_;
        out.parsed_fraction =
            attempted_ == 0 ? 1.0 : static_cast<double>(parsed_) / static_cast<double>(attempted_);
        return out;
    }

private:
    // --- token helpers -----------------------------------------------------

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t k = 1) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
    }
    bool at_end() const { return cur().type == Token::Type::End; }
    bool is_punct(const char* p) const {
        return cur().type == Token::Type::Punct && cur().text == p;
    }
    bool is_kw(const char* k) const {
        return cur().type == Token::Type::Ident && cur().text == k;
    }
    void advance() {
        if (!at_end()) ++pos_;
        clock_.tick();
    }
    void expect_punct(const char* p) {
        if (!is_punct(p)) throw SyntaxError{};
        advance();
    }

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : p_(p) {
            if (++p_.depth_ > p_.max_depth_) {
                --p_.depth_;
                throw SyntaxError{};
            }
        }
        ~DepthGuard() { --p_.depth_; }
        Parser& p_;
    };

    // --- statement level ---------------------------------------------------

    void parse_element_guarded(std::vector<AstNode>& dst) {
        ++attempted_;
        std::size_t start = pos_;
        try {
            dst.push_back(parse_element());
            ++parsed_;
        } catch (const SyntaxError&) {
            ++errors_;
            recover(start);
        }
    }

    // Skips the rest of the offending physical line, or to just past the
    // next ';' / '}', whichever comes first. Always consumes at least one
    // token so the statement loop cannot stall.
    void recover(std::size_t start) {
        if (pos_ == start && !at_end()) advance();
        int err_line = pos_ < toks_.size() ? toks_[std::min(pos_, toks_.size() - 1)].line : 0;
        while (!at_end() && cur().line == err_line) {
            bool boundary = is_punct(";") || is_punct("}");
            advance();
            if (boundary) break;
        }
    }

    AstNode parse_element() {
        if (is_punct("#")) return parse_preproc();
        std::size_t start = pos_;
        try {
            return parse_function_def();
        } catch (const SyntaxError&) {
            pos_ = start;
        }
        return parse_statement();
    }

    AstNode parse_preproc() {
        AstNode node("preproc");
        int line = cur().line;
        while (!at_end() && cur().line == line) advance();
        return node;
    }

    AstNode parse_function_def() {
        DepthGuard guard(*this);
        // `function name(...)` (JavaScript / PHP) or `type ... name(...)`.
        std::string name;
        int idents = 0;
        if (is_kw("function")) {
            advance();
            if (cur().type == Token::Type::Ident) {
                name = cur().text;
                advance();
            }
            idents = 2;  // keyword form needs no return type
        } else {
            int specifiers = 0;
            while (specifiers < 8 &&
                   (cur().type == Token::Type::Ident || is_punct("*") || is_punct("&"))) {
                if (cur().type == Token::Type::Ident) {
                    name = cur().text;
                    ++idents;
                }
                advance();
                ++specifiers;
            }
            if (idents < 2) throw SyntaxError{};  // need at least "type name"
        }
        if (!is_punct("(")) throw SyntaxError{};
        advance();
        std::vector<AstNode> params = parse_param_list();
        expect_punct(")");
        while (cur().type == Token::Type::Ident && !is_punct("{")) advance();  // const, noexcept...
        if (!is_punct("{")) throw SyntaxError{};
        advance();
        AstNode fn("fn_def");
        fn.name = name;
        for (auto& p : params) fn.children.push_back(std::move(p));
        fn.children.push_back(parse_block_contents());
        return fn;
    }

    std::vector<AstNode> parse_param_list() {
        std::vector<AstNode> params;
        if (is_punct(")")) return params;
        int depth = 0;
        bool saw_tokens = false;
        while (!at_end()) {
            if (depth == 0 && is_punct(")")) break;
            if (depth == 0 && is_punct(",")) {
                params.emplace_back("param");
                saw_tokens = false;
                advance();
                continue;
            }
            if (is_punct("(") || is_punct("[") || is_punct("{")) ++depth;
            if (is_punct(")") || is_punct("]") || is_punct("}")) --depth;
            if (is_punct(";")) throw SyntaxError{};  // not a parameter list
            saw_tokens = true;
            advance();
        }
        if (saw_tokens) params.emplace_back("param");
        return params;
    }

    AstNode parse_block_contents() {
        AstNode block("block");
        while (!at_end() && !is_punct("}")) {
            clock_.tick();
            if (is_punct("#")) {
                block.children.push_back(parse_preproc());
                continue;
            }
            if (is_kw("function") || looks_like_function_def()) {
                std::size_t start = pos_;
                ++attempted_;
                try {
                    block.children.push_back(parse_function_def());
                    ++parsed_;
                    continue;
                } catch (const SyntaxError&) {
                    pos_ = start;
                    --attempted_;  // fall through to plain statement parsing
                }
            }
            parse_statement_guarded(block.children);
        }
        if (is_punct("}")) advance();
        return block;
    }

    bool looks_like_function_def() const {
        // type ident ( ... cheap lookahead, the speculative parse decides
        return cur().type == Token::Type::Ident && peek().type == Token::Type::Ident &&
               peek(2).type == Token::Type::Punct && peek(2).text == "(";
    }

    void parse_statement_guarded(std::vector<AstNode>& dst) {
        ++attempted_;
        std::size_t start = pos_;
        try {
            dst.push_back(parse_statement());
            ++parsed_;
        } catch (const SyntaxError&) {
            ++errors_;
            recover(start);
        }
    }

    AstNode parse_statement() {
        DepthGuard guard(*this);
        clock_.tick();
        if (is_punct("{")) {
            advance();
            return parse_block_contents();
        }
        if (is_punct(";")) {
            advance();
            return AstNode("empty");
        }
        if (is_kw("if")) return parse_if();
        if (is_kw("while")) return parse_while();
        if (is_kw("do")) return parse_do();
        if (is_kw("for") || is_kw("foreach")) return parse_for();
        if (is_kw("switch")) return parse_switch();
        if (is_kw("try")) return parse_try();
        if (is_kw("return")) return parse_keyword_expr("return");
        if (is_kw("throw")) return parse_keyword_expr("throw");
        if (is_kw("goto")) return parse_keyword_expr("goto");
        if (is_kw("break") || is_kw("continue")) {
            AstNode node(cur().text);
            advance();
            eat_semicolon();
            return node;
        }
        if (is_kw("case") || is_kw("default")) return parse_case_label();
        if (is_kw("function")) return parse_function_def();
        if (is_kw("typedef") || is_kw("using") || is_kw("import") || is_kw("package") ||
            is_kw("include") || is_kw("require")) {
            AstNode node("import");
            int line = cur().line;
            while (!at_end() && !is_punct(";") && cur().line == line) advance();
            eat_semicolon();
            return node;
        }
        // Label: `ident:` at statement start (but not `default:`).
        if (cur().type == Token::Type::Ident && peek().type == Token::Type::Punct &&
            peek().text == ":") {
            AstNode node("label");
            node.name = cur().text;
            advance();
            advance();
            return node;
        }
        if (looks_like_declaration()) return parse_declaration();
        AstNode stmt("expr_stmt");
        stmt.children.push_back(parse_expression());
        eat_semicolon();
        return stmt;
    }

    void eat_semicolon() {
        if (is_punct(";")) {
            advance();
            return;
        }
        // Tolerated without a semicolon at a block edge, end of input, or
        // line break (covers JS semicolon insertion and clipped PoCs).
        if (is_punct("}") || at_end()) return;
        if (pos_ > 0 && cur().line != toks_[pos_ - 1].line) return;
        throw SyntaxError{};
    }

    AstNode parse_keyword_expr(const char* kind) {
        AstNode node(kind);
        advance();
        if (!is_punct(";") && !is_punct("}") && !at_end()) {
            int line = toks_[pos_ - 1].line;
            if (cur().line == line) node.children.push_back(parse_expression());
        }
        eat_semicolon();
        return node;
    }

    AstNode parse_if() {
        AstNode node("if");
        node.is_control = true;
        advance();
        expect_punct("(");
        node.children.push_back(parse_expression());
        expect_punct(")");
        node.children.push_back(parse_statement());
        if (is_kw("else")) {
            advance();
            AstNode els("else");
            els.is_control = true;
            els.children.push_back(parse_statement());  // else-if nests as if
            node.children.push_back(std::move(els));
        }
        return node;
    }

    AstNode parse_while() {
        AstNode node("loop:while");
        node.is_control = true;
        advance();
        expect_punct("(");
        node.children.push_back(parse_expression());
        expect_punct(")");
        if (is_punct(";")) {
            advance();
            return node;
        }
        node.children.push_back(parse_statement());
        return node;
    }

    AstNode parse_do() {
        AstNode node("loop:do");
        node.is_control = true;
        advance();
        node.children.push_back(parse_statement());
        if (is_kw("while")) {
            advance();
            expect_punct("(");
            node.children.push_back(parse_expression());
            expect_punct(")");
            eat_semicolon();
        }
        return node;
    }

    AstNode parse_for() {
        AstNode node("loop:for");
        node.is_control = true;
        advance();
        expect_punct("(");
        // Header segments: declarations/expressions separated by ';', or
        // iterator forms using `in` / `of` / ':'. Parsed loosely.
        while (!at_end() && !is_punct(")")) {
            clock_.tick();
            if (is_punct(";") || is_punct(":") || is_kw("in") || is_kw("of") || is_kw("as")) {
                advance();
                continue;
            }
            std::size_t before = pos_;
            if (looks_like_declaration()) {
                node.children.push_back(parse_declaration_header());
            } else {
                node.children.push_back(parse_expression());
            }
            if (pos_ == before) throw SyntaxError{};
        }
        expect_punct(")");
        if (is_punct(";")) {
            advance();
            return node;
        }
        node.children.push_back(parse_statement());
        return node;
    }

    AstNode parse_switch() {
        AstNode node("switch");
        node.is_control = true;
        advance();
        expect_punct("(");
        node.children.push_back(parse_expression());
        expect_punct(")");
        expect_punct("{");
        node.children.push_back(parse_block_contents());
        return node;
    }

    AstNode parse_case_label() {
        AstNode node(is_kw("default") ? "case" : "case");
        node.is_control = true;
        bool has_expr = is_kw("case");
        advance();
        if (has_expr) node.children.push_back(parse_expression());
        expect_punct(":");
        return node;
    }

    AstNode parse_try() {
        AstNode node("try");
        node.is_control = true;
        advance();
        node.children.push_back(parse_statement());
        while (is_kw("catch")) {
            AstNode c("catch");
            c.is_control = true;
            advance();
            if (is_punct("(")) {
                advance();
                int depth = 1;
                while (!at_end() && depth > 0) {
                    if (is_punct("(")) ++depth;
                    if (is_punct(")")) --depth;
                    advance();
                }
            }
            c.children.push_back(parse_statement());
            node.children.push_back(std::move(c));
        }
        if (is_kw("finally")) {
            AstNode f("finally");
            f.is_control = true;
            advance();
            f.children.push_back(parse_statement());
            node.children.push_back(std::move(f));
        }
        return node;
    }

    bool looks_like_declaration() const {
        if (cur().type != Token::Type::Ident) return false;
        bool known_type = type_keywords().count(cur().text) > 0;
        // "type ident" or "type *ident" or "type ident[" patterns.
        const Token& t1 = peek();
        if (known_type) {
            if (t1.type == Token::Type::Ident) return true;
            if (t1.type == Token::Type::Punct && (t1.text == "*" || t1.text == "&")) return true;
            return false;
        }
        // "Foo bar = ..." / "Foo bar;" with unknown type name.
        if (t1.type == Token::Type::Ident) {
            const Token& t2 = peek(2);
            if (t2.type == Token::Type::Punct &&
                (t2.text == "=" || t2.text == ";" || t2.text == "[" || t2.text == ",")) {
                return true;
            }
        }
        return false;
    }

    // Declaration without the trailing semicolon (for-loop headers).
    AstNode parse_declaration_header() {
        DepthGuard guard(*this);
        AstNode node("decl");
        while (cur().type == Token::Type::Ident &&
               (type_keywords().count(cur().text) || peek().type == Token::Type::Ident ||
                (peek().type == Token::Type::Punct &&
                 (peek().text == "*" || peek().text == "&")))) {
            advance();
            if (cur().type == Token::Type::Ident && peek().type != Token::Type::Ident &&
                !type_keywords().count(cur().text)) {
                break;
            }
        }
        while (is_punct("*") || is_punct("&")) advance();
        while (cur().type == Token::Type::Ident) {
            AstNode ident("ident");
            ident.name = cur().text;
            node.children.push_back(std::move(ident));
            advance();
            while (is_punct("[")) {  // array declarator
                advance();
                int depth = 1;
                while (!at_end() && depth > 0) {
                    if (is_punct("[")) ++depth;
                    if (is_punct("]")) --depth;
                    advance();
                }
            }
            if (is_punct("=")) {
                advance();
                node.children.push_back(parse_assignment_rhs());
            }
            if (is_punct(",")) {
                advance();
                while (is_punct("*") || is_punct("&")) advance();
                continue;
            }
            break;
        }
        if (node.children.empty()) throw SyntaxError{};
        return node;
    }

    AstNode parse_declaration() {
        AstNode node = parse_declaration_header();
        eat_semicolon();
        return node;
    }

    AstNode parse_assignment_rhs() {
        if (is_punct("{")) return parse_init_list();
        return parse_expression();
    }

    AstNode parse_init_list() {
        DepthGuard guard(*this);
        AstNode node("initlist");
        expect_punct("{");
        while (!at_end() && !is_punct("}")) {
            clock_.tick();
            if (is_punct(",")) {
                advance();
                continue;
            }
            std::size_t before = pos_;
            node.children.push_back(parse_assignment_rhs());
            if (pos_ == before) throw SyntaxError{};
        }
        expect_punct("}");
        return node;
    }

    // --- expression level --------------------------------------------------

    AstNode parse_expression() { return parse_assign(); }

    AstNode make_binop(const std::string& op, AstNode lhs, AstNode rhs) {
        AstNode node("binop:" + op);
        node.operator_tag = op;
        node.children.push_back(std::move(lhs));
        node.children.push_back(std::move(rhs));
        return node;
    }

    AstNode parse_assign() {
        DepthGuard guard(*this);
        AstNode lhs = parse_ternary();
        static const char* ops[] = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
                                    "<<=", ">>="};
        for (const char* op : ops) {
            if (is_punct(op)) {
                advance();
                return make_binop(op, std::move(lhs), parse_assign());
            }
        }
        return lhs;
    }

    AstNode parse_ternary() {
        AstNode cond = parse_binary(0);
        if (!is_punct("?")) return cond;
        DepthGuard guard(*this);
        advance();
        AstNode node("ternary");
        node.is_control = true;
        node.children.push_back(std::move(cond));
        node.children.push_back(parse_assign());
        expect_punct(":");
        node.children.push_back(parse_ternary());
        return node;
    }

    // Binary operators by precedence tier, lowest first.
    AstNode parse_binary(int tier) {
        static const std::vector<std::vector<const char*>> tiers = {
            {"||"}, {"&&"}, {"|"}, {"^"}, {"&"}, {"==", "!=", "===", "!=="},
            {"<", ">", "<=", ">="}, {"<<", ">>"}, {"+", "-"}, {"*", "/", "%"}};
        if (tier >= static_cast<int>(tiers.size())) return parse_unary();
        DepthGuard guard(*this);
        AstNode lhs = parse_binary(tier + 1);
        for (;;) {
            const char* matched = nullptr;
            for (const char* op : tiers[tier]) {
                if (is_punct(op)) {
                    matched = op;
                    break;
                }
            }
            if (!matched) return lhs;
            advance();
            lhs = make_binop(matched, std::move(lhs), parse_binary(tier + 1));
        }
    }

    AstNode parse_unary() {
        DepthGuard guard(*this);
        clock_.tick();
        static const char* ops[] = {"!", "~", "-", "+", "++", "--", "*", "&"};
        for (const char* op : ops) {
            if (is_punct(op)) {
                advance();
                AstNode node(std::string("unop:") + op);
                node.operator_tag = op;
                node.children.push_back(parse_unary());
                return node;
            }
        }
        if (is_kw("new") || is_kw("delete") || is_kw("sizeof") || is_kw("typeof")) {
            AstNode node("unop:" + cur().text);
            node.operator_tag = cur().text;
            advance();
            node.children.push_back(parse_unary());
            return node;
        }
        return parse_postfix();
    }

    AstNode parse_postfix() {
        DepthGuard guard(*this);
        AstNode expr = parse_primary();
        for (;;) {
            clock_.tick();
            if (is_punct("(")) {
                advance();
                AstNode call("call");
                call.name = expr.name;  // simple or member callee name
                call.children.push_back(std::move(expr));
                while (!at_end() && !is_punct(")")) {
                    if (is_punct(",")) {
                        advance();
                        continue;
                    }
                    std::size_t before = pos_;
                    call.children.push_back(parse_assignment_rhs());
                    if (pos_ == before) throw SyntaxError{};
                }
                expect_punct(")");
                expr = std::move(call);
                continue;
            }
            if (is_punct("[")) {
                advance();
                AstNode idx("index");
                idx.children.push_back(std::move(expr));
                if (!is_punct("]")) idx.children.push_back(parse_expression());
                expect_punct("]");
                expr = std::move(idx);
                continue;
            }
            if (is_punct(".") || is_punct("->") || is_punct("::")) {
                advance();
                if (cur().type != Token::Type::Ident) throw SyntaxError{};
                AstNode member("member");
                member.name = cur().text;
                advance();
                member.children.push_back(std::move(expr));
                expr = std::move(member);
                continue;
            }
            if (is_punct("++") || is_punct("--")) {
                AstNode node("unop:" + cur().text);
                node.operator_tag = cur().text;
                advance();
                node.children.push_back(std::move(expr));
                expr = std::move(node);
                continue;
            }
            return expr;
        }
    }

    AstNode parse_primary() {
        DepthGuard guard(*this);
        if (cur().type == Token::Type::Number) {
            bool is_float = cur().text.find('.') != std::string::npos ||
                            (cur().text.find_first_of("eE") != std::string::npos &&
                             cur().text.compare(0, 2, "0x") != 0 &&
                             cur().text.compare(0, 2, "0X") != 0);
            AstNode node(is_float ? "lit:float" : "lit:int");
            node.literal_type = is_float ? "float" : "int";
            advance();
            return node;
        }
        if (cur().type == Token::Type::String) {
            AstNode node("lit:string");
            node.literal_type = "string";
            advance();
            return node;
        }
        if (cur().type == Token::Type::Ident) {
            const std::string& t = cur().text;
            if (t == "true" || t == "false" || t == "TRUE" || t == "FALSE") {
                AstNode node("lit:bool");
                node.literal_type = "bool";
                advance();
                return node;
            }
            if (t == "NULL" || t == "null" || t == "nullptr" || t == "nil" || t == "undefined") {
                AstNode node("lit:null");
                node.literal_type = "null";
                advance();
                return node;
            }
            AstNode node("ident");
            node.name = t;
            advance();
            return node;
        }
        if (is_punct("(")) {
            advance();
            if (is_punct(")")) {  // e.g. casts mangled by recovery
                advance();
                return AstNode("empty");
            }
            AstNode inner = parse_expression();
            while (is_punct(",")) {  // comma expression
                advance();
                if (is_punct(")")) break;
                parse_expression();
            }
            expect_punct(")");
            return inner;
        }
        if (is_punct("{")) return parse_init_list();
        throw SyntaxError{};
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ParseClock clock_;
    int max_depth_;
    int depth_ = 0;
    int attempted_ = 0;
    int parsed_ = 0;
    int errors_ = 0;
};

}  // namespace

ParseResult parse_clike(const std::string& code, const ParseBudget& budget) {
    ParseResult out = Parser(code, budget).run();
    fill_length_counts(code, out);
    return out;
}

}  // namespace ee::ast
