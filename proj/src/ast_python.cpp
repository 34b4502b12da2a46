// Error-tolerant parser for Python-like code. Indentation drives block
// structure; statements that fail to parse are skipped to the next logical
// line. PoC snippets frequently lose their indentation when pasted through
// web pages, so unexpected indent tokens are absorbed as errors rather than
// aborting the file.

#include <cstring>
#include <unordered_set>

#include "ast_internal.hpp"

namespace ee::ast {

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

bool is_string_prefix(const std::string& word) {
    if (word.size() > 2) return false;
    for (char c : word) {
        char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'f' && l != 'u') return false;
    }
    return !word.empty();
}

class Lexer {
public:
    explicit Lexer(const std::string& src) : s_(src) {}

    std::vector<Token> run() {
        while (i_ < s_.size()) lex_line();
        // Close any pending indentation.
        if (!out_.empty() && out_.back().type != Token::Type::Newline) {
            out_.push_back({Token::Type::Newline, "", line_});
        }
        while (indents_.size() > 1) {
            indents_.pop_back();
            out_.push_back({Token::Type::Dedent, "", line_});
        }
        out_.push_back({Token::Type::End, "", line_});
        return out_;
    }

private:
    void lex_line() {
        if (bracket_depth_ == 0 && !continuation_) {
            int col = 0;
            std::size_t start = i_;
            while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) {
                col += s_[i_] == '\t' ? 8 - (col % 8) : 1;
                ++i_;
            }
            if (i_ >= s_.size()) return;
            if (s_[i_] == '\n') {  // blank line: no tokens
                ++i_;
                ++line_;
                return;
            }
            if (s_[i_] == '#') {  // comment-only line
                while (i_ < s_.size() && s_[i_] != '\n') ++i_;
                return;
            }
            (void)start;
            if (col > indents_.back()) {
                indents_.push_back(col);
                out_.push_back({Token::Type::Indent, "", line_});
            } else {
                while (col < indents_.back()) {
                    indents_.pop_back();
                    out_.push_back({Token::Type::Dedent, "", line_});
                }
                // col now <= top; a mismatch (col between levels) is treated
                // as the nearest enclosing level.
            }
        }
        continuation_ = false;
        lex_tokens_until_eol();
    }

    void lex_tokens_until_eol() {
        while (i_ < s_.size()) {
            unsigned char c = s_[i_];
            if (c == '\n') {
                ++i_;
                ++line_;
                if (bracket_depth_ == 0 && !continuation_) {
                    out_.push_back({Token::Type::Newline, "", line_ - 1});
                    return;
                }
                continuation_ = false;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
                ++i_;
                continue;
            }
            if (c == '\\' && i_ + 1 < s_.size() && s_[i_ + 1] == '\n') {
                continuation_ = true;
                ++i_;
                continue;
            }
            if (c == '#') {
                while (i_ < s_.size() && s_[i_] != '\n') ++i_;
                continue;
            }
            if (ident_start(c)) {
                std::size_t j = i_ + 1;
                while (j < s_.size() && ident_char(s_[j])) ++j;
                std::string word = s_.substr(i_, j - i_);
                if (j < s_.size() && (s_[j] == '"' || s_[j] == '\'') && is_string_prefix(word)) {
                    i_ = j;
                    lex_string();
                    continue;
                }
                out_.push_back({Token::Type::Ident, std::move(word), line_});
                i_ = j;
                continue;
            }
            if (std::isdigit(c) ||
                (c == '.' && i_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
                std::size_t j = i_;
                while (j < s_.size() && (ident_char(s_[j]) || s_[j] == '.')) ++j;
                out_.push_back({Token::Type::Number, s_.substr(i_, j - i_), line_});
                i_ = j;
                continue;
            }
            if (c == '"' || c == '\'') {
                lex_string();
                continue;
            }
            if (std::strchr("([{", c)) ++bracket_depth_;
            if (std::strchr(")]}", c) && bracket_depth_ > 0) --bracket_depth_;
            static const char* three[] = {"**=", "//=", ">>=", "<<="};
            static const char* two[] = {"**", "//", "<<", ">>", "<=", ">=", "==", "!=",
                                        "->", ":=", "+=", "-=", "*=", "/=", "%=", "&=",
                                        "|=", "^="};
            bool matched = false;
            for (const char* op : three) {
                if (s_.compare(i_, 3, op) == 0) {
                    out_.push_back({Token::Type::Punct, op, line_});
                    i_ += 3;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            for (const char* op : two) {
                if (s_.compare(i_, 2, op) == 0) {
                    out_.push_back({Token::Type::Punct, op, line_});
                    i_ += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            out_.push_back({Token::Type::Punct, std::string(1, static_cast<char>(c)), line_});
            ++i_;
        }
    }

    void lex_string() {
        char quote = s_[i_];
        bool triple = s_.compare(i_, 3, std::string(3, quote)) == 0;
        std::size_t start = i_;
        if (triple) {
            i_ += 3;
            std::size_t e = s_.find(std::string(3, quote), i_);
            if (e == std::string::npos) {
                for (std::size_t k = i_; k < s_.size(); ++k) {
                    if (s_[k] == '\n') ++line_;
                }
                i_ = s_.size();
            } else {
                for (std::size_t k = i_; k < e; ++k) {
                    if (s_[k] == '\n') ++line_;
                }
                i_ = e + 3;
            }
        } else {
            ++i_;
            while (i_ < s_.size() && s_[i_] != quote && s_[i_] != '\n') {
                if (s_[i_] == '\\' && i_ + 1 < s_.size() && s_[i_ + 1] != '\n') ++i_;
                ++i_;
            }
            if (i_ < s_.size() && s_[i_] == quote) ++i_;
        }
        out_.push_back({Token::Type::String, s_.substr(start, i_ - start), line_});
    }

    const std::string& s_;
    std::size_t i_ = 0;
    int line_ = 1;
    int bracket_depth_ = 0;
    bool continuation_ = false;
    std::vector<int> indents_{0};
    std::vector<Token> out_;
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
                if (skip_noise()) continue;
                parse_statement_guarded(out.root.children);
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

    // Stray structure tokens between statements. A lone INDENT here means the
    // file's indentation is inconsistent; it is absorbed and counted.
    bool skip_noise() {
        if (cur().type == Token::Type::Newline || cur().type == Token::Type::Dedent) {
            advance();
            return true;
        }
        if (cur().type == Token::Type::Indent) {
            ++errors_;
            advance();
            return true;
        }
        return false;
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

    // Skips to just past the next NEWLINE.
    void recover(std::size_t start) {
        if (pos_ == start && !at_end()) advance();
        while (!at_end()) {
            bool nl = cur().type == Token::Type::Newline;
            advance();
            if (nl) break;
        }
    }

    AstNode parse_statement() {
        DepthGuard guard(*this);
        clock_.tick();
        if (is_kw("if")) return parse_if();
        if (is_kw("while")) return parse_while();
        if (is_kw("for")) return parse_for();
        if (is_kw("def")) return parse_def();
        if (is_kw("class")) return parse_class();
        if (is_kw("try")) return parse_try();
        if (is_kw("with")) return parse_with();
        if (is_punct("@")) {
            AstNode node("decorator");
            advance();
            node.children.push_back(parse_expression());
            end_simple_stmt();
            return node;
        }
        return parse_simple_line();
    }

    void end_simple_stmt() {
        if (cur().type == Token::Type::Newline) {
            advance();
            return;
        }
        if (is_punct(";")) {
            advance();
            if (cur().type == Token::Type::Newline) advance();
            return;
        }
        if (at_end() || cur().type == Token::Type::Dedent) return;
        throw SyntaxError{};
    }

    AstNode parse_simple_line() {
        const std::string& kw = cur().text;
        if (cur().type == Token::Type::Ident) {
            if (kw == "return" || kw == "raise" || kw == "del" || kw == "assert" ||
                kw == "yield") {
                AstNode node(kw == "raise" ? "throw" : kw);
                advance();
                if (cur().type != Token::Type::Newline && !is_punct(";") && !at_end() &&
                    cur().type != Token::Type::Dedent) {
                    node.children.push_back(parse_expr_list());
                }
                end_simple_stmt();
                return node;
            }
            if (kw == "pass" || kw == "break" || kw == "continue") {
                AstNode node(kw == "pass" ? "empty" : kw);
                advance();
                end_simple_stmt();
                return node;
            }
            if (kw == "import" || kw == "from") {
                AstNode node("import");
                while (!at_end() && cur().type != Token::Type::Newline && !is_punct(";")) {
                    advance();
                }
                end_simple_stmt();
                return node;
            }
            if (kw == "global" || kw == "nonlocal") {
                AstNode node("decl");
                advance();
                while (cur().type == Token::Type::Ident || is_punct(",")) {
                    if (cur().type == Token::Type::Ident) {
                        AstNode ident("ident");
                        ident.name = cur().text;
                        node.children.push_back(std::move(ident));
                    }
                    advance();
                }
                end_simple_stmt();
                return node;
            }
        }
        // Assignment chain or bare expression.
        AstNode first = parse_expr_list();
        static const char* aug[] = {"=", "+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                    "&=", "|=", "^=", ">>=", "<<="};
        const char* matched = nullptr;
        for (const char* op : aug) {
            if (is_punct(op)) {
                matched = op;
                break;
            }
        }
        if (!matched && is_punct(":")) {  // annotated assignment `x: T = v`
            advance();
            parse_expression();
            if (is_punct("=")) {
                matched = "=";
            } else {
                AstNode stmt("decl");
                stmt.children.push_back(std::move(first));
                end_simple_stmt();
                return stmt;
            }
        }
        if (matched) {
            AstNode assign(std::string("binop:") + matched);
            assign.operator_tag = matched;
            assign.children.push_back(std::move(first));
            advance();
            assign.children.push_back(parse_expr_list());
            while (is_punct("=")) {  // a = b = c
                advance();
                assign.children.push_back(parse_expr_list());
            }
            AstNode stmt("expr_stmt");
            stmt.children.push_back(std::move(assign));
            end_simple_stmt();
            return stmt;
        }
        AstNode stmt("expr_stmt");
        stmt.children.push_back(std::move(first));
        end_simple_stmt();
        return stmt;
    }

    AstNode parse_suite() {
        DepthGuard guard(*this);
        AstNode block("block");
        expect_punct(":");
        if (cur().type != Token::Type::Newline) {  // inline suite
            parse_statement_guarded(block.children);
            return block;
        }
        advance();
        if (cur().type != Token::Type::Indent) {
            // Empty or mis-indented body; tolerated as an empty block.
            return block;
        }
        advance();
        while (!at_end() && cur().type != Token::Type::Dedent) {
            clock_.tick();
            if (cur().type == Token::Type::Newline) {
                advance();
                continue;
            }
            if (cur().type == Token::Type::Indent) {
                ++errors_;
                advance();
                continue;
            }
            parse_statement_guarded(block.children);
        }
        if (cur().type == Token::Type::Dedent) advance();
        return block;
    }

    AstNode parse_if() {
        AstNode node("if");
        node.is_control = true;
        advance();
        node.children.push_back(parse_expression());
        node.children.push_back(parse_suite());
        while (is_kw("elif")) {
            AstNode elif("elif");
            elif.is_control = true;
            advance();
            elif.children.push_back(parse_expression());
            elif.children.push_back(parse_suite());
            node.children.push_back(std::move(elif));
        }
        if (is_kw("else")) {
            AstNode els("else");
            els.is_control = true;
            advance();
            els.children.push_back(parse_suite());
            node.children.push_back(std::move(els));
        }
        return node;
    }

    AstNode parse_while() {
        AstNode node("loop:while");
        node.is_control = true;
        advance();
        node.children.push_back(parse_expression());
        node.children.push_back(parse_suite());
        if (is_kw("else")) {
            AstNode els("else");
            els.is_control = true;
            advance();
            els.children.push_back(parse_suite());
            node.children.push_back(std::move(els));
        }
        return node;
    }

    AstNode parse_for() {
        AstNode node("loop:for");
        node.is_control = true;
        advance();
        node.children.push_back(parse_expr_list());  // targets
        if (is_kw("in")) {
            advance();
            node.children.push_back(parse_expr_list());
        }
        node.children.push_back(parse_suite());
        if (is_kw("else")) {
            AstNode els("else");
            els.is_control = true;
            advance();
            els.children.push_back(parse_suite());
            node.children.push_back(std::move(els));
        }
        return node;
    }

    AstNode parse_def() {
        AstNode node("fn_def");
        advance();
        if (cur().type == Token::Type::Ident) {
            node.name = cur().text;
            advance();
        }
        expect_punct("(");
        int pdepth = 0;
        bool saw = false;
        while (!at_end()) {
            if (pdepth == 0 && is_punct(")")) break;
            if (pdepth == 0 && is_punct(",")) {
                node.children.emplace_back("param");
                saw = false;
                advance();
                continue;
            }
            if (is_punct("(") || is_punct("[") || is_punct("{")) ++pdepth;
            if (is_punct(")") || is_punct("]") || is_punct("}")) --pdepth;
            saw = true;
            advance();
        }
        if (saw) node.children.emplace_back("param");
        expect_punct(")");
        if (is_punct("->")) {
            advance();
            parse_expression();
        }
        node.children.push_back(parse_suite());
        return node;
    }

    AstNode parse_class() {
        AstNode node("class_def");
        advance();
        if (cur().type == Token::Type::Ident) {
            node.name = cur().text;
            advance();
        }
        if (is_punct("(")) {
            advance();
            while (!at_end() && !is_punct(")")) advance();
            expect_punct(")");
        }
        node.children.push_back(parse_suite());
        return node;
    }

    AstNode parse_try() {
        AstNode node("try");
        node.is_control = true;
        advance();
        node.children.push_back(parse_suite());
        while (is_kw("except")) {
            AstNode c("catch");
            c.is_control = true;
            advance();
            if (!is_punct(":")) {
                c.children.push_back(parse_expression());
                if (is_kw("as")) {
                    advance();
                    if (cur().type == Token::Type::Ident) advance();
                }
            }
            c.children.push_back(parse_suite());
            node.children.push_back(std::move(c));
        }
        if (is_kw("else")) {
            AstNode els("else");
            els.is_control = true;
            advance();
            els.children.push_back(parse_suite());
            node.children.push_back(std::move(els));
        }
        if (is_kw("finally")) {
            AstNode f("finally");
            f.is_control = true;
            advance();
            f.children.push_back(parse_suite());
            node.children.push_back(std::move(f));
        }
        return node;
    }

    AstNode parse_with() {
        AstNode node("with");
        node.is_control = true;
        advance();
        node.children.push_back(parse_expression());
        if (is_kw("as")) {
            advance();
            parse_expression();
        }
        while (is_punct(",")) {
            advance();
            node.children.push_back(parse_expression());
            if (is_kw("as")) {
                advance();
                parse_expression();
            }
        }
        node.children.push_back(parse_suite());
        return node;
    }

    // --- expressions ---------------------------------------------------

    AstNode parse_expr_list() {
        DepthGuard guard(*this);
        AstNode first = parse_expression();
        if (!is_punct(",")) return first;
        AstNode tuple("tuple");
        tuple.children.push_back(std::move(first));
        while (is_punct(",")) {
            advance();
            if (cur().type == Token::Type::Newline || is_punct("=") || is_punct(")") ||
                is_punct("]") || is_punct("}") || at_end()) {
                break;  // trailing comma
            }
            tuple.children.push_back(parse_expression());
        }
        return tuple;
    }

    AstNode make_binop(const std::string& op, AstNode lhs, AstNode rhs) {
        AstNode node("binop:" + op);
        node.operator_tag = op;
        node.children.push_back(std::move(lhs));
        node.children.push_back(std::move(rhs));
        return node;
    }

    AstNode parse_expression() { return parse_ternary(); }

    AstNode parse_ternary() {
        DepthGuard guard(*this);
        AstNode value = parse_or();
        if (!is_kw("if")) return value;
        advance();
        AstNode node("ternary");
        node.is_control = true;
        node.children.push_back(parse_or());  // condition
        node.children.push_back(std::move(value));
        if (is_kw("else")) {
            advance();
            node.children.push_back(parse_ternary());
        }
        return node;
    }

    AstNode parse_or() {
        DepthGuard guard(*this);
        AstNode lhs = parse_and();
        while (is_kw("or")) {
            advance();
            lhs = make_binop("||", std::move(lhs), parse_and());
        }
        return lhs;
    }

    AstNode parse_and() {
        DepthGuard guard(*this);
        AstNode lhs = parse_not();
        while (is_kw("and")) {
            advance();
            lhs = make_binop("&&", std::move(lhs), parse_not());
        }
        return lhs;
    }

    AstNode parse_not() {
        DepthGuard guard(*this);
        if (is_kw("not")) {
            advance();
            AstNode node("unop:!");
            node.operator_tag = "!";
            node.children.push_back(parse_not());
            return node;
        }
        return parse_comparison();
    }

    AstNode parse_comparison() {
        DepthGuard guard(*this);
        AstNode lhs = parse_binary(0);
        for (;;) {
            static const char* ops[] = {"==", "!=", "<", ">", "<=", ">="};
            const char* matched = nullptr;
            for (const char* op : ops) {
                if (is_punct(op)) {
                    matched = op;
                    break;
                }
            }
            if (matched) {
                advance();
                lhs = make_binop(matched, std::move(lhs), parse_binary(0));
                continue;
            }
            if (is_kw("in")) {
                advance();
                lhs = make_binop("in", std::move(lhs), parse_binary(0));
                continue;
            }
            if (is_kw("is")) {
                advance();
                if (is_kw("not")) advance();
                lhs = make_binop("is", std::move(lhs), parse_binary(0));
                continue;
            }
            if (is_kw("not") && peek().type == Token::Type::Ident && peek().text == "in") {
                advance();
                advance();
                lhs = make_binop("in", std::move(lhs), parse_binary(0));
                continue;
            }
            return lhs;
        }
    }

    AstNode parse_binary(int tier) {
        static const std::vector<std::vector<const char*>> tiers = {
            {"|"}, {"^"}, {"&"}, {"<<", ">>"}, {"+", "-"}, {"*", "/", "//", "%", "@"}, {"**"}};
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
        static const char* ops[] = {"-", "+", "~", "*", "**"};
        for (const char* op : ops) {
            if (is_punct(op)) {
                advance();
                AstNode node(std::string("unop:") + op);
                node.operator_tag = op;
                node.children.push_back(parse_unary());
                return node;
            }
        }
        if (is_kw("lambda")) {
            AstNode node("lambda");
            advance();
            while (!at_end() && !is_punct(":") && cur().type != Token::Type::Newline) advance();
            if (is_punct(":")) {
                advance();
                node.children.push_back(parse_expression());
            }
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
                call.name = expr.name;
                call.children.push_back(std::move(expr));
                while (!at_end() && !is_punct(")")) {
                    if (is_punct(",") || is_punct("=") || is_punct("*") || is_punct("**")) {
                        advance();
                        continue;
                    }
                    std::size_t before = pos_;
                    call.children.push_back(parse_expression());
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
                while (!at_end() && !is_punct("]")) {
                    if (is_punct(":") || is_punct(",")) {
                        advance();
                        continue;
                    }
                    std::size_t before = pos_;
                    idx.children.push_back(parse_expression());
                    if (pos_ == before) throw SyntaxError{};
                }
                expect_punct("]");
                expr = std::move(idx);
                continue;
            }
            if (is_punct(".")) {
                advance();
                if (cur().type != Token::Type::Ident) throw SyntaxError{};
                AstNode member("member");
                member.name = cur().text;
                advance();
                member.children.push_back(std::move(expr));
                expr = std::move(member);
                continue;
            }
            return expr;
        }
    }

    AstNode parse_primary() {
        DepthGuard guard(*this);
        if (cur().type == Token::Type::Number) {
            const std::string& t = cur().text;
            bool is_float = t.find('.') != std::string::npos ||
                            ((t.find_first_of("eE") != std::string::npos) &&
                             t.compare(0, 2, "0x") != 0 && t.compare(0, 2, "0X") != 0);
            AstNode node(is_float ? "lit:float" : "lit:int");
            node.literal_type = is_float ? "float" : "int";
            advance();
            return node;
        }
        if (cur().type == Token::Type::String) {
            AstNode node("lit:string");
            node.literal_type = "string";
            advance();
            while (cur().type == Token::Type::String) advance();  // adjacent concat
            return node;
        }
        if (cur().type == Token::Type::Ident) {
            const std::string& t = cur().text;
            if (t == "True" || t == "False") {
                AstNode node("lit:bool");
                node.literal_type = "bool";
                advance();
                return node;
            }
            if (t == "None") {
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
            if (is_punct(")")) {
                advance();
                return AstNode("tuple");
            }
            AstNode inner = parse_expr_list();
            if (is_kw("for")) {  // generator expression: skip the clauses
                while (!at_end() && !is_punct(")")) advance();
            }
            expect_punct(")");
            return inner;
        }
        if (is_punct("[")) {
            advance();
            AstNode node("list");
            while (!at_end() && !is_punct("]")) {
                if (is_punct(",")) {
                    advance();
                    continue;
                }
                if (is_kw("for") || is_kw("if")) {  // comprehension clauses
                    advance();
                    continue;
                }
                std::size_t before = pos_;
                node.children.push_back(parse_expression());
                if (pos_ == before) throw SyntaxError{};
            }
            expect_punct("]");
            return node;
        }
        if (is_punct("{")) {
            advance();
            AstNode node("dict");
            while (!at_end() && !is_punct("}")) {
                if (is_punct(",") || is_punct(":")) {
                    advance();
                    continue;
                }
                if (is_kw("for") || is_kw("if")) {
                    advance();
                    continue;
                }
                std::size_t before = pos_;
                node.children.push_back(parse_expression());
                if (pos_ == before) throw SyntaxError{};
            }
            expect_punct("}");
            return node;
        }
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

ParseResult parse_python(const std::string& code, const ParseBudget& budget) {
    ParseResult out = Parser(code, budget).run();
    fill_length_counts(code, out);
    return out;
}

}  // namespace ee::ast
