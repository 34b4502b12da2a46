#pragma once

// Shared pieces of the language parser adapters. Internal to the library.

#include <chrono>
#include <string>
#include <vector>

#include "ee/astfeat.hpp"

namespace ee::ast {

struct Token {
    enum class Type { Ident, Number, String, Punct, Newline, Indent, Dedent, End };
    Type type = Type::End;
    std::string text;
    int line = 0;
};

// Thrown inside an adapter when a statement cannot be parsed; recovery
// happens at the statement loop. Never escapes parse_robust.
struct SyntaxError {};
struct BudgetExceeded {};

class ParseClock {
public:
    explicit ParseClock(std::chrono::milliseconds limit)
        : deadline_(std::chrono::steady_clock::now() + limit) {}

    // Cheap when called in hot loops: consults the clock every 64 ticks.
    void tick() {
        if ((++ticks_ & 63) == 0 && std::chrono::steady_clock::now() > deadline_) {
            throw BudgetExceeded{};
        }
    }

private:
    std::chrono::steady_clock::time_point deadline_;
    unsigned ticks_ = 0;
};

void fill_length_counts(const std::string& code, ParseResult& out);

ParseResult parse_clike(const std::string& code, const ParseBudget& budget);
ParseResult parse_python(const std::string& code, const ParseBudget& budget);

}  // namespace ee::ast
