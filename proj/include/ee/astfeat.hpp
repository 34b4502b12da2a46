#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ee/dates.hpp"
#include "ee/langid.hpp"
#include "ee/sparse.hpp"

namespace ee {

// Shared node taxonomy across language adapters. Kinds are strings from a
// fixed scheme ("call", "fn_def", "if", "loop:for", "binop:&&", "lit:int",
// ...) so feature names stay stable no matter which adapter produced them.
struct AstNode {
    std::string kind;
    std::vector<AstNode> children;
    bool is_control = false;
    std::optional<std::string> literal_type;  // int, float, string, bool, null, regex
    std::optional<std::string> operator_tag;  // for binop:/unop: nodes
    std::string name;                         // identifier text, fn_def / callee name

    AstNode() = default;
    explicit AstNode(std::string k) : kind(std::move(k)) {}
};

struct ParseResult {
    AstNode root{"module"};
    int error_count = 0;
    double parsed_fraction = 1.0;  // parsed statements / candidate statements
    std::int64_t sloc = 0;         // non-blank lines
    std::int64_t loc = 0;
    std::int64_t char_count = 0;
    bool supported = true;         // false: no adapter for the language
    bool budget_exceeded = false;  // partial tree, time budget ran out
};

struct ParseBudget {
    std::chrono::milliseconds time_limit{100};
    int max_depth = 200;
};

// Error-tolerant parse. Never throws on any byte input; syntax errors are
// counted and recovery skips to the next statement boundary. Unsupported
// languages yield an empty tree with supported=false and parsed_fraction 0.
ParseResult parse_robust(const std::string& code, LanguageLabel lang, ParseBudget budget = {});

// True when a parser adapter exists for the language.
bool has_parser_adapter(LanguageLabel lang);

struct StatSummary {
    double mean = 0.0;
    double median = 0.0;  // lower median for even-sized multisets
    double max = 0.0;
    std::size_t n = 0;
};

StatSummary summarize(std::vector<double> values);

// One language block of the PoC-code feature group: AST complexity counts,
// structural statistics, keyword counts and length features.
struct CodeFeatureSet {
    std::int64_t n_nodes = 0;
    std::int64_t n_internal_nodes = 0;
    std::int64_t n_leaf_nodes = 0;
    std::int64_t n_identifiers = 0;  // distinct identifier names
    std::int64_t n_ext_fun = 0;      // distinct external callees
    std::int64_t n_ext_fun_calls = 0;
    std::int64_t n_udf = 0;  // function definitions in the file
    std::int64_t n_udf_calls = 0;
    std::int64_t n_operators = 0;  // distinct operators used
    std::int64_t cyclomatic = 1;

    std::map<std::string, std::int64_t> nodes_count;
    std::map<std::string, std::int64_t> ctrl_nodes_count;
    std::map<std::string, std::int64_t> literal_types_count;
    std::map<std::string, std::int64_t> operator_count;
    std::map<std::string, std::int64_t> keyword_count;

    std::optional<StatSummary> branching_factor;       // children per internal node
    std::optional<StatSummary> branching_factor_ctrl;  // children in the control projection
    std::optional<StatSummary> params_udf;             // parameters per function definition
    std::map<std::string, StatSummary> nodes_depth;
    std::map<std::string, StatSummary> nodes_depth_ctrl;

    std::int64_t chars = 0;
    std::int64_t loc = 0;
    std::int64_t sloc = 0;

    // Numeric features namespaced "code:<lang>:<name>".
    SparseVector to_sparse(LanguageLabel lang) const;
};

// Populates every feature from the parse tree plus the raw code text
// (needed for the reserved-keyword counts). Pure: identical inputs give
// identical results.
CodeFeatureSet extract_code_features(const ParseResult& pr, LanguageLabel lang,
                                     const std::string& code);

// 1 + number of decision nodes. Decision nodes: if, elif, ternary, loops,
// case/when branches, catch clauses and short-circuit boolean operators.
std::int64_t cyclomatic(const ParseResult& pr);

struct PocCodeFeatures {
    LanguageLabel lang = LanguageLabel::None;
    Date date;           // artifact date, for the tie-break
    std::string source;  // second tie-break
    CodeFeatureSet features;
};

// Per language, keeps the block of the PoC with maximal sloc (ties broken by
// earliest date, then source name). Lexical code tokens are aggregated
// separately, over all PoCs, by the text featurizer.
std::map<LanguageLabel, CodeFeatureSet> aggregate_poc_code_features(
    const std::vector<PocCodeFeatures>& pocs);

}  // namespace ee
