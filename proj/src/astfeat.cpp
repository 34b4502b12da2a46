#include "ee/astfeat.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "ast_internal.hpp"
#include "ee/common.hpp"
#include "ee/langdata.hpp"

namespace ee {

namespace ast {

void fill_length_counts(const std::string& code, ParseResult& out) {
    out.char_count = static_cast<std::int64_t>(code.size());
    std::int64_t loc = 0, sloc = 0;
    bool line_open = false, line_content = false;
    for (char c : code) {
        if (c == '\n') {
            ++loc;
            if (line_content) ++sloc;
            line_open = line_content = false;
            continue;
        }
        line_open = true;
        if (!std::isspace(static_cast<unsigned char>(c))) line_content = true;
    }
    if (line_open) {
        ++loc;
        if (line_content) ++sloc;
    }
    out.loc = loc;
    out.sloc = sloc;
}

}  // namespace ast

bool has_parser_adapter(LanguageLabel lang) {
    switch (lang) {
        case LanguageLabel::C:
        case LanguageLabel::Cpp:
        case LanguageLabel::Java:
        case LanguageLabel::JavaScript:
        case LanguageLabel::PHP:
        case LanguageLabel::Python:
            return true;
        default:
            return false;
    }
}

ParseResult parse_robust(const std::string& code, LanguageLabel lang, ParseBudget budget) {
    if (!has_parser_adapter(lang)) {
        ParseResult out;
        out.supported = false;
        out.parsed_fraction = 0.0;
        ast::fill_length_counts(code, out);
        return out;
    }
    if (lang == LanguageLabel::Python) return ast::parse_python(code, budget);
    return ast::parse_clike(code, budget);
}

StatSummary summarize(std::vector<double> values) {
    StatSummary s;
    s.n = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.median = values[(values.size() - 1) / 2];  // lower median
    s.max = values.back();
    return s;
}

namespace {

bool is_decision_node(const AstNode& n) {
    if (n.kind == "if" || n.kind == "elif" || n.kind == "ternary" || n.kind == "case" ||
        n.kind == "catch") {
        return true;
    }
    if (n.kind.rfind("loop:", 0) == 0) return true;
    if (n.operator_tag && (*n.operator_tag == "&&" || *n.operator_tag == "||")) return true;
    return false;
}

struct Walk {
    std::map<std::string, std::int64_t> nodes_count;
    std::map<std::string, std::int64_t> ctrl_count;
    std::map<std::string, std::int64_t> literal_count;
    std::map<std::string, std::int64_t> operator_count;
    std::map<std::string, std::vector<double>> depths;
    std::map<std::string, std::vector<double>> ctrl_depths;
    std::vector<double> branching;
    std::vector<double> ctrl_branching;
    std::vector<double> params_per_fn;
    std::set<std::string> identifiers;
    std::set<std::string> udf_names;
    std::set<std::string> operators;
    std::vector<std::string> callee_names;
    std::int64_t n_nodes = 0, n_internal = 0, n_leaf = 0, decisions = 0;

    // Returns the number of nearest control descendants of `n`'s subtree
    // (used for the control-projection branching factor).
    std::int64_t visit(const AstNode& n, int depth, int ctrl_depth, bool is_root) {
        std::int64_t nearest_ctrl = 0;
        int child_ctrl_depth = ctrl_depth + (n.is_control ? 1 : 0);
        for (const AstNode& c : n.children) {
            std::int64_t below = visit(c, depth + 1, child_ctrl_depth, false);
            nearest_ctrl += c.is_control ? 1 : below;
        }
        if (is_root) return nearest_ctrl;  // synthetic module node is not counted

        ++n_nodes;
        ++nodes_count[n.kind];
        depths[n.kind].push_back(depth);
        if (n.children.empty()) {
            ++n_leaf;
        } else {
            ++n_internal;
            branching.push_back(static_cast<double>(n.children.size()));
        }
        if (n.is_control) {
            ++ctrl_count[n.kind];
            ctrl_depths[n.kind].push_back(ctrl_depth);
            ctrl_branching.push_back(static_cast<double>(nearest_ctrl));
        }
        if (n.kind == "ident" && !n.name.empty()) identifiers.insert(n.name);
        if (n.literal_type) ++literal_count[*n.literal_type];
        if (n.operator_tag) {
            ++operator_count[*n.operator_tag];
            operators.insert(*n.operator_tag);
        }
        if (n.kind == "fn_def") {
            if (!n.name.empty()) udf_names.insert(n.name);
            std::int64_t params = 0;
            for (const AstNode& c : n.children) {
                if (c.kind == "param") ++params;
            }
            params_per_fn.push_back(static_cast<double>(params));
        }
        if (n.kind == "call" && !n.name.empty()) callee_names.push_back(n.name);
        if (is_decision_node(n)) ++decisions;
        return nearest_ctrl;
    }
};

std::map<std::string, std::int64_t> count_keywords(const std::string& code, LanguageLabel lang) {
    std::map<std::string, std::int64_t> out;
    const auto& keywords = keyword_set_of(lang);
    if (keywords.empty()) return out;
    std::size_t i = 0, n = code.size();
    while (i < n) {
        unsigned char c = code[i];
        if (std::isalpha(c) || c == '_') {
            std::size_t j = i + 1;
            while (j < n && (std::isalnum(static_cast<unsigned char>(code[j])) || code[j] == '_')) ++j;
            std::string word = to_lower(std::string_view(code).substr(i, j - i));
            if (keywords.count(word)) ++out[word];
            i = j;
            continue;
        }
        if (std::isdigit(c)) {
            std::size_t j = i + 1;
            while (j < n && std::isalnum(static_cast<unsigned char>(code[j]))) ++j;
            i = j;
            continue;
        }
        ++i;
    }
    return out;
}

}  // namespace

std::int64_t cyclomatic(const ParseResult& pr) {
    Walk w;
    w.visit(pr.root, 0, 0, true);
    return 1 + w.decisions;
}

CodeFeatureSet extract_code_features(const ParseResult& pr, LanguageLabel lang,
                                     const std::string& code) {
    CodeFeatureSet f;
    Walk w;
    w.visit(pr.root, 0, 0, true);

    f.n_nodes = w.n_nodes;
    f.n_internal_nodes = w.n_internal;
    f.n_leaf_nodes = w.n_leaf;
    f.n_identifiers = static_cast<std::int64_t>(w.identifiers.size());
    f.n_udf = static_cast<std::int64_t>(w.udf_names.size());
    f.n_operators = static_cast<std::int64_t>(w.operators.size());
    f.cyclomatic = 1 + w.decisions;

    std::set<std::string> ext_names;
    for (const auto& callee : w.callee_names) {
        if (w.udf_names.count(callee)) {
            ++f.n_udf_calls;
        } else {
            ++f.n_ext_fun_calls;
            ext_names.insert(callee);
        }
    }
    f.n_ext_fun = static_cast<std::int64_t>(ext_names.size());

    f.nodes_count = std::move(w.nodes_count);
    f.ctrl_nodes_count = std::move(w.ctrl_count);
    f.literal_types_count = std::move(w.literal_count);
    f.operator_count = std::move(w.operator_count);
    f.keyword_count = count_keywords(code, lang);

    if (!w.branching.empty()) f.branching_factor = summarize(std::move(w.branching));
    if (!w.ctrl_branching.empty()) f.branching_factor_ctrl = summarize(std::move(w.ctrl_branching));
    if (!w.params_per_fn.empty()) f.params_udf = summarize(std::move(w.params_per_fn));
    for (auto& [kind, d] : w.depths) f.nodes_depth[kind] = summarize(std::move(d));
    for (auto& [kind, d] : w.ctrl_depths) f.nodes_depth_ctrl[kind] = summarize(std::move(d));

    f.chars = pr.char_count;
    f.loc = pr.loc;
    f.sloc = pr.sloc;
    return f;
}

namespace {

void put_stats(SparseVector& v, const std::string& prefix, const StatSummary& s) {
    v.set(prefix + ":mean", s.mean);
    v.set(prefix + ":median", s.median);
    v.set(prefix + ":max", s.max);
}

}  // namespace

SparseVector CodeFeatureSet::to_sparse(LanguageLabel lang) const {
    std::string ns = "code:" + to_lower(to_string(lang)) + ":";
    SparseVector v;
    v.set(ns + "n_nodes", static_cast<double>(n_nodes));
    v.set(ns + "n_internal_nodes", static_cast<double>(n_internal_nodes));
    v.set(ns + "n_leaf_nodes", static_cast<double>(n_leaf_nodes));
    v.set(ns + "n_identifiers", static_cast<double>(n_identifiers));
    v.set(ns + "n_ext_fun", static_cast<double>(n_ext_fun));
    v.set(ns + "n_ext_fun_calls", static_cast<double>(n_ext_fun_calls));
    v.set(ns + "n_udf", static_cast<double>(n_udf));
    v.set(ns + "n_udf_calls", static_cast<double>(n_udf_calls));
    v.set(ns + "n_operators", static_cast<double>(n_operators));
    v.set(ns + "cyclomatic", static_cast<double>(cyclomatic));
    v.set(ns + "chars", static_cast<double>(chars));
    v.set(ns + "loc", static_cast<double>(loc));
    v.set(ns + "sloc", static_cast<double>(sloc));
    for (const auto& [k, c] : nodes_count) v.set(ns + "nodes_count:" + k, static_cast<double>(c));
    for (const auto& [k, c] : ctrl_nodes_count)
        v.set(ns + "ctrl_nodes_count:" + k, static_cast<double>(c));
    for (const auto& [k, c] : literal_types_count)
        v.set(ns + "literal_types_count:" + k, static_cast<double>(c));
    for (const auto& [k, c] : operator_count)
        v.set(ns + "operator_count:" + k, static_cast<double>(c));
    for (const auto& [k, c] : keyword_count) v.set(ns + "kw:" + k, static_cast<double>(c));
    if (branching_factor) put_stats(v, ns + "branching_factor", *branching_factor);
    if (branching_factor_ctrl) put_stats(v, ns + "branching_factor_ctrl", *branching_factor_ctrl);
    if (params_udf) put_stats(v, ns + "n_params_udf", *params_udf);
    for (const auto& [k, s] : nodes_depth) put_stats(v, ns + "nodes_depth:" + k, s);
    for (const auto& [k, s] : nodes_depth_ctrl) put_stats(v, ns + "nodes_depth_ctrl:" + k, s);
    return v;
}

std::map<LanguageLabel, CodeFeatureSet> aggregate_poc_code_features(
    const std::vector<PocCodeFeatures>& pocs) {
    std::map<LanguageLabel, const PocCodeFeatures*> best;
    for (const auto& p : pocs) {
        auto it = best.find(p.lang);
        if (it == best.end()) {
            best[p.lang] = &p;
            continue;
        }
        const PocCodeFeatures* b = it->second;
        // Most complex by sloc; ties go to the earliest artifact, then source.
        if (p.features.sloc > b->features.sloc ||
            (p.features.sloc == b->features.sloc &&
             (p.date < b->date || (p.date == b->date && p.source < b->source)))) {
            it->second = &p;
        }
    }
    std::map<LanguageLabel, CodeFeatureSet> out;
    for (const auto& [lang, p] : best) out[lang] = p->features;
    return out;
}

}  // namespace ee
