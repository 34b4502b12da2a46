#include <chrono>

#include "doctest.h"
#include "ee/astfeat.hpp"
#include "ee/rng.hpp"
#include "langid_fixtures.hpp"

using namespace ee;

namespace {

CodeFeatureSet features_of(const std::string& code, LanguageLabel lang) {
    ParseResult pr = parse_robust(code, lang);
    return extract_code_features(pr, lang, code);
}

std::int64_t sum_counts(const std::map<std::string, std::int64_t>& m) {
    std::int64_t s = 0;
    for (const auto& [_, v] : m) s += v;
    return s;
}

}  // namespace

TEST_CASE("empty input parses to an empty, error-free tree") {
    for (LanguageLabel lang : {LanguageLabel::C, LanguageLabel::Python}) {
        ParseResult pr = parse_robust("", lang);
        CHECK(pr.root.children.empty());
        CHECK(pr.error_count == 0);
        CHECK(pr.sloc == 0);
        CHECK(pr.loc == 0);
        CHECK(pr.parsed_fraction == 1.0);
    }
}

TEST_CASE("well-formed three-statement program parses fully") {
    ParseResult c = parse_robust("int a = 1;\nint b = 2;\nfoo(a + b);\n", LanguageLabel::C);
    CHECK(c.parsed_fraction == 1.0);
    CHECK(c.error_count == 0);
    CHECK(c.sloc == 3);

    ParseResult py = parse_robust("a = 1\nb = 2\nprint(a + b)\n", LanguageLabel::Python);
    CHECK(py.parsed_fraction == 1.0);
    CHECK(py.error_count == 0);
}

TEST_CASE("one garbage line among four statements costs one attempt") {
    std::string code =
        "int a = 1;\n"
        "int b = 2;\n"
        "@@ %% !! ??\n"
        "int c = 3;\n"
        "foo(a, b, c);\n";
    ParseResult pr = parse_robust(code, LanguageLabel::C);
    CHECK(pr.error_count >= 1);
    CHECK(pr.parsed_fraction == doctest::Approx(0.8));

    std::string py =
        "a = 1\n"
        "b = 2\n"
        "@@ %% ?? !!\n"
        "c = 3\n"
        "print(a)\n";
    ParseResult pr2 = parse_robust(py, LanguageLabel::Python);
    CHECK(pr2.error_count >= 1);
    CHECK(pr2.parsed_fraction == doctest::Approx(0.8));
}

TEST_CASE("unsupported language gives a structured no-adapter result") {
    CHECK_FALSE(has_parser_adapter(LanguageLabel::Ruby));
    ParseResult pr = parse_robust("puts 'x'", LanguageLabel::Ruby);
    CHECK_FALSE(pr.supported);
    CHECK(pr.parsed_fraction == 0.0);
    CHECK(pr.root.children.empty());
    CHECK(pr.sloc == 1);  // length counts still filled
}

TEST_CASE("empty program: zero counts, cyclomatic floor of 1") {
    CodeFeatureSet f = features_of("", LanguageLabel::C);
    CHECK(f.n_nodes == 0);
    CHECK(f.n_internal_nodes == 0);
    CHECK(f.n_leaf_nodes == 0);
    CHECK(f.n_identifiers == 0);
    CHECK(f.cyclomatic == 1);
    CHECK(f.nodes_count.empty());
    CHECK_FALSE(f.branching_factor.has_value());
}

TEST_CASE("user-defined function detection and parameter stats") {
    CodeFeatureSet f = features_of("def f(a, b): pass\nf(1, 2)\n", LanguageLabel::Python);
    CHECK(f.n_udf == 1);
    CHECK(f.n_udf_calls == 1);
    CHECK(f.n_ext_fun == 0);
    CHECK(f.n_ext_fun_calls == 0);
    REQUIRE(f.params_udf.has_value());
    CHECK(f.params_udf->max == 2);
}

TEST_CASE("external call counting distinguishes UDFs") {
    CodeFeatureSet f = features_of(
        "int helper(int x) { return x; }\n"
        "int main() { helper(1); helper(2); send(3); send(4); recv(5); return 0; }\n",
        LanguageLabel::C);
    CHECK(f.n_udf == 2);  // helper and main
    CHECK(f.n_udf_calls == 2);
    CHECK(f.n_ext_fun == 2);  // send, recv
    CHECK(f.n_ext_fun_calls == 3);
}

TEST_CASE("single if without else: cyclomatic 2, one control node") {
    CodeFeatureSet f = features_of("if (x) { y(); }", LanguageLabel::C);
    CHECK(f.cyclomatic == 2);
    CHECK(f.ctrl_nodes_count.at("if") == 1);
}

TEST_CASE("cyclomatic complexity per the declared decision set") {
    CHECK(features_of("a = 1; b = 2; c = a + b;", LanguageLabel::C).cyclomatic == 1);
    CHECK(features_of("if (a) {x();} while (b) {y();}", LanguageLabel::C).cyclomatic == 3);
    CHECK(features_of("x = a && b || c;", LanguageLabel::C).cyclomatic == 3);
    CHECK(features_of("x = a ? b : c;", LanguageLabel::C).cyclomatic == 2);
    CHECK(features_of("if a:\n    x = 1\nelif b:\n    x = 2\nelse:\n    x = 3\n",
                      LanguageLabel::Python)
              .cyclomatic == 3);
    CHECK(features_of("x = a and b or c\n", LanguageLabel::Python).cyclomatic == 3);
}

TEST_CASE("adding one if raises cyclomatic by exactly one") {
    std::string base = "int main() { int a = 1; f(a); return 0; }";
    std::string with_if = "int main() { int a = 1; if (a) { f(a); } return 0; }";
    CHECK(features_of(with_if, LanguageLabel::C).cyclomatic ==
          features_of(base, LanguageLabel::C).cyclomatic + 1);

    std::string pybase = "a = 1\nf(a)\n";
    std::string pyif = "a = 1\nif a:\n    f(a)\n";
    CHECK(features_of(pyif, LanguageLabel::Python).cyclomatic ==
          features_of(pybase, LanguageLabel::Python).cyclomatic + 1);
}

TEST_CASE("structural count invariants hold on assorted code") {
    auto corpus = fixtures::labeled_corpus(160, 31);
    for (const auto& [content, lang] : corpus) {
        if (!has_parser_adapter(lang)) continue;
        ParseResult pr = parse_robust(content, lang);
        CodeFeatureSet f = extract_code_features(pr, lang, content);
        CHECK(f.n_nodes == f.n_internal_nodes + f.n_leaf_nodes);
        CHECK(sum_counts(f.nodes_count) == f.n_nodes);
        CHECK(f.cyclomatic >= 1);
        CHECK(f.cyclomatic == cyclomatic(pr));
        for (const auto& [kind, stats] : f.nodes_depth) {
            CHECK(stats.max >= stats.mean);
            CHECK(stats.mean >= 0.0);
            CHECK(f.nodes_count.at(kind) == static_cast<std::int64_t>(stats.n));
        }
        CHECK(sum_counts(f.ctrl_nodes_count) <= f.n_nodes);
    }
}

TEST_CASE("literal, operator and keyword counting") {
    CodeFeatureSet f = features_of(
        "int a = 1; double b = 2.5; char* s = \"x\"; int ok = true; void* p = NULL;\n"
        "if (a < 2 && b > 1.0) { a = a + 1; }\n",
        LanguageLabel::C);
    CHECK(f.literal_types_count.at("int") >= 2);
    CHECK(f.literal_types_count.at("float") == 2);  // 2.5 and 1.0
    CHECK(f.literal_types_count.at("string") == 1);
    CHECK(f.literal_types_count.at("bool") == 1);
    CHECK(f.literal_types_count.at("null") == 1);
    CHECK(f.operator_count.at("&&") == 1);
    CHECK(f.operator_count.at("<") == 1);
    CHECK(f.keyword_count.at("int") == 2);
    CHECK(f.keyword_count.at("if") == 1);
    CHECK(f.n_operators == static_cast<std::int64_t>(f.operator_count.size()));
}

TEST_CASE("feature extraction is pure") {
    std::string code = "for (int i = 0; i < 9; i++) { if (i % 2) { f(i); } }";
    ParseResult p1 = parse_robust(code, LanguageLabel::C);
    ParseResult p2 = parse_robust(code, LanguageLabel::C);
    SparseVector v1 = extract_code_features(p1, LanguageLabel::C, code).to_sparse(LanguageLabel::C);
    SparseVector v2 = extract_code_features(p2, LanguageLabel::C, code).to_sparse(LanguageLabel::C);
    CHECK(v1.entries() == v2.entries());
    CHECK(v1.get("code:c:cyclomatic") == 3.0);
}

TEST_CASE("aggregation keeps the most complex PoC per language") {
    auto block = [](LanguageLabel lang, std::int64_t sloc, const char* date, const char* source) {
        PocCodeFeatures p;
        p.lang = lang;
        p.date = Date::parse(date);
        p.source = source;
        p.features.sloc = sloc;
        return p;
    };

    SUBCASE("max sloc wins") {
        auto out = aggregate_poc_code_features({block(LanguageLabel::Python, 10, "2019-01-01", "a"),
                                                block(LanguageLabel::Python, 50, "2019-02-01", "b")});
        CHECK(out.size() == 1);
        CHECK(out.at(LanguageLabel::Python).sloc == 50);
    }
    SUBCASE("one block per language") {
        auto out = aggregate_poc_code_features({block(LanguageLabel::C, 30, "2019-01-01", "a"),
                                                block(LanguageLabel::Python, 20, "2019-01-02", "b")});
        CHECK(out.size() == 2);
        CHECK(out.count(LanguageLabel::C) == 1);
        CHECK(out.count(LanguageLabel::Python) == 1);
    }
    SUBCASE("sloc tie goes to the earlier artifact") {
        auto a = block(LanguageLabel::C, 30, "2019-01-05", "later");
        a.features.cyclomatic = 7;
        auto b = block(LanguageLabel::C, 30, "2019-01-02", "earlier");
        b.features.cyclomatic = 3;
        auto out = aggregate_poc_code_features({a, b});
        CHECK(out.at(LanguageLabel::C).cyclomatic == 3);
    }
}

TEST_CASE("namespaced sparse output carries only non-zero features") {
    CodeFeatureSet f = features_of("def f(x):\n    return x\n", LanguageLabel::Python);
    SparseVector v = f.to_sparse(LanguageLabel::Python);
    CHECK(v.get("code:python:n_udf") == 1.0);
    CHECK(v.get("code:python:cyclomatic") == 1.0);
    for (const auto& [id, value] : v) {
        CHECK(id.rfind("code:python:", 0) == 0);
        CHECK(value != 0.0);
    }
}

TEST_CASE("python indentation recovery tolerates mangled files") {
    std::string mangled =
        "def f(x):\n"
        "return x\n"
        "  y = 1\n"
        "z = f(2)\n";
    ParseResult pr = parse_robust(mangled, LanguageLabel::Python);
    CHECK(pr.parsed_fraction > 0.0);  // never throws, never hangs
}

TEST_CASE("fuzzed inputs neither crash nor blow the budget") {
    Rng rng(1234);
    const char structure_chars[] = "(){}[];:,.\n\t \"'#<>=+-*/%&|!?";
    for (int i = 0; i < 1500; ++i) {
        std::string input;
        int len = rng.next_int(0, 600);
        bool mostly_structure = rng.next_bernoulli(0.5);
        for (int k = 0; k < len; ++k) {
            if (mostly_structure && rng.next_bernoulli(0.7)) {
                input.push_back(structure_chars[rng.next_below(sizeof(structure_chars) - 1)]);
            } else {
                input.push_back(static_cast<char>(rng.next_below(256)));
            }
        }
        LanguageLabel lang = rng.next_bernoulli(0.5) ? LanguageLabel::C : LanguageLabel::Python;
        auto start = std::chrono::steady_clock::now();
        ParseResult pr = parse_robust(input, lang);
        auto elapsed = std::chrono::steady_clock::now() - start;
        CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 1000);
        CodeFeatureSet f = extract_code_features(pr, lang, input);
        CHECK(f.n_nodes == f.n_internal_nodes + f.n_leaf_nodes);
        CHECK(sum_counts(f.nodes_count) == f.n_nodes);
        CHECK(f.cyclomatic >= 1);
        CHECK(pr.parsed_fraction >= 0.0);
        CHECK(pr.parsed_fraction <= 1.0);
    }
}

TEST_CASE("deep nesting hits the depth limit instead of the stack") {
    std::string deep;
    for (int i = 0; i < 5000; ++i) deep += "(";
    deep += "1";
    for (int i = 0; i < 5000; ++i) deep += ")";
    ParseResult pr = parse_robust("x = " + deep + ";", LanguageLabel::C);
    CHECK(pr.error_count >= 1);

    std::string pydeep = "x = " + deep + "\n";
    ParseResult pr2 = parse_robust(pydeep, LanguageLabel::Python);
    CHECK(pr2.error_count >= 1);
}

TEST_CASE("time budget caps runaway inputs") {
    std::string big;
    for (int i = 0; i < 400000; ++i) big += "f(x); ";
    ParseBudget budget;
    budget.time_limit = std::chrono::milliseconds(20);
    auto start = std::chrono::steady_clock::now();
    ParseResult pr = parse_robust(big, LanguageLabel::C, budget);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();
    CHECK(ms < 2000);
    CHECK(pr.parsed_fraction <= 1.0);
}
