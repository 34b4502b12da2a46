#include "ee/langid.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "ee/common.hpp"
#include "ee/langdata.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;

namespace {

constexpr std::array<const char*, kLanguageCount> kLabelNames = {
    "Text", "Ruby",  "C",     "Perl", "Python", "JavaScript", "PHP",
    "HTML", "Shell", "VisualBasic", "None", "Cpp", "Java"};

// Two-character punctuation sequences kept as tokens; single punctuation
// characters below carry enough signal on their own. Everything else that is
// not an identifier is discarded.
const std::unordered_set<std::string>& punct_digraphs() {
    static const std::unordered_set<std::string> set = {
        "->", "::", "<?", "?>", "#!", "=>", "</", "/>", "/*", "*/", "//",
        "<<", ">>", "&&", "||", "==", "!=", "<=", ">=", "=~", "#{", "${",
        "<%", "%>", "<!", "+=", "-=",
    };
    return set;
}

constexpr const char* kPunctSingles = "#$@;{}&|<>=";

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

}  // namespace

const char* to_string(LanguageLabel l) { return kLabelNames[static_cast<int>(l)]; }

std::optional<LanguageLabel> language_from_string(const std::string& s) {
    for (int i = 0; i < kLanguageCount; ++i) {
        if (s == kLabelNames[i]) return static_cast<LanguageLabel>(i);
    }
    if (s == "C++") return LanguageLabel::Cpp;
    return std::nullopt;
}

std::optional<LanguageLabel> language_from_extension(const std::string& ext) {
    std::string e = to_lower(ext);
    if (!e.empty() && e[0] == '.') e.erase(0, 1);
    if (e == "rb") return LanguageLabel::Ruby;
    if (e == "c") return LanguageLabel::C;
    if (e == "pl" || e == "pm" || e == "cgi") return LanguageLabel::Perl;
    if (e == "py") return LanguageLabel::Python;
    if (e == "js" || e == "mjs") return LanguageLabel::JavaScript;
    if (e == "php" || e == "php3" || e == "php4" || e == "php5") return LanguageLabel::PHP;
    if (e == "html" || e == "htm" || e == "xhtml") return LanguageLabel::HTML;
    if (e == "sh" || e == "bash") return LanguageLabel::Shell;
    if (e == "vb" || e == "vbs" || e == "bas") return LanguageLabel::VisualBasic;
    if (e == "cpp" || e == "cc" || e == "cxx" || e == "hpp" || e == "hh") return LanguageLabel::Cpp;
    if (e == "java") return LanguageLabel::Java;
    if (e == "txt" || e == "md" || e == "text") return LanguageLabel::Text;
    // ".h" is ambiguous between C and C++; no short-circuit for it.
    return std::nullopt;
}

std::vector<std::string> langid_tokens(const std::string& content) {
    std::vector<std::string> tokens;
    const std::size_t n = content.size();
    std::size_t i = 0;
    while (i < n) {
        unsigned char c = content[i];
        if (is_ident_start(c)) {
            std::size_t j = i + 1;
            while (j < n && is_ident_char(content[j])) ++j;
            tokens.push_back(to_lower(std::string_view(content).substr(i, j - i)));
            i = j;
            continue;
        }
        if (std::isdigit(c)) {  // numbers carry no language signal here
            std::size_t j = i + 1;
            while (j < n && is_ident_char(content[j])) ++j;
            i = j;
            continue;
        }
        if (i + 1 < n) {
            std::string two = content.substr(i, 2);
            if (punct_digraphs().count(two)) {
                tokens.push_back(std::move(two));
                i += 2;
                continue;
            }
        }
        if (std::strchr(kPunctSingles, static_cast<char>(c)) && c != '\0') {
            tokens.push_back(std::string(1, static_cast<char>(c)));
        }
        ++i;
    }
    return tokens;
}

bool is_code_like_token(const std::string& token) {
    if (token.empty()) return false;
    if (!is_ident_start(static_cast<unsigned char>(token[0]))) return true;  // punctuation token
    return all_keywords().count(token) > 0;
}

TokenModel TokenModel::train(const std::vector<std::pair<std::string, LanguageLabel>>& labeled,
                             double alpha) {
    if (labeled.empty()) throw Error(Errc::invalid_argument, "empty language training set");
    TokenModel m;
    m.alpha_ = alpha;
    for (const auto& [content, label] : labeled) {
        ++m.class_docs_[label];
        ++m.total_docs_;
        for (const auto& tok : langid_tokens(content)) {
            ++m.counts_[label][tok];
            ++m.class_totals_[label];
            ++m.vocab_[tok];
        }
    }
    return m;
}

std::map<LanguageLabel, double> TokenModel::posterior(const std::string& content) const {
    std::map<LanguageLabel, double> log_scores;
    const double v = static_cast<double>(vocab_.size());
    const auto tokens = langid_tokens(content);
    for (const auto& [label, docs] : class_docs_) {
        double s = std::log(static_cast<double>(docs) / static_cast<double>(total_docs_));
        auto totals_it = class_totals_.find(label);
        const double total =
            totals_it == class_totals_.end() ? 0.0 : static_cast<double>(totals_it->second);
        const double denom = std::log(total + alpha_ * v);
        auto counts_it = counts_.find(label);
        for (const auto& tok : tokens) {
            double count = 0.0;
            if (counts_it != counts_.end()) {
                auto it = counts_it->second.find(tok);
                if (it != counts_it->second.end()) count = static_cast<double>(it->second);
            }
            s += std::log(count + alpha_) - denom;
        }
        log_scores[label] = s;
    }
    // Softmax-normalize in log space.
    std::map<LanguageLabel, double> post;
    if (log_scores.empty()) return post;
    double mx = -1e300;
    for (const auto& [_, s] : log_scores) mx = std::max(mx, s);
    double z = 0.0;
    for (const auto& [_, s] : log_scores) z += std::exp(s - mx);
    for (const auto& [label, s] : log_scores) post[label] = std::exp(s - mx) / z;
    return post;
}

std::uint64_t TokenModel::token_count(LanguageLabel l, const std::string& token) const {
    auto it = counts_.find(l);
    if (it == counts_.end()) return 0;
    auto jt = it->second.find(token);
    return jt == it->second.end() ? 0 : jt->second;
}

std::uint64_t TokenModel::doc_count(LanguageLabel l) const {
    auto it = class_docs_.find(l);
    return it == class_docs_.end() ? 0 : it->second;
}

std::string TokenModel::to_json() const {
    json j;
    j["format"] = "ee.langid-model";
    j["version"] = 1;
    j["alpha"] = alpha_;
    json classes = json::object();
    for (const auto& [label, toks] : counts_) {
        json c;
        c["docs"] = class_docs_.at(label);
        json t = json::object();
        for (const auto& [tok, count] : toks) t[tok] = count;
        c["tokens"] = std::move(t);
        classes[to_string(label)] = std::move(c);
    }
    // Classes that produced no tokens still need their doc counts.
    for (const auto& [label, docs] : class_docs_) {
        const char* name = to_string(label);
        if (!classes.contains(name)) {
            classes[name] = json{{"docs", docs}, {"tokens", json::object()}};
        }
    }
    j["classes"] = std::move(classes);
    return j.dump(2);
}

TokenModel TokenModel::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "langid model: invalid JSON");
    if (j.value("format", "") != "ee.langid-model")
        throw Error(Errc::parse, "langid model: unrecognized format");
    if (j.value("version", 0) != 1)
        throw Error(Errc::version_mismatch, "langid model: unsupported version");
    TokenModel m;
    m.alpha_ = j.value("alpha", 0.01);
    for (auto& [name, c] : j.at("classes").items()) {
        auto label = language_from_string(name);
        if (!label) throw Error(Errc::parse, "langid model: unknown class " + name);
        std::uint64_t docs = c.at("docs").get<std::uint64_t>();
        m.class_docs_[*label] = docs;
        m.total_docs_ += docs;
        for (auto& [tok, count] : c.at("tokens").items()) {
            std::uint64_t n = count.get<std::uint64_t>();
            m.counts_[*label][tok] = n;
            m.class_totals_[*label] += n;
            m.vocab_[tok] += n;
        }
    }
    if (m.total_docs_ == 0) throw Error(Errc::parse, "langid model: no training documents");
    return m;
}

IdentifyResult identify(const std::string& content,
                        const std::optional<std::string>& declared_extension,
                        const TokenModel& model, IdentifyParams params) {
    IdentifyResult out;
    if (content.find_first_not_of(" \t\r\n\f\v") == std::string::npos) {
        return {LanguageLabel::Text, 1.0};
    }
    auto post = model.posterior(content);
    auto post_of = [&](LanguageLabel l) {
        auto it = post.find(l);
        return it == post.end() ? 0.0 : it->second;
    };

    // An unambiguous extension wins unless the token posterior contradicts it.
    if (declared_extension) {
        auto ext_lang = language_from_extension(*declared_extension);
        if (ext_lang && model.trained_class(*ext_lang) &&
            post_of(*ext_lang) >= params.ext_contradiction_threshold) {
            return {*ext_lang, post_of(*ext_lang)};
        }
    }

    const auto tokens = langid_tokens(content);
    int code_like = 0;
    for (const auto& t : tokens) {
        if (is_code_like_token(t)) ++code_like;
    }
    if (code_like < params.min_code_tokens) {
        return {LanguageLabel::Text, model.trained_class(LanguageLabel::Text)
                                         ? post_of(LanguageLabel::Text)
                                         : 1.0};
    }

    LanguageLabel best = LanguageLabel::None;
    double best_p = -1.0;
    for (const auto& [label, p] : post) {
        if (p > best_p) {
            best = label;
            best_p = p;
        }
    }
    if (best_p < 0.0) return {LanguageLabel::None, 0.0};
    return {best, best_p};
}

namespace {

struct CommentSink {
    std::string code;
    std::vector<std::string> comments;
    bool unterminated = false;

    void add_comment(std::string_view text) {
        std::size_t b = text.find_first_not_of(" \t\r\n");
        if (b == std::string_view::npos) return;
        std::size_t e = text.find_last_not_of(" \t\r\n");
        comments.emplace_back(text.substr(b, e - b + 1));
    }
};

bool at_line_start(const std::string& s, std::size_t i) {
    return i == 0 || s[i - 1] == '\n';
}

// True when only blanks precede position i on its line.
bool only_indent_before(const std::string& s, std::size_t i) {
    while (i > 0) {
        char c = s[i - 1];
        if (c == '\n') return true;
        if (c != ' ' && c != '\t') return false;
        --i;
    }
    return true;
}

bool line_starts_with(const std::string& s, std::size_t i, std::string_view word) {
    return at_line_start(s, i) && s.compare(i, word.size(), word) == 0;
}

void scan_c_family(const std::string& s, CommentSink& out) {
    std::size_t i = 0, n = s.size();
    while (i < n) {
        char c = s[i];
        if (c == '"' || c == '\'') {  // string literal: copy verbatim
            char quote = c;
            out.code.push_back(c);
            ++i;
            while (i < n) {
                out.code.push_back(s[i]);
                if (s[i] == '\\' && i + 1 < n) {
                    out.code.push_back(s[i + 1]);
                    i += 2;
                    continue;
                }
                if (s[i] == quote || s[i] == '\n') {  // unterminated at EOL: bail out
                    ++i;
                    break;
                }
                ++i;
            }
            continue;
        }
        if (c == '/' && i + 1 < n && s[i + 1] == '/') {
            std::size_t e = s.find('\n', i);
            if (e == std::string::npos) e = n;
            out.add_comment(std::string_view(s).substr(i + 2, e - i - 2));
            i = e;  // keep the newline in code
            continue;
        }
        if (c == '/' && i + 1 < n && s[i + 1] == '*') {
            std::size_t e = s.find("*/", i + 2);
            if (e == std::string::npos) {
                out.add_comment(std::string_view(s).substr(i + 2));
                out.unterminated = true;
                return;
            }
            out.add_comment(std::string_view(s).substr(i + 2, e - i - 2));
            out.code.push_back(' ');  // keeps surrounding tokens apart
            i = e + 2;
            continue;
        }
        out.code.push_back(c);
        ++i;
    }
}

void scan_hash_family(const std::string& s, LanguageLabel lang, CommentSink& out) {
    std::size_t i = 0, n = s.size();
    while (i < n) {
        char c = s[i];
        if (lang == LanguageLabel::Perl && line_starts_with(s, i, "=pod")) {
            std::size_t e = s.find("\n=cut", i);
            if (e == std::string::npos) {
                out.add_comment(std::string_view(s).substr(i + 4));
                out.unterminated = true;
                return;
            }
            out.add_comment(std::string_view(s).substr(i + 4, e - i - 4));
            std::size_t eol = s.find('\n', e + 1);
            i = eol == std::string::npos ? n : eol;
            continue;
        }
        if (lang == LanguageLabel::Ruby && line_starts_with(s, i, "=begin")) {
            std::size_t e = s.find("\n=end", i);
            if (e == std::string::npos) {
                out.add_comment(std::string_view(s).substr(i + 6));
                out.unterminated = true;
                return;
            }
            out.add_comment(std::string_view(s).substr(i + 6, e - i - 6));
            std::size_t eol = s.find('\n', e + 1);
            i = eol == std::string::npos ? n : eol;
            continue;
        }
        if (lang == LanguageLabel::Python && (s.compare(i, 3, "\"\"\"") == 0 ||
                                              s.compare(i, 3, "'''") == 0)) {
            std::string delim = s.substr(i, 3);
            bool docstring = only_indent_before(s, i);
            std::size_t e = s.find(delim, i + 3);
            if (docstring) {
                if (e == std::string::npos) {
                    out.add_comment(std::string_view(s).substr(i + 3));
                    out.unterminated = true;
                    return;
                }
                out.add_comment(std::string_view(s).substr(i + 3, e - i - 3));
                out.code.push_back(' ');
                i = e + 3;
            } else {  // expression-position triple quote is a string
                std::size_t stop = e == std::string::npos ? n : e + 3;
                out.code.append(s, i, stop - i);
                i = stop;
            }
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            out.code.push_back(c);
            ++i;
            while (i < n) {
                out.code.push_back(s[i]);
                if (s[i] == '\\' && i + 1 < n) {
                    out.code.push_back(s[i + 1]);
                    i += 2;
                    continue;
                }
                if (s[i] == quote || s[i] == '\n') {
                    ++i;
                    break;
                }
                ++i;
            }
            continue;
        }
        if (c == '#') {
            if (i + 1 < n && s[i + 1] == '!' && at_line_start(s, i)) {
                // Shebang stays in code: it is executable syntax, not prose.
                std::size_t e = s.find('\n', i);
                if (e == std::string::npos) e = n;
                out.code.append(s, i, e - i);
                i = e;
                continue;
            }
            std::size_t e = s.find('\n', i);
            if (e == std::string::npos) e = n;
            out.add_comment(std::string_view(s).substr(i + 1, e - i - 1));
            i = e;
            continue;
        }
        out.code.push_back(c);
        ++i;
    }
}

void scan_html(const std::string& s, CommentSink& out) {
    std::size_t i = 0, n = s.size();
    while (i < n) {
        if (s.compare(i, 4, "<!--") == 0) {
            std::size_t e = s.find("-->", i + 4);
            if (e == std::string::npos) {
                out.add_comment(std::string_view(s).substr(i + 4));
                out.unterminated = true;
                return;
            }
            out.add_comment(std::string_view(s).substr(i + 4, e - i - 4));
            out.code.push_back(' ');
            i = e + 3;
            continue;
        }
        out.code.push_back(s[i]);
        ++i;
    }
}

void scan_visualbasic(const std::string& s, CommentSink& out) {
    std::size_t i = 0, n = s.size();
    while (i < n) {
        char c = s[i];
        if (c == '"') {
            out.code.push_back(c);
            ++i;
            while (i < n) {
                out.code.push_back(s[i]);
                if (s[i] == '"') {
                    if (i + 1 < n && s[i + 1] == '"') {  // doubled quote escape
                        out.code.push_back(s[i + 1]);
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                if (s[i] == '\n') {
                    ++i;
                    break;
                }
                ++i;
            }
            continue;
        }
        if (c == '\'') {
            std::size_t e = s.find('\n', i);
            if (e == std::string::npos) e = n;
            out.add_comment(std::string_view(s).substr(i + 1, e - i - 1));
            i = e;
            continue;
        }
        out.code.push_back(c);
        ++i;
    }
}

}  // namespace

SeparatedPoC separate(const std::string& content, LanguageLabel lang, double confidence) {
    SeparatedPoC out;
    out.language = lang;
    out.confidence = confidence;

    if (lang == LanguageLabel::Text || lang == LanguageLabel::None) {
        out.comments = content;
        return out;
    }

    CommentSink sink;
    switch (lang) {
        case LanguageLabel::C:
        case LanguageLabel::Cpp:
        case LanguageLabel::Java:
        case LanguageLabel::JavaScript:
        case LanguageLabel::PHP:
            scan_c_family(content, sink);
            break;
        case LanguageLabel::Python:
        case LanguageLabel::Perl:
        case LanguageLabel::Ruby:
        case LanguageLabel::Shell:
            scan_hash_family(content, lang, sink);
            break;
        case LanguageLabel::HTML:
            scan_html(content, sink);
            break;
        case LanguageLabel::VisualBasic:
            scan_visualbasic(content, sink);
            break;
        default:
            break;
    }
    out.code = std::move(sink.code);
    out.unterminated_comment = sink.unterminated;
    for (std::size_t i = 0; i < sink.comments.size(); ++i) {
        if (i) out.comments.push_back('\n');
        out.comments += sink.comments[i];
    }
    return out;
}

}  // namespace ee
