#include "ee/langdata.hpp"

#include <sstream>

#include "builtin_data.hpp"

namespace ee {

namespace {

std::vector<std::string> split_lines(const char* text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

std::unordered_set<std::string> to_set(const std::vector<std::string>& v) {
    return {v.begin(), v.end()};
}

const char* keyword_text(LanguageLabel l) {
    switch (l) {
        case LanguageLabel::C: return builtin::keywords_c;
        case LanguageLabel::Cpp: return builtin::keywords_cpp;
        case LanguageLabel::Python: return builtin::keywords_python;
        case LanguageLabel::Ruby: return builtin::keywords_ruby;
        case LanguageLabel::Perl: return builtin::keywords_perl;
        case LanguageLabel::JavaScript: return builtin::keywords_javascript;
        case LanguageLabel::PHP: return builtin::keywords_php;
        case LanguageLabel::Java: return builtin::keywords_java;
        case LanguageLabel::Shell: return builtin::keywords_shell;
        case LanguageLabel::VisualBasic: return builtin::keywords_visualbasic;
        case LanguageLabel::HTML: return builtin::keywords_html;
        case LanguageLabel::Text:
        case LanguageLabel::None: return "";
    }
    return "";
}

}  // namespace

const std::unordered_set<std::string>& english_stopwords() {
    static const std::unordered_set<std::string> set = to_set(split_lines(builtin::stopwords_en));
    return set;
}

const std::vector<std::string>& keywords_of(LanguageLabel l) {
    static const auto* lists = [] {
        auto* m = new std::vector<std::vector<std::string>>(kLanguageCount);
        for (int i = 0; i < kLanguageCount; ++i) {
            (*m)[i] = split_lines(keyword_text(static_cast<LanguageLabel>(i)));
        }
        return m;
    }();
    return (*lists)[static_cast<int>(l)];
}

const std::unordered_set<std::string>& keyword_set_of(LanguageLabel l) {
    static const auto* sets = [] {
        auto* m = new std::vector<std::unordered_set<std::string>>(kLanguageCount);
        for (int i = 0; i < kLanguageCount; ++i) {
            (*m)[i] = to_set(keywords_of(static_cast<LanguageLabel>(i)));
        }
        return m;
    }();
    return (*sets)[static_cast<int>(l)];
}

const std::unordered_set<std::string>& all_keywords() {
    static const auto* set = [] {
        auto* s = new std::unordered_set<std::string>();
        for (int i = 0; i < kLanguageCount; ++i) {
            const auto& kw = keyword_set_of(static_cast<LanguageLabel>(i));
            s->insert(kw.begin(), kw.end());
        }
        return s;
    }();
    return *set;
}

}  // namespace ee
