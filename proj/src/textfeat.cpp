#include "ee/textfeat.hpp"

#include <algorithm>
#include <cctype>

#include "ee/common.hpp"
#include "ee/langdata.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    const auto& stop = english_stopwords();
    std::size_t i = 0, n = text.size();
    while (i < n) {
        unsigned char c = text[i];
        if (!std::isalnum(c)) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        bool all_digits = std::isdigit(c) != 0;
        while (j < n && std::isalnum(static_cast<unsigned char>(text[j]))) {
            if (!std::isdigit(static_cast<unsigned char>(text[j]))) all_digits = false;
            ++j;
        }
        std::string tok = to_lower(std::string_view(text).substr(i, j - i));
        i = j;
        if (all_digits && tok.size() < 2) continue;
        if (stop.count(tok)) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

void lex_words(const std::string& s, std::vector<std::string>& out);

// Emits identifier and numeric-literal tokens from one code span.
void lex_code_span(const std::string& s, std::vector<std::string>& out) {
    std::size_t i = 0, n = s.size();
    while (i < n) {
        unsigned char c = s[i];
        if (ident_start(c)) {
            std::size_t j = i + 1;
            while (j < n && ident_char(s[j])) ++j;
            out.push_back(to_lower(std::string_view(s).substr(i, j - i)));
            i = j;
            continue;
        }
        if (std::isdigit(c)) {  // numeric literal, hex/bin prefixes included
            std::size_t j = i + 1;
            while (j < n && (ident_char(s[j]))) ++j;
            out.push_back(to_lower(std::string_view(s).substr(i, j - i)));
            i = j;
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = static_cast<char>(c);
            std::size_t j = i + 1;
            std::string inner;
            while (j < n && s[j] != quote && s[j] != '\n') {
                if (s[j] == '\\' && j + 1 < n) {
                    inner.push_back(s[j + 1]);
                    j += 2;
                    continue;
                }
                inner.push_back(s[j]);
                ++j;
            }
            lex_words(inner, out);  // string literal contents as plain words
            i = j < n ? j + 1 : j;
            continue;
        }
        ++i;
    }
}

void lex_words(const std::string& s, std::vector<std::string>& out) {
    std::size_t i = 0, n = s.size();
    while (i < n) {
        unsigned char c = s[i];
        if (!std::isalnum(c) && c != '_') {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < n && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
        out.push_back(to_lower(std::string_view(s).substr(i, j - i)));
        i = j;
    }
}

}  // namespace

std::vector<std::string> code_tokens(const SeparatedPoC& separated) {
    std::vector<std::string> out;
    lex_code_span(separated.code, out);
    return out;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& docs,
                             const std::string& ns, std::size_t min_count,
                             bool count_occurrences) {
    Vocabulary v(ns, min_count);
    std::map<std::string, std::uint64_t> freq;
    for (const auto& doc : docs) {
        if (count_occurrences) {
            for (const auto& tok : doc) ++freq[tok];
        } else {
            std::map<std::string, bool> seen;
            for (const auto& tok : doc) {
                if (!seen.emplace(tok, true).second) continue;
                ++freq[tok];
            }
        }
    }
    std::uint32_t next = 0;
    std::uint64_t fp = fnv1a64(ns);
    fp = fnv1a64(std::to_string(docs.size()), fp);
    for (const auto& [tok, count] : freq) {  // map order: deterministic indices
        fp = fnv1a64(tok, fp);
        fp = fnv1a64(std::to_string(count), fp);
        if (count >= min_count) v.index_.emplace(tok, next++);
    }
    v.fingerprint_ = hex64(fp);
    return v;
}

SparseVector vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    SparseVector out;
    for (const auto& tok : tokens) {
        if (vocab.contains(tok)) out.set_flag(vocab.ns() + ":" + tok);
    }
    return out;
}

std::string Vocabulary::to_json() const {
    json j;
    j["format"] = "ee.vocabulary";
    j["version"] = 1;
    j["namespace"] = namespace_;
    j["min_count"] = min_count_;
    j["fingerprint"] = fingerprint_;
    json toks = json::object();
    for (const auto& [tok, idx] : index_) toks[tok] = idx;
    j["tokens"] = std::move(toks);
    return j.dump(2);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "vocabulary: invalid JSON");
    if (j.value("format", "") != "ee.vocabulary")
        throw Error(Errc::parse, "vocabulary: unrecognized format");
    if (j.value("version", 0) != 1)
        throw Error(Errc::version_mismatch, "vocabulary: unsupported version");
    Vocabulary v(j.at("namespace").get<std::string>(), j.at("min_count").get<std::size_t>());
    v.fingerprint_ = j.value("fingerprint", "");
    for (auto& [tok, idx] : j.at("tokens").items()) {
        v.index_[tok] = idx.get<std::uint32_t>();
    }
    return v;
}

}  // namespace ee
