#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ee/langid.hpp"
#include "ee/sparse.hpp"

namespace ee {

// Natural-language tokenizer: lowercase, split on non-alphanumerics, drop
// English stopwords and single-character pure-numeric tokens.
std::vector<std::string> tokenize(const std::string& text);

// Lexical tokens from PoC code: identifiers, keywords and literals
// (numeric literals kept whole, string literal contents re-tokenized).
// Lowercased; no stopword filtering.
std::vector<std::string> code_tokens(const SeparatedPoC& separated);

// Frozen token -> dense index map for one feature namespace.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::string ns, std::size_t min_count) : namespace_(std::move(ns)), min_count_(min_count) {}

    // Keeps tokens whose document frequency reaches min_count. When
    // count_occurrences is true, total occurrences are counted instead
    // (the alternative reading of the pruning rule).
    static Vocabulary build(const std::vector<std::vector<std::string>>& docs,
                            const std::string& ns, std::size_t min_count,
                            bool count_occurrences = false);

    bool contains(const std::string& token) const { return index_.count(token) > 0; }
    std::size_t size() const { return index_.size(); }
    const std::string& ns() const { return namespace_; }
    std::size_t min_count() const { return min_count_; }
    const std::string& fingerprint() const { return fingerprint_; }
    const std::map<std::string, std::uint32_t>& tokens() const { return index_; }

    std::string to_json() const;
    static Vocabulary from_json(const std::string& text);

private:
    std::string namespace_;
    std::size_t min_count_ = 0;
    std::map<std::string, std::uint32_t> index_;  // token -> dense index
    std::string fingerprint_;                     // hash of the training doc counts
};

// Binary presence vector: feature id "<ns>:<token>" -> 1 for every in-vocab
// token. Out-of-vocabulary tokens are ignored, so test-time inputs can never
// grow the feature space.
SparseVector vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab);

}  // namespace ee
