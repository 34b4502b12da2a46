#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ee {

// Closed label set for PoC language identification. Text covers prose-only
// files; None covers files with code in no recognized grammar.
enum class LanguageLabel {
    Text,
    Ruby,
    C,
    Perl,
    Python,
    JavaScript,
    PHP,
    HTML,
    Shell,
    VisualBasic,
    None,
    Cpp,
    Java,
};

inline constexpr int kLanguageCount = 13;

const char* to_string(LanguageLabel l);
std::optional<LanguageLabel> language_from_string(const std::string& s);

// Maps a file extension (".py", "py", with or without dot) to a language.
// Ambiguous extensions (".h") return nullopt.
std::optional<LanguageLabel> language_from_extension(const std::string& ext);

// Lexes content into language-identification tokens: lowercased identifier
// runs, recognized punctuation digraphs, and a small set of single
// punctuation characters that carry language signal. Digits are skipped.
std::vector<std::string> langid_tokens(const std::string& content);

// True for tokens that indicate code rather than prose: reserved words of
// any supported language, or punctuation tokens.
bool is_code_like_token(const std::string& token);

// Multinomial naive Bayes over langid_tokens with additive smoothing.
// Token counts are kept as integers so training is exactly reproducible
// and order-independent.
class TokenModel {
public:
    static TokenModel train(const std::vector<std::pair<std::string, LanguageLabel>>& labeled,
                            double alpha = 0.01);

    // Posterior distribution over the trained classes for the given content.
    // Computed in log space and normalized; classes absent from training get
    // probability 0.
    std::map<LanguageLabel, double> posterior(const std::string& content) const;

    bool trained_class(LanguageLabel l) const { return class_totals_.count(l) > 0; }
    std::size_t vocabulary_size() const { return vocab_.size(); }
    std::uint64_t token_count(LanguageLabel l, const std::string& token) const;
    std::uint64_t doc_count(LanguageLabel l) const;

    std::string to_json() const;               // versioned serialization
    static TokenModel from_json(const std::string& text);

private:
    double alpha_ = 0.01;
    std::map<std::string, std::uint64_t> vocab_;  // token -> global count
    std::map<LanguageLabel, std::map<std::string, std::uint64_t>> counts_;
    std::map<LanguageLabel, std::uint64_t> class_totals_;  // token totals
    std::map<LanguageLabel, std::uint64_t> class_docs_;    // training file counts
    std::uint64_t total_docs_ = 0;
};

struct IdentifyResult {
    LanguageLabel language = LanguageLabel::Text;
    double confidence = 1.0;  // posterior of the reported class, in [0,1]
};

struct IdentifyParams {
    double ext_contradiction_threshold = 0.05;  // posterior below this overrides the extension
    int min_code_tokens = 10;                   // fewer code-like tokens => Text
};

// Total over arbitrary bytes; never throws. The declared extension wins when
// it maps to a trained class and the token posterior does not contradict it.
IdentifyResult identify(const std::string& content,
                        const std::optional<std::string>& declared_extension,
                        const TokenModel& model, IdentifyParams params = {});

struct SeparatedPoC {
    LanguageLabel language = LanguageLabel::Text;
    std::string code;
    std::string comments;
    double confidence = 1.0;
    bool unterminated_comment = false;  // block comment ran to end of file
};

// Splits content into code and comments using the language's comment
// grammar. String literals are masked before scanning so comment markers
// inside them are ignored. For Text/None everything is comments.
SeparatedPoC separate(const std::string& content, LanguageLabel lang, double confidence = 1.0);

}  // namespace ee
