#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "ee/langid.hpp"

namespace ee {

// Compiled-in copies of the files under data/. The text files remain the
// authoritative, documented lists; the build embeds them verbatim.

const std::unordered_set<std::string>& english_stopwords();

// Reserved-word list for one language; empty for Text and None.
const std::vector<std::string>& keywords_of(LanguageLabel l);
const std::unordered_set<std::string>& keyword_set_of(LanguageLabel l);

// Union of all per-language keyword sets.
const std::unordered_set<std::string>& all_keywords();

}  // namespace ee
