#pragma once

#include <string>
#include <vector>

#include "ee/corpus.hpp"
#include "ee/sparse.hpp"

namespace ee {

// Product / CWE whitelists learned from the training split only.
struct StructuredWhitelists {
    std::vector<std::string> products;  // top-K most frequent
    std::vector<std::string> cwes;      // seen at least min_cwe_count times

    std::string to_json() const;
    static StructuredWhitelists from_json(const std::string& text);
};

StructuredWhitelists build_whitelists(const CorpusStore& store,
                                      const std::vector<std::string>& training_ids,
                                      std::size_t top_k_products = 10,
                                      std::size_t min_cwe_count = 5);

// One-hot structured features as of snapshot date z:
//   cvss:v2:AV=N ...   gated on the CVSS publication date
//   cwe:CWE-79         gated on the NVD publication date when known
//   cpe:<product>      whitelisted products only, same gate as CWE
SparseVector encode_structured(const VulnRecord& vuln, const StructuredWhitelists& whitelists,
                               Date z);

}  // namespace ee
