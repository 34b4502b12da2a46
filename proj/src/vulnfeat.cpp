#include "ee/vulnfeat.hpp"

#include <algorithm>
#include <map>

#include "ee/common.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;

StructuredWhitelists build_whitelists(const CorpusStore& store,
                                      const std::vector<std::string>& training_ids,
                                      std::size_t top_k_products, std::size_t min_cwe_count) {
    std::map<std::string, std::size_t> product_freq;
    std::map<std::string, std::size_t> cwe_freq;
    for (const auto& id : training_ids) {
        const VulnRecord* v = store.find_vuln(id);
        if (!v) continue;
        for (const auto& p : v->products) ++product_freq[p];
        for (const auto& c : v->cwe_ids) ++cwe_freq[c];
    }

    StructuredWhitelists wl;
    std::vector<std::pair<std::string, std::size_t>> ranked(product_freq.begin(),
                                                            product_freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (std::size_t i = 0; i < ranked.size() && i < top_k_products; ++i) {
        wl.products.push_back(ranked[i].first);
    }
    std::sort(wl.products.begin(), wl.products.end());
    for (const auto& [cwe, count] : cwe_freq) {
        if (count >= min_cwe_count) wl.cwes.push_back(cwe);
    }
    return wl;
}

SparseVector encode_structured(const VulnRecord& vuln, const StructuredWhitelists& whitelists,
                               Date z) {
    SparseVector out;

    // CVSS arrives late; without a publication date fall back to the NVD one,
    // and with neither the record is never considered visible.
    std::optional<Date> cvss_at = vuln.cvss_published ? vuln.cvss_published : vuln.nvd_published;
    if (cvss_at && *cvss_at <= z) {
        if (vuln.cvss_v2) {
            for (const auto& [metric, value] : vuln.cvss_v2->metrics) {
                out.set_flag("cvss:v2:" + metric + "=" + value);
            }
        }
        if (vuln.cvss_v3) {
            for (const auto& [metric, value] : vuln.cvss_v3->metrics) {
                out.set_flag("cvss:v3:" + metric + "=" + value);
            }
        }
    }

    bool nvd_visible = !vuln.nvd_published || *vuln.nvd_published <= z;
    if (nvd_visible) {
        for (const auto& cwe : vuln.cwe_ids) {
            if (std::find(whitelists.cwes.begin(), whitelists.cwes.end(), cwe) !=
                whitelists.cwes.end()) {
                out.set_flag("cwe:" + cwe);
            }
        }
        for (const auto& p : vuln.products) {
            if (std::find(whitelists.products.begin(), whitelists.products.end(), p) !=
                whitelists.products.end()) {
                out.set_flag("cpe:" + p);
            }
        }
    }
    return out;
}

std::string StructuredWhitelists::to_json() const {
    json j;
    j["format"] = "ee.whitelists";
    j["version"] = 1;
    j["products"] = products;
    j["cwes"] = cwes;
    return j.dump(2);
}

StructuredWhitelists StructuredWhitelists::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "whitelists: invalid JSON");
    if (j.value("version", 0) != 1)
        throw Error(Errc::version_mismatch, "whitelists: unsupported version");
    StructuredWhitelists wl;
    for (const auto& p : j.at("products")) wl.products.push_back(p.get<std::string>());
    for (const auto& c : j.at("cwes")) wl.cwes.push_back(c.get<std::string>());
    return wl;
}

}  // namespace ee
