#include "ee/synth.hpp"

#include <filesystem>

#include "ee/common.hpp"
#include "ee/rng.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = {
        "vulnerability", "attacker",  "remote",   "service",   "crafted",  "request",
        "memory",        "corruption", "overflow", "parameter", "injection", "bypass",
        "server",        "client",    "module",   "handler",   "function",  "unauthenticated",
        "denial",        "crash",     "input",    "validation", "arbitrary", "execution",
        "disclosure",    "patch",     "advisory", "version",   "affected",  "component",
        "buffer",        "header",    "packet",   "session",   "upload",    "filter",
    };
    return words;
}

const std::vector<std::string>& product_pool() {
    static const std::vector<std::string> products = {
        "windows", "linux", "joomla", "wordpress", "internet_explorer",
        "php",     "debian", "ubuntu", "os_x",     "apache",
    };
    return products;
}

const std::vector<std::string>& cwe_pool() {
    static const std::vector<std::string> cwes = {"CWE-79", "CWE-89", "CWE-119",
                                                  "CWE-22", "CWE-94", "CWE-20"};
    return cwes;
}

std::string prose(Rng& rng, int words, const std::vector<std::string>& signals,
                  double signal_rate) {
    std::string out;
    for (int i = 0; i < words; ++i) {
        if (i) out += ' ';
        out += filler_words()[rng.next_below(filler_words().size())];
        if (i % 9 == 4) out += '.';
    }
    for (const auto& tok : signals) {
        if (rng.next_bernoulli(signal_rate)) {
            out += " The analysis mentions " + tok + " techniques.";
        }
    }
    return out;
}

// Nested for/if blocks realize the complexity shift.
void c_nested_block(Rng& rng, int depth, int indent, std::string& out) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (depth <= 0) {
        out += pad + "acc += " + std::to_string(rng.next_int(1, 9)) + ";\n";
        return;
    }
    out += pad + "for (j = 0; j < " + std::to_string(rng.next_int(4, 64)) + "; j++) {\n";
    out += pad + "  if (acc % " + std::to_string(rng.next_int(2, 7)) + " == 0) {\n";
    c_nested_block(rng, depth - 1, indent + 2, out);
    out += pad + "  } else {\n";
    out += pad + "    acc -= j;\n";
    out += pad + "  }\n";
    out += pad + "}\n";
}

std::string c_poc(Rng& rng, int nesting, bool exploited,
                  const std::vector<std::string>& signals, double signal_rate,
                  const std::string& vuln_id) {
    std::string out;
    out += "/* PoC for " + vuln_id + " */\n";
    out += "/* " + prose(rng, 12, signals, signal_rate) + " */\n";
    out += "#include <stdio.h>\n#include <string.h>\n";
    out += "int helper(int a, int b) { return a * " + std::to_string(rng.next_int(2, 9)) +
           " + b; }\n";
    out += "int main(int argc, char **argv) {\n";
    out += "  char buf[" + std::to_string(rng.next_int(64, 4096)) + "];\n";
    out += "  int acc = 0, j = 0;\n";
    if (exploited && rng.next_bernoulli(signal_rate)) {
        out += "  char shellcode[] = \"\\x90\\x90\\x31\\xc0\";\n";
    }
    c_nested_block(rng, nesting, 1, out);
    out += "  acc = helper(acc, argc);\n";
    out += "  memset(buf, acc, sizeof(buf));\n";
    out += "  printf(\"%d\\n\", acc);\n";
    out += "  return 0;\n}\n";
    return out;
}

void py_nested_block(Rng& rng, int depth, int indent, std::string& out) {
    std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
    if (depth <= 0) {
        out += pad + "acc += " + std::to_string(rng.next_int(1, 9)) + "\n";
        return;
    }
    out += pad + "for j in range(" + std::to_string(rng.next_int(4, 64)) + "):\n";
    out += pad + "    if acc % " + std::to_string(rng.next_int(2, 7)) + " == 0:\n";
    py_nested_block(rng, depth - 1, indent + 2, out);
    out += pad + "    else:\n";
    out += pad + "        acc -= j\n";
    return;
}

std::string py_poc(Rng& rng, int nesting, bool exploited,
                   const std::vector<std::string>& signals, double signal_rate,
                   const std::string& vuln_id) {
    std::string out;
    out += "# PoC for " + vuln_id + "\n";
    out += "# " + prose(rng, 12, signals, signal_rate) + "\n";
    out += "import socket\n";
    out += "def helper(a, b):\n    return a * " + std::to_string(rng.next_int(2, 9)) +
           " + b\n";
    out += "def main():\n";
    out += "    acc = 0\n";
    if (exploited && rng.next_bernoulli(signal_rate)) {
        out += "    shellcode = \"\\x90\\x90\\x31\\xc0\"\n";
    }
    py_nested_block(rng, nesting, 1, out);
    out += "    acc = helper(acc, " + std::to_string(rng.next_int(1, 99)) + ")\n";
    out += "    print(acc)\n";
    out += "main()\n";
    return out;
}

std::string cvss_vector_json(Rng& rng, bool v3) {
    json c;
    const char* av[] = {"N", "A", "L", "P"};
    const char* low_high[] = {"L", "H"};
    const char* cia[] = {"N", "L", "H"};
    c["AV"] = av[rng.next_below(4)];
    c["AC"] = low_high[rng.next_below(2)];
    if (v3) {
        c["PR"] = cia[rng.next_below(3)];
        c["UI"] = rng.next_bernoulli(0.5) ? "N" : "R";
        c["S"] = rng.next_bernoulli(0.5) ? "U" : "C";
    } else {
        c["Au"] = rng.next_bernoulli(0.5) ? "N" : "S";
    }
    c["C"] = cia[rng.next_below(3)];
    c["I"] = cia[rng.next_below(3)];
    c["A"] = cia[rng.next_below(3)];
    c["base_score"] = rng.next_int(10, 100) / 10.0;
    c["exploitability_score"] = rng.next_int(10, v3 ? 39 : 100) / 10.0;
    return c.dump();
}

}  // namespace

SynthResult generate(const SynthConfig& config) {
    if (config.n_vulns < 10) throw Error(Errc::invalid_argument, "n_vulns must be >= 10");
    Rng rng(config.seed);
    Date start = Date::parse(config.start_date);

    SynthResult result;
    json trace;
    trace["config"] = json::parse(config.to_json());
    if (config.exploit_base_rate <= 0.0 || config.exploit_base_rate >= 1.0) {
        trace["warnings"] = json::array({"degenerate exploit_base_rate"});
    }
    json per_vuln = json::array();

    for (std::size_t i = 0; i < config.n_vulns; ++i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "CVE-S%04zu-%04zu", i / 10000, i % 10000);
        std::string id = idbuf;

        bool exploited = rng.next_bernoulli(config.exploit_base_rate);
        Date disclosure = start.plus_days(rng.next_int(0, config.span_days));
        double rate = exploited ? config.positive_token_rate : config.negative_token_rate;

        bool tagged = rng.next_bernoulli(exploited ? config.noise_tag_rate_pos
                                                   : config.noise_tag_rate_neg);

        // Vulnerability record.
        json vuln;
        vuln["id"] = id;
        vuln["description"] = prose(rng, 20, config.positive_tokens, rate * 0.5);
        vuln["cvss_v2"] = json::parse(cvss_vector_json(rng, false));
        vuln["cvss_v3"] = json::parse(cvss_vector_json(rng, true));
        Date nvd_date = disclosure.plus_days(rng.next_int(0, config.nvd_delay_max));
        Date cvss_date =
            disclosure.plus_days(rng.next_int(config.cvss_delay_min, config.cvss_delay_max));
        vuln["nvd_published"] = nvd_date.to_string();
        vuln["cvss_published"] = cvss_date.to_string();
        json cwes = json::array();
        cwes.push_back(cwe_pool()[rng.next_below(cwe_pool().size())]);
        if (tagged) cwes.push_back(config.noise_tag);
        vuln["cwe_ids"] = std::move(cwes);
        json products = json::array();
        products.push_back(product_pool()[rng.next_below(product_pool().size())]);
        if (rng.next_bernoulli(0.3)) {
            products.push_back(product_pool()[rng.next_below(product_pool().size())]);
        }
        vuln["products"] = std::move(products);
        result.vulns_jsonl += vuln.dump();
        result.vulns_jsonl += '\n';

        auto emit_artifact = [&](const char* kind, Date date, const std::string& source,
                                 const std::string& content,
                                 const std::optional<std::string>& ext) {
            json a;
            a["vuln_id"] = id;
            a["kind"] = kind;
            a["date"] = date.to_string();
            a["source"] = source;
            a["content"] = content;
            if (ext) a["ext"] = *ext;
            result.artifacts_jsonl += a.dump();
            result.artifacts_jsonl += '\n';
        };

        // Disclosure-day write-up anchors the estimated disclosure date.
        emit_artifact("writeup", disclosure, "vendor-advisory",
                      prose(rng, rng.next_int(30, 80), config.positive_tokens,
                            rate * config.day0_signal_fraction),
                      std::nullopt);
        int extra_writeups = rng.next_int(0, 2);
        for (int w = 0; w < extra_writeups; ++w) {
            emit_artifact("writeup",
                          disclosure.plus_days(rng.next_int(1, config.writeup_delay_max)),
                          "third-party-" + std::to_string(w),
                          prose(rng, rng.next_int(30, 80), config.positive_tokens, rate),
                          std::nullopt);
        }
        emit_artifact("nvd_description", nvd_date, "nvd",
                      prose(rng, rng.next_int(15, 40), config.positive_tokens, rate),
                      std::nullopt);

        // PoCs.
        int n_pocs = rng.next_int(1, 2);
        json poc_langs = json::array();
        for (int p = 0; p < n_pocs; ++p) {
            Date poc_date = disclosure.plus_days(rng.next_int(0, config.poc_delay_max));
            if (rng.next_bernoulli(config.prose_poc_rate)) {
                emit_artifact("poc", poc_date, "exploit-db",
                              prose(rng, rng.next_int(40, 120), config.positive_tokens, rate),
                              rng.next_bernoulli(config.extension_rate)
                                  ? std::optional<std::string>(".txt")
                                  : std::nullopt);
                poc_langs.push_back("Text");
                continue;
            }
            int nesting = 1 + rng.next_int(0, 1) + (exploited ? config.code_effect_size : 0);
            bool python = rng.next_bernoulli(0.5);
            std::string content =
                python ? py_poc(rng, nesting, exploited, config.positive_tokens, rate, id)
                       : c_poc(rng, nesting, exploited, config.positive_tokens, rate, id);
            std::optional<std::string> ext;
            if (rng.next_bernoulli(config.extension_rate)) ext = python ? ".py" : ".c";
            emit_artifact("poc", poc_date, "exploit-db", content, ext);
            poc_langs.push_back(python ? "Python" : "C");
        }

        // Exploit evidence (suppressed for tagged positives when planting
        // corpus-level noise).
        result.true_labels[id] = exploited ? 1 : 0;
        bool suppress = config.suppress_tagged_evidence && tagged && exploited;
        if (exploited && !suppress) {
            json e;
            e["vuln_id"] = id;
            e["source"] = rng.next_bernoulli(0.5) ? "tenable" : "xforce";
            e["kind"] = "functional";
            if (rng.next_bernoulli(config.undated_evidence_rate)) {
                e["date"] = nullptr;
            } else {
                e["date"] = disclosure
                                .plus_days(rng.next_int(config.evidence_delay_min,
                                                        config.evidence_delay_max))
                                .to_string();
            }
            result.evidence_jsonl += e.dump();
            result.evidence_jsonl += '\n';
            if (rng.next_bernoulli(0.3)) {
                json w;
                w["vuln_id"] = id;
                w["source"] = "contagio";
                w["kind"] = "in_the_wild";
                w["date"] = disclosure
                                .plus_days(rng.next_int(config.evidence_delay_min,
                                                        config.evidence_delay_max))
                                .to_string();
                result.evidence_jsonl += w.dump();
                result.evidence_jsonl += '\n';
            }
        }

        json t;
        t["id"] = id;
        t["exploited"] = exploited;
        t["disclosure"] = disclosure.to_string();
        t["tagged"] = tagged;
        t["suppressed"] = suppress;
        t["poc_languages"] = std::move(poc_langs);
        per_vuln.push_back(std::move(t));
    }

    trace["vulns"] = std::move(per_vuln);
    result.trace_json = trace.dump(2);

    // Round-trip through the ingestion path: the output must load.
    IngestStats stats;
    std::istringstream vin(result.vulns_jsonl), ain(result.artifacts_jsonl),
        ein(result.evidence_jsonl);
    std::string line;
    while (std::getline(vin, line)) {
        if (!line.empty()) result.store.ingest_line(line, RecordSchema::vulns, stats);
    }
    while (std::getline(ain, line)) {
        if (!line.empty()) result.store.ingest_line(line, RecordSchema::artifacts, stats);
    }
    while (std::getline(ein, line)) {
        if (!line.empty()) result.store.ingest_line(line, RecordSchema::evidence, stats);
    }
    if (stats.skipped != 0) {
        throw Error(Errc::parse, "generated corpus failed to re-ingest cleanly");
    }
    return result;
}

SynthResult generate_files(const SynthConfig& config, const std::string& out_dir) {
    SynthResult result = generate(config);
    fs::create_directories(out_dir);
    write_file(out_dir + "/vulns.jsonl", result.vulns_jsonl);
    write_file(out_dir + "/artifacts.jsonl", result.artifacts_jsonl);
    write_file(out_dir + "/evidence.jsonl", result.evidence_jsonl);
    write_file(out_dir + "/trace.json", result.trace_json);
    return result;
}

std::string SynthConfig::to_json() const {
    json j;
    j["n_vulns"] = n_vulns;
    j["exploit_base_rate"] = exploit_base_rate;
    j["start_date"] = start_date;
    j["span_days"] = span_days;
    j["positive_tokens"] = positive_tokens;
    j["positive_token_rate"] = positive_token_rate;
    j["negative_token_rate"] = negative_token_rate;
    j["day0_signal_fraction"] = day0_signal_fraction;
    j["code_effect_size"] = code_effect_size;
    j["writeup_delay_max"] = writeup_delay_max;
    j["poc_delay_max"] = poc_delay_max;
    j["nvd_delay_max"] = nvd_delay_max;
    j["cvss_delay_min"] = cvss_delay_min;
    j["cvss_delay_max"] = cvss_delay_max;
    j["evidence_delay_min"] = evidence_delay_min;
    j["evidence_delay_max"] = evidence_delay_max;
    j["prose_poc_rate"] = prose_poc_rate;
    j["extension_rate"] = extension_rate;
    j["undated_evidence_rate"] = undated_evidence_rate;
    j["noise_tag"] = noise_tag;
    j["noise_tag_rate_pos"] = noise_tag_rate_pos;
    j["noise_tag_rate_neg"] = noise_tag_rate_neg;
    j["suppress_tagged_evidence"] = suppress_tagged_evidence;
    j["seed"] = seed;
    return j.dump(2);
}

SynthConfig SynthConfig::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "synth config: invalid JSON");
    SynthConfig c;
    c.n_vulns = j.value("n_vulns", c.n_vulns);
    c.exploit_base_rate = j.value("exploit_base_rate", c.exploit_base_rate);
    c.start_date = j.value("start_date", c.start_date);
    c.span_days = j.value("span_days", c.span_days);
    if (j.contains("positive_tokens"))
        c.positive_tokens = j["positive_tokens"].get<std::vector<std::string>>();
    c.positive_token_rate = j.value("positive_token_rate", c.positive_token_rate);
    c.negative_token_rate = j.value("negative_token_rate", c.negative_token_rate);
    c.day0_signal_fraction = j.value("day0_signal_fraction", c.day0_signal_fraction);
    c.code_effect_size = j.value("code_effect_size", c.code_effect_size);
    c.writeup_delay_max = j.value("writeup_delay_max", c.writeup_delay_max);
    c.poc_delay_max = j.value("poc_delay_max", c.poc_delay_max);
    c.nvd_delay_max = j.value("nvd_delay_max", c.nvd_delay_max);
    c.cvss_delay_min = j.value("cvss_delay_min", c.cvss_delay_min);
    c.cvss_delay_max = j.value("cvss_delay_max", c.cvss_delay_max);
    c.evidence_delay_min = j.value("evidence_delay_min", c.evidence_delay_min);
    c.evidence_delay_max = j.value("evidence_delay_max", c.evidence_delay_max);
    c.prose_poc_rate = j.value("prose_poc_rate", c.prose_poc_rate);
    c.extension_rate = j.value("extension_rate", c.extension_rate);
    c.undated_evidence_rate = j.value("undated_evidence_rate", c.undated_evidence_rate);
    c.noise_tag = j.value("noise_tag", c.noise_tag);
    c.noise_tag_rate_pos = j.value("noise_tag_rate_pos", c.noise_tag_rate_pos);
    c.noise_tag_rate_neg = j.value("noise_tag_rate_neg", c.noise_tag_rate_neg);
    c.suppress_tagged_evidence = j.value("suppress_tagged_evidence", c.suppress_tagged_evidence);
    c.seed = j.value("seed", c.seed);
    return c;
}

}  // namespace ee
