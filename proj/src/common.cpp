#include "ee/common.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace ee {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

std::uint64_t whitespace_invariant_hash(std::string_view content) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    bool pending_space = false;
    bool started = false;
    for (unsigned char c : content) {
        if (std::isspace(c)) {
            pending_space = started;
            continue;
        }
        if (pending_space) {
            h ^= static_cast<unsigned char>(' ');
            h *= 0x100000001b3ull;
            pending_space = false;
        }
        h ^= c;
        h *= 0x100000001b3ull;
        started = true;
    }
    return h;
}

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::io, "short write: " + path);
}

}  // namespace ee
