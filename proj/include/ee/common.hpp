#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ee {

enum class Errc {
    invalid_argument,
    io,
    parse,
    not_found,
    bad_state,
    version_mismatch,
};

// Library-wide error type. Carries a coarse code so the C API can map
// failures onto status values without string matching.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

// FNV-1a, 64-bit. Used for content dedupe hashes and config fingerprints.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v);

// Collapses every run of whitespace to a single space and trims the ends,
// then hashes. Two artifacts differing only in whitespace collide on purpose.
std::uint64_t whitespace_invariant_hash(std::string_view content);

std::string to_lower(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace ee
