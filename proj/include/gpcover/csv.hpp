#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "gpcover/common.hpp"

namespace gpcover {
namespace csv {

/// Shortest round-trip decimal form, identical across runs of the same
/// build, so byte-comparing output files is a valid determinism check.
inline std::string cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(const char* v) { return v; }
inline std::string cell(const std::string& v) { return v; }

inline std::string hash_tag(std::uint64_t config_hash, std::uint64_t seed) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "config_hash=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash),
                  static_cast<unsigned long long>(seed));
    return buf;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot open '" + path + "' for writing");
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    template <typename... Cells>
    void row(const Cells&... cells) {
        const char* sep = "";
        ((out_ << sep << cell(cells), sep = ","), ...);
        out_ << "\n";
    }

    /// Emits an already-joined line; used for rows whose width depends on
    /// the agent count.
    void raw_row(const std::string& joined) { out_ << joined << "\n"; }

private:
    std::ofstream out_;
};

}  // namespace csv
}  // namespace gpcover
