#pragma once

// Experiment artifact plumbing: JSON configs, CSV outputs with a stable
// settings hash on every row, and deterministic formatting so reruns with a
// fixed seed are byte-identical.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace hypam {

using Json = nlohmann::json;

// FNV-1a over the canonical (key-sorted) JSON dump; stable under key
// reordering in the input because nlohmann::json orders object keys.
inline std::uint64_t settings_hash(const Json& config) {
    std::string s = config.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string settings_hash_hex(const Json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(settings_hash(config)));
    return buf;
}

// Shortest round-trip decimal formatting (%.17g) so CSV reruns are
// byte-identical and lossless.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
        write_row_(header);
    }

    void row(const std::vector<std::string>& cells) { write_row_(cells); }

  private:
    void write_row_(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape_(cells[i]);
        }
        out_ << "\r\n";  // RFC 4180
    }
    static std::string escape_(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }
    std::ofstream out_;
};

inline Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_json: cannot open " + path);
    Json j;
    in >> j;
    return j;
}

inline void save_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace hypam
