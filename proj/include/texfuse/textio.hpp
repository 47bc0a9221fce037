#ifndef TEXFUSE_TEXTIO_HPP
#define TEXFUSE_TEXTIO_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "texfuse/error.hpp"

// Shared helpers for the versioned line-based container format used by feature,
// model, and benchmark report files:
//
//   texfuse-<kind> v<major>
//   key: value
//   ...
//   <blank line>
//   <payload lines>
//
// Doubles are printed with 17 significant digits so that text round-trips
// reproduce the exact bit pattern.

namespace texfuse::textio {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view s) {
    char* end = nullptr;
    std::string tmp(s);
    const double v = std::strtod(tmp.c_str(), &end);
    if (end == tmp.c_str()) throw Error(Errc::malformed_file, "expected a number, got '" + tmp + "'");
    return v;
}

inline long long parse_int(std::string_view s) {
    char* end = nullptr;
    std::string tmp(s);
    const long long v = std::strtoll(tmp.c_str(), &end, 10);
    if (end == tmp.c_str()) throw Error(Errc::malformed_file, "expected an integer, got '" + tmp + "'");
    return v;
}

inline std::string fmt_hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::uint64_t parse_hex64(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tmp.c_str(), &end, 16);
    if (end == tmp.c_str()) throw Error(Errc::malformed_file, "expected a hex value, got '" + tmp + "'");
    return v;
}

struct Header {
    std::string kind;      // e.g. "features", "model", "report"
    int version = 0;
    std::vector<std::pair<std::string, std::string>> fields;

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : fields)
            if (k == key) return &v;
        return nullptr;
    }

    const std::string& require(const std::string& key) const {
        const std::string* v = find(key);
        if (!v) throw Error(Errc::malformed_file, "missing header field '" + key + "'");
        return *v;
    }
};

// Reads the magic line plus `key: value` lines up to the first blank line.
// Leaves the stream positioned at the payload.
inline Header read_header(std::istream& in, const std::string& expected_kind, int supported_version) {
    Header h;
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::malformed_file, "empty file");
    const std::string prefix = "texfuse-";
    if (line.rfind(prefix, 0) != 0)
        throw Error(Errc::malformed_file, "not a texfuse container: '" + line + "'");
    const auto space = line.find(' ');
    if (space == std::string::npos || line[space + 1] != 'v')
        throw Error(Errc::malformed_file, "bad magic line: '" + line + "'");
    h.kind = line.substr(prefix.size(), space - prefix.size());
    h.version = static_cast<int>(parse_int(line.substr(space + 2)));
    if (h.kind != expected_kind)
        throw Error(Errc::malformed_file, "expected texfuse-" + expected_kind + ", got texfuse-" + h.kind);
    if (h.version != supported_version)
        throw Error(Errc::version_mismatch,
                    "file is version v" + std::to_string(h.version) + ", this build reads v" +
                        std::to_string(supported_version));
    while (std::getline(in, line)) {
        if (line.empty()) break;
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw Error(Errc::malformed_file, "bad header line: '" + line + "'");
        std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.erase(0, 1);
        h.fields.emplace_back(std::move(key), std::move(value));
    }
    return h;
}

inline void write_magic(std::ostream& out, const std::string& kind, int version) {
    out << "texfuse-" << kind << " v" << version << "\n";
}

inline void write_field(std::ostream& out, const std::string& key, const std::string& value) {
    out << key << ": " << value << "\n";
}

inline std::vector<std::string_view> split(std::string_view s, char sep, std::size_t max_fields = 0) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        if (max_fields != 0 && out.size() + 1 == max_fields) {
            out.push_back(s.substr(start));
            break;
        }
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace texfuse::textio

#endif
