#pragma once

#include <map>
#include <string>

namespace alnf::detail {

/// Single left-to-right pass: every "{name}" whose name is a key of values is
/// replaced by the value, inserted verbatim (no escaping, no re-scanning).
/// Brace segments that are not known placeholders pass through untouched.
inline std::string substitute(const std::string& tmpl,
                              const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const std::size_t open = tmpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        const std::size_t close = tmpl.find('}', open + 1);
        if (close == std::string::npos) {
            out.append(tmpl, open, std::string::npos);
            break;
        }
        const std::string name = tmpl.substr(open + 1, close - open - 1);
        auto it = values.find(name);
        if (it != values.end()) {
            out += it->second;
        } else {
            out.append(tmpl, open, close - open + 1);
        }
        pos = close + 1;
    }
    return out;
}

}  // namespace alnf::detail
