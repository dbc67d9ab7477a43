#include "alnf/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "alnf/errors.hpp"

namespace alnf {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound(path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound(path.string());
    std::vector<Json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            rows.push_back(Json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
    }
    return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    write_text_file(path, out);
}

const Json& require_field(const Json& obj, const std::string& key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) throw MissingField(context + "." + key);
    return *it;
}

}  // namespace alnf
