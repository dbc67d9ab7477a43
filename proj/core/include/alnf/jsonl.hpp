#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace alnf {

using Json = nlohmann::json;

/// Reads a whole file; throws FileNotFound.
std::string read_text_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Parses one JSON object per non-empty line. Parse failures carry the
/// 1-based line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Writes one compact object per line, '\n' terminated.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

/// Fetches a required field; throws MissingField naming "<context>.<key>".
const Json& require_field(const Json& obj, const std::string& key, const std::string& context);

}  // namespace alnf
