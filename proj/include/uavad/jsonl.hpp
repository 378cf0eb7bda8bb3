#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace uavad {

/// Calls parse(json, line_number) for each non-empty line. Any exception from
/// JSON parsing or from parse is rethrown as ConfigError prefixed with
/// "<file>:<line>: ".
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& parse);

/// One compact JSON document per line.
void write_jsonl(const std::filesystem::path& path, std::span<const nlohmann::json> records);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc, int indent = 2);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace uavad
