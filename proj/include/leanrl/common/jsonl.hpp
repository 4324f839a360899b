#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace leanrl {

using json = nlohmann::json;

// Reads one JSON value per non-blank line. Throws ParseError naming the line.
std::vector<json> read_jsonl(const std::filesystem::path& path);
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, std::size_t line)>& fn);

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);
void append_jsonl(const std::filesystem::path& path, const json& row);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace leanrl
