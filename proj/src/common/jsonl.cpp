#include "leanrl/common/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "leanrl/common/error.hpp"

namespace leanrl {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    fn(row, lineno);
  }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> rows;
  for_each_jsonl(path, [&](const json& row, std::size_t) { rows.push_back(row); });
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) throw IoFailure("write failed: " + path.string());
}

void append_jsonl(const std::filesystem::path& path, const json& row) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoFailure("cannot append to " + path.string());
  out << row.dump() << '\n';
  if (!out) throw IoFailure("append failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << text;
  if (!out) throw IoFailure("write failed: " + path.string());
}

}  // namespace leanrl
