#include "leanrl/eval/benchmark.hpp"

#include <unordered_map>
#include <unordered_set>

#include "leanrl/common/jsonl.hpp"

namespace leanrl::eval {

using nlohmann::json;

BenchmarkStatement benchmark_statement_from_json(const json& j) {
  if (!j.is_object()) throw MalformedStatement("benchmark row is not an object");
  BenchmarkStatement s;
  try {
    s.name = j.at("name").get<std::string>();
    s.statement = j.at("statement").get<std::string>();
    s.informal_text = j.value("informal_text", std::string());
    if (j.contains("subset_tags")) {
      for (const auto& t : j.at("subset_tags")) s.subset_tags.insert(t.get<std::string>());
    }
    s.corrected = j.value("corrected", false);
  } catch (const json::exception& e) {
    throw MalformedStatement(std::string("bad benchmark row: ") + e.what());
  }
  if (s.name.empty()) throw MalformedStatement("benchmark row has an empty name");
  if (s.statement.find_first_not_of(" \t\r\n") == std::string::npos)
    throw MalformedStatement("statement '" + s.name + "' is empty");
  return s;
}

json to_json(const BenchmarkStatement& s) {
  return json{{"name", s.name},
              {"statement", s.statement},
              {"informal_text", s.informal_text},
              {"subset_tags", s.subset_tags},
              {"corrected", s.corrected}};
}

std::vector<BenchmarkStatement> build_benchmark(const std::vector<json>& rows,
                                                const std::vector<json>& patches) {
  std::vector<BenchmarkStatement> out;
  std::unordered_map<std::string, std::size_t> by_name;
  for (const auto& row : rows) {
    auto s = benchmark_statement_from_json(row);
    // The flag is owned by the patch list, never by the input file.
    s.corrected = false;
    if (!by_name.emplace(s.name, out.size()).second)
      throw DuplicateName("duplicate benchmark statement '" + s.name + "'");
    out.push_back(std::move(s));
  }
  std::unordered_set<std::string> patched;
  for (const auto& p : patches) {
    std::string name, corrected;
    try {
      name = p.at("name").get<std::string>();
      corrected = p.at("corrected_statement").get<std::string>();
    } catch (const json::exception& e) {
      throw MalformedStatement(std::string("bad patch row: ") + e.what());
    }
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw MalformedStatement("patch names unknown statement '" + name + "'");
    if (!patched.insert(name).second) throw DuplicateName("statement '" + name + "' patched twice");
    auto& s = out[it->second];
    if (p.contains("original_statement") && p["original_statement"].get<std::string>() != s.statement)
      throw MalformedStatement("patch for '" + name + "' does not match the original statement");
    if (corrected.find_first_not_of(" \t\r\n") == std::string::npos)
      throw MalformedStatement("corrected statement for '" + name + "' is empty");
    s.statement = std::move(corrected);
    s.corrected = true;
  }
  return out;
}

std::vector<BenchmarkStatement> load_benchmark(const std::filesystem::path& path,
                                               const std::optional<std::filesystem::path>& patch_path) {
  std::vector<json> rows;
  try {
    rows = read_jsonl(path);
  } catch (const ParseError& e) {
    throw MalformedStatement(e.what());
  }
  std::vector<json> patches;
  if (patch_path) patches = read_jsonl(*patch_path);
  return build_benchmark(rows, patches);
}

std::vector<BenchmarkStatement> filter_subset(const std::vector<BenchmarkStatement>& bench,
                                              const std::string& tag) {
  std::vector<BenchmarkStatement> out;
  for (const auto& s : bench)
    if (s.subset_tags.count(tag)) out.push_back(s);
  return out;
}

}  // namespace leanrl::eval
