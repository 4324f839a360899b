#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/eval/benchmark.hpp"

namespace leanrl::eval {

// Training corpus rows: {"id", "text", "source"}; "source" may be absent.
struct CorpusText {
  std::string id;
  std::string text;
  std::string source;
};

CorpusText corpus_text_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CorpusText& t);

struct Removal {
  std::string id;
  std::size_t index = 0;  // position in the input corpus
  std::string reason;     // "ngram" or "source_tag"
  std::string evidence;   // the matched n-gram (normalized) or the tag
  std::string benchmark;  // name of the matched statement, n-gram removals only
};

nlohmann::json to_json(const Removal& r);

struct DecontamOptions {
  std::size_t n = 13;
  std::set<std::string> source_blocklist = {"AMC12", "AIME", "IMO"};
  bool parallel = true;
};

struct DecontamResult {
  std::vector<CorpusText> kept;
  std::vector<Removal> removed;
};

// Reference text per statement: informal_text, or the formal statement when
// no informal text is carried.
std::string reference_text(const BenchmarkStatement& s);

DecontamResult decontaminate(const std::vector<CorpusText>& corpus,
                             const std::vector<BenchmarkStatement>& bench,
                             const DecontamOptions& options = {});

// Number of corpus texts sharing at least one n-gram with the benchmark.
std::size_t count_overlapping(const std::vector<CorpusText>& corpus,
                              const std::vector<BenchmarkStatement>& bench, std::size_t n);

}  // namespace leanrl::eval
