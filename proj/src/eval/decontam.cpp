#include "leanrl/eval/decontam.hpp"

#include "leanrl/kernels/decontam_kernels.hpp"

namespace leanrl::eval {

using nlohmann::json;

namespace {

kernels::NgramIndex build_index(const std::vector<BenchmarkStatement>& bench, std::size_t n) {
  std::vector<kernels::Tokens> refs;
  refs.reserve(bench.size());
  for (const auto& s : bench) refs.push_back(kernels::ngram_tokens(reference_text(s)));
  return kernels::NgramIndex(std::move(refs), n);
}

std::vector<kernels::Tokens> tokenize_all(const std::vector<CorpusText>& corpus) {
  std::vector<kernels::Tokens> out;
  out.reserve(corpus.size());
  for (const auto& t : corpus) out.push_back(kernels::ngram_tokens(t.text));
  return out;
}

std::string join(const kernels::Tokens& tokens, std::size_t pos, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += tokens[pos + i];
  }
  return out;
}

}  // namespace

CorpusText corpus_text_from_json(const json& j) {
  CorpusText t;
  t.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                          : std::string();
  t.text = j.at("text").get<std::string>();
  t.source = j.value("source", std::string());
  return t;
}

json to_json(const CorpusText& t) {
  json j{{"id", t.id}, {"text", t.text}};
  if (!t.source.empty()) j["source"] = t.source;
  return j;
}

json to_json(const Removal& r) {
  json j{{"id", r.id}, {"index", r.index}, {"reason", r.reason}, {"evidence", r.evidence}};
  if (!r.benchmark.empty()) j["benchmark"] = r.benchmark;
  return j;
}

std::string reference_text(const BenchmarkStatement& s) {
  return s.informal_text.empty() ? s.statement : s.informal_text;
}

DecontamResult decontaminate(const std::vector<CorpusText>& corpus,
                             const std::vector<BenchmarkStatement>& bench,
                             const DecontamOptions& options) {
  if (options.n < 1) throw InvalidArgument("n-gram size must be >= 1");
  const auto index = build_index(bench, options.n);
  const auto tokens = tokenize_all(corpus);
  const auto hits = options.parallel ? kernels::scan_parallel(index, tokens)
                                     : kernels::scan_serial(index, tokens);

  DecontamResult result;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& text = corpus[i];
    if (!text.source.empty() && options.source_blocklist.count(text.source)) {
      result.removed.push_back({text.id, i, "source_tag", text.source, {}});
    } else if (hits[i]) {
      result.removed.push_back({text.id, i, "ngram", join(tokens[i], hits[i]->text_pos, options.n),
                                bench[hits[i]->reference].name});
    } else {
      result.kept.push_back(text);
    }
  }
  return result;
}

std::size_t count_overlapping(const std::vector<CorpusText>& corpus,
                              const std::vector<BenchmarkStatement>& bench, std::size_t n) {
  const auto index = build_index(bench, n);
  const auto tokens = tokenize_all(corpus);
  std::size_t count = 0;
  for (const auto& h : kernels::scan_serial(index, tokens)) count += h ? 1 : 0;
  return count;
}

}  // namespace leanrl::eval
