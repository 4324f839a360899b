#include "leanrl/rl/policy.hpp"

#include <httplib.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "leanrl/common/jsonl.hpp"
#include "leanrl/common/rng.hpp"
#include "leanrl/pattern/trace.hpp"

namespace leanrl::rl {

using nlohmann::json;

std::string build_prompt(const std::string& informal_text, const std::string& statement) {
  std::string out;
  std::istringstream in(informal_text);
  std::string line;
  while (std::getline(in, line)) out += "-- " + line + "\n";
  out += statement;
  return out;
}

ScriptedPolicy::ScriptedPolicy(std::map<std::string, std::vector<ScriptedCompletion>> scripts)
    : scripts_(std::move(scripts)) {
  for (const auto& [id, list] : scripts_)
    for (const auto& c : list) logp_new_by_text_[c.text] = c.logp_new;
}

std::unique_ptr<ScriptedPolicy> ScriptedPolicy::from_jsonl(const std::filesystem::path& path) {
  std::map<std::string, std::vector<ScriptedCompletion>> scripts;
  for_each_jsonl(path, [&](const json& row, std::size_t) {
    ScriptedCompletion c;
    c.text = row.at("text").get<std::string>();
    c.logp_old = row.value("logp_old", 0.0);
    c.logp_new = row.value("logp_new", c.logp_old);
    scripts[row.value("problem_id", std::string("*"))].push_back(std::move(c));
  });
  return std::make_unique<ScriptedPolicy>(std::move(scripts));
}

void ScriptedPolicy::add(const std::string& problem_id, ScriptedCompletion completion) {
  std::lock_guard lk(mu_);
  logp_new_by_text_[completion.text] = completion.logp_new;
  scripts_[problem_id].push_back(std::move(completion));
}

std::vector<Completion> ScriptedPolicy::generate(const GenerationRequest& request) {
  std::lock_guard lk(mu_);
  auto it = scripts_.find(request.problem_id);
  if (it == scripts_.end()) it = scripts_.find("*");
  if (it == scripts_.end() || it->second.empty())
    throw PolicyUnavailable("no script for problem '" + request.problem_id + "'");
  auto& cursor = cursor_[it->first + "\x1f" + request.problem_id];
  std::vector<Completion> out;
  for (int i = 0; i < request.k; ++i) {
    const auto& c = it->second[cursor++ % it->second.size()];
    out.push_back({c.text, c.logp_old});
  }
  return out;
}

std::vector<double> ScriptedPolicy::score(const std::string&, std::span<const std::string> texts) {
  std::lock_guard lk(mu_);
  std::vector<double> out;
  for (const auto& t : texts) {
    auto it = logp_new_by_text_.find(t);
    if (it == logp_new_by_text_.end()) throw PolicyUnavailable("cannot score unscripted text");
    out.push_back(it->second);
  }
  return out;
}

double SyntheticPolicy::logp_of(const std::string& text) {
  return -0.01 * static_cast<double>(pattern::whitespace_tokenizer(text));
}

std::string SyntheticPolicy::make_trace(const std::string& prompt, bool correct, bool well_formed) {
  std::string proof = prompt;
  const std::string tactics = correct ? "\n  have h : True := by\n    trivial\n  norm_num"
                                      : "\n  have h : True := by\n    trivial\n  norm_num -- MOCK_ERROR";
  const auto pos = proof.rfind("sorry");
  if (pos != std::string::npos) proof.replace(pos, 5, tactics);
  else proof += " := by" + tactics;
  // The mock REPL matches markers anywhere in the raw text, comments included.
  std::string text;
  if (well_formed) {
    text += "<think>\nWork through the statement, then formalize.\n```lean4\n" + proof +
            "\n```\n</think>\n";
  } else {
    text += "Skipping the reasoning.\n";
  }
  text += "```lean4\n" + proof + "\n```\n";
  return text;
}

std::vector<Completion> SyntheticPolicy::generate(const GenerationRequest& request) {
  std::uint64_t call;
  {
    std::lock_guard lk(mu_);
    call = calls_[request.problem_id]++;
  }
  Rng rng(derive_seed(options_.seed, {fnv1a64(request.problem_id), call}));
  std::vector<Completion> out;
  for (int i = 0; i < request.k; ++i) {
    const bool correct = rng.bernoulli(options_.success_prob);
    const bool formatted = rng.bernoulli(options_.format_ok_prob);
    auto text = make_trace(request.prompt, correct, formatted);
    const double lp = logp_of(text);
    out.push_back({std::move(text), lp});
  }
  return out;
}

std::vector<double> SyntheticPolicy::score(const std::string&, std::span<const std::string> texts) {
  std::vector<double> out;
  for (const auto& t : texts) out.push_back(logp_of(t) + options_.logp_shift);
  return out;
}

HttpPolicyClient::HttpPolicyClient(std::string base_url, int timeout_s)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s) {}

static json post_json(const std::string& base, int timeout_s, const std::string& path,
                      const json& body) {
  httplib::Client cli(base);
  cli.set_read_timeout(timeout_s, 0);
  cli.set_write_timeout(timeout_s, 0);
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) throw PolicyUnavailable("policy server unreachable at " + base);
  if (res->status != 200)
    throw PolicyUnavailable("policy server returned HTTP " + std::to_string(res->status));
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw PolicyUnavailable(std::string("malformed policy response: ") + e.what());
  }
}

std::vector<Completion> HttpPolicyClient::generate(const GenerationRequest& request) {
  const json body{{"problem_id", request.problem_id}, {"prompt", request.prompt},
                  {"k", request.k},                   {"max_tokens", request.max_tokens},
                  {"temperature", request.temperature}};
  const auto reply = post_json(base_url_, timeout_s_, "/generate", body);
  std::vector<Completion> out;
  for (const auto& c : reply.at("completions"))
    out.push_back({c.at("text").get<std::string>(), c.value("logp", 0.0)});
  return out;
}

std::vector<double> HttpPolicyClient::score(const std::string& prompt,
                                            std::span<const std::string> texts) {
  const json body{{"prompt", prompt}, {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  return post_json(base_url_, timeout_s_, "/score", body).at("logps").get<std::vector<double>>();
}

}  // namespace leanrl::rl
