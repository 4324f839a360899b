#include "leanrl/curation/judge.hpp"

#include <algorithm>
#include <cctype>
#include <future>

namespace leanrl::curation {

using nlohmann::json;

PromptTemplate default_judge_template() {
  return {"judge-formalization-v1",
          "You are checking whether a Lean 4 statement faithfully formalizes a math problem.\n\n"
          "Problem:\n{informal_text}\n\nLean 4 statement:\n{formalization}\n\n"
          "Check hypotheses, domains, and the conclusion. Think it through, then end with a final "
          "line containing only YES (faithful) or NO (not faithful).\n"};
}

PromptTemplate default_postrl_template() {
  return {"judge-postrl-v1",
          "A Lean 4 proof of the statement below was accepted by the compiler. Decide whether the "
          "statement is a faithful formalization, or whether the proof only succeeds by exploiting a "
          "mistake in it.\n\nProblem:\n{informal_text}\n\nLean 4 statement:\n{statement}\n\n"
          "Proof:\n{proof}\n\nEnd with a final line containing only YES (faithful) or NO (flawed).\n"};
}

std::optional<bool> parse_vote(const std::string& text) {
  auto end = text.size();
  while (end > 0 && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  if (end == 0) return std::nullopt;
  const auto nl = text.rfind('\n', end - 1);
  const auto line = text.substr(nl == std::string::npos ? 0 : nl + 1, end - (nl == std::string::npos ? 0 : nl + 1));
  auto last_space = line.find_last_of(" \t");
  std::string word = last_space == std::string::npos ? line : line.substr(last_space + 1);
  std::string core;
  for (const char c : word)
    if (std::isalpha(static_cast<unsigned char>(c))) core += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (core == "YES") return true;
  if (core == "NO") return false;
  return std::nullopt;
}

json to_json(const JudgeVerdict& v) {
  return json{{"votes", v.votes},
              {"requested", v.requested},
              {"incomplete", v.incomplete},
              {"accepted", v.accepted},
              {"template_version", v.template_version}};
}

namespace {

JudgeVerdict vote(const std::string& prompt, const std::string& version, JudgeClient& judge,
                  const JudgeOptions& opt) {
  if (opt.m < 1) throw InvalidArgument("m must be >= 1");
  std::vector<std::optional<std::string>> replies(static_cast<std::size_t>(opt.m));
  auto call = [&](std::size_t i) {
    try {
      replies[i] = judge.complete(prompt);
    } catch (const Error&) {
    }
  };
  if (opt.concurrent && opt.m > 1) {
    std::vector<std::future<void>> pending;
    for (std::size_t i = 0; i < replies.size(); ++i) pending.push_back(std::async(std::launch::async, call, i));
    for (auto& f : pending) f.get();
  } else {
    for (std::size_t i = 0; i < replies.size(); ++i) call(i);
  }

  JudgeVerdict v;
  v.requested = opt.m;
  v.template_version = version;
  std::size_t answered = 0;
  for (const auto& r : replies) {
    if (!r) continue;
    ++answered;
    if (const auto parsed = parse_vote(*r)) v.votes.push_back(*parsed);
  }
  if (answered == 0) throw JudgeUnavailable("no judge call succeeded");
  v.incomplete = static_cast<int>(v.votes.size()) < opt.m;
  v.accepted = !v.incomplete;
  for (const bool b : v.votes) v.accepted = v.accepted && b;
  return v;
}

}  // namespace

JudgeVerdict judge_formalization(const std::string& informal_text, const std::string& formalization,
                                 JudgeClient& judge, const JudgeOptions& options) {
  const auto prompt = render_template(options.formalization_template,
                                      {{"informal_text", informal_text}, {"formalization", formalization}});
  return vote(prompt, options.formalization_template.version, judge, options);
}

PostRlVerdict postrl_validate(ProblemStore& store, const std::string& problem_id,
                              const std::string& proof, JudgeClient& judge,
                              const JudgeOptions& options) {
  const auto record = store.get(problem_id);
  const auto prompt = render_template(
      options.postrl_template,
      {{"informal_text", record.informal_text}, {"statement", record.statement}, {"proof", proof}});
  PostRlVerdict out;
  out.verdict = vote(prompt, options.postrl_template.version, judge, options);
  const bool rejected =
      std::find(out.verdict.votes.begin(), out.verdict.votes.end(), false) != out.verdict.votes.end();
  if (rejected) {
    out.flagged = true;
    if (store.get(problem_id).state == ProblemState::active)
      store.transition(problem_id, ProblemState::flagged_error, "postrl_judge_reject");
  }
  return out;
}

}  // namespace leanrl::curation
