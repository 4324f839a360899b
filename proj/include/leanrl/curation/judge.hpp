#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/curation/store.hpp"
#include "leanrl/curation/text_client.hpp"

namespace leanrl::curation {

LEANRL_DEFINE_ERROR(JudgeUnavailable);

PromptTemplate default_judge_template();
PromptTemplate default_postrl_template();

// The verdict token is the last word of the last non-blank line, compared
// case-insensitively after stripping surrounding punctuation and markup.
std::optional<bool> parse_vote(const std::string& text);

struct JudgeVerdict {
  std::vector<bool> votes;  // parsed votes only
  int requested = 0;
  bool incomplete = false;  // fewer than `requested` parsed votes
  bool accepted = false;    // all `requested` votes present and true
  std::string template_version;
};

nlohmann::json to_json(const JudgeVerdict& v);

struct JudgeOptions {
  int m = 3;
  PromptTemplate formalization_template = default_judge_template();
  PromptTemplate postrl_template = default_postrl_template();
  bool concurrent = true;
};

// m independent calls; a call that throws or answers without a verdict
// token leaves the verdict incomplete. Throws JudgeUnavailable only when no
// call succeeded at all.
JudgeVerdict judge_formalization(const std::string& informal_text, const std::string& formalization,
                                 JudgeClient& judge, const JudgeOptions& options = {});

struct PostRlVerdict {
  JudgeVerdict verdict;
  bool flagged = false;
};

// Judges one verified proof. Any NO vote flags the statement; rewards are
// left alone.
PostRlVerdict postrl_validate(ProblemStore& store, const std::string& problem_id,
                              const std::string& proof, JudgeClient& judge,
                              const JudgeOptions& options = {});

}  // namespace leanrl::curation
