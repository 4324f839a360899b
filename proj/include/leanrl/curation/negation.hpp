#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leanrl/curation/store.hpp"
#include "leanrl/rl/policy.hpp"
#include "leanrl/verify/verifier.hpp"

namespace leanrl::curation {

// `theorem <name> <binders> : <conclusion> := by sorry`, with everything
// before the `theorem` keyword kept as the preamble.
struct TheoremShape {
  std::string preamble;
  std::string keyword;  // "theorem" or "lemma"
  std::string name;
  std::string binders;
  std::string conclusion;
  std::string proof;  // text after `:=`, trimmed
};

// Declaration parse without restrictions on the proof or conclusion.
std::optional<TheoremShape> parse_theorem(std::string_view source);

// The conservative grammar negation accepts: bracketed binders only, proof
// exactly `by sorry`, conclusion free of metavariables, lambdas and
// quantifiers over functions or universes.
std::optional<TheoremShape> parse_negatable(std::string_view source);

// Conclusion G becomes `¬ (G)`; binders, name and preamble stay.
std::optional<std::string> negate_statement(std::string_view source);
std::string negate_conclusion(std::string_view conclusion);

// `¬ (¬ (G))` -> `G`; anything else is returned trimmed and unchanged.
std::string strip_double_negation(std::string_view conclusion);

enum class NegationVerdict { kept, flagged_error, unknown };
std::string_view to_string(NegationVerdict v);

struct NegationOutcome {
  NegationVerdict verdict = NegationVerdict::unknown;
  std::optional<std::string> negated;
  int attempts = 0;
  std::optional<std::string> proof;  // the accepted negation proof
};

struct NegationOptions {
  int attempt_budget = 8;
  int chunk = 8;
  verify::Mode verify_mode = verify::Mode::final_proof_only;
  std::optional<std::int64_t> verify_timeout_ms;
};

// A proof only counts when it restates the negated conclusion itself.
NegationOutcome negation_filter(const ProblemRecord& record, verify::VerifierClient& verifier,
                                rl::PolicyClient& prover, const NegationOptions& options = {});

// Runs the filter over active records (all of them when ids is empty) and
// moves disproved ones to flagged_error.
std::vector<std::pair<std::string, NegationOutcome>> run_negation_filter(
    ProblemStore& store, const std::vector<std::string>& ids, verify::VerifierClient& verifier,
    rl::PolicyClient& prover, const NegationOptions& options = {}, int parallelism = 4);

}  // namespace leanrl::curation
