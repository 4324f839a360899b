#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "leanrl/common/error.hpp"
#include "leanrl/pattern/trace.hpp"

namespace leanrl::pattern {

LEANRL_DEFINE_ERROR(MissingFinalProof);

std::vector<std::string> default_tactic_keywords();

struct FormatConfig {
  double coverage_threshold = 0.6;
  std::vector<std::string> tactic_keywords = default_tactic_keywords();
};

// Violation codes reported in FormatVerdict::reasons.
inline constexpr std::string_view kMissingThink = "missing_think";
inline constexpr std::string_view kUnclosedThink = "unclosed_think";
inline constexpr std::string_view kMisorderedThink = "misordered_think";
inline constexpr std::string_view kRepeatedThink = "repeated_think";
inline constexpr std::string_view kMissingFinalProof = "missing_final_proof";
inline constexpr std::string_view kNoTacticBlock = "no_tactic_block";
inline constexpr std::string_view kLowCoverage = "low_coverage";

struct FormatVerdict {
  bool well_formed = false;
  bool has_tactic_block = false;
  double coverage_ratio = 0.0;
  // Fraction of snippet lines that reappear in the final proof. Reported for
  // monitoring; does not gate passes_filter.
  double snippet_reuse_ratio = 0.0;
  bool passes_filter = false;
  std::vector<std::string> reasons;
};

// Fraction of normalized final-proof lines that occur among the normalized
// snippet lines. Throws MissingFinalProof. A final proof with no code lines
// has coverage 0.
double coverage_ratio(const ReasoningTrace& trace);

// Fraction of normalized snippet lines that occur in the final proof (the
// reverse direction). 0 when there are no snippet lines or no final proof.
double snippet_reuse_ratio(const ReasoningTrace& trace);

// A tactic line starts (after bullets such as `·` or `<;>`) with a tactic
// keyword, contains an inline `by <tactic>`, or sits deeper-indented under a
// line ending in `by`.
bool is_tactic_block(std::string_view code, const std::vector<std::string>& keywords);

// passes_filter <=> well_formed && has_tactic_block && coverage >= threshold.
FormatVerdict check_format(const ReasoningTrace& trace, const FormatConfig& config = {});

}  // namespace leanrl::pattern
