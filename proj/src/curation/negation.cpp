#include "leanrl/curation/negation.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "leanrl/pattern/trace.hpp"

namespace leanrl::curation {

namespace {

constexpr std::string_view kNot = "\xC2\xAC";          // ¬
constexpr std::string_view kOpenWhite = "\xE2\xA6\x83";   // ⦃
constexpr std::string_view kCloseWhite = "\xE2\xA6\x84";  // ⦄

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string squash(std::string_view s) {
  std::string out;
  bool space = false;
  for (const char c : s) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

// Depth change for the bracket starting at s[i]; `len` gets its byte width.
int bracket(std::string_view s, std::size_t i, std::size_t& len) {
  len = 1;
  switch (s[i]) {
    case '(': case '[': case '{': return 1;
    case ')': case ']': case '}': return -1;
    default: break;
  }
  if (s.substr(i, 3) == kOpenWhite) { len = 3; return 1; }
  if (s.substr(i, 3) == kCloseWhite) { len = 3; return -1; }
  return 0;
}

bool word_at(std::string_view s, std::size_t pos, std::string_view word) {
  if (s.substr(pos, word.size()) != word) return false;
  const auto end = pos + word.size();
  return end == s.size() || s[end] == ' ' || s[end] == '\t' || s[end] == '\n' || s[end] == '\r';
}

// Position of the matching close for the open bracket at `open`, or npos.
std::size_t matching(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size();) {
    std::size_t len;
    depth += bracket(s, i, len);
    if (depth == 0) return i;
    i += len;
  }
  return std::string_view::npos;
}

bool binders_ok(std::string_view binders) {
  std::size_t i = 0;
  while (i < binders.size()) {
    const char c = binders[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t len;
    if (bracket(binders, i, len) != 1) return false;
    const auto close = matching(binders, i);
    if (close == std::string_view::npos) return false;
    std::size_t close_len;
    bracket(binders, close, close_len);
    i = close + close_len;
  }
  return true;
}

bool conclusion_ok(std::string_view c) {
  if (c.empty()) return false;
  for (const std::string_view bad : {"?", "fun ", "fun(", "\xCE\xBB", "sorry", ":=", "--", "/-", "Prop",
                                     "Type", "Sort", "by "}) {
    if (c.find(bad) != std::string_view::npos) return false;
  }
  // Quantifiers whose binder ranges over a function type are higher order.
  for (const std::string_view q : {"\xE2\x88\x80", "\xE2\x88\x83"}) {  // ∀ ∃
    for (auto p = c.find(q); p != std::string_view::npos; p = c.find(q, p + q.size())) {
      const auto comma = c.find(',', p);
      const auto head = c.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p);
      if (head.find("\xE2\x86\x92") != std::string_view::npos || head.find("->") != std::string_view::npos)
        return false;
    }
  }
  std::size_t len;
  int depth = 0;
  for (std::size_t i = 0; i < c.size(); i += len) {
    depth += bracket(c, i, len);
    if (depth < 0) return false;
  }
  return depth == 0;
}

// `¬ (X)` spanning the whole text -> X.
std::optional<std::string> unwrap_not(std::string_view t) {
  if (t.substr(0, kNot.size()) != kNot) return std::nullopt;
  auto i = kNot.size();
  while (i < t.size() && t[i] == ' ') ++i;
  if (i >= t.size() || t[i] != '(') return std::nullopt;
  if (matching(t, i) != t.size() - 1) return std::nullopt;
  return trim(t.substr(i + 1, t.size() - i - 2));
}

}  // namespace

std::optional<TheoremShape> parse_theorem(std::string_view src) {
  std::size_t line = 0;
  std::size_t decl = std::string_view::npos;
  std::string keyword;
  while (line < src.size()) {
    auto first = src.find_first_not_of(" \t", line);
    if (first == std::string_view::npos) break;
    for (const std::string_view kw : {"theorem", "lemma"}) {
      if (word_at(src, first, kw)) {
        decl = first;
        keyword = kw;
        break;
      }
    }
    if (decl != std::string_view::npos) break;
    const auto nl = src.find('\n', line);
    if (nl == std::string_view::npos) break;
    line = nl + 1;
  }
  if (decl == std::string_view::npos) return std::nullopt;

  TheoremShape t;
  t.preamble = std::string(src.substr(0, line));
  t.keyword = keyword;
  auto i = src.find_first_not_of(" \t\r\n", decl + keyword.size());
  if (i == std::string_view::npos) return std::nullopt;
  const auto name_end = src.find_first_of(" \t\r\n([{:", i);
  if (name_end == std::string_view::npos || name_end == i) return std::nullopt;
  t.name = std::string(src.substr(i, name_end - i));

  int depth = 0;
  std::size_t colon = std::string_view::npos, assign = std::string_view::npos;
  std::size_t len;
  for (std::size_t p = name_end; p < src.size(); p += len) {
    depth += bracket(src, p, len);
    if (depth != 0 || src[p] != ':') continue;
    const bool is_assign = p + 1 < src.size() && src[p + 1] == '=';
    if (colon == std::string_view::npos) {
      if (is_assign) return std::nullopt;
      colon = p;
    } else if (is_assign) {
      assign = p;
      break;
    }
  }
  if (colon == std::string_view::npos || assign == std::string_view::npos) return std::nullopt;
  t.binders = trim(src.substr(name_end, colon - name_end));
  t.conclusion = trim(src.substr(colon + 1, assign - colon - 1));
  t.proof = trim(src.substr(assign + 2));
  return t;
}

std::optional<TheoremShape> parse_negatable(std::string_view source) {
  auto t = parse_theorem(source);
  if (!t) return std::nullopt;
  if (squash(t->proof) != "by sorry") return std::nullopt;
  if (!binders_ok(t->binders)) return std::nullopt;
  if (!conclusion_ok(t->conclusion)) return std::nullopt;
  return t;
}

std::string negate_conclusion(std::string_view conclusion) {
  return std::string(kNot) + " (" + trim(conclusion) + ")";
}

std::optional<std::string> negate_statement(std::string_view source) {
  const auto t = parse_negatable(source);
  if (!t) return std::nullopt;
  std::string out = t->preamble + t->keyword + " " + t->name;
  if (!t->binders.empty()) out += " " + t->binders;
  out += " :\n    " + negate_conclusion(t->conclusion) + " := by sorry";
  return out;
}

std::string strip_double_negation(std::string_view conclusion) {
  const auto t = trim(conclusion);
  if (const auto once = unwrap_not(t)) {
    if (const auto twice = unwrap_not(*once)) return *twice;
  }
  return t;
}

std::string_view to_string(NegationVerdict v) {
  switch (v) {
    case NegationVerdict::kept: return "kept";
    case NegationVerdict::flagged_error: return "flagged_error";
    case NegationVerdict::unknown: return "unknown";
  }
  return "unknown";
}

NegationOutcome negation_filter(const ProblemRecord& record, verify::VerifierClient& verifier,
                                rl::PolicyClient& prover, const NegationOptions& opt) {
  NegationOutcome out;
  out.negated = negate_statement(record.statement);
  if (!out.negated) return out;
  const auto target = squash(parse_theorem(*out.negated)->conclusion);
  const auto prompt = rl::build_prompt("", *out.negated);

  out.verdict = NegationVerdict::kept;
  while (out.attempts < opt.attempt_budget) {
    const int want = std::min(opt.chunk, opt.attempt_budget - out.attempts);
    auto completions = prover.generate({record.problem_id + ":negation", prompt, want, 32768, 1.0});
    if (completions.empty()) throw rl::PolicyUnavailable("prover returned no completions");
    if (static_cast<int>(completions.size()) > want) completions.resize(static_cast<std::size_t>(want));

    verify::VerificationRequest req;
    req.mode = opt.verify_mode;
    req.timeout_ms = opt.verify_timeout_ms;
    for (auto& c : completions) {
      const auto trace = pattern::parse_trace(std::move(c.text));
      ++out.attempts;
      if (!trace.final_proof) continue;
      const auto shape = parse_theorem(trace.final_proof->code);
      if (!shape || squash(shape->conclusion) != target) continue;
      req.items.push_back({record.problem_id + ":neg:" + std::to_string(out.attempts),
                           trace.final_proof->code});
    }
    if (req.items.empty()) continue;
    const auto results = verifier.verify(req);
    for (std::size_t r = 0; r < results.size(); ++r) {
      if (results[r].correct) {
        out.verdict = NegationVerdict::flagged_error;
        out.proof = req.items[r].source;
        return out;
      }
    }
  }
  return out;
}

std::vector<std::pair<std::string, NegationOutcome>> run_negation_filter(
    ProblemStore& store, const std::vector<std::string>& ids, verify::VerifierClient& verifier,
    rl::PolicyClient& prover, const NegationOptions& options, int parallelism) {
  std::vector<ProblemRecord> records;
  if (ids.empty()) {
    records = store.in_state(ProblemState::active);
  } else {
    for (const auto& id : ids) records.push_back(store.get(id));
  }
  std::vector<std::pair<std::string, NegationOutcome>> out(records.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        out[i] = {records[i].problem_id, negation_filter(records[i], verifier, prover, options)};
      } catch (...) {
        std::lock_guard lk(mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, parallelism)), records.size());
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  // Transitions are applied from this thread only.
  for (const auto& [id, outcome] : out) {
    if (outcome.verdict == NegationVerdict::flagged_error &&
        store.get(id).state == ProblemState::active)
      store.transition(id, ProblemState::flagged_error, "negation_proved");
  }
  return out;
}

}  // namespace leanrl::curation
