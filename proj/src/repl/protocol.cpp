#include "leanrl/repl/protocol.hpp"

#include <algorithm>

#include "leanrl/common/error.hpp"

namespace leanrl::repl {

using nlohmann::json;

bool ReplResponse::has_errors() const {
  return std::any_of(messages.begin(), messages.end(),
                     [](const Message& m) { return m.severity == Severity::error; });
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::info: return "info";
  }
  return "error";
}

Severity severity_from_string(std::string_view s) {
  if (s == "warning") return Severity::warning;
  if (s == "info" || s == "information") return Severity::info;
  // Unknown severities fail closed.
  return Severity::error;
}

std::string encode_command(const std::string& source, std::optional<EnvHandle> env) {
  json j{{"cmd", source}};
  if (env) j["env"] = *env;
  return j.dump() + "\n\n";
}

static Position position_from_json(const json& j) {
  Position p;
  if (j.is_object()) {
    p.line = j.value("line", 0);
    p.column = j.value("column", 0);
  }
  return p;
}

static json to_json(const Position& p) { return json{{"line", p.line}, {"column", p.column}}; }

Message message_from_json(const json& j) {
  Message m;
  m.severity = severity_from_string(j.value("severity", std::string("error")));
  if (j.contains("pos")) m.pos = position_from_json(j["pos"]);
  m.text = j.contains("data") ? j.value("data", std::string()) : j.value("text", std::string());
  return m;
}

Sorry sorry_from_json(const json& j) {
  Sorry s;
  if (j.contains("pos")) s.pos = position_from_json(j["pos"]);
  s.goal = j.value("goal", std::string());
  return s;
}

ReplResponse decode_response(const std::string& frame) {
  json j;
  try {
    j = json::parse(frame);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed REPL response: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("REPL response is not an object");

  ReplResponse r;
  if (j.contains("env") && j["env"].is_number_integer()) r.env = j["env"].get<int>();
  if (j.contains("messages")) {
    for (const auto& m : j["messages"]) r.messages.push_back(message_from_json(m));
  }
  if (j.contains("sorries")) {
    for (const auto& s : j["sorries"]) r.sorries.push_back(sorry_from_json(s));
  }
  if (j.contains("message") && j["message"].is_string()) {
    r.messages.push_back({Severity::error, {}, j["message"].get<std::string>()});
  }
  return r;
}

json to_json(const Message& m) {
  return json{{"severity", to_string(m.severity)}, {"pos", to_json(m.pos)}, {"data", m.text}};
}

json to_json(const Sorry& s) { return json{{"pos", to_json(s.pos)}, {"goal", s.goal}}; }

json to_json(const ReplResponse& r) {
  json j{{"messages", json::array()}, {"sorries", json::array()}, {"elapsed_ms", r.elapsed_ms}};
  if (r.env) j["env"] = *r.env;
  for (const auto& m : r.messages) j["messages"].push_back(to_json(m));
  for (const auto& s : r.sorries) j["sorries"].push_back(to_json(s));
  return j;
}

}  // namespace leanrl::repl
