#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace leanrl::repl {

using EnvHandle = int;

enum class Severity { error, warning, info };

struct Position {
  int line = 0;
  int column = 0;
  bool operator==(const Position&) const = default;
};

struct Message {
  Severity severity = Severity::error;
  Position pos;
  std::string text;
  bool operator==(const Message&) const = default;
};

struct Sorry {
  Position pos;
  std::string goal;
  bool operator==(const Sorry&) const = default;
};

struct ReplCommand {
  std::string source;
  std::optional<EnvHandle> env;
  std::chrono::milliseconds timeout{60000};
};

struct ReplResponse {
  std::optional<EnvHandle> env;
  std::vector<Message> messages;
  std::vector<Sorry> sorries;
  std::int64_t elapsed_ms = 0;

  bool has_errors() const;
  bool operator==(const ReplResponse&) const = default;
};

std::string_view to_string(Severity s);
Severity severity_from_string(std::string_view s);

// Request frame: one JSON object {"cmd", "env"?}, newline, then a blank line.
std::string encode_command(const std::string& source, std::optional<EnvHandle> env);

// Parses a response frame. A bare {"message": ...} (REPL-level failure, e.g.
// unknown env) becomes a single error message. Throws ParseError on non-JSON.
ReplResponse decode_response(const std::string& frame);

nlohmann::json to_json(const Message& m);
nlohmann::json to_json(const Sorry& s);
nlohmann::json to_json(const ReplResponse& r);
Message message_from_json(const nlohmann::json& j);
Sorry sorry_from_json(const nlohmann::json& j);

}  // namespace leanrl::repl
