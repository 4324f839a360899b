// Stand-in for the Lean REPL that speaks the same newline-delimited JSON
// protocol. Verdicts are scripted through markers in the command text:
//
//   MOCK_ERROR       error message            MOCK_WARN   warning message
//   MOCK_CRASH       exit before answering    MOCK_STALL  never answer
//   MOCK_SLEEP=<ms>  extra latency            sorry/admit sorries entry
//
// Commands consisting only of import/set_option lines are header loads and
// use --header-latency-ms. Every command received is appended to
// --transcript (one JSON object per line) before it is answered.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

using json = nlohmann::json;

namespace {

bool is_header_only(const std::string& cmd) {
  std::istringstream in(cmd);
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    if (line.rfind("import", 0) != 0 && line.rfind("set_option", 0) != 0) return false;
    any = true;
  }
  return any;
}

bool contains_word(const std::string& text, const std::string& word) {
  for (auto pos = text.find(word); pos != std::string::npos; pos = text.find(word, pos + 1)) {
    auto ident = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    };
    const bool left_ok = pos == 0 || !ident(text[pos - 1]);
    const bool right_ok = pos + word.size() >= text.size() || !ident(text[pos + word.size()]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

json message(const char* severity, const std::string& text) {
  return json{{"severity", severity},
              {"pos", {{"line", 1}, {"column", 0}}},
              {"endPos", {{"line", 1}, {"column", 0}}},
              {"data", text}};
}

void sleep_ms(long ms) {
  if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mock Lean REPL"};
  long latency_ms = 0;
  long header_latency_ms = -1;
  std::string transcript_path;
  app.add_option("--latency-ms", latency_ms, "delay before each answer");
  app.add_option("--header-latency-ms", header_latency_ms, "delay for header loads");
  app.add_option("--transcript", transcript_path, "append received commands here");
  CLI11_PARSE(app, argc, argv);
  if (header_latency_ms < 0) header_latency_ms = latency_ms;

  std::ofstream transcript;
  if (!transcript_path.empty()) transcript.open(transcript_path, std::ios::app);

  std::set<int> envs;
  int next_env = 0;
  std::string frame, line;
  const std::regex sleep_re("MOCK_SLEEP=([0-9]+)");

  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      frame += line;
      frame += '\n';
      continue;
    }
    if (frame.empty()) continue;

    json request;
    try {
      request = json::parse(frame);
    } catch (const json::parse_error&) {
      frame.clear();
      std::cout << json{{"message", "Could not parse JSON"}}.dump() << "\n\n" << std::flush;
      continue;
    }
    frame.clear();

    if (transcript.is_open()) {
      transcript << request.dump() << '\n';
      transcript.flush();
    }

    const std::string cmd = request.value("cmd", std::string());
    json response;
    if (request.contains("env")) {
      const int env = request["env"].get<int>();
      if (!envs.count(env)) {
        std::cout << json{{"message", "Unknown environment."}}.dump() << "\n\n" << std::flush;
        continue;
      }
    }

    if (cmd.find("MOCK_CRASH") != std::string::npos) ::_exit(3);
    if (cmd.find("MOCK_STALL") != std::string::npos) {
      for (;;) sleep_ms(1000);
    }
    std::smatch m;
    if (std::regex_search(cmd, m, sleep_re)) sleep_ms(std::stol(m[1]));
    sleep_ms(is_header_only(cmd) ? header_latency_ms : latency_ms);

    json messages = json::array();
    json sorries = json::array();
    if (cmd.find("MOCK_ERROR") != std::string::npos) {
      messages.push_back(message("error", "mock: scripted error"));
    }
    if (cmd.find("MOCK_WARN") != std::string::npos) {
      messages.push_back(message("warning", "mock: scripted warning"));
    }
    if (contains_word(cmd, "sorry") || contains_word(cmd, "admit")) {
      messages.push_back(message("warning", "declaration uses 'sorry'"));
      sorries.push_back({{"pos", {{"line", 1}, {"column", 0}}},
                         {"endPos", {{"line", 1}, {"column", 5}}},
                         {"goal", "⊢ mock goal"}});
    }

    const int env = next_env++;
    envs.insert(env);
    response["env"] = env;
    if (!messages.empty()) response["messages"] = messages;
    if (!sorries.empty()) response["sorries"] = sorries;
    // Pretty-printed like the real REPL: the frame spans several lines.
    std::cout << response.dump(2) << "\n\n" << std::flush;
  }
  return 0;
}
