#include "leanrl/curation/text_client.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "leanrl/common/jsonl.hpp"

namespace leanrl::curation {

using nlohmann::json;

HttpTextClient::HttpTextClient(std::string base_url, int timeout_s)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s) {}

std::string HttpTextClient::complete(const std::string& prompt) {
  httplib::Client cli(base_url_);
  cli.set_read_timeout(timeout_s_, 0);
  cli.set_write_timeout(timeout_s_, 0);
  auto res = cli.Post("/complete", json{{"prompt", prompt}}.dump(), "application/json");
  if (!res) throw TextClientUnavailable("text model unreachable at " + base_url_);
  if (res->status != 200)
    throw TextClientUnavailable("text model returned HTTP " + std::to_string(res->status));
  try {
    return json::parse(res->body).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw TextClientUnavailable(std::string("malformed text model reply: ") + e.what());
  }
}

PromptTemplate load_template(const std::filesystem::path& path) {
  try {
    const auto j = json::parse(read_text_file(path));
    return {j.at("version").get<std::string>(), j.at("template").get<std::string>()};
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string render_template(const PromptTemplate& t, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(t.text.size());
  for (std::size_t i = 0; i < t.text.size();) {
    if (t.text[i] == '{') {
      const auto close = t.text.find('}', i + 1);
      if (close != std::string::npos) {
        const auto it = values.find(t.text.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += t.text[i++];
  }
  return out;
}

}  // namespace leanrl::curation
