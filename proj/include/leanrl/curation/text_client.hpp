#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "leanrl/common/error.hpp"

namespace leanrl::curation {

LEANRL_DEFINE_ERROR(TextClientUnavailable);

// Prompt in, text out. Raters and judges are both this shape; parsing of the
// returned text belongs to the caller and its template version.
class TextClient {
 public:
  virtual ~TextClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

using RaterClient = TextClient;
using JudgeClient = TextClient;

class FunctionTextClient : public TextClient {
 public:
  explicit FunctionTextClient(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string complete(const std::string& prompt) override { return fn_(prompt); }

 private:
  std::function<std::string(const std::string&)> fn_;
};

// POST {base_url}/complete {"prompt"} -> {"text"}.
class HttpTextClient : public TextClient {
 public:
  explicit HttpTextClient(std::string base_url, int timeout_s = 600);
  std::string complete(const std::string& prompt) override;

 private:
  std::string base_url_;
  int timeout_s_;
};

struct PromptTemplate {
  std::string version;
  std::string text;  // placeholders written {name}
};

// File layout: {"version": "...", "template": "..."}.
PromptTemplate load_template(const std::filesystem::path& path);

// Replaces each {key}. Unknown placeholders are left untouched.
std::string render_template(const PromptTemplate& t, const std::map<std::string, std::string>& values);

}  // namespace leanrl::curation
