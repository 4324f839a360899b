#include "leanrl/verify/http_client.hpp"

#include <httplib.h>

namespace leanrl::verify {

using nlohmann::json;

HttpVerifierClient::HttpVerifierClient(std::string base_url, int timeout_s)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s) {}

std::vector<VerificationResult> HttpVerifierClient::verify(const VerificationRequest& request) {
  httplib::Client cli(base_url_);
  cli.set_read_timeout(timeout_s_, 0);
  cli.set_write_timeout(timeout_s_, 0);
  auto res = cli.Post("/v1/verify", to_json(request).dump(), "application/json");
  if (!res) throw ServiceUnavailable("verify service unreachable at " + base_url_);
  if (res->status == 400) throw BadRequest(res->body);
  if (res->status != 200)
    throw ServiceUnavailable("verify service returned HTTP " + std::to_string(res->status));
  const auto body = json::parse(res->body);
  std::vector<VerificationResult> results;
  for (const auto& r : body.at("results")) results.push_back(result_from_json(r));
  return results;
}

json HttpVerifierClient::get(const std::string& path) {
  httplib::Client cli(base_url_);
  cli.set_read_timeout(timeout_s_, 0);
  auto res = cli.Get(path);
  if (!res) throw ServiceUnavailable("verify service unreachable at " + base_url_);
  return json::parse(res->body);
}

Health HttpVerifierClient::health() {
  const auto j = get("/v1/health");
  return {j.at("status").get<std::string>(), j.at("live_workers").get<int>(),
          j.at("queue_depth").get<std::size_t>()};
}

json HttpVerifierClient::metrics() { return get("/v1/metrics"); }

}  // namespace leanrl::verify
