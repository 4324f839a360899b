#pragma once

#include <memory>
#include <string>

#include "leanrl/verify/service.hpp"
#include "leanrl/verify/verifier.hpp"

namespace leanrl::verify {

// VerifierClient talking to a remote VerifyService. Transport failures and
// 503 raise ServiceUnavailable; 400 raises BadRequest.
class HttpVerifierClient : public VerifierClient {
 public:
  // base_url like "http://127.0.0.1:8080".
  explicit HttpVerifierClient(std::string base_url, int timeout_s = 600);

  std::vector<VerificationResult> verify(const VerificationRequest& request) override;
  Health health();
  nlohmann::json metrics();

 private:
  nlohmann::json get(const std::string& path);
  std::string base_url_;
  int timeout_s_;
};

}  // namespace leanrl::verify
