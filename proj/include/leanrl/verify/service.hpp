#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "leanrl/verify/verifier.hpp"

namespace httplib {
class Server;
}

namespace leanrl::verify {

struct Health {
  std::string status;  // "ok" or "degraded"
  int live_workers = 0;
  std::size_t queue_depth = 0;
};

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

nlohmann::json to_json(const repl::PoolMetrics& m);
repl::PoolMetrics pool_metrics_from_json(const nlohmann::json& j);

// HTTP front end:
//   POST /v1/verify   VerificationRequest -> {"version", "results": [...]}
//   GET  /v1/health   {"status", "live_workers", "queue_depth"}
//   GET  /v1/metrics  pool metrics plus request counters
// Item-level failures are in-band; malformed requests get 400, a dead pool 503.
class VerifyService {
 public:
  explicit VerifyService(Verifier& verifier);
  ~VerifyService();

  Health health() const;
  nlohmann::json metrics() const;
  HttpReply handle_verify(const std::string& body);

  // Binds to host:port (port 0 picks a free one) and returns the bound port,
  // or -1 on failure. serve() then blocks until stop().
  int bind(const std::string& host, int port);
  void serve();
  void stop();

 private:
  Verifier& verifier_;
  std::unique_ptr<httplib::Server> server_;
};

nlohmann::json to_json(const Health& h);

}  // namespace leanrl::verify
