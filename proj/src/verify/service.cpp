#include "leanrl/verify/service.hpp"

#include <httplib.h>

namespace leanrl::verify {

using nlohmann::json;

json to_json(const repl::PoolMetrics& m) {
  return json{{"throughput_per_s", m.throughput_per_s},
              {"cache_hit_rate", m.cache_hit_rate},
              {"live_workers", m.live_workers},
              {"timeouts", m.timeouts},
              {"crashes", m.crashes},
              {"submissions", m.submissions},
              {"completed", m.completed},
              {"cache_hits", m.cache_hits},
              {"cache_misses", m.cache_misses},
              {"spawn_failures", m.spawn_failures}};
}

repl::PoolMetrics pool_metrics_from_json(const json& j) {
  repl::PoolMetrics m;
  m.throughput_per_s = j.value("throughput_per_s", 0.0);
  m.cache_hit_rate = j.value("cache_hit_rate", 0.0);
  m.live_workers = j.value("live_workers", 0);
  m.timeouts = j.value("timeouts", std::uint64_t{0});
  m.crashes = j.value("crashes", std::uint64_t{0});
  m.submissions = j.value("submissions", std::uint64_t{0});
  m.completed = j.value("completed", std::uint64_t{0});
  m.cache_hits = j.value("cache_hits", std::uint64_t{0});
  m.cache_misses = j.value("cache_misses", std::uint64_t{0});
  m.spawn_failures = j.value("spawn_failures", std::uint64_t{0});
  return m;
}

json to_json(const Health& h) {
  return json{{"status", h.status}, {"live_workers", h.live_workers}, {"queue_depth", h.queue_depth}};
}

VerifyService::VerifyService(Verifier& verifier)
    : verifier_(verifier), server_(std::make_unique<httplib::Server>()) {
  auto reply = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server_->Post("/v1/verify", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_verify(req.body));
  });
  server_->Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, {200, to_json(health())});
  });
  server_->Get("/v1/metrics", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, {200, metrics()});
  });
}

VerifyService::~VerifyService() { stop(); }

Health VerifyService::health() const {
  auto& pool = verifier_.pool();
  const auto m = pool.metrics();
  Health h;
  h.live_workers = m.live_workers;
  h.queue_depth = pool.queue_depth();
  h.status = pool.alive() && m.live_workers == pool.worker_count() ? "ok" : "degraded";
  return h;
}

json VerifyService::metrics() const {
  json j = to_json(verifier_.pool().metrics());
  const auto c = verifier_.counters();
  j["requests"] = c.requests;
  j["items"] = c.items;
  j["rejected_requests"] = c.rejected;
  return j;
}

HttpReply VerifyService::handle_verify(const std::string& body) {
  try {
    const auto request = request_from_json(json::parse(body));
    const auto results = verifier_.verify(request);
    json out{{"version", kSchemaVersion}, {"results", json::array()}};
    for (const auto& r : results) out["results"].push_back(to_json(r));
    return {200, out};
  } catch (const json::parse_error& e) {
    verifier_.count_rejected();
    return {400, json{{"error", std::string("invalid JSON: ") + e.what()}}};
  } catch (const BadRequest& e) {
    verifier_.count_rejected();
    return {400, json{{"error", e.what()}}};
  } catch (const ServiceUnavailable& e) {
    return {503, json{{"error", e.what()}}};
  }
}

int VerifyService::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

void VerifyService::serve() { server_->listen_after_bind(); }

void VerifyService::stop() {
  if (server_) server_->stop();
}

}  // namespace leanrl::verify
