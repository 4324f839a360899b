#include "cli.hpp"

#include <signal.h>

#include <CLI11.hpp>
#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "leanrl/common/error.hpp"
#include "leanrl/common/jsonl.hpp"
#include "leanrl/common/rng.hpp"
#include "leanrl/curation/build.hpp"
#include "leanrl/curation/lifecycle.hpp"
#include "leanrl/curation/negation.hpp"
#include "leanrl/curation/store.hpp"
#include "leanrl/eval/benchmark.hpp"
#include "leanrl/eval/decontam.hpp"
#include "leanrl/eval/evaluate.hpp"
#include "leanrl/eval/ledger.hpp"
#include "leanrl/eval/report.hpp"
#include "leanrl/repl/pool.hpp"
#include "leanrl/rl/pipeline.hpp"
#include "leanrl/rl/policy.hpp"
#include "leanrl/verify/http_client.hpp"
#include "leanrl/verify/service.hpp"
#include "leanrl/verify/verifier.hpp"

namespace leanrl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

LEANRL_DEFINE_ERROR(UsageError);

json eval_section() {
  auto j = eval::to_json(eval::EvalConfig{});
  j.erase("ledger_path");
  j.update(json{{"benchmark", nullptr},
                {"patches", nullptr},
                {"ledger", nullptr},
                {"report", nullptr},
                {"report_format", "csv"},
                {"system", "leanrl"},
                {"model_size", "-"},
                {"ks", json::array()}});
  return j;
}

json rollout_section() {
  auto j = rl::to_json(rl::RolloutConfig{});
  j.erase("seed");
  j.update(json{{"iterations", 1}, {"store", nullptr}, {"output_dir", "rollout_out"}, {"save_store", true}});
  return j;
}

}  // namespace

json default_config() {
  return json{
      {"seed", 0},
      {"verifier_url", nullptr},
      {"pool",
       {{"command", json::array()},
        {"cwd", ""},
        {"env", json::object()},
        {"inherit_env", true},
        {"discard_stderr", true},
        {"workers", 4},
        {"cache_capacity", 8},
        {"timeout_ms", 60000},
        {"crash_retries", 1}}},
      {"service", {{"host", "127.0.0.1"}, {"port", 8080}}},
      {"policy",
       {{"kind", "synthetic"},
        {"path", nullptr},
        {"url", nullptr},
        {"success_prob", 0.5},
        {"format_ok_prob", 1.0},
        {"logp_shift", 0.0}}},
      {"rollout", rollout_section()},
      {"eval", eval_section()},
      {"decontam",
       {{"n", 13},
        {"blocklist", {"AMC12", "AIME", "IMO"}},
        {"corpus", nullptr},
        {"benchmark", nullptr},
        {"output", nullptr},
        {"removals", nullptr}}},
      {"curation",
       {{"store", nullptr},
        {"human", nullptr},
        {"auto", nullptr},
        {"bins", 10},
        {"balance_tolerance", 0.1},
        {"rater_url", nullptr},
        {"window", 2},
        {"threshold", 7.0 / 8.0},
        {"unsolved_span", 5},
        {"allow_readmission", false},
        {"history_capacity", 16},
        {"annotations", nullptr},
        {"negation_budget", 8},
        {"parallelism", 4}}},
  };
}

namespace {

bool free_form(const json& def) { return def.is_object() && def.empty(); }

bool compatible(const json& def, const json& value) {
  if (def.is_null() || value.is_null()) return true;
  if (def.is_number()) return value.is_number();
  if (def.is_boolean()) return value.is_boolean();
  if (def.is_string()) return value.is_string();
  if (def.is_array()) return value.is_array();
  if (def.is_object()) return value.is_object();
  return true;
}

void check_keys(const json& def, const json& given, const std::string& prefix) {
  if (!given.is_object()) throw UsageError("config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : given.items()) {
    const auto path = prefix.empty() ? key : prefix + "." + key;
    if (!def.contains(key)) throw UsageError("unknown config key '" + path + "'");
    const auto& d = def[key];
    if (!compatible(d, value)) throw UsageError("config key '" + path + "' has the wrong type");
    if (d.is_object() && !free_form(d)) check_keys(d, value, path);
  }
}

void apply_override(json& config, const json& defaults, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + assignment + "'");
  const auto key = assignment.substr(0, eq);
  const auto raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  const json* def = &defaults;
  json* target = &config;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    const bool last = i + 1 == parts.size();
    if (free_form(*def)) {
      // Inside a free-form map the remaining path is a single key.
      std::string rest = p;
      for (std::size_t j = i + 1; j < parts.size(); ++j) rest += "." + parts[j];
      (*target)[rest] = value;
      return;
    }
    if (!def->is_object() || !def->contains(p)) throw UsageError("unknown config key '" + key + "'");
    def = &(*def)[p];
    if (last) {
      // A bare word for a string key stays a string even if it parses as JSON.
      if (def->is_string() && !value.is_string()) value = raw;
      if (!compatible(*def, value)) throw UsageError("config key '" + key + "' has the wrong type");
      (*target)[p] = value;
      return;
    }
    target = &(*target)[p];
  }
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

std::string need_path(const json& j, const char* key, const std::string& section) {
  auto v = opt_string(j, key);
  if (!v || v->empty()) throw UsageError(section + "." + key + " is required");
  return *v;
}

// Local pool or remote service, chosen by verifier_url.
struct VerifierHandle {
  std::unique_ptr<repl::ReplPool> pool;
  std::unique_ptr<verify::Verifier> local;
  std::unique_ptr<verify::HttpVerifierClient> remote;
  verify::VerifierClient& client() {
    return local ? static_cast<verify::VerifierClient&>(*local) : *remote;
  }
};

repl::PoolOptions pool_options(const json& pool) {
  if (pool["command"].empty() || (pool["command"].is_string() && pool["command"].get<std::string>().empty()))
    throw UsageError("pool.command is required (or set verifier_url)");
  repl::PoolOptions o;
  o.launch = repl::LaunchSpec::from_json(pool);
  o.worker_count = pool["workers"].get<int>();
  o.cache_capacity = pool["cache_capacity"].get<std::size_t>();
  o.default_timeout = std::chrono::milliseconds(pool["timeout_ms"].get<std::int64_t>());
  o.crash_retries = pool["crash_retries"].get<int>();
  if (o.worker_count < 1) throw UsageError("pool.workers must be >= 1");
  return o;
}

VerifierHandle make_verifier(const json& cfg, bool allow_remote = true) {
  VerifierHandle h;
  if (allow_remote) {
    if (auto url = opt_string(cfg, "verifier_url")) {
      h.remote = std::make_unique<verify::HttpVerifierClient>(*url);
      return h;
    }
  }
  h.pool = std::make_unique<repl::ReplPool>(pool_options(cfg["pool"]));
  h.local = std::make_unique<verify::Verifier>(*h.pool);
  return h;
}

std::unique_ptr<rl::PolicyClient> make_policy(const json& cfg) {
  const auto& p = cfg["policy"];
  const auto kind = p["kind"].get<std::string>();
  if (kind == "synthetic") {
    return std::make_unique<rl::SyntheticPolicy>(rl::SyntheticPolicyOptions{
        p["success_prob"].get<double>(), p["format_ok_prob"].get<double>(), p["logp_shift"].get<double>(),
        cfg["seed"].get<std::uint64_t>()});
  }
  if (kind == "scripted")
    return rl::ScriptedPolicy::from_jsonl(need_path(p, "path", "policy"));
  if (kind == "http") return std::make_unique<rl::HttpPolicyClient>(need_path(p, "url", "policy"));
  throw UsageError("policy.kind must be synthetic, scripted or http");
}

curation::StoreOptions store_options(const json& c) {
  curation::StoreOptions o;
  o.history_capacity = c["history_capacity"].get<std::size_t>();
  o.allow_readmission = c["allow_readmission"].get<bool>();
  return o;
}

std::vector<curation::ProblemRecord> load_records(const fs::path& path) {
  std::vector<curation::ProblemRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(curation::record_from_json(j));
  return out;
}

// ---- subcommands ----------------------------------------------------------

json cmd_serve(const json& cfg, std::ostream& err) {
  auto h = make_verifier(cfg, false);
  verify::VerifyService service(*h.local);

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  const auto host = cfg["service"]["host"].get<std::string>();
  const int port = service.bind(host, cfg["service"]["port"].get<int>());
  if (port < 0) throw IoFailure("cannot bind " + host + ":" + std::to_string(cfg["service"]["port"].get<int>()));
  err << "listening on " << host << ":" << port << std::endl;

  int received = 0;
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    received = sig;
    service.stop();
  });
  service.serve();
  if (received == 0) {
    // serve() returned on its own; release the waiter.
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
  auto m = service.metrics();
  return json{{"port", port}, {"requests", m.value("requests", 0)}, {"signal", received}};
}

json cmd_verify(const json& cfg, const std::string& input, const std::string& output, const std::string& mode,
                std::optional<std::int64_t> timeout_ms) {
  verify::VerificationRequest req;
  req.mode = verify::mode_from_string(mode);
  req.timeout_ms = timeout_ms;
  if (fs::path(input).extension() == ".lean") {
    req.items.push_back({fs::path(input).stem().string(), read_text_file(input)});
  } else {
    for (const auto& j : read_jsonl(input)) {
      try {
        req.items.push_back({j.at("attempt_id").get<std::string>(), j.at("source").get<std::string>()});
      } catch (const json::exception& e) {
        throw ParseError(input + ": " + e.what());
      }
    }
  }
  try {
    req.validate();
  } catch (const verify::BadRequest& e) {
    throw UsageError(e.what());
  }
  auto h = make_verifier(cfg);
  const auto results = h.client().verify(req);
  std::vector<json> rows;
  std::size_t correct = 0;
  for (const auto& r : results) {
    rows.push_back(verify::to_json(r));
    correct += r.correct ? 1 : 0;
  }
  if (!output.empty()) write_jsonl(output, rows);
  return json{{"items", results.size()}, {"correct", correct}, {"output", output}};
}

json cmd_eval(const json& cfg) {
  const auto& e = cfg["eval"];
  auto ec = eval::eval_config_from_json(e);
  const auto bench_path = need_path(e, "benchmark", "eval");
  auto patches = opt_string(e, "patches");
  const auto bench = eval::load_benchmark(bench_path, patches ? std::optional<fs::path>(*patches) : std::nullopt);

  auto ledger_path = opt_string(e, "ledger");
  if (ledger_path) {
    // Streamed appends go to a fresh file.
    fs::remove(*ledger_path);
    ec.ledger_path = *ledger_path;
  }
  auto policy = make_policy(cfg);
  auto h = make_verifier(cfg);
  const auto ledger = eval::evaluate(bench, *policy, h.client(), ec);
  if (ledger_path) eval::save_ledger(*ledger_path, ledger);

  const auto selected = ec.subset ? eval::filter_subset(bench, *ec.subset) : bench;
  auto ks = e["ks"].get<std::vector<std::int64_t>>();
  if (ks.empty()) ks = eval::default_ks(ledger);
  eval::ReportMeta meta;
  meta.system = e["system"].get<std::string>();
  meta.model_size = e["model_size"].get<std::string>();
  const auto report = eval::compute_report(ledger, selected, ks, meta);
  const auto format = eval::report_format_from_string(e["report_format"].get<std::string>());
  json summary{{"statements", report.statements}, {"attempts", ledger.attempt_count()}};
  if (auto rp = opt_string(e, "report")) {
    eval::emit_report(report, format, *rp);
    summary["report"] = *rp;
  }
  if (!report.rows.empty()) {
    summary["k"] = report.rows.back().k;
    summary["cumulative"] = report.rows.back().cumulative;
  }
  return summary;
}

json cmd_report(const json& cfg, const std::string& ledger_path) {
  const auto& e = cfg["eval"];
  auto patches = opt_string(e, "patches");
  auto bench = eval::load_benchmark(need_path(e, "benchmark", "eval"),
                                    patches ? std::optional<fs::path>(*patches) : std::nullopt);
  if (auto subset = opt_string(e, "subset")) bench = eval::filter_subset(bench, *subset);
  const auto ledger = eval::load_ledger(ledger_path.empty() ? need_path(e, "ledger", "eval") : ledger_path);
  auto ks = e["ks"].get<std::vector<std::int64_t>>();
  if (ks.empty()) ks = eval::default_ks(ledger);
  eval::ReportMeta meta;
  meta.system = e["system"].get<std::string>();
  meta.model_size = e["model_size"].get<std::string>();
  const auto report = eval::compute_report(ledger, bench, ks, meta);
  const auto format = eval::report_format_from_string(e["report_format"].get<std::string>());
  const auto out = need_path(e, "report", "eval");
  eval::emit_report(report, format, out);
  return json{{"statements", report.statements}, {"report", out}};
}

json cmd_decontaminate(const json& cfg) {
  const auto& d = cfg["decontam"];
  std::vector<eval::CorpusText> corpus;
  for (const auto& j : read_jsonl(need_path(d, "corpus", "decontam"))) corpus.push_back(eval::corpus_text_from_json(j));
  const auto bench = eval::load_benchmark(need_path(d, "benchmark", "decontam"));
  eval::DecontamOptions o;
  o.n = d["n"].get<std::size_t>();
  o.source_blocklist = d["blocklist"].get<std::set<std::string>>();
  const auto result = eval::decontaminate(corpus, bench, o);

  std::vector<json> kept, removed;
  for (const auto& t : result.kept) kept.push_back(eval::to_json(t));
  for (const auto& r : result.removed) removed.push_back(eval::to_json(r));
  write_jsonl(need_path(d, "output", "decontam"), kept);
  if (auto rp = opt_string(d, "removals")) write_jsonl(*rp, removed);
  std::size_t by_tag = 0;
  for (const auto& r : result.removed) by_tag += r.reason == "source_tag" ? 1 : 0;
  return json{{"input", corpus.size()},
              {"kept", result.kept.size()},
              {"removed", result.removed.size()},
              {"removed_by_tag", by_tag}};
}

json cmd_curate(const json& cfg, const std::string& action) {
  const auto& c = cfg["curation"];
  const auto store_path = need_path(c, "store", "curation");
  const auto sopts = store_options(c);
  json summary{{"action", action}};

  if (action == "build") {
    curation::BuildOptions bo;
    bo.bins = c["bins"].get<int>();
    bo.seed = cfg["seed"].get<std::uint64_t>();
    bo.balance_tolerance = c["balance_tolerance"].get<double>();
    bo.rating_parallelism = c["parallelism"].get<int>();
    bo.store = sopts;
    std::unique_ptr<curation::RaterClient> rater;
    if (auto url = opt_string(c, "rater_url")) {
      rater = std::make_unique<curation::HttpTextClient>(*url);
    } else {
      // Offline stand-in: a rating derived from the prompt hash.
      rater = std::make_unique<curation::FunctionTextClient>([](const std::string& prompt) {
        return std::to_string(static_cast<double>(fnv1a64(prompt) % 1000) / 1000.0);
      });
    }
    curation::BuildReport report;
    auto store = curation::build_store(load_records(need_path(c, "human", "curation")),
                                       load_records(need_path(c, "auto", "curation")), *rater, bo, &report);
    store->save_snapshot(store_path);
    summary["size"] = store->size();
    summary["build"] = curation::to_json(report);
    return summary;
  }

  auto store = curation::ProblemStore::load_snapshot(store_path, sopts);
  if (action == "prune") {
    curation::PruneOptions po{c["window"].get<int>(), c["threshold"].get<double>()};
    summary["pruned"] = curation::adaptive_prune(*store, po).size();
  } else if (action == "readmit") {
    summary["readmitted"] = curation::readmit(*store).size();
  } else if (action == "route") {
    curation::AnnotationCriteria ac;
    ac.unsolved_span = c["unsolved_span"].get<int>();
    summary["queued"] = curation::route_to_annotation(*store, ac).size();
  } else if (action == "export") {
    const auto path = need_path(c, "annotations", "curation");
    curation::export_annotations(*store, path);
    summary["exported"] = curation::annotation_queue(*store).size();
    return summary;
  } else if (action == "import") {
    summary["imported"] = curation::import_annotations(*store, need_path(c, "annotations", "curation")).size();
  } else if (action == "negation") {
    auto policy = make_policy(cfg);
    auto h = make_verifier(cfg);
    curation::NegationOptions no;
    no.attempt_budget = c["negation_budget"].get<int>();
    const auto outcomes =
        curation::run_negation_filter(*store, {}, h.client(), *policy, no, c["parallelism"].get<int>());
    std::map<std::string, int> counts;
    for (const auto& [id, o] : outcomes) ++counts[std::string(curation::to_string(o.verdict))];
    summary["verdicts"] = counts;
  } else {
    throw UsageError("unknown curate action '" + action + "'");
  }
  store->save_snapshot(store_path);
  summary["active"] = store->count(curation::ProblemState::active);
  return summary;
}

json cmd_rollout(const json& cfg) {
  const auto& r = cfg["rollout"];
  json rc_json = r;
  rc_json["seed"] = cfg["seed"];
  const auto rc = rl::rollout_config_from_json(rc_json);
  const auto store_path = need_path(r, "store", "rollout");
  auto store = curation::ProblemStore::load_snapshot(store_path, store_options(cfg["curation"]));
  auto policy = make_policy(cfg);
  auto h = make_verifier(cfg);

  const fs::path out_dir = r["output_dir"].get<std::string>();
  fs::create_directories(out_dir);
  const auto log_path = out_dir / "iterations.jsonl";
  fs::remove(log_path);
  const int iterations = r["iterations"].get<int>();
  if (iterations < 1) throw UsageError("rollout.iterations must be >= 1");

  json last;
  std::size_t retained = 0, samples = 0;
  for (int it = 0; it < iterations; ++it) {
    const auto result = rl::run_iteration(rc, *store, *policy, h.client(), it);
    rl::record_solves(*store, result.groups, it);
    rl::write_retained_samples(out_dir / ("retained_" + std::to_string(it) + ".jsonl"), result.groups);
    rl::append_iteration_log(log_path, result.stats);
    retained += result.stats.retained;
    samples += result.stats.samples;
    last = rl::to_json(result.stats);
    last.erase("elapsed_s");
  }
  if (r["save_store"].get<bool>()) store->save_snapshot(store_path);
  return json{{"iterations", iterations}, {"samples", samples}, {"retained", retained}, {"last", last}};
}

void emit_summary(std::ostream& out, json summary) { out << summary.dump() << std::endl; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"leanrl: Lean verification, RL rollout and evaluation backend"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "Override a config key: section.key=value (repeatable)");
  app.add_option("--seed", seed, "Root seed");

  auto* serve = app.add_subcommand("serve", "Run the verification HTTP service");
  std::optional<int> port;
  serve->add_option("--port", port, "Listen port (0 picks a free one)");

  auto* verify_cmd = app.add_subcommand("verify", "Verify sources from a JSONL file or one .lean file");
  std::string verify_input, verify_output, verify_mode = "full_source";
  std::optional<std::int64_t> verify_timeout;
  verify_cmd->add_option("input", verify_input, "JSONL rows {attempt_id, source}, or a .lean file")
      ->required()
      ->check(CLI::ExistingFile);
  verify_cmd->add_option("-o,--output", verify_output, "Results JSONL");
  verify_cmd->add_option("--mode", verify_mode, "full_source or final_proof_only")
      ->check(CLI::IsMember({"full_source", "final_proof_only"}));
  verify_cmd->add_option("--timeout-ms", verify_timeout, "Per-item timeout");

  auto* eval_cmd = app.add_subcommand("eval", "Sample, verify and report pass@k on a benchmark");
  std::optional<std::int64_t> budget, max_tokens;
  std::optional<std::string> subset, report_format, benchmark, report_path, ledger_out;
  bool early_stop = false;
  eval_cmd->add_option("--budget", budget, "Attempts per statement");
  eval_cmd->add_option("--max-tokens", max_tokens, "Token limit per completion");
  eval_cmd->add_flag("--early-stop", early_stop, "Stop a statement at its first success");
  eval_cmd->add_option("--subset", subset, "Only statements carrying this subset tag");
  eval_cmd->add_option("--report-format", report_format, "csv, json or markdown_table")
      ->check(CLI::IsMember({"csv", "json", "markdown_table"}));
  eval_cmd->add_option("--benchmark", benchmark, "Benchmark JSONL");
  eval_cmd->add_option("--report", report_path, "Report output path");
  eval_cmd->add_option("--ledger", ledger_out, "Ledger JSONL output path");

  auto* report_cmd = app.add_subcommand("report", "Recompute a pass@k report from a ledger");
  std::string report_ledger;
  std::optional<std::string> rep_format, rep_benchmark, rep_out;
  report_cmd->add_option("ledger", report_ledger, "Ledger JSONL")->check(CLI::ExistingFile);
  report_cmd->add_option("--report-format", rep_format, "csv, json or markdown_table")
      ->check(CLI::IsMember({"csv", "json", "markdown_table"}));
  report_cmd->add_option("--benchmark", rep_benchmark, "Benchmark JSONL");
  report_cmd->add_option("--report", rep_out, "Report output path");

  auto* decon = app.add_subcommand("decontaminate", "Remove training texts overlapping a benchmark");
  std::optional<std::string> corpus, decon_bench, decon_out, removals;
  std::optional<std::size_t> ngram;
  decon->add_option("--corpus", corpus, "Corpus JSONL {id, text, source}");
  decon->add_option("--benchmark", decon_bench, "Benchmark JSONL");
  decon->add_option("-o,--output", decon_out, "Filtered corpus JSONL");
  decon->add_option("--removals", removals, "Removal report JSONL");
  decon->add_option("-n", ngram, "n-gram length");

  auto* curate = app.add_subcommand("curate", "Maintain the RL problem store");
  std::string action;
  curate->add_option("action", action, "build, prune, readmit, route, export, import or negation")
      ->required()
      ->check(CLI::IsMember({"build", "prune", "readmit", "route", "export", "import", "negation"}));
  std::optional<std::string> store_path;
  curate->add_option("--store", store_path, "Store snapshot path");

  auto* rollout = app.add_subcommand("rollout", "Run RL rollout iterations against the store");
  std::optional<int> iterations;
  std::optional<std::string> rollout_store, rollout_out;
  rollout->add_option("--iterations", iterations, "Iterations to run");
  rollout->add_option("--store", rollout_store, "Store snapshot path");
  rollout->add_option("--output-dir", rollout_out, "Directory for retained samples and logs");

  std::string command = "none";
  try {
    std::vector<const char*> argv{"leanrl"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), const_cast<char**>(argv.data()));
  } catch (const CLI::CallForHelp&) {
    out << app.help() << std::flush;
    emit_summary(out, {{"ok", true}, {"command", "help"}});
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    emit_summary(out, {{"ok", false}, {"command", command}, {"exit_code", 2}, {"error", e.what()}});
    return 2;
  }
  const auto* sub = app.get_subcommands().front();
  command = sub->get_name();

  json cfg = default_config();
  const json defaults = cfg;
  try {
    if (!config_path.empty()) {
      json file;
      try {
        file = json::parse(read_text_file(config_path));
      } catch (const json::parse_error& e) {
        throw UsageError(config_path + ": " + e.what());
      }
      check_keys(defaults, file, "");
      cfg.merge_patch(file);
      // merge_patch drops null-valued keys; put the defaults back.
      for (const auto& [section, value] : defaults.items())
        if (!cfg.contains(section)) cfg[section] = value;
      for (const auto& [section, value] : defaults.items()) {
        if (!value.is_object()) continue;
        for (const auto& [k, v] : value.items())
          if (!cfg[section].contains(k)) cfg[section][k] = v;
      }
    }
    for (const auto& o : overrides) apply_override(cfg, defaults, o);
    if (seed) cfg["seed"] = *seed;
    if (port) cfg["service"]["port"] = *port;
    if (budget) cfg["eval"]["budget"] = *budget;
    if (max_tokens) cfg["eval"]["max_tokens"] = *max_tokens;
    if (early_stop) cfg["eval"]["early_stop"] = true;
    if (subset) cfg["eval"]["subset"] = *subset;
    if (report_format) cfg["eval"]["report_format"] = *report_format;
    if (benchmark) cfg["eval"]["benchmark"] = *benchmark;
    if (report_path) cfg["eval"]["report"] = *report_path;
    if (ledger_out) cfg["eval"]["ledger"] = *ledger_out;
    if (rep_format) cfg["eval"]["report_format"] = *rep_format;
    if (rep_benchmark) cfg["eval"]["benchmark"] = *rep_benchmark;
    if (rep_out) cfg["eval"]["report"] = *rep_out;
    if (corpus) cfg["decontam"]["corpus"] = *corpus;
    if (decon_bench) cfg["decontam"]["benchmark"] = *decon_bench;
    if (decon_out) cfg["decontam"]["output"] = *decon_out;
    if (removals) cfg["decontam"]["removals"] = *removals;
    if (ngram) cfg["decontam"]["n"] = *ngram;
    if (store_path) cfg["curation"]["store"] = *store_path;
    if (iterations) cfg["rollout"]["iterations"] = *iterations;
    if (rollout_store) cfg["rollout"]["store"] = *rollout_store;
    if (rollout_out) cfg["rollout"]["output_dir"] = *rollout_out;

    err << "effective config: " << cfg.dump() << std::endl;

    json summary;
    if (command == "serve") summary = cmd_serve(cfg, err);
    else if (command == "verify") summary = cmd_verify(cfg, verify_input, verify_output, verify_mode, verify_timeout);
    else if (command == "eval") summary = cmd_eval(cfg);
    else if (command == "report") summary = cmd_report(cfg, report_ledger);
    else if (command == "decontaminate") summary = cmd_decontaminate(cfg);
    else if (command == "curate") summary = cmd_curate(cfg, action);
    else if (command == "rollout") summary = cmd_rollout(cfg);
    summary["ok"] = true;
    summary["command"] = command;
    emit_summary(out, summary);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    emit_summary(out, {{"ok", false}, {"command", command}, {"exit_code", 2}, {"error", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    emit_summary(out, {{"ok", false}, {"command", command}, {"exit_code", 1}, {"error", e.what()}});
    return 1;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace leanrl::cli
