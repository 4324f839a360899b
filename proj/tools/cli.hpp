#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace leanrl::cli {

// Every recognised config key with its default. Config files and --set
// overrides may only name keys present here ("pool.env" is free-form).
nlohmann::json default_config();

// Exit codes: 0 success, 1 domain error, 2 usage error. The last line
// written to `out` is always a one-line JSON summary.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace leanrl::cli
