#include "leanrl/curation/build.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "leanrl/common/rng.hpp"

namespace leanrl::curation {

using nlohmann::json;

PromptTemplate default_rater_template() {
  return {"rater-v1",
          "Rate how difficult the following competition problem is, from 0 (trivial) to 1 "
          "(hardest olympiad level).\n\nProblem:\n{informal_text}\n\nLean 4 statement:\n{statement}\n\n"
          "Reply with a single number between 0 and 1 on the last line.\n"};
}

std::optional<double> parse_rating(const std::string& text) {
  std::optional<double> last;
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    const bool starts = std::isdigit(c) || (c == '.' && i + 1 < text.size() &&
                                            std::isdigit(static_cast<unsigned char>(text[i + 1])));
    if (!starts) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool dot = false;
    while (j < text.size()) {
      const auto d = static_cast<unsigned char>(text[j]);
      if (std::isdigit(d)) ++j;
      else if (d == '.' && !dot) { dot = true; ++j; }
      else break;
    }
    const bool negative = i > 0 && text[i - 1] == '-';
    const double v = std::stod(text.substr(i, j - i));
    if (!negative && v >= 0.0 && v <= 1.0) last = v;
    i = j;
  }
  return last;
}

int rating_to_bin(double rating, int bins) {
  const auto b = static_cast<int>(std::floor(rating * bins));
  return std::clamp(b, 0, bins - 1);
}

json to_json(const BuildReport& r) {
  return json{{"human_distinct", r.human_distinct}, {"auto_count", r.auto_count},
              {"human_entries", r.human_entries},   {"repeats", r.repeats},
              {"bin_occupancy", r.bin_occupancy},   {"bin_spread", r.bin_spread},
              {"balanced", r.balanced}};
}

namespace {

void rate_all(std::vector<ProblemRecord*>& records, RaterClient& rater, const BuildOptions& opt) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= records.size()) return;
      auto& r = *records[i];
      try {
        const auto prompt = render_template(
            opt.rater_template, {{"informal_text", r.informal_text}, {"statement", r.statement}});
        std::string reply;
        try {
          reply = rater.complete(prompt);
        } catch (const TextClientUnavailable& e) {
          throw RaterUnavailable(e.what());
        }
        const auto rating = parse_rating(reply);
        if (!rating)
          throw RaterUnavailable("rater gave no rating in [0, 1] for '" + r.problem_id + "'");
        r.difficulty_bin = rating_to_bin(*rating, opt.bins);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, opt.rating_parallelism)),
                                         records.size());
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

// Index of the least occupied bin among those with candidates left.
int least_occupied(const std::vector<std::size_t>& occupancy, const std::vector<bool>& eligible) {
  int best = -1;
  for (int b = 0; b < static_cast<int>(occupancy.size()); ++b) {
    if (!eligible[b]) continue;
    if (best < 0 || occupancy[b] < occupancy[best]) best = b;
  }
  return best;
}

}  // namespace

std::unique_ptr<ProblemStore> build_store(std::vector<ProblemRecord> human,
                                          std::vector<ProblemRecord> autos, RaterClient& rater,
                                          const BuildOptions& opt, BuildReport* report) {
  if (human.empty() || autos.empty()) throw InvalidArgument("both human and auto sets must be non-empty");
  if (opt.bins < 1) throw InvalidArgument("bins must be >= 1");

  std::unordered_set<std::string> ids;
  for (auto* set : {&human, &autos}) {
    const auto provenance = set == &human ? Provenance::human : Provenance::auto_formalized;
    for (auto& r : *set) {
      if (!ids.insert(r.problem_id).second)
        throw InvalidArgument("duplicate problem id '" + r.problem_id + "'");
      r.provenance = provenance;
      r.state = ProblemState::active;
      if (r.source_id.empty()) r.source_id = r.problem_id;
    }
  }
  std::vector<ProblemRecord*> all;
  for (auto& r : human) all.push_back(&r);
  for (auto& r : autos) all.push_back(&r);
  rate_all(all, rater, opt);

  const auto bins = static_cast<std::size_t>(opt.bins);
  std::vector<std::size_t> occupancy(bins, 0);
  for (const auto& r : autos) ++occupancy[r.difficulty_bin];
  std::vector<std::vector<std::size_t>> by_bin(bins);
  for (std::size_t i = 0; i < human.size(); ++i) by_bin[human[i].difficulty_bin].push_back(i);

  Rng rng(derive_seed(opt.seed, {0x72657361ULL}));
  std::vector<std::size_t> chosen;  // indices into human, in insertion order
  const std::size_t target = autos.size();
  if (human.size() <= target) {
    for (std::size_t i = 0; i < human.size(); ++i) {
      chosen.push_back(i);
      ++occupancy[human[i].difficulty_bin];
    }
    std::vector<bool> eligible(bins);
    for (std::size_t b = 0; b < bins; ++b) eligible[b] = !by_bin[b].empty();
    while (chosen.size() < target) {
      const int b = least_occupied(occupancy, eligible);
      const auto& pool = by_bin[b];
      chosen.push_back(pool[rng.below(pool.size())]);
      ++occupancy[b];
    }
  } else {
    for (auto& pool : by_bin) std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::size_t> taken(bins, 0);
    std::vector<bool> eligible(bins);
    while (chosen.size() < target) {
      for (std::size_t b = 0; b < bins; ++b) eligible[b] = taken[b] < by_bin[b].size();
      const int b = least_occupied(occupancy, eligible);
      chosen.push_back(by_bin[b][taken[b]++]);
      ++occupancy[b];
    }
  }

  auto store = std::make_unique<ProblemStore>(opt.store);
  std::vector<std::size_t> copies(human.size(), 0);
  for (const auto i : chosen) {
    ProblemRecord r = human[i];
    if (copies[i]++ > 0) r.problem_id = r.source_id + "#r" + std::to_string(copies[i] - 1);
    store->add(std::move(r));
  }
  for (auto& r : autos) store->add(std::move(r));

  if (report) {
    report->human_distinct = human.size();
    report->auto_count = autos.size();
    report->human_entries = chosen.size();
    report->repeats = chosen.size() - static_cast<std::size_t>(std::count_if(
                                          copies.begin(), copies.end(), [](auto c) { return c > 0; }));
    report->bin_occupancy = occupancy;
    const auto [lo, hi] = std::minmax_element(occupancy.begin(), occupancy.end());
    const double mean = static_cast<double>(2 * target) / static_cast<double>(bins);
    report->bin_spread = static_cast<double>(*hi - *lo) / mean;
    report->balanced = report->bin_spread <= opt.balance_tolerance;
  }
  return store;
}

}  // namespace leanrl::curation
