#include "leanrl/kernels/format_kernels.hpp"

#include <cstdint>

namespace leanrl::kernels {

std::vector<pattern::FormatVerdict> check_format_serial(std::span<const pattern::ReasoningTrace> traces,
                                                        const pattern::FormatConfig& config) {
  std::vector<pattern::FormatVerdict> out(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) out[i] = pattern::check_format(traces[i], config);
  return out;
}

std::vector<pattern::FormatVerdict> check_format_parallel(
    std::span<const pattern::ReasoningTrace> traces, const pattern::FormatConfig& config) {
  std::vector<pattern::FormatVerdict> out(traces.size());
  const auto size = static_cast<std::int64_t>(traces.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < size; ++i) out[i] = pattern::check_format(traces[i], config);
  return out;
}

}  // namespace leanrl::kernels
