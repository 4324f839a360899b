#pragma once

#include <span>
#include <vector>

#include "leanrl/pattern/format.hpp"
#include "leanrl/pattern/trace.hpp"

namespace leanrl::kernels {

std::vector<pattern::FormatVerdict> check_format_serial(std::span<const pattern::ReasoningTrace> traces,
                                                        const pattern::FormatConfig& config);
std::vector<pattern::FormatVerdict> check_format_parallel(
    std::span<const pattern::ReasoningTrace> traces, const pattern::FormatConfig& config);

}  // namespace leanrl::kernels
