#pragma once

#include <string_view>

namespace leanrl::verify {

// True if `sorry` or `admit` occurs as a standalone token in code, i.e.
// outside line comments, (nested) block comments and string literals.
bool contains_sorry_token(std::string_view source);

}  // namespace leanrl::verify
