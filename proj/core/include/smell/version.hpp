#pragma once

#include <string_view>

namespace smell {

/// Library version, "major.minor.patch".
std::string_view version();

}  // namespace smell
