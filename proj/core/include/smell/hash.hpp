#pragma once

#include <string>
#include <string_view>

namespace smell {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// First 16 hex digits of sha256_hex; used for cache keys and run stamps.
std::string short_hash(std::string_view data);

}  // namespace smell
