#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace landis {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
/// FNV-1a of a file's bytes as 16 hex digits.
std::string file_hash(const std::string& path);

} // namespace landis
