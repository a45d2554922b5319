#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace bdi {

std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view bytes);
// nullopt on characters outside the standard alphabet or bad padding.
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace bdi
