#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace bdi {

// RFC 3492 encoding of one UTF-8 label, prefixed with "xn--". Pure-ASCII
// labels come back unchanged; invalid UTF-8 yields nullopt.
std::optional<std::string> punycode_label(std::string_view utf8_label);

// Applies punycode_label to every dot-separated label.
std::optional<std::string> punycode_domain(std::string_view utf8_domain);

}  // namespace bdi
