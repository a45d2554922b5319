#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace bdi {

struct UrlComponents {
    std::string scheme;  // lowercase, without ':'
    std::optional<std::string> authority;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    std::string to_string() const;
};

// Splits a URI reference into its five components (RFC 3986 appendix B).
// Backslashes are read as '/' for http(s), as browsers do.
UrlComponents split_reference(std::string_view ref);

// Resolves `ref` against absolute `base` (RFC 3986 section 5.2). Leading and
// trailing whitespace and embedded tab/newline characters are removed from
// `ref` first. nullopt when `base` is not absolute.
std::optional<std::string> resolve_reference(std::string_view base, std::string_view ref);

// Lowercase scheme of an absolute URL, or empty.
std::string url_scheme(std::string_view url);

bool is_http_scheme(std::string_view scheme);

// Promotes bare hostnames ("example.com/x") to "https://example.com/x".
std::string promote_to_url(std::string_view input);

}  // namespace bdi
