#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bdi {

struct HtmlElement {
    std::string name;  // lowercase tag name
    std::vector<std::pair<std::string, std::string>> attributes;  // lowercase names, decoded values

    const std::string* attribute(std::string_view attr_name) const;
};

// Error-tolerant scan of the start tags in a document, in source order.
// Comments, doctypes and the bodies of raw-text elements (script, style,
// textarea, title, ...) never produce elements. Attribute values have
// character references decoded; duplicate attributes keep the first value.
std::vector<HtmlElement> parse_html_elements(std::string_view html);

// Charset label from, in order: a byte-order mark, the Content-Type header,
// a <meta> declaration in the first 1024 bytes. Lowercase; empty if none.
std::string detect_charset(std::string_view body, std::string_view content_type);

// Converts a response body to UTF-8. windows-1252 and its aliases are
// transcoded; everything else is read as UTF-8 with invalid sequences
// replaced by U+FFFD.
std::string decode_body(std::string_view body, std::string_view content_type);

}  // namespace bdi
