#include "bdi/html.hpp"

#include "bdi/domains.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace bdi {

namespace {

constexpr std::array<std::string_view, 9> kRawTextElements = {
    "script", "style", "textarea", "title", "xmp", "iframe", "noembed", "noframes", "plaintext"};

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string decode_entities(std::string_view in) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kNamed = {{
        {"amp;", "&"}, {"lt;", "<"}, {"gt;", ">"}, {"quot;", "\""}, {"apos;", "'"}, {"nbsp;", "\xC2\xA0"},
    }};
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        if (in[i] != '&') {
            out.push_back(in[i++]);
            continue;
        }
        const auto rest = in.substr(i + 1);
        if (rest.starts_with('#')) {
            const bool hex = rest.size() > 1 && (rest[1] == 'x' || rest[1] == 'X');
            std::size_t j = hex ? 2 : 1;
            std::uint32_t cp = 0;
            const std::size_t digits_start = j;
            while (j < rest.size() && (hex ? std::isxdigit(static_cast<unsigned char>(rest[j]))
                                           : std::isdigit(static_cast<unsigned char>(rest[j])))) {
                const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(rest[j])));
                const std::uint32_t d = (c >= 'a') ? static_cast<std::uint32_t>(c - 'a' + 10)
                                                   : static_cast<std::uint32_t>(c - '0');
                cp = std::min<std::uint32_t>(cp * (hex ? 16 : 10) + d, 0x110000);
                ++j;
            }
            if (j > digits_start) {
                append_utf8(out, cp);
                if (j < rest.size() && rest[j] == ';') ++j;
                i += 1 + j;
                continue;
            }
        } else {
            bool matched = false;
            for (const auto& [name, value] : kNamed) {
                if (rest.starts_with(name)) {
                    out += value;
                    i += 1 + name.size();
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        out.push_back(in[i++]);
    }
    return out;
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
    if (needle.empty()) return from;
    for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
        bool ok = true;
        for (std::size_t k = 0; k < needle.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(hay[i + k])) != needle[k]) {
                ok = false;
                break;
            }
        }
        if (ok) return i;
    }
    return std::string_view::npos;
}

std::string charset_param(std::string_view content_type) {
    const auto lower = to_lower_ascii(content_type);
    const auto pos = lower.find("charset=");
    if (pos == std::string::npos) return {};
    std::string_view v = std::string_view(lower).substr(pos + 8);
    v = v.substr(0, v.find(';'));
    v = trim(v);
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) v = v.substr(1, v.size() - 2);
    return std::string(trim(v));
}

// windows-1252 code points for bytes 0x80..0x9F; the rest match latin-1.
constexpr std::array<std::uint16_t, 32> kCp1252High = {
    0x20AC, 0x0081, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0x008D, 0x017D, 0x008F, 0x0090, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x009D, 0x017E, 0x0178};

std::string decode_cp1252(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    for (char ch : in) {
        const auto b = static_cast<unsigned char>(ch);
        if (b < 0x80) {
            out.push_back(ch);
        } else if (b < 0xA0) {
            append_utf8(out, kCp1252High[b - 0x80]);
        } else {
            append_utf8(out, b);
        }
    }
    return out;
}

std::string sanitize_utf8(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        const auto b0 = static_cast<unsigned char>(in[i]);
        std::size_t len = 0;
        std::uint32_t min = 0;
        if (b0 < 0x80) {
            out.push_back(in[i++]);
            continue;
        }
        if (b0 >= 0xC2 && b0 <= 0xDF) {
            len = 2;
            min = 0x80;
        } else if (b0 >= 0xE0 && b0 <= 0xEF) {
            len = 3;
            min = 0x800;
        } else if (b0 >= 0xF0 && b0 <= 0xF4) {
            len = 4;
            min = 0x10000;
        }
        bool ok = len > 0 && i + len <= in.size();
        std::uint32_t cp = len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto b = static_cast<unsigned char>(in[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (b & 0x3F);
            }
        }
        if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
        if (ok) {
            out.append(in.substr(i, len));
            i += len;
        } else {
            append_utf8(out, 0xFFFD);
            ++i;
        }
    }
    return out;
}

}  // namespace

const std::string* HtmlElement::attribute(std::string_view attr_name) const {
    for (const auto& [k, v] : attributes) {
        if (k == attr_name) return &v;
    }
    return nullptr;
}

std::vector<HtmlElement> parse_html_elements(std::string_view html) {
    std::vector<HtmlElement> elements;
    const std::size_t n = html.size();
    std::size_t pos = 0;

    while (pos < n) {
        const auto lt = html.find('<', pos);
        if (lt == std::string_view::npos) break;
        pos = lt + 1;
        if (pos >= n) break;

        if (html.substr(pos).starts_with("!--")) {
            const auto end = html.find("-->", pos + 3);
            pos = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        const char c = html[pos];
        if (c == '!' || c == '?' || c == '/') {
            const auto end = html.find('>', pos);
            pos = end == std::string_view::npos ? n : end + 1;
            continue;
        }
        if (!std::isalpha(static_cast<unsigned char>(c))) continue;

        HtmlElement el;
        while (pos < n && !is_space(html[pos]) && html[pos] != '/' && html[pos] != '>') {
            el.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[pos]))));
            ++pos;
        }

        while (pos < n) {
            while (pos < n && (is_space(html[pos]) || html[pos] == '/')) ++pos;
            if (pos >= n) break;
            if (html[pos] == '>') {
                ++pos;
                break;
            }
            std::string name;
            do {
                name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[pos]))));
                ++pos;
            } while (pos < n && !is_space(html[pos]) && html[pos] != '/' && html[pos] != '>' && html[pos] != '=');

            std::size_t look = pos;
            while (look < n && is_space(html[look])) ++look;
            std::string value;
            if (look < n && html[look] == '=') {
                pos = look + 1;
                while (pos < n && is_space(html[pos])) ++pos;
                if (pos < n && (html[pos] == '"' || html[pos] == '\'')) {
                    const char quote = html[pos];
                    const auto end = html.find(quote, pos + 1);
                    const auto stop = end == std::string_view::npos ? n : end;
                    value = decode_entities(html.substr(pos + 1, stop - pos - 1));
                    pos = stop == n ? n : stop + 1;
                } else {
                    const auto start = pos;
                    while (pos < n && !is_space(html[pos]) && html[pos] != '>') ++pos;
                    value = decode_entities(html.substr(start, pos - start));
                }
            }
            if (el.attribute(name) == nullptr) el.attributes.emplace_back(std::move(name), std::move(value));
        }

        const bool raw_text = std::find(kRawTextElements.begin(), kRawTextElements.end(), el.name) !=
                              kRawTextElements.end();
        if (raw_text) {
            if (el.name == "plaintext") {
                pos = n;
            } else {
                const auto close = find_ci(html, "</" + el.name, pos);
                pos = close == std::string_view::npos ? n : close;
            }
        }
        elements.push_back(std::move(el));
    }
    return elements;
}

std::string detect_charset(std::string_view body, std::string_view content_type) {
    if (body.starts_with("\xEF\xBB\xBF")) return "utf-8";
    if (body.starts_with("\xFF\xFE") || body.starts_with("\xFE\xFF")) return "utf-16";
    if (auto cs = charset_param(content_type); !cs.empty()) return cs;

    for (const auto& el : parse_html_elements(body.substr(0, 1024))) {
        if (el.name != "meta") continue;
        if (const auto* cs = el.attribute("charset")) return to_lower_ascii(trim(*cs));
        const auto* equiv = el.attribute("http-equiv");
        const auto* content = el.attribute("content");
        if (equiv && content && to_lower_ascii(trim(*equiv)) == "content-type") {
            if (auto cs = charset_param(*content); !cs.empty()) return cs;
        }
    }
    return {};
}

std::string decode_body(std::string_view body, std::string_view content_type) {
    const auto charset = detect_charset(body, content_type);
    if (body.starts_with("\xEF\xBB\xBF")) body.remove_prefix(3);
    static constexpr std::array<std::string_view, 8> kCp1252Labels = {
        "windows-1252", "cp1252", "iso-8859-1", "iso8859-1", "latin1", "l1", "us-ascii", "ascii"};
    if (std::find(kCp1252Labels.begin(), kCp1252Labels.end(), charset) != kCp1252Labels.end()) {
        return decode_cp1252(body);
    }
    return sanitize_utf8(body);
}

}  // namespace bdi
