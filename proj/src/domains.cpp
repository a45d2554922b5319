#include "bdi/domains.hpp"

#include "bdi/codec.hpp"
#include "bdi/error.hpp"
#include "bdi/punycode.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

namespace bdi {

namespace {

bool is_label_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || c >= 0x80;
}

bool is_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](char ch) {
        const auto c = static_cast<unsigned char>(ch);
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::size_t> label_starts(std::string_view host) {
    std::vector<std::size_t> starts{0};
    for (std::size_t i = 0; i < host.size(); ++i) {
        if (host[i] == '.') starts.push_back(i + 1);
    }
    return starts;
}

// Adds `rule` and, for internationalized rules, its ASCII-compatible form so
// that both spellings of a host resolve identically.
void insert_rule(std::unordered_set<std::string>& set, const std::string& rule) {
    set.insert(rule);
    const bool ascii = std::all_of(rule.begin(), rule.end(),
                                   [](char c) { return static_cast<unsigned char>(c) < 0x80; });
    if (!ascii) {
        if (auto ace = punycode_domain(rule)) set.insert(*ace);
    }
}

bool valid_rule_body(std::string_view body) {
    if (body.empty() || body.front() == '.' || body.back() == '.') return false;
    if (body.find("..") != std::string_view::npos) return false;
    return body.find_first_of("*!") == std::string_view::npos;
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

SuffixRules parse_suffix_rules(std::string_view text) {
    SuffixRules rules;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;

        if (line.empty() || line.starts_with("//")) continue;
        // Only the first whitespace-delimited token is the rule.
        const auto ws = line.find_first_of(" \t");
        const auto token = to_lower_ascii(line.substr(0, ws));

        if (token.starts_with('!')) {
            const auto body = token.substr(1);
            if (valid_rule_body(body) && body.find('.') != std::string::npos) {
                insert_rule(rules.exception_rules, body);
                continue;
            }
        } else if (token.starts_with("*.")) {
            const auto body = token.substr(2);
            if (valid_rule_body(body)) {
                insert_rule(rules.wildcard_rules, body);
                continue;
            }
        } else if (valid_rule_body(token)) {
            insert_rule(rules.exact_rules, token);
            continue;
        }
        ++rules.skipped_lines;
    }
    rules.source_checksum = sha256_hex(text);
    if (rules.size() == 0) {
        throw Error(ErrorCode::empty_rule_set, "public-suffix rule set is empty");
    }
    return rules;
}

SuffixRules load_suffix_rules(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open public-suffix file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw Error(ErrorCode::io, "failed reading public-suffix file: " + path.string());
    }
    return parse_suffix_rules(buf.str());
}

std::size_t SuffixRules::suffix_label_count(std::string_view host) const {
    const auto starts = label_starts(host);
    const std::size_t n = starts.size();

    // Exception rules prevail over everything else.
    for (std::size_t i = 0; i < n; ++i) {
        if (exception_rules.contains(std::string(host.substr(starts[i])))) {
            return n - i - 1;
        }
    }
    std::size_t best = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t labels = n - i;
        if (labels <= best) break;
        if (exact_rules.contains(std::string(host.substr(starts[i])))) {
            best = labels;
            break;
        }
        if (i + 1 < n && wildcard_rules.contains(std::string(host.substr(starts[i + 1])))) {
            best = labels;
            break;
        }
    }
    return best;
}

bool is_ip_literal(std::string_view host) {
    if (host.find(':') != std::string_view::npos) {
        return std::all_of(host.begin(), host.end(), [](char c) {
            return std::isxdigit(static_cast<unsigned char>(c)) || c == ':' || c == '.';
        });
    }
    int parts = 0;
    std::size_t start = 0;
    while (true) {
        const auto dot = host.find('.', start);
        const auto part = host.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (!all_digits(part) || part.size() > 3 || std::stoi(std::string(part)) > 255) return false;
        ++parts;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts == 4;
}

std::string extract_host(std::string_view url) {
    auto rest = trim(url);
    if (rest.empty()) throw Error(ErrorCode::empty_host, "empty URL");

    const auto sep = rest.find("://");
    const auto first_slash = rest.find_first_of("/?#\\");
    if (sep != std::string_view::npos && sep < first_slash) {
        if (!is_scheme(rest.substr(0, sep))) {
            throw Error(ErrorCode::unparseable_url, "invalid scheme in URL: " + std::string(url));
        }
        rest = rest.substr(sep + 3);
    } else if (rest.starts_with("//")) {
        rest = rest.substr(2);
    } else {
        // "scheme:opaque" (mailto:, javascript:) has no host; "host:port" does.
        const auto colon = rest.find(':');
        if (colon != std::string_view::npos && colon < first_slash) {
            auto after = rest.substr(colon + 1);
            after = after.substr(0, after.find_first_of("/?#\\"));
            if (!all_digits(after) && is_scheme(rest.substr(0, colon))) {
                throw Error(ErrorCode::unparseable_url, "URL has no host: " + std::string(url));
            }
        }
    }

    auto authority = rest.substr(0, rest.find_first_of("/?#\\"));
    if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
        authority = authority.substr(at + 1);
    }
    std::string_view host;
    if (authority.starts_with('[')) {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) {
            throw Error(ErrorCode::unparseable_url, "unterminated IPv6 literal: " + std::string(url));
        }
        host = authority.substr(1, close - 1);
    } else {
        host = authority;
        if (const auto colon = host.rfind(':'); colon != std::string_view::npos) {
            const auto port = host.substr(colon + 1);
            if (!port.empty() && !all_digits(port)) {
                throw Error(ErrorCode::unparseable_url, "invalid port in URL: " + std::string(url));
            }
            host = host.substr(0, colon);
        }
    }
    if (host.ends_with('.')) host.remove_suffix(1);
    if (host.empty()) throw Error(ErrorCode::empty_host, "URL has an empty host: " + std::string(url));
    return to_lower_ascii(host);
}

DomainParts split_host(std::string_view raw_host, const SuffixRules& rules) {
    std::string host = to_lower_ascii(raw_host);
    if (host.ends_with('.')) host.pop_back();
    if (host.empty()) throw Error(ErrorCode::empty_host, "empty host");

    DomainParts parts;
    if (is_ip_literal(host)) {
        parts.registrable = host;
        parts.full_domain = host;
        parts.root_domain = host;
        return parts;
    }

    for (unsigned char c : host) {
        if (c != '.' && !is_label_char(c)) {
            throw Error(ErrorCode::unparseable_url, "invalid character in host: " + host);
        }
    }
    const auto starts = label_starts(host);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const std::size_t end = i + 1 < starts.size() ? starts[i + 1] - 1 : host.size();
        if (end == starts[i]) throw Error(ErrorCode::unparseable_url, "empty label in host: " + host);
    }

    const std::size_t n = starts.size();
    const std::size_t suffix_labels = rules.suffix_label_count(host);
    if (suffix_labels >= n) {
        throw Error(ErrorCode::unparseable_url, "host is a public suffix: " + host);
    }
    const std::size_t reg = n - suffix_labels - 1;
    parts.suffix = host.substr(starts[reg + 1]);
    parts.registrable = host.substr(starts[reg], starts[reg + 1] - 1 - starts[reg]);
    if (reg > 0) parts.subdomain = host.substr(0, starts[reg] - 1);
    parts.root_domain = parts.registrable + "." + parts.suffix;
    parts.full_domain = host;
    return parts;
}

DomainParts parse_url_domain(std::string_view url, const SuffixRules& rules) {
    return split_host(extract_host(url), rules);
}

std::string normalize_domain(std::string_view raw) {
    std::string s = to_lower_ascii(trim(raw));
    bool changed = true;
    while (changed && !s.empty()) {
        changed = false;
        if (s.starts_with("*.")) {
            s.erase(0, 2);
            changed = true;
        }
        if (s.starts_with('.')) {
            s.erase(0, 1);
            changed = true;
        }
        if (s.starts_with("www.")) {
            s.erase(0, 4);
            changed = true;
        }
        const auto t = trim(s);
        if (t.size() != s.size()) {
            s = std::string(t);
            changed = true;
        }
    }
    if (s.empty()) {
        throw Error(ErrorCode::empty_after_normalize, "domain is empty after normalization: '" + std::string(raw) + "'");
    }
    return s;
}

bool is_domain_shaped(std::string_view d) {
    if (d.empty() || d.front() == '.' || d.back() == '.') return false;
    if (d.find("..") != std::string_view::npos || d.find('.') == std::string_view::npos) return false;
    return std::all_of(d.begin(), d.end(), [](char ch) {
        const auto c = static_cast<unsigned char>(ch);
        return c == '.' || is_label_char(c);
    });
}

bool domains_match(std::string_view candidate, const DomainParts& parts) {
    if (candidate.empty()) return false;
    const auto c = to_lower_ascii(candidate);
    return c == parts.full_domain || c == parts.root_domain;
}

}  // namespace bdi
