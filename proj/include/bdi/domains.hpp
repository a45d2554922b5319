#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>

namespace bdi {

// A host split at its public suffix. For "www.facebook.com":
// subdomain "www", registrable "facebook", suffix "com",
// full_domain "www.facebook.com", root_domain "facebook.com".
// IP hosts keep the whole address in `registrable` with an empty suffix.
struct DomainParts {
    std::string subdomain;
    std::string registrable;
    std::string suffix;
    std::string full_domain;
    std::string root_domain;

    bool is_ip() const { return suffix.empty(); }

    friend bool operator==(const DomainParts&, const DomainParts&) = default;
};

// Public-suffix rules in the three classes of the list format. Wildcard and
// exception rules are stored without their "*." / "!" markers.
struct SuffixRules {
    std::unordered_set<std::string> exact_rules;
    std::unordered_set<std::string> wildcard_rules;
    std::unordered_set<std::string> exception_rules;
    std::string source_checksum;  // sha256 of the rule file, hex
    std::size_t skipped_lines = 0;

    std::size_t size() const {
        return exact_rules.size() + wildcard_rules.size() + exception_rules.size();
    }

    // Number of trailing labels of `host` that form its public suffix.
    // Falls back to 1 (the implicit "*" rule) when nothing matches.
    std::size_t suffix_label_count(std::string_view host) const;
};

SuffixRules load_suffix_rules(const std::filesystem::path& path);
SuffixRules parse_suffix_rules(std::string_view text);

// Extracts the host of `url` (absolute URL or bare hostname) and splits it.
// Throws Error{unparseable_url | empty_host} on bad input, including hosts
// that are themselves a public suffix.
DomainParts parse_url_domain(std::string_view url, const SuffixRules& rules);
DomainParts split_host(std::string_view host, const SuffixRules& rules);

// Lowercase host of `url` with credentials and port removed; no suffix logic.
std::string extract_host(std::string_view url);

bool is_ip_literal(std::string_view host);

// Lowercases, trims and strips the "*.", ".", "www." prefixes (in that order,
// repeated until none applies). Throws Error{empty_after_normalize}.
std::string normalize_domain(std::string_view raw);

// Looks like a hostname: dot-separated non-empty labels of [a-z0-9_-] or
// non-ASCII bytes, at least two labels.
bool is_domain_shaped(std::string_view normalized);

// Exact, case-insensitive equality with the full or the root domain.
bool domains_match(std::string_view candidate, const DomainParts& parts);

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

}  // namespace bdi
