#pragma once

#include "bdi/domains.hpp"
#include "bdi/html.hpp"
#include "bdi/snapshot.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bdi {

// The five candidate brand domains of a page, each normalized or absent.
struct IdentifiedDomains {
    std::optional<std::string> cn;
    std::optional<std::string> cookie;
    std::optional<std::string> most_common_link;
    std::optional<std::string> logo;
    std::optional<std::string> form_action;

    friend bool operator==(const IdentifiedDomains&, const IdentifiedDomains&) = default;
};

inline const std::vector<std::string>& default_logo_keywords() {
    static const std::vector<std::string> keywords{"logo"};
    return keywords;
}

// HTML of a snapshot decoded and scanned once, with the URL relative
// references resolve against (final_url, or the document's <base href>).
struct ParsedPage {
    std::string base_url;
    std::vector<HtmlElement> elements;
};

ParsedPage parse_page(const PageSnapshot& snap);

// Most frequent value; ties go to the lexicographically smallest.
std::optional<std::string> most_frequent(const std::vector<std::string>& values);

// Normalized full domain of `href` resolved against `base_url`, or nullopt
// for non-http(s) targets, same-document fragments and unparseable hosts.
std::optional<std::string> reference_domain(std::string_view base_url, std::string_view href,
                                            const SuffixRules& rules);

std::optional<std::string> extract_cn(const PageSnapshot& snap, std::vector<std::string>* notes = nullptr);
std::optional<std::string> extract_cookie_domain(const PageSnapshot& snap);

std::optional<std::string> extract_most_common_link_domain(const PageSnapshot& snap, const SuffixRules& rules);
std::optional<std::string> extract_logo_domain(const PageSnapshot& snap, const SuffixRules& rules,
                                               const std::vector<std::string>& keywords = default_logo_keywords());
std::optional<std::string> extract_form_action_domain(const PageSnapshot& snap, const SuffixRules& rules);

// Variants over an already parsed page.
std::optional<std::string> most_common_link_domain(const ParsedPage& page, const SuffixRules& rules);
std::optional<std::string> logo_domain(const ParsedPage& page, const SuffixRules& rules,
                                       const std::vector<std::string>& keywords);
std::optional<std::string> form_action_domain(const ParsedPage& page, const SuffixRules& rules);

IdentifiedDomains extract_all(const PageSnapshot& snap, const SuffixRules& rules,
                              const std::vector<std::string>& keywords = default_logo_keywords(),
                              std::vector<std::string>* notes = nullptr);

}  // namespace bdi
