#include "bdi/extract.hpp"

#include "bdi/error.hpp"
#include "bdi/url.hpp"

#include <algorithm>
#include <map>

namespace bdi {

namespace {

std::optional<std::string> normalized_or_none(std::string_view raw) {
    try {
        return normalize_domain(raw);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

std::optional<std::string> most_frequent(const std::vector<std::string>& values) {
    std::map<std::string, std::size_t> counts;
    for (const auto& v : values) ++counts[v];
    std::optional<std::string> best;
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) {
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

ParsedPage parse_page(const PageSnapshot& snap) {
    ParsedPage page;
    page.base_url = snap.final_url.empty() ? snap.requested_url : snap.final_url;
    if (!snap.html || snap.html->empty()) return page;

    page.elements = parse_html_elements(decode_body(*snap.html, snap.content_type.value_or("")));
    for (const auto& el : page.elements) {
        if (el.name != "base") continue;
        if (const auto* href = el.attribute("href")) {
            if (auto resolved = resolve_reference(page.base_url, *href); resolved && is_http_scheme(url_scheme(*resolved))) {
                page.base_url = *resolved;
            }
        }
        break;
    }
    return page;
}

std::optional<std::string> reference_domain(std::string_view base_url, std::string_view href,
                                            const SuffixRules& rules) {
    const auto resolved = resolve_reference(base_url, href);
    if (!resolved || !is_http_scheme(url_scheme(*resolved))) return std::nullopt;
    try {
        return normalize_domain(parse_url_domain(*resolved, rules).full_domain);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::optional<std::string> extract_cn(const PageSnapshot& snap, std::vector<std::string>* notes) {
    if (!snap.cert_cn) return std::nullopt;
    auto cn = normalized_or_none(*snap.cert_cn);
    if (!cn || !is_domain_shaped(*cn)) {
        if (notes) notes->push_back("certificate CN '" + *snap.cert_cn + "' is not a domain name");
        return std::nullopt;
    }
    return cn;
}

std::optional<std::string> extract_cookie_domain(const PageSnapshot& snap) {
    std::vector<std::string> domains;
    for (const auto& raw : snap.cookie_domains) {
        if (auto d = normalized_or_none(raw)) domains.push_back(std::move(*d));
    }
    return most_frequent(domains);
}

std::optional<std::string> most_common_link_domain(const ParsedPage& page, const SuffixRules& rules) {
    std::vector<std::string> domains;
    for (const auto& el : page.elements) {
        if (el.name != "a") continue;
        const auto* href = el.attribute("href");
        if (!href) continue;
        // Same-document references ("", "#top") are not links to a domain.
        const auto target = trim(*href);
        if (target.empty() || target.starts_with('#')) continue;
        if (auto d = reference_domain(page.base_url, *href, rules)) domains.push_back(std::move(*d));
    }
    return most_frequent(domains);
}

std::optional<std::string> logo_domain(const ParsedPage& page, const SuffixRules& rules,
                                       const std::vector<std::string>& keywords) {
    if (keywords.empty()) throw Error(ErrorCode::invalid_argument, "logo keyword list is empty");
    std::vector<std::string> lowered;
    for (const auto& k : keywords) lowered.push_back(to_lower_ascii(k));

    std::vector<std::string> domains;
    for (const auto& el : page.elements) {
        if (el.name != "img") continue;
        const auto* src = el.attribute("src");
        if (!src) continue;
        const auto lower_src = to_lower_ascii(*src);
        const bool hit = std::any_of(lowered.begin(), lowered.end(), [&](const std::string& k) {
            return !k.empty() && lower_src.find(k) != std::string::npos;
        });
        if (!hit) continue;
        if (auto d = reference_domain(page.base_url, *src, rules)) domains.push_back(std::move(*d));
    }
    return most_frequent(domains);
}

std::optional<std::string> form_action_domain(const ParsedPage& page, const SuffixRules& rules) {
    std::optional<std::string> best;
    for (const auto& el : page.elements) {
        if (el.name != "form") continue;
        // A missing action submits to the document itself, like action="".
        const auto* action = el.attribute("action");
        auto d = reference_domain(page.base_url, action ? std::string_view(*action) : std::string_view{}, rules);
        if (!d) continue;
        if (!best || d->size() > best->size() || (d->size() == best->size() && *d < *best)) best = std::move(d);
    }
    return best;
}

std::optional<std::string> extract_most_common_link_domain(const PageSnapshot& snap, const SuffixRules& rules) {
    return most_common_link_domain(parse_page(snap), rules);
}

std::optional<std::string> extract_logo_domain(const PageSnapshot& snap, const SuffixRules& rules,
                                               const std::vector<std::string>& keywords) {
    return logo_domain(parse_page(snap), rules, keywords);
}

std::optional<std::string> extract_form_action_domain(const PageSnapshot& snap, const SuffixRules& rules) {
    return form_action_domain(parse_page(snap), rules);
}

IdentifiedDomains extract_all(const PageSnapshot& snap, const SuffixRules& rules,
                              const std::vector<std::string>& keywords, std::vector<std::string>* notes) {
    const auto page = parse_page(snap);
    IdentifiedDomains ids;
    ids.cn = extract_cn(snap, notes);
    ids.cookie = extract_cookie_domain(snap);
    ids.most_common_link = most_common_link_domain(page, rules);
    ids.logo = logo_domain(page, rules, keywords);
    ids.form_action = form_action_domain(page, rules);
    return ids;
}

}  // namespace bdi
