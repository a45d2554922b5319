#include "bdi/url.hpp"

#include "bdi/domains.hpp"

#include <algorithm>
#include <cctype>

namespace bdi {

namespace {

bool scheme_char(char ch, bool first) {
    const auto c = static_cast<unsigned char>(ch);
    if (first) return std::isalpha(c) != 0;
    return std::isalnum(c) || c == '+' || c == '-' || c == '.';
}

std::string clean_reference(std::string_view ref) {
    // C0 controls and space are stripped at the ends; tab/CR/LF anywhere.
    std::size_t b = 0;
    std::size_t e = ref.size();
    while (b < e && static_cast<unsigned char>(ref[b]) <= 0x20) ++b;
    while (e > b && static_cast<unsigned char>(ref[e - 1]) <= 0x20) --e;
    std::string out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) {
        if (ref[i] != '\t' && ref[i] != '\n' && ref[i] != '\r') out.push_back(ref[i]);
    }
    return out;
}

std::string remove_dot_segments(std::string_view path) {
    std::string input(path);
    std::string output;
    while (!input.empty()) {
        if (input.starts_with("../")) {
            input.erase(0, 3);
        } else if (input.starts_with("./")) {
            input.erase(0, 2);
        } else if (input.starts_with("/./")) {
            input.erase(0, 2);
        } else if (input == "/.") {
            input = "/";
        } else if (input.starts_with("/../") || input == "/..") {
            input = input == "/.." ? std::string("/") : input.substr(3);
            const auto last = output.rfind('/');
            output.erase(last == std::string::npos ? 0 : last);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            const auto start = input.starts_with('/') ? 1 : 0;
            const auto next = input.find('/', start);
            output += input.substr(0, next);
            input.erase(0, next == std::string::npos ? input.size() : next);
        }
    }
    return output;
}

std::string merge_paths(const UrlComponents& base, std::string_view ref_path) {
    if (base.authority && base.path.empty()) return "/" + std::string(ref_path);
    const auto slash = base.path.rfind('/');
    if (slash == std::string::npos) return std::string(ref_path);
    return base.path.substr(0, slash + 1) + std::string(ref_path);
}

}  // namespace

std::string UrlComponents::to_string() const {
    std::string out;
    if (!scheme.empty()) out += scheme + ":";
    if (authority) out += "//" + *authority;
    out += path;
    if (query) out += "?" + *query;
    if (fragment) out += "#" + *fragment;
    return out;
}

UrlComponents split_reference(std::string_view input) {
    UrlComponents c;
    std::string ref(input);

    std::size_t i = 0;
    if (!ref.empty() && scheme_char(ref[0], true)) {
        std::size_t j = 1;
        while (j < ref.size() && scheme_char(ref[j], false)) ++j;
        if (j < ref.size() && ref[j] == ':') {
            c.scheme = to_lower_ascii(std::string_view(ref).substr(0, j));
            i = j + 1;
        }
    }
    if (is_http_scheme(c.scheme) || c.scheme.empty()) {
        std::replace(ref.begin() + static_cast<std::ptrdiff_t>(i), ref.end(), '\\', '/');
    }
    std::string_view rest = std::string_view(ref).substr(i);
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
        c.fragment = std::string(rest.substr(hash + 1));
        rest = rest.substr(0, hash);
    }
    if (const auto q = rest.find('?'); q != std::string_view::npos) {
        c.query = std::string(rest.substr(q + 1));
        rest = rest.substr(0, q);
    }
    if (rest.starts_with("//")) {
        rest.remove_prefix(2);
        const auto slash = rest.find('/');
        c.authority = std::string(rest.substr(0, slash));
        rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
    }
    c.path = std::string(rest);
    return c;
}

std::optional<std::string> resolve_reference(std::string_view base_url, std::string_view ref_text) {
    const auto base = split_reference(clean_reference(base_url));
    if (base.scheme.empty()) return std::nullopt;
    auto ref = split_reference(clean_reference(ref_text));

    // "http:foo" relative to an http base is a same-scheme relative reference;
    // with another base scheme it names a host, as browsers treat it.
    if (is_http_scheme(ref.scheme) && !ref.authority) {
        if (ref.scheme == base.scheme) {
            ref.scheme.clear();
        } else {
            auto slash = ref.path.find_first_not_of('/');
            auto body = slash == std::string::npos ? std::string{} : ref.path.substr(slash);
            auto end = body.find('/');
            ref.authority = body.substr(0, end);
            ref.path = end == std::string::npos ? std::string{} : body.substr(end);
        }
    }

    UrlComponents target;
    if (!ref.scheme.empty()) {
        target = ref;
        target.path = remove_dot_segments(ref.path);
    } else {
        target.scheme = base.scheme;
        if (ref.authority) {
            target.authority = ref.authority;
            target.path = remove_dot_segments(ref.path);
            target.query = ref.query;
        } else {
            target.authority = base.authority;
            if (ref.path.empty()) {
                target.path = base.path;
                target.query = ref.query ? ref.query : base.query;
            } else {
                target.path = ref.path.starts_with('/') ? remove_dot_segments(ref.path)
                                                        : remove_dot_segments(merge_paths(base, ref.path));
                target.query = ref.query;
            }
        }
        target.fragment = ref.fragment;
    }
    if (is_http_scheme(target.scheme) && target.authority && target.path.empty()) {
        target.path = "/";
    }
    return target.to_string();
}

std::string url_scheme(std::string_view url) {
    return split_reference(clean_reference(url)).scheme;
}

bool is_http_scheme(std::string_view scheme) {
    return scheme == "http" || scheme == "https";
}

std::string promote_to_url(std::string_view input) {
    const auto t = trim(input);
    if (t.find("://") != std::string_view::npos) return std::string(t);
    if (t.starts_with("//")) return "https:" + std::string(t);
    return "https://" + std::string(t);
}

}  // namespace bdi
