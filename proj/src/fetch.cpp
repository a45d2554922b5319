#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "bdi/domains.hpp"
#include "bdi/error.hpp"
#include "bdi/snapshot.hpp"
#include "bdi/url.hpp"

#include <netdb.h>
#include <openssl/err.h>
#include <openssl/ssl.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <fcntl.h>
#include <memory>
#include <set>
#include <thread>

namespace bdi {

namespace {

struct AddrInfoDeleter {
    void operator()(addrinfo* p) const { freeaddrinfo(p); }
};
using AddrInfoPtr = std::unique_ptr<addrinfo, AddrInfoDeleter>;

struct SslCtxDeleter {
    void operator()(SSL_CTX* p) const { SSL_CTX_free(p); }
};
struct SslDeleter {
    void operator()(SSL* p) const { SSL_free(p); }
};
struct X509Deleter {
    void operator()(X509* p) const { X509_free(p); }
};

class Socket {
public:
    explicit Socket(int fd) : fd_(fd) {}
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() {
        if (fd_ >= 0) ::close(fd_);
    }
    int get() const { return fd_; }

private:
    int fd_;
};

std::string openssl_error() {
    const unsigned long code = ERR_get_error();
    if (code == 0) return "unknown TLS error";
    char buf[256];
    ERR_error_string_n(code, buf, sizeof buf);
    return buf;
}

std::string resolve_target(const std::string& host, const FetchPolicy& policy) {
    const auto it = policy.resolve_overrides.find(host);
    return it == policy.resolve_overrides.end() ? host : it->second;
}

AddrInfoPtr resolve(const std::string& host, int port, const FetchPolicy& policy) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto target = resolve_target(host, policy);
    const int rc = getaddrinfo(target.c_str(), std::to_string(port).c_str(), &hints, &res);
    if (rc != 0 || res == nullptr) {
        throw Error(ErrorCode::dns_failure, "cannot resolve " + host + ": " + gai_strerror(rc));
    }
    return AddrInfoPtr(res);
}

// Non-blocking connect bounded by the connect timeout, then back to blocking
// mode with send/receive timeouts for the handshake.
int connect_with_timeout(const addrinfo* list, const FetchPolicy& policy, const std::string& host) {
    bool timed_out = false;
    for (const addrinfo* ai = list; ai != nullptr; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        const int flags = fcntl(fd, F_GETFL, 0);
        fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc != 0 && errno == EINPROGRESS) {
            pollfd pfd{fd, POLLOUT, 0};
            rc = ::poll(&pfd, 1, static_cast<int>(policy.connect_timeout.count()));
            if (rc == 1) {
                int err = 0;
                socklen_t len = sizeof err;
                getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
                rc = err == 0 ? 0 : -1;
            } else {
                if (rc == 0) timed_out = true;
                rc = -1;
            }
        }
        if (rc == 0) {
            fcntl(fd, F_SETFL, flags);
            const auto total = policy.total_timeout.count();
            timeval tv{static_cast<time_t>(total / 1000), static_cast<suseconds_t>((total % 1000) * 1000)};
            setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
            setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
            return fd;
        }
        ::close(fd);
    }
    if (timed_out) throw Error(ErrorCode::connect_timeout, "connect to " + host + " timed out");
    throw Error(ErrorCode::connect_failure, "cannot connect to " + host);
}

std::string cookie_domain(const std::string& set_cookie, const std::string& host) {
    std::size_t pos = set_cookie.find(';');
    while (pos != std::string::npos) {
        const auto next = set_cookie.find(';', pos + 1);
        const auto attr = trim(std::string_view(set_cookie).substr(pos + 1, next == std::string::npos ? std::string::npos : next - pos - 1));
        const auto eq = attr.find('=');
        if (eq != std::string_view::npos && to_lower_ascii(trim(attr.substr(0, eq))) == "domain") {
            const auto value = trim(attr.substr(eq + 1));
            if (!value.empty()) return std::string(value);
        }
        pos = next;
    }
    return host;
}

int default_port(const std::string& scheme) {
    return scheme == "https" ? 443 : 80;
}

struct Target {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path_and_query;
};

Target parse_target(const std::string& url) {
    const auto comps = split_reference(url);
    if (!is_http_scheme(comps.scheme) || !comps.authority) {
        throw Error(ErrorCode::unparseable_url, "not an http(s) URL: " + url);
    }
    Target t;
    t.scheme = comps.scheme;
    t.host = extract_host(url);
    t.port = default_port(t.scheme);
    auto authority = std::string_view(*comps.authority);
    if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
    const auto close = authority.rfind(']');
    if (const auto colon = authority.rfind(':');
        colon != std::string_view::npos && (close == std::string_view::npos || colon > close) &&
        colon + 1 < authority.size()) {
        t.port = std::stoi(std::string(authority.substr(colon + 1)));
    }
    t.path_and_query = comps.path.empty() ? "/" : comps.path;
    if (comps.query) t.path_and_query += "?" + *comps.query;
    return t;
}

ErrorCode classify(httplib::Error err) {
    switch (err) {
        case httplib::Error::ConnectionTimeout: return ErrorCode::connect_timeout;
        case httplib::Error::SSLConnection:
        case httplib::Error::SSLLoadingCerts:
        case httplib::Error::SSLServerVerification: return ErrorCode::tls_failure;
        default: return ErrorCode::connect_failure;
    }
}

std::string stage_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::dns_failure: return "dns";
        case ErrorCode::connect_failure:
        case ErrorCode::connect_timeout: return "connect";
        case ErrorCode::tls_failure: return "tls";
        case ErrorCode::redirect_loop: return "redirect";
        case ErrorCode::unparseable_url:
        case ErrorCode::empty_host: return "url";
        default: return "http";
    }
}

Timestamp now_ms() {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

struct HopResult {
    int status = 0;
    httplib::Headers headers;
    std::string body;
    bool truncated = false;
};

HopResult perform_get(const Target& t, const FetchPolicy& policy) {
    httplib::Client cli(t.scheme + "://" + (t.host.find(':') != std::string::npos ? "[" + t.host + "]" : t.host) +
                        ":" + std::to_string(t.port));
    const auto ct = policy.connect_timeout.count();
    const auto tt = policy.total_timeout.count();
    cli.set_connection_timeout(static_cast<time_t>(ct / 1000), static_cast<time_t>((ct % 1000) * 1000));
    cli.set_read_timeout(static_cast<time_t>(tt / 1000), static_cast<time_t>((tt % 1000) * 1000));
    cli.set_write_timeout(static_cast<time_t>(tt / 1000), static_cast<time_t>((tt % 1000) * 1000));
    cli.set_follow_location(false);
    cli.set_decompress(true);
    if (t.scheme == "https") cli.enable_server_certificate_verification(policy.verify_tls);
    if (!policy.resolve_overrides.empty()) cli.set_hostname_addr_map(policy.resolve_overrides);

    HopResult hop;
    bool got_response = false;
    const httplib::Headers headers = {{"User-Agent", policy.user_agent},
                                      {"Accept", "text/html,application/xhtml+xml,*/*;q=0.8"}};
    auto result = cli.Get(
        t.path_and_query, headers,
        [&](const httplib::Response& res) {
            hop.status = res.status;
            hop.headers = res.headers;
            got_response = true;
            return true;
        },
        [&](const char* data, std::size_t len) {
            const std::size_t room = policy.max_body_bytes - hop.body.size();
            hop.body.append(data, std::min(room, len));
            if (len > room) {
                hop.truncated = true;
                return false;
            }
            return true;
        });
    if (!result && !(got_response && (hop.truncated || result.error() == httplib::Error::Read))) {
        const auto err = result.error();
        throw Error(classify(err), "request to " + t.host + " failed: " + httplib::to_string(err));
    }
    return hop;
}

}  // namespace

std::string fetch_stage(ErrorCode code) {
    return stage_of(code);
}

std::optional<std::string> read_leaf_certificate_cn(const std::string& host, int port, const FetchPolicy& policy) {
    const auto addrs = resolve(host, port, policy);
    Socket sock(connect_with_timeout(addrs.get(), policy, host));

    std::unique_ptr<SSL_CTX, SslCtxDeleter> ctx(SSL_CTX_new(TLS_client_method()));
    if (!ctx) throw Error(ErrorCode::tls_failure, openssl_error());
    if (policy.verify_tls) {
        SSL_CTX_set_default_verify_paths(ctx.get());
        SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_PEER, nullptr);
    } else {
        SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_NONE, nullptr);
    }
    std::unique_ptr<SSL, SslDeleter> ssl(SSL_new(ctx.get()));
    if (!ssl) throw Error(ErrorCode::tls_failure, openssl_error());
    if (!is_ip_literal(host)) SSL_set_tlsext_host_name(ssl.get(), host.c_str());
    if (policy.verify_tls) SSL_set1_host(ssl.get(), host.c_str());
    SSL_set_fd(ssl.get(), sock.get());
    if (SSL_connect(ssl.get()) != 1) {
        throw Error(ErrorCode::tls_failure, "TLS handshake with " + host + " failed: " + openssl_error());
    }

    std::unique_ptr<X509, X509Deleter> cert(SSL_get1_peer_certificate(ssl.get()));
    SSL_shutdown(ssl.get());
    if (!cert) throw Error(ErrorCode::tls_failure, "no certificate presented by " + host);

    X509_NAME* subject = X509_get_subject_name(cert.get());
    int index = -1;
    int last = -1;
    while ((index = X509_NAME_get_index_by_NID(subject, NID_commonName, index)) >= 0) last = index;
    if (last < 0) return std::nullopt;

    ASN1_STRING* data = X509_NAME_ENTRY_get_data(X509_NAME_get_entry(subject, last));
    unsigned char* utf8 = nullptr;
    const int len = ASN1_STRING_to_UTF8(&utf8, data);
    if (len < 0) throw Error(ErrorCode::tls_failure, "undecodable certificate CN from " + host);
    std::string cn(reinterpret_cast<char*>(utf8), static_cast<std::size_t>(len));
    OPENSSL_free(utf8);
    return cn;
}

PageSnapshot fetch_snapshot(std::string_view url, const FetchPolicy& policy) {
    policy.validate();
    PageSnapshot snap;
    snap.requested_url = std::string(url);
    snap.fetched_at = now_ms();

    std::string current = promote_to_url(url);
    std::set<std::string> visited;
    Target target;
    int previous_status = 0;
    for (int hop_index = 0;; ++hop_index) {
        HopResult hop;
        try {
            const Target next_target = parse_target(current);
            if (!is_ip_literal(next_target.host)) resolve(next_target.host, next_target.port, policy);
            hop = perform_get(next_target, policy);
            target = next_target;
        } catch (const Error& e) {
            if (hop_index == 0) throw;
            // A later hop failed; keep what the chain captured so far.
            snap.fetch_errors.push_back({stage_of(e.code()), "redirect target " + current + ": " + e.what()});
            snap.status_code = previous_status;
            break;
        }
        visited.insert(current);
        previous_status = hop.status;
        snap.final_url = current;
        for (const auto& [name, value] : hop.headers) {
            if (to_lower_ascii(name) == "set-cookie") snap.cookie_domains.push_back(cookie_domain(value, target.host));
        }

        const auto location = hop.headers.find("Location");
        if (hop.status >= 300 && hop.status < 400 && location != hop.headers.end()) {
            const auto next = resolve_reference(current, location->second);
            if (!next || !is_http_scheme(url_scheme(*next))) {
                snap.fetch_errors.push_back({"redirect", "unusable Location header: " + location->second});
            } else if (visited.contains(*next)) {
                throw Error(ErrorCode::redirect_loop, "redirect loop at " + *next);
            } else if (hop_index >= policy.max_redirects) {
                throw Error(ErrorCode::redirect_loop,
                            "more than " + std::to_string(policy.max_redirects) + " redirects from " + snap.requested_url);
            } else {
                current = *next;
                continue;
            }
        }

        snap.final_url = current;
        snap.status_code = hop.status;
        snap.html = hop.body;
        if (const auto ct = hop.headers.find("Content-Type"); ct != hop.headers.end()) snap.content_type = ct->second;
        if (hop.truncated) {
            snap.fetch_errors.push_back(
                {"body", "body truncated at " + std::to_string(policy.max_body_bytes) + " bytes"});
        }
        break;
    }

    if (target.scheme == "https") {
        try {
            snap.cert_cn = read_leaf_certificate_cn(target.host, target.port, policy);
            if (!snap.cert_cn) snap.fetch_errors.push_back({"tls", "leaf certificate subject has no CN"});
        } catch (const Error& e) {
            snap.fetch_errors.push_back({"tls", e.what()});
        }
    } else {
        snap.fetch_errors.push_back({"tls", "no TLS: plain http target"});
    }
    return snap;
}

std::vector<PageSnapshot> fetch_batch(const std::vector<std::string>& urls, const FetchPolicy& policy,
                                      std::size_t parallelism) {
    if (parallelism == 0) throw Error(ErrorCode::invalid_argument, "parallelism must be >= 1");
    std::vector<PageSnapshot> out(urls.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < urls.size(); i = next.fetch_add(1)) {
            try {
                out[i] = fetch_snapshot(urls[i], policy);
            } catch (const Error& e) {
                PageSnapshot failed;
                failed.requested_url = urls[i];
                failed.final_url = promote_to_url(urls[i]);
                failed.fetched_at = now_ms();
                failed.fetch_errors.push_back({stage_of(e.code()), std::string(to_string(e.code())) + ": " + e.what()});
                out[i] = std::move(failed);
            } catch (const std::exception& e) {
                PageSnapshot failed;
                failed.requested_url = urls[i];
                failed.final_url = promote_to_url(urls[i]);
                failed.fetched_at = now_ms();
                failed.fetch_errors.push_back({"http", e.what()});
                out[i] = std::move(failed);
            }
        }
    };

    const std::size_t n_workers = std::min(parallelism, urls.size());
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return out;
}

}  // namespace bdi
