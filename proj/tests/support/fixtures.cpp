#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "fixtures.hpp"

#include <httplib.h>
#include <openssl/evp.h>
#include <openssl/x509.h>

#include <atomic>
#include <stdexcept>
#include <thread>
#include <unistd.h>

namespace fixtures {

using bdi::Code;
using bdi::Feature;

const bdi::SuffixRules& psl() {
    static const bdi::SuffixRules rules = bdi::load_suffix_rules(BDI_DEFAULT_PSL);
    return rules;
}

bdi::PageSnapshot make_snapshot(const std::string& final_url, std::optional<std::string> cert_cn,
                                std::vector<std::string> cookies, std::optional<std::string> html) {
    bdi::PageSnapshot s;
    s.requested_url = final_url;
    s.final_url = final_url;
    s.fetched_at = bdi::Timestamp(std::chrono::milliseconds(1700000000000LL));
    s.cert_cn = std::move(cert_cn);
    s.cookie_domains = std::move(cookies);
    s.html = std::move(html);
    s.status_code = 200;
    return s;
}

std::string facebook_html() {
    return R"(<!DOCTYPE html>
<html><head><title>Facebook - log in or sign up</title></head>
<body>
<a href="/"><img src="https://www.facebook.com/images/fb_logo.svg" alt="Facebook"></a>
<form action="https://www.facebook.com/login/device-based/regular/login/" method="post">
  <input type="email" name="email"><input type="password" name="pass">
</form>
<a href="https://www.facebook.com/recover/initiate/">Forgotten password?</a>
<a href="/reg/">Create new account</a>
<a href="https://www.facebook.com/pages/create/">Create a Page</a>
<a href="https://www.facebook.com/privacy/policy/">Privacy Policy</a>
<a href="https://www.meta.com/">Meta</a>
</body></html>
)";
}

bdi::PageSnapshot facebook_walkthrough() {
    return make_snapshot("https://www.facebook.com/", "*.facebook.com", {".facebook.com"}, facebook_html());
}

bdi::PageSnapshot github_facebook_variant() {
    return make_snapshot("https://www.facebook.com/", "*.github-facebook.com", {".facebook.com"}, facebook_html());
}

bdi::PageSnapshot snapshot_for_codes(const std::array<Code, bdi::kFeatureCount>& codes, const std::string& page_host) {
    const auto parts = bdi::split_host(page_host, psl());
    const std::string own = parts.root_domain;
    const std::string other = "unrelated-brand.net";
    const auto target = [&](Feature f) { return codes[bdi::index_of(f)] == Code::match ? own : other; };
    const auto present = [&](Feature f) { return codes[bdi::index_of(f)] != Code::absent; };

    std::string html = "<html><body><p>fixture</p>\n";
    if (present(Feature::fad)) html += "<form action=\"https://" + target(Feature::fad) + "/session\"></form>\n";
    if (present(Feature::ld)) html += "<img src=\"https://" + target(Feature::ld) + "/static/logo.png\">\n";
    if (present(Feature::mcld)) {
        for (int i = 0; i < 3; ++i) html += "<a href=\"https://" + target(Feature::mcld) + "/p" + std::to_string(i) + "\">x</a>\n";
    }
    html += "</body></html>\n";

    std::optional<std::string> cn;
    if (present(Feature::cn)) cn = "*." + target(Feature::cn);
    std::vector<std::string> cookies;
    if (present(Feature::cd)) cookies.push_back("." + target(Feature::cd));
    return make_snapshot("https://" + page_host + "/", cn, cookies, html);
}

std::vector<CorpusEntry> corpus40() {
    std::vector<CorpusEntry> out;
    for (int i = 0; i < 20; ++i) {
        const std::string brand = "brand" + std::to_string(i) + ".com";
        const std::string host = "www." + brand;
        const auto absent = [&](int f) { return (i + f) % 5 == 0; };
        std::string html = "<html><body>\n";
        if (!absent(0)) html += "<form action=\"/login\" method=post></form>\n";
        if (!absent(1)) {
            const std::string logo_host = i % 4 == 0 ? "cdn" + std::to_string(i) + ".static-assets.net" : "www." + brand;
            html += "<img src=\"https://" + logo_host + "/img/logo.svg\">\n";
        }
        if (!absent(3)) {
            html += "<a href=\"/about\">About</a><a href=\"/help\">Help</a><a href=\"https://twitter.com/x\">tw</a>\n";
        }
        html += "</body></html>\n";
        std::optional<std::string> cn;
        if (!absent(2)) cn = i % 7 == 3 ? std::string("Example Hosting Ltd") : "*." + brand;
        std::vector<std::string> cookies;
        if (!absent(4)) cookies = {"." + brand, "." + brand};
        out.push_back({make_snapshot("https://" + host + "/", cn, cookies, html), bdi::Label::legitimate});
    }
    for (int i = 0; i < 20; ++i) {
        const std::string brand = "brand" + std::to_string(i) + ".com";
        const std::string host = "brand" + std::to_string(i) + "-account-verify.xyz";
        const auto absent = [&](int f) { return (i + f) % 3 == 0; };
        std::string html = "<html><body>\n";
        if (!absent(0)) {
            html += i % 2 == 0 ? "<form action=\"\"></form>\n" : "<form action=\"https://collect-" + std::to_string(i) + ".top/p.php\"></form>\n";
        }
        if (!absent(1)) html += "<img src=\"https://www." + brand + "/img/logo.svg\">\n";
        if (!absent(3)) {
            html += "<a href=\"https://www." + brand + "/help\">Help</a><a href=\"https://www." + brand +
                    "/privacy\">Privacy</a><a href=\"#\">x</a>\n";
        }
        html += "</body></html>\n";
        std::optional<std::string> cn;
        if (!absent(2)) cn = i % 2 == 0 ? host : "*." + brand;
        std::vector<std::string> cookies;
        if (!absent(4)) cookies = {i % 3 == 1 ? host : "." + brand};
        out.push_back({make_snapshot("https://" + host + "/", cn, cookies, html), bdi::Label::phishing});
    }
    return out;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bdi-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

namespace {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct X509Deleter {
    void operator()(X509* p) const { X509_free(p); }
};

std::pair<std::unique_ptr<X509, X509Deleter>, std::unique_ptr<EVP_PKEY, PkeyDeleter>> self_signed(
    const std::string& cn) {
    std::unique_ptr<EVP_PKEY, PkeyDeleter> key(EVP_EC_gen("P-256"));
    if (!key) throw std::runtime_error("key generation failed");
    std::unique_ptr<X509, X509Deleter> cert(X509_new());
    X509_set_version(cert.get(), 2);
    ASN1_INTEGER_set(X509_get_serialNumber(cert.get()), 1);
    X509_gmtime_adj(X509_getm_notBefore(cert.get()), -3600);
    X509_gmtime_adj(X509_getm_notAfter(cert.get()), 3600L * 24);
    X509_set_pubkey(cert.get(), key.get());
    X509_NAME* name = X509_get_subject_name(cert.get());
    X509_NAME_add_entry_by_txt(name, "O", MBSTRING_ASC, reinterpret_cast<const unsigned char*>("Fixture Org"), -1, -1,
                               0);
    if (!cn.empty()) {
        X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_UTF8, reinterpret_cast<const unsigned char*>(cn.c_str()),
                                   -1, -1, 0);
    }
    X509_set_issuer_name(cert.get(), name);
    if (X509_sign(cert.get(), key.get(), EVP_sha256()) <= 0) throw std::runtime_error("certificate signing failed");
    return {std::move(cert), std::move(key)};
}

}  // namespace

struct StubServer::Impl {
    bool tls = false;
    std::unique_ptr<httplib::Server> server;
    int port = 0;
    std::thread thread;
};

StubServer::StubServer(bool tls, Handler handler, const std::string& cert_cn) : impl_(std::make_unique<Impl>()) {
    impl_->tls = tls;
    if (tls) {
        auto [cert, key] = self_signed(cert_cn);
        impl_->server = std::make_unique<httplib::SSLServer>(cert.get(), key.get());
    } else {
        impl_->server = std::make_unique<httplib::Server>();
    }
    if (!impl_->server->is_valid()) throw std::runtime_error("stub server setup failed");
    impl_->server->Get(".*", [handler](const httplib::Request& req, httplib::Response& res) {
        const auto r = handler(req.path);
        res.status = r.status;
        for (const auto& [k, v] : r.headers) res.headers.emplace(k, v);
        res.set_content(r.body, r.content_type);
    });
    impl_->port = impl_->server->bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) throw std::runtime_error("stub server bind failed");
    impl_->thread = std::thread([this] { impl_->server->listen_after_bind(); });
    impl_->server->wait_until_ready();
}

StubServer::~StubServer() {
    impl_->server->stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int StubServer::port() const {
    return impl_->port;
}

std::string StubServer::origin(const std::string& host) const {
    return std::string(impl_->tls ? "https" : "http") + "://" + host + ":" + std::to_string(impl_->port);
}

bdi::FetchPolicy StubServer::policy(const std::vector<std::string>& hosts) const {
    bdi::FetchPolicy p;
    p.connect_timeout = std::chrono::milliseconds(2000);
    p.total_timeout = std::chrono::milliseconds(5000);
    for (const auto& h : hosts) p.resolve_overrides[h] = "127.0.0.1";
    return p;
}

}  // namespace fixtures
