#pragma once

#include "bdi/domains.hpp"
#include "bdi/encode.hpp"
#include "bdi/snapshot.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fixtures {

const bdi::SuffixRules& psl();

bdi::PageSnapshot make_snapshot(const std::string& final_url, std::optional<std::string> cert_cn,
                                std::vector<std::string> cookies, std::optional<std::string> html);

// Page served at https://www.facebook.com/ with self-pointing evidence:
// CN "*.facebook.com", cookie ".facebook.com", links, logo and login form on
// facebook.com.
bdi::PageSnapshot facebook_walkthrough();
// Same page, but the certificate names github-facebook.com.
bdi::PageSnapshot github_facebook_variant();

std::string facebook_html();

// Snapshot whose identified domain for each feature follows `codes`:
// +1 points at the page's own root, -1 at an unrelated domain, 0 leaves the
// evidence out.
bdi::PageSnapshot snapshot_for_codes(const std::array<bdi::Code, bdi::kFeatureCount>& codes,
                                     const std::string& page_host = "www.shop.example.com");

// Forty labeled snapshots (20 legitimate, 20 phishing) with mixed evidence.
struct CorpusEntry {
    bdi::PageSnapshot snapshot;
    bdi::Label label;
};
std::vector<CorpusEntry> corpus40();

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct StubResponse {
    int status = 200;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    std::string content_type = "text/html; charset=utf-8";
};

// Local HTTP or HTTPS server on 127.0.0.1 with an ephemeral port. HTTPS
// servers present a freshly generated self-signed certificate whose subject
// CN is `cert_cn` (no CN at all when empty).
class StubServer {
public:
    using Handler = std::function<StubResponse(const std::string& path)>;

    StubServer(bool tls, Handler handler, const std::string& cert_cn = "");
    ~StubServer();
    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    int port() const;
    // "https://<host>:<port>" (or http) for a host pinned to 127.0.0.1.
    std::string origin(const std::string& host) const;
    // Policy with `hosts` pinned to 127.0.0.1 and short timeouts.
    bdi::FetchPolicy policy(const std::vector<std::string>& hosts) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fixtures
