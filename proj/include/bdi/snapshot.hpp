#pragma once

#include "bdi/error.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdi {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

struct FetchNote {
    std::string stage;  // url, dns, connect, tls, http, redirect, body
    std::string message;

    friend bool operator==(const FetchNote&, const FetchNote&) = default;
};

// One observation of a site. Fields are recorded verbatim; normalization is
// left to the extractors.
struct PageSnapshot {
    std::string requested_url;
    std::string final_url;
    Timestamp fetched_at{};
    std::optional<std::string> cert_cn;
    std::vector<std::string> cookie_domains;
    std::optional<std::string> html;  // raw body bytes
    std::optional<std::string> content_type;
    int status_code = 0;
    std::vector<FetchNote> fetch_errors;

    friend bool operator==(const PageSnapshot&, const PageSnapshot&) = default;
};

struct FetchPolicy {
    std::chrono::milliseconds connect_timeout{std::chrono::seconds(10)};
    std::chrono::milliseconds total_timeout{std::chrono::seconds(30)};
    int max_redirects = 10;
    std::size_t max_body_bytes = 5 * 1024 * 1024;
    std::string user_agent =
        "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/124.0 Safari/537.36";
    bool verify_tls = false;
    // host -> IP address pins, applied before DNS (like curl --resolve).
    std::map<std::string, std::string> resolve_overrides;

    // Throws Error{invalid_argument} on non-positive timeouts or negative
    // redirect limits.
    void validate() const;
};

std::string format_rfc3339(Timestamp t);
// Accepts "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)". nullopt otherwise.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

std::string snapshot_to_json(const PageSnapshot& snap);
PageSnapshot snapshot_from_json(std::string_view text);

// Content-addressed file name: hash of requested_url and fetched_at.
std::string snapshot_file_name(const PageSnapshot& snap);

std::filesystem::path save_snapshot(const PageSnapshot& snap, const std::filesystem::path& dir);
PageSnapshot load_snapshot(const std::filesystem::path& path);

// A single *.json file, or every *.json file in a directory sorted by name.
std::vector<std::filesystem::path> list_snapshot_files(const std::filesystem::path& file_or_dir);

// Fetches `url` following redirects. Returns a snapshot whenever a connection
// succeeded, with partial failures in fetch_errors. Throws Error with code
// dns_failure, connect_failure, connect_timeout, tls_failure, redirect_loop
// or unparseable_url when nothing could be captured.
PageSnapshot fetch_snapshot(std::string_view url, const FetchPolicy& policy);

// Pipeline stage an error code belongs to: url, dns, connect, tls, redirect or http.
std::string fetch_stage(ErrorCode code);

// Bounded-parallel fetch. Output position i belongs to input i; failures
// become snapshots carrying only fetch_errors.
std::vector<PageSnapshot> fetch_batch(const std::vector<std::string>& urls, const FetchPolicy& policy,
                                      std::size_t parallelism);

// Subject CN of the leaf certificate presented by host:port, read over a
// dedicated TLS handshake. nullopt when the subject has no CN.
std::optional<std::string> read_leaf_certificate_cn(const std::string& host, int port,
                                                    const FetchPolicy& policy);

}  // namespace bdi
