#include "bdi/codec.hpp"
#include "bdi/error.hpp"
#include "bdi/snapshot.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>

using namespace bdi;
using fixtures::StubResponse;
using fixtures::StubServer;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PageSnapshot rich_snapshot() {
    auto s = fixtures::facebook_walkthrough();
    s.requested_url = "facebook.com";
    s.cookie_domains = {".facebook.com", "www.facebook.com", ""};
    s.html = std::string("bin\0ary \xff\xfe body", 15);
    s.content_type = "text/html; charset=windows-1252";
    s.fetch_errors = {{"body", "body truncated at 10 bytes"}, {"tls", "no CN"}};
    return s;
}

}  // namespace

TEST_CASE("rfc3339 formatting and parsing") {
    const Timestamp t{std::chrono::milliseconds(1700000000123LL)};
    CHECK(format_rfc3339(t) == "2023-11-14T22:13:20.123Z");
    CHECK(parse_rfc3339("2023-11-14T22:13:20.123Z") == t);
    CHECK(parse_rfc3339("2023-11-15T00:13:20.123+02:00") == t);
    CHECK(parse_rfc3339("2023-11-14T22:13:20Z") == Timestamp{std::chrono::milliseconds(1700000000000LL)});
    CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == Timestamp{});
    CHECK(parse_rfc3339("2024-02-29T12:00:00Z").has_value());
    CHECK_FALSE(parse_rfc3339("2023-02-29T12:00:00Z").has_value());
    CHECK_FALSE(parse_rfc3339("2023-11-14T22:13:20").has_value());
    CHECK_FALSE(parse_rfc3339("2023-04-31T00:00:00Z").has_value());
    CHECK(parse_rfc3339("2023-11-14 22:13:20Z") == Timestamp{std::chrono::milliseconds(1700000000000LL)});
    CHECK_FALSE(parse_rfc3339("yesterday").has_value());
    for (long long ms : {0LL, 951782400000LL, 4102444799999LL, 1234567890LL}) {
        const Timestamp x{std::chrono::milliseconds(ms)};
        CHECK(parse_rfc3339(format_rfc3339(x)) == x);
    }
}

TEST_CASE("base64 codec") {
    for (std::string s : {"", "f", "fo", "foo", "foob", "fooba", "foobar"}) {
        CHECK(base64_decode(base64_encode(s)) == std::optional<std::string>(s));
    }
    CHECK(base64_encode("foobar") == "Zm9vYmFy");
    CHECK_FALSE(base64_decode("Zm9v!mFy").has_value());
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("snapshot JSON round trip") {
    const auto s = rich_snapshot();
    const auto text = snapshot_to_json(s);
    CHECK(snapshot_from_json(text) == s);

    const auto j = nlohmann::json::parse(text);
    for (const char* key : {"requested_url", "final_url", "fetched_at", "status_code", "cert_cn", "cookie_domains",
                            "html_b64", "fetch_errors"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["fetched_at"] == "2023-11-14T22:13:20.000Z");

    auto bare = fixtures::make_snapshot("http://a.com/", std::nullopt, {}, std::nullopt);
    const auto bare_json = nlohmann::json::parse(snapshot_to_json(bare));
    CHECK(bare_json["cert_cn"].is_null());
    CHECK(bare_json["html_b64"].is_null());
    CHECK(snapshot_from_json(bare_json.dump()) == bare);
}

TEST_CASE("snapshot JSON schema errors and forward compatibility") {
    auto j = nlohmann::json::parse(snapshot_to_json(rich_snapshot()));
    j["some_future_field"] = {1, 2, 3};
    CHECK(snapshot_from_json(j.dump()) == rich_snapshot());

    for (const char* key : {"requested_url", "final_url", "fetched_at", "status_code"}) {
        auto broken = j;
        broken.erase(key);
        CAPTURE(key);
        try {
            snapshot_from_json(broken.dump());
            FAIL("accepted");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::malformed_snapshot);
        }
    }
    auto bad_b64 = j;
    bad_b64["html_b64"] = "***";
    CHECK_THROWS_AS(snapshot_from_json(bad_b64.dump()), Error);
    auto bad_time = j;
    bad_time["fetched_at"] = "not a time";
    CHECK_THROWS_AS(snapshot_from_json(bad_time.dump()), Error);
    CHECK_THROWS_AS(snapshot_from_json("{\"requested_url\": "), Error);
    CHECK_THROWS_AS(snapshot_from_json("[]"), Error);
}

TEST_CASE("save and load snapshots") {
    fixtures::TempDir dir;
    const auto s = rich_snapshot();
    const auto p1 = save_snapshot(s, dir.path());
    const auto p2 = save_snapshot(s, dir.path());
    CHECK(p1 == p2);
    CHECK(p1.filename().string() == snapshot_file_name(s));
    CHECK(p1.extension() == ".json");
    CHECK(load_snapshot(p1) == s);

    auto other = s;
    other.requested_url = "https://other.example/";
    save_snapshot(other, dir.path());
    CHECK(list_snapshot_files(dir.path()).size() == 2);
    CHECK(list_snapshot_files(p1).size() == 1);

    try {
        save_snapshot(s, dir.path() / "missing" / "deeper");
        FAIL("saved into a missing directory");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
    }
    CHECK_THROWS_AS(load_snapshot(dir.path() / "nope.json"), Error);

    std::ofstream(dir.path() / "broken.json") << "{\"final_url\": \"x\"}";
    try {
        load_snapshot(dir.path() / "broken.json");
        FAIL("loaded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::malformed_snapshot);
    }
}

TEST_CASE("fetch policy validation") {
    FetchPolicy p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.connect_timeout == std::chrono::seconds(10));
    CHECK(p.total_timeout == std::chrono::seconds(30));
    CHECK(p.max_redirects == 10);
    CHECK(p.max_body_bytes == 5u * 1024 * 1024);
    CHECK_FALSE(p.verify_tls);
    p.max_redirects = -1;
    CHECK_THROWS_AS(p.validate(), Error);
    p = FetchPolicy{};
    p.connect_timeout = std::chrono::milliseconds(0);
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("fetch over TLS records CN verbatim and cookies across redirects") {
    StubServer server(
        true,
        [](const std::string& path) {
            StubResponse r;
            if (path == "/start") {
                r.status = 302;
                r.headers = {{"Location", "/login"}, {"Set-Cookie", "a=1; Path=/; Domain=.facebook.com"}};
            } else if (path == "/login") {
                r.headers = {{"Set-Cookie", "b=2; HttpOnly"}, {"Set-Cookie", "c=3; domain=.FaceBook.com; Secure"}};
                r.body = fixtures::facebook_html();
            } else {
                r.status = 404;
            }
            return r;
        },
        "*.facebook.com");
    const auto policy = server.policy({"www.facebook.com"});
    const auto snap = fetch_snapshot(server.origin("www.facebook.com") + "/start", policy);
    CHECK(snap.cert_cn == std::optional<std::string>("*.facebook.com"));
    CHECK(snap.final_url == server.origin("www.facebook.com") + "/login");
    CHECK(snap.status_code == 200);
    REQUIRE(snap.html.has_value());
    CHECK(*snap.html == fixtures::facebook_html());
    CHECK(snap.cookie_domains == std::vector<std::string>{".facebook.com", "www.facebook.com", ".FaceBook.com"});
    CHECK(snap.content_type == std::optional<std::string>("text/html; charset=utf-8"));
    CHECK(snap.fetch_errors.empty());
}

TEST_CASE("certificate without CN and certificate verification") {
    StubServer server(true, [](const std::string&) { return StubResponse{200, {}, "<p>x</p>", "text/html"}; }, "");
    auto policy = server.policy({"nocn.test"});
    const auto snap = fetch_snapshot(server.origin("nocn.test") + "/", policy);
    CHECK_FALSE(snap.cert_cn.has_value());
    CHECK(snap.status_code == 200);

    policy.verify_tls = true;
    try {
        fetch_snapshot(server.origin("nocn.test") + "/", policy);
        FAIL("self-signed certificate accepted with verification on");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::tls_failure);
    }
}

TEST_CASE("plain http target has no CN") {
    StubServer server(false, [](const std::string&) {
        return StubResponse{200, {{"Set-Cookie", "sid=1"}}, "<a href='/x'>x</a>", "text/html"};
    });
    const auto snap = fetch_snapshot(server.origin("plain.test") + "/", server.policy({"plain.test"}));
    CHECK_FALSE(snap.cert_cn.has_value());
    REQUIRE(snap.fetch_errors.size() == 1);
    CHECK(snap.fetch_errors[0].stage == "tls");
    CHECK(snap.fetch_errors[0].message.find("no TLS") != std::string::npos);
    CHECK(snap.cookie_domains == std::vector<std::string>{"plain.test"});
}

TEST_CASE("redirect loops, redirect limits and body cap") {
    StubServer server(false, [](const std::string& path) {
        StubResponse r;
        if (path == "/loop-a") {
            r.status = 301;
            r.headers = {{"Location", "/loop-b"}};
        } else if (path == "/loop-b") {
            r.status = 301;
            r.headers = {{"Location", "/loop-a"}};
        } else if (path.starts_with("/chain/")) {
            const int n = std::stoi(path.substr(7));
            r.status = 302;
            r.headers = {{"Location", "/chain/" + std::to_string(n + 1)}};
        } else if (path == "/big") {
            r.body = std::string(5000, 'x');
        }
        return r;
    });
    auto policy = server.policy({"r.test"});
    const auto origin = server.origin("r.test");
    try {
        fetch_snapshot(origin + "/loop-a", policy);
        FAIL("loop not detected");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::redirect_loop);
    }
    policy.max_redirects = 3;
    try {
        fetch_snapshot(origin + "/chain/0", policy);
        FAIL("limit not enforced");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::redirect_loop);
    }
    policy.max_body_bytes = 1000;
    const auto big = fetch_snapshot(origin + "/big", policy);
    REQUIRE(big.html.has_value());
    CHECK(big.html->size() == 1000);
    bool noted = false;
    for (const auto& n : big.fetch_errors) noted |= n.stage == "body";
    CHECK(noted);
}

TEST_CASE("connection failures are distinct errors") {
    int closed_port = 0;
    {
        StubServer probe(false, [](const std::string&) { return StubResponse{}; });
        closed_port = probe.port();
    }
    FetchPolicy policy;
    policy.connect_timeout = std::chrono::milliseconds(1000);
    policy.resolve_overrides["down.test"] = "127.0.0.1";
    try {
        fetch_snapshot("http://down.test:" + std::to_string(closed_port) + "/", policy);
        FAIL("connected to a closed port");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::connect_failure);
        CHECK(fetch_stage(e.code()) == "connect");
    }
    policy.resolve_overrides["nowhere.test"] = "not-an-address.invalid";
    try {
        fetch_snapshot("http://nowhere.test/", policy);
        FAIL("resolved");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::dns_failure);
        CHECK(fetch_stage(e.code()) == "dns");
    }
}

TEST_CASE("fetch_batch keeps order and isolates failures") {
    StubServer server(false, [](const std::string& path) { return StubResponse{200, {}, "<p>" + path + "</p>", "text/html"}; });
    auto policy = server.policy({"one.test", "two.test", "three.test"});
    policy.resolve_overrides["bad.test"] = "not-an-address.invalid";
    const std::vector<std::string> urls = {server.origin("one.test") + "/1", server.origin("bad.test") + "/x",
                                           server.origin("two.test") + "/2", server.origin("three.test") + "/3"};
    for (std::size_t parallel : {1u, 3u}) {
        const auto out = fetch_batch(urls, policy, parallel);
        REQUIRE(out.size() == urls.size());
        for (std::size_t i = 0; i < urls.size(); ++i) CHECK(out[i].requested_url == urls[i]);
        CHECK(out[0].html == std::optional<std::string>("<p>/1</p>"));
        CHECK(out[2].html == std::optional<std::string>("<p>/2</p>"));
        CHECK(out[1].status_code == 0);
        REQUIRE_FALSE(out[1].fetch_errors.empty());
        CHECK(out[1].fetch_errors[0].stage == "dns");
    }
    CHECK(fetch_batch({}, policy, 4).empty());
    CHECK_THROWS_AS(fetch_batch(urls, policy, 0), Error);
}
