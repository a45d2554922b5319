#include "bdi/snapshot.hpp"

#include "bdi/codec.hpp"
#include "bdi/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bdi {

namespace {

using ordered_json = nlohmann::ordered_json;

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    out = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        out = out * 10 + (s[i] - '0');
    }
    return true;
}

[[noreturn]] void malformed(const std::string& what) {
    throw Error(ErrorCode::malformed_snapshot, "malformed snapshot: " + what);
}

const ordered_json& require(const ordered_json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) malformed(std::string("missing required field '") + key + "'");
    return *it;
}

std::string require_string(const ordered_json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) malformed(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

std::string format_rfc3339(Timestamp t) {
    const auto ms = t.time_since_epoch().count();
    std::int64_t days = ms / 86'400'000;
    std::int64_t rem = ms % 86'400'000;
    if (rem < 0) {
        rem += 86'400'000;
        --days;
    }
    std::int64_t y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    const auto secs = rem / 1000;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                  static_cast<long long>(secs % 60), static_cast<long long>(rem % 1000));
    return buf;
}

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!read_int(s, 0, 4, y) || s.size() < 19 || s[4] != '-' || !read_int(s, 5, 2, mo) || s[7] != '-' ||
        !read_int(s, 8, 2, d) || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') || !read_int(s, 11, 2, h) ||
        s[13] != ':' || !read_int(s, 14, 2, mi) || s[16] != ':' || !read_int(s, 17, 2, sec)) {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
    static constexpr int kMonthDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (d > kMonthDays[mo - 1] + (mo == 2 && leap)) return std::nullopt;
    std::size_t pos = 19;
    std::int64_t millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits < 3) millis = millis * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) return std::nullopt;
        for (int i = digits; i < 3; ++i) millis *= 10;
    }
    std::int64_t offset_min = 0;
    if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
        ++pos;
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        int oh = 0, om = 0;
        if (!read_int(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' || !read_int(s, pos + 4, 2, om)) {
            return std::nullopt;
        }
        offset_min = (s[pos] == '+' ? 1 : -1) * (oh * 60 + om);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    const std::int64_t total_ms =
        ((days * 24 + h) * 60 + mi - offset_min) * 60'000 + static_cast<std::int64_t>(sec) * 1000 + millis;
    return Timestamp(std::chrono::milliseconds(total_ms));
}

void FetchPolicy::validate() const {
    if (connect_timeout.count() <= 0 || total_timeout.count() <= 0) {
        throw Error(ErrorCode::invalid_argument, "fetch timeouts must be positive");
    }
    if (max_redirects < 0) {
        throw Error(ErrorCode::invalid_argument, "max_redirects must be >= 0");
    }
}

std::string snapshot_to_json(const PageSnapshot& snap) {
    ordered_json j;
    j["requested_url"] = snap.requested_url;
    j["final_url"] = snap.final_url;
    j["fetched_at"] = format_rfc3339(snap.fetched_at);
    j["status_code"] = snap.status_code;
    j["cert_cn"] = snap.cert_cn ? ordered_json(*snap.cert_cn) : ordered_json(nullptr);
    j["cookie_domains"] = snap.cookie_domains;
    j["html_b64"] = snap.html ? ordered_json(base64_encode(*snap.html)) : ordered_json(nullptr);
    j["content_type"] = snap.content_type ? ordered_json(*snap.content_type) : ordered_json(nullptr);
    auto errors = ordered_json::array();
    for (const auto& e : snap.fetch_errors) {
        errors.push_back({{"stage", e.stage}, {"message", e.message}});
    }
    j["fetch_errors"] = std::move(errors);
    // Invalid UTF-8 in recorded strings is replaced rather than rejected.
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

PageSnapshot snapshot_from_json(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        malformed(e.what());
    }
    if (!j.is_object()) malformed("top level must be an object");

    PageSnapshot snap;
    snap.requested_url = require_string(j, "requested_url");
    snap.final_url = require_string(j, "final_url");
    const auto when = parse_rfc3339(require_string(j, "fetched_at"));
    if (!when) malformed("fetched_at is not RFC 3339");
    snap.fetched_at = *when;
    const auto& status = require(j, "status_code");
    if (!status.is_number_integer()) malformed("status_code must be an integer");
    snap.status_code = status.get<int>();

    if (auto it = j.find("cert_cn"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) malformed("cert_cn must be a string or null");
        snap.cert_cn = it->get<std::string>();
    }
    if (auto it = j.find("cookie_domains"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) malformed("cookie_domains must be an array");
        for (const auto& c : *it) {
            if (!c.is_string()) malformed("cookie_domains entries must be strings");
            snap.cookie_domains.push_back(c.get<std::string>());
        }
    }
    if (auto it = j.find("html_b64"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) malformed("html_b64 must be a string or null");
        auto bytes = base64_decode(it->get<std::string>());
        if (!bytes) malformed("html_b64 is not valid base64");
        snap.html = std::move(*bytes);
    }
    if (auto it = j.find("content_type"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) malformed("content_type must be a string or null");
        snap.content_type = it->get<std::string>();
    }
    if (auto it = j.find("fetch_errors"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) malformed("fetch_errors must be an array");
        for (const auto& e : *it) {
            if (!e.is_object() || !e.contains("stage") || !e.contains("message") || !e["stage"].is_string() ||
                !e["message"].is_string()) {
                malformed("fetch_errors entries must be {stage, message}");
            }
            snap.fetch_errors.push_back({e["stage"].get<std::string>(), e["message"].get<std::string>()});
        }
    }
    return snap;
}

std::string snapshot_file_name(const PageSnapshot& snap) {
    return sha256_hex(snap.requested_url + "\n" + format_rfc3339(snap.fetched_at)).substr(0, 32) + ".json";
}

std::filesystem::path save_snapshot(const PageSnapshot& snap, const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw Error(ErrorCode::io, "snapshot directory does not exist: " + dir.string());
    }
    const auto path = dir / snapshot_file_name(snap);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write snapshot: " + path.string());
    out << snapshot_to_json(snap);
    out.close();
    if (!out) throw Error(ErrorCode::io, "failed writing snapshot: " + path.string());
    return path;
}

PageSnapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open snapshot: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return snapshot_from_json(buf.str());
}

std::vector<std::filesystem::path> list_snapshot_files(const std::filesystem::path& file_or_dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(file_or_dir, ec)) {
        if (!std::filesystem::exists(file_or_dir, ec)) {
            throw Error(ErrorCode::io, "no such snapshot file or directory: " + file_or_dir.string());
        }
        return {file_or_dir};
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(file_or_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace bdi
