#include "bdi/scanner.hpp"

#include "bdi/error.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>

namespace bdi {

namespace {

using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string describe(Feature f, const std::optional<std::string>& identified, Code code, const DomainParts& parts) {
    const std::string name(feature_name(f));
    switch (code) {
        case Code::absent: return name + " absent";
        case Code::match: return name + " " + *identified + " matches " + parts.full_domain;
        case Code::mismatch:
            return name + " " + *identified + " conflicts with " + parts.full_domain +
                   (parts.root_domain != parts.full_domain ? " (root " + parts.root_domain + ")" : "");
    }
    return name;
}

ordered_json optional_json(const std::optional<std::string>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

ScanResult scan_snapshot(const PageSnapshot& snap, const TrainedModel& model, const SuffixRules& rules) {
    const auto start = Clock::now();
    ScanResult r;
    r.url = snap.requested_url;
    r.final_url = snap.final_url.empty() ? snap.requested_url : snap.final_url;
    try {
        r.parts = parse_url_domain(r.final_url, rules);
    } catch (const Error& e) {
        throw Error(ErrorCode::scan_failed, "url: " + std::string(e.what()));
    }
    for (const auto& n : snap.fetch_errors) r.notes.push_back(n.stage + ": " + n.message);
    r.identified = extract_all(snap, rules, default_logo_keywords(), &r.notes);
    r.vector = encode_vector(r.identified, r.parts, std::nullopt, r.final_url);
    std::size_t absent = 0;
    for (auto f : kAllFeatures) {
        const auto& id = identified_for(r.identified, f);
        const Code code = r.vector[f];
        absent += code == Code::absent;
        r.explanation.push_back({f, id, code, describe(f, id, code, r.parts)});
    }
    r.insufficient_evidence = absent >= 3;
    r.verdict = predict(model, r.vector);
    r.model_id = model_id(model);
    r.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
}

ScanResult scan(std::string_view url, const TrainedModel& model, const FetchPolicy& policy,
                const SuffixRules& rules) {
    const auto start = Clock::now();
    PageSnapshot snap;
    try {
        snap = fetch_snapshot(url, policy);
    } catch (const Error& e) {
        throw Error(ErrorCode::scan_failed, fetch_stage(e.code()) + ": " + e.what());
    }
    auto r = scan_snapshot(snap, model, rules);
    r.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
}

ScanResult scan_offline(const std::filesystem::path& snapshot_path, const TrainedModel& model,
                        const SuffixRules& rules) {
    const auto start = Clock::now();
    auto r = scan_snapshot(load_snapshot(snapshot_path), model, rules);
    r.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
}

std::string scan_result_json(const ScanResult& r) {
    ordered_json j;
    j["url"] = r.url;
    j["final_url"] = r.final_url;
    j["parts"] = {{"subdomain", r.parts.subdomain},
                  {"registrable", r.parts.registrable},
                  {"suffix", r.parts.suffix},
                  {"full_domain", r.parts.full_domain},
                  {"root_domain", r.parts.root_domain}};
    ordered_json ids;
    for (auto f : kAllFeatures) ids[std::string(feature_name(f))] = optional_json(identified_for(r.identified, f));
    j["identified"] = std::move(ids);
    ordered_json vec;
    for (auto f : kAllFeatures) vec[std::string(feature_name(f))] = value(r.vector[f]);
    j["vector"] = std::move(vec);
    j["verdict"] = std::string(1, label_char(r.verdict));
    auto expl = ordered_json::array();
    for (const auto& e : r.explanation) {
        expl.push_back({{"feature", std::string(feature_name(e.feature))},
                        {"identified", optional_json(e.identified)},
                        {"code", value(e.code)},
                        {"detail", e.detail}});
    }
    j["explanation"] = std::move(expl);
    j["insufficient_evidence"] = r.insufficient_evidence;
    j["model_id"] = r.model_id;
    j["elapsed"] = r.elapsed;
    j["notes"] = r.notes;
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string scan_result_text(const ScanResult& r) {
    std::string out = "url:     " + r.url + "\n";
    if (r.final_url != r.url) out += "final:   " + r.final_url + "\n";
    out += "domain:  " + r.parts.full_domain + " (root " + r.parts.root_domain + ")\n";
    for (const auto& e : r.explanation) {
        char code[8];
        std::snprintf(code, sizeof code, "%+d", value(e.code));
        out += "  " + std::string(code) + "  " + e.detail + "\n";
    }
    out += "verdict: ";
    out += r.verdict == Label::phishing ? "T (phishing)" : "F (legitimate)";
    if (r.insufficient_evidence) out += "  [insufficient evidence]";
    out += "\nmodel:   " + r.model_id + "\n";
    for (const auto& n : r.notes) out += "note: " + n + "\n";
    return out;
}

}  // namespace bdi
