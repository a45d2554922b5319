#pragma once

#include "bdi/classifiers.hpp"
#include "bdi/domains.hpp"
#include "bdi/encode.hpp"
#include "bdi/extract.hpp"
#include "bdi/snapshot.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bdi {

struct FeatureExplanation {
    Feature feature = Feature::fad;
    std::optional<std::string> identified;
    Code code = Code::absent;
    std::string detail;
};

struct ScanResult {
    std::string url;
    std::string final_url;
    DomainParts parts;
    IdentifiedDomains identified;
    FeatureVector vector;
    Label verdict = Label::legitimate;
    std::vector<FeatureExplanation> explanation;  // column order
    bool insufficient_evidence = false;           // three or more features absent
    std::string model_id;
    double elapsed = 0;  // seconds
    std::vector<std::string> notes;
};

// Runs extract, encode and predict on a captured snapshot. The page domain is
// taken from final_url.
ScanResult scan_snapshot(const PageSnapshot& snap, const TrainedModel& model, const SuffixRules& rules);

// Fetches and scans. Throws Error{scan_failed} when nothing was captured; the
// message starts with the failing stage.
ScanResult scan(std::string_view url, const TrainedModel& model, const FetchPolicy& policy,
                const SuffixRules& rules);

ScanResult scan_offline(const std::filesystem::path& snapshot_path, const TrainedModel& model,
                        const SuffixRules& rules);

std::string scan_result_json(const ScanResult& r);
std::string scan_result_text(const ScanResult& r);

}  // namespace bdi
