#pragma once

#include "bdi/domains.hpp"
#include "bdi/extract.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdi {

// Column order is fixed: FAD, LD, CN, MCLD, CD.
enum class Feature : std::uint8_t { fad = 0, ld = 1, cn = 2, mcld = 3, cd = 4 };

inline constexpr std::size_t kFeatureCount = 5;
inline constexpr std::array<Feature, kFeatureCount> kAllFeatures = {Feature::fad, Feature::ld, Feature::cn,
                                                                    Feature::mcld, Feature::cd};

using FeatureSubset = std::vector<Feature>;

std::string_view feature_name(Feature f);
// Accepts the short names (FAD, LD, CN, MCLD, CD), case-insensitively.
std::optional<Feature> parse_feature(std::string_view name);
// Comma-separated list; throws Error{invalid_argument} on unknown or
// duplicate names and on an empty list.
FeatureSubset parse_feature_list(std::string_view list);
std::string join_features(const FeatureSubset& subset, std::string_view sep = ",");

inline std::size_t index_of(Feature f) { return static_cast<std::size_t>(f); }

// Positive class is phishing ('T'); legitimate is 'F'.
enum class Label : std::uint8_t { legitimate = 0, phishing = 1 };

char label_char(Label l);
std::optional<Label> parse_label(std::string_view text);

enum class Code : std::int8_t { mismatch = -1, absent = 0, match = 1 };

inline int value(Code c) { return static_cast<int>(c); }
// 0, 1, 2 for -1, 0, +1; used to index per-value tables.
inline std::size_t slot(Code c) { return static_cast<std::size_t>(static_cast<int>(c) + 1); }
std::optional<Code> code_from_int(int v);

struct FeatureVector {
    std::array<Code, kFeatureCount> codes{Code::absent, Code::absent, Code::absent, Code::absent, Code::absent};
    std::optional<Label> label;
    std::string source_url;

    Code operator[](Feature f) const { return codes[index_of(f)]; }
    Code& operator[](Feature f) { return codes[index_of(f)]; }
    std::size_t present_count() const;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct Dataset {
    std::vector<FeatureVector> records;
    std::string provenance;
    std::optional<std::size_t> min_present;  // inclusion rule the records were filtered with

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::size_t count(Label l) const;

    static const std::array<std::string_view, kFeatureCount>& feature_names();

    // Records only; provenance is free text.
    friend bool operator==(const Dataset& a, const Dataset& b) { return a.records == b.records; }
};

const std::optional<std::string>& identified_for(const IdentifiedDomains& ids, Feature f);

Code encode_feature(const std::optional<std::string>& identified, const DomainParts& parts);

FeatureVector encode_vector(const IdentifiedDomains& ids, const DomainParts& parts, std::optional<Label> label,
                            std::string source_url);

// Keeps rows with at least `min_present` nonzero codes, in order. Throws
// Error{invalid_argument} on unlabeled rows. An empty result is reported
// through `warnings`, not as an error.
Dataset build_dataset(std::vector<FeatureVector> rows, std::size_t min_present = 3,
                      std::vector<std::string>* warnings = nullptr);

inline constexpr std::string_view kFeatureCsvHeader = "url,label,FAD,LD,CN,MCLD,CD";

std::string feature_csv_string(const Dataset& ds);
Dataset parse_feature_csv(std::string_view text);
Dataset read_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace bdi
