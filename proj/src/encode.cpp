#include "bdi/encode.hpp"

#include "bdi/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bdi {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {"FAD", "LD", "CN", "MCLD", "CD"};

[[noreturn]] void bad_row(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::malformed_row, "line " + std::to_string(line) + ": " + why);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

std::string escape_url(std::string_view url) {
    std::string out;
    for (char c : url) {
        if (c == ',') {
            out += "%2C";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string_view feature_name(Feature f) {
    return kNames[index_of(f)];
}

std::optional<Feature> parse_feature(std::string_view name) {
    std::string upper(trim(name));
    std::transform(upper.begin(), upper.end(), upper.begin(), [](char c) {
        return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    });
    for (auto f : kAllFeatures) {
        if (feature_name(f) == upper) return f;
    }
    return std::nullopt;
}

FeatureSubset parse_feature_list(std::string_view list) {
    FeatureSubset subset;
    for (auto part : split(list, ',')) {
        if (trim(part).empty()) continue;
        const auto f = parse_feature(part);
        if (!f) throw Error(ErrorCode::invalid_argument, "unknown feature '" + std::string(part) + "'");
        if (std::find(subset.begin(), subset.end(), *f) != subset.end()) {
            throw Error(ErrorCode::invalid_argument, "duplicate feature '" + std::string(part) + "'");
        }
        subset.push_back(*f);
    }
    if (subset.empty()) throw Error(ErrorCode::empty_subset, "feature list is empty");
    return subset;
}

std::string join_features(const FeatureSubset& subset, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i) out += sep;
        out += feature_name(subset[i]);
    }
    return out;
}

char label_char(Label l) {
    return l == Label::phishing ? 'T' : 'F';
}

std::optional<Label> parse_label(std::string_view text) {
    if (text == "T") return Label::phishing;
    if (text == "F") return Label::legitimate;
    return std::nullopt;
}

std::optional<Code> code_from_int(int v) {
    if (v < -1 || v > 1) return std::nullopt;
    return static_cast<Code>(v);
}

std::size_t FeatureVector::present_count() const {
    return static_cast<std::size_t>(std::count_if(codes.begin(), codes.end(), [](Code c) { return c != Code::absent; }));
}

std::size_t Dataset::count(Label l) const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [l](const FeatureVector& r) { return r.label == l; }));
}

const std::array<std::string_view, kFeatureCount>& Dataset::feature_names() {
    return kNames;
}

const std::optional<std::string>& identified_for(const IdentifiedDomains& ids, Feature f) {
    switch (f) {
        case Feature::fad: return ids.form_action;
        case Feature::ld: return ids.logo;
        case Feature::cn: return ids.cn;
        case Feature::mcld: return ids.most_common_link;
        case Feature::cd: return ids.cookie;
    }
    return ids.cn;
}

Code encode_feature(const std::optional<std::string>& identified, const DomainParts& parts) {
    if (!identified) return Code::absent;
    return domains_match(*identified, parts) ? Code::match : Code::mismatch;
}

FeatureVector encode_vector(const IdentifiedDomains& ids, const DomainParts& parts, std::optional<Label> label,
                            std::string source_url) {
    FeatureVector v;
    for (auto f : kAllFeatures) v[f] = encode_feature(identified_for(ids, f), parts);
    v.label = label;
    v.source_url = std::move(source_url);
    return v;
}

Dataset build_dataset(std::vector<FeatureVector> rows, std::size_t min_present, std::vector<std::string>* warnings) {
    Dataset ds;
    ds.min_present = min_present;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].label) {
            throw Error(ErrorCode::invalid_argument,
                        "row " + std::to_string(i) + " (" + rows[i].source_url + ") is unlabeled");
        }
        if (rows[i].present_count() >= min_present) ds.records.push_back(std::move(rows[i]));
    }
    ds.provenance = "kept " + std::to_string(ds.records.size()) + " of " + std::to_string(rows.size()) +
                    " rows with at least " + std::to_string(min_present) + " present features";
    if (ds.records.empty() && warnings) warnings->push_back("dataset is empty after the inclusion filter");
    return ds;
}

std::string feature_csv_string(const Dataset& ds) {
    std::string out(kFeatureCsvHeader);
    out.push_back('\n');
    for (const auto& r : ds.records) {
        if (!r.label) throw Error(ErrorCode::invalid_argument, "cannot write unlabeled row: " + r.source_url);
        out += escape_url(r.source_url);
        out.push_back(',');
        out.push_back(label_char(*r.label));
        for (auto c : r.codes) {
            out.push_back(',');
            out += std::to_string(value(c));
        }
        out.push_back('\n');
    }
    return out;
}

Dataset parse_feature_csv(std::string_view text) {
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw Error(ErrorCode::schema_error, "feature CSV is empty (missing header)");

    auto header = lines[0];
    if (header.ends_with('\r')) header.remove_suffix(1);
    if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
    if (header != kFeatureCsvHeader) {
        throw Error(ErrorCode::schema_error, "unexpected header '" + std::string(header) + "', expected '" +
                                                 std::string(kFeatureCsvHeader) + "'");
    }

    Dataset ds;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto line = lines[i];
        if (line.ends_with('\r')) line.remove_suffix(1);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2 + kFeatureCount) {
            bad_row(line_no, "expected " + std::to_string(2 + kFeatureCount) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        FeatureVector v;
        v.source_url = std::string(fields[0]);
        v.label = parse_label(fields[1]);
        if (!v.label) bad_row(line_no, "label '" + std::string(fields[1]) + "' is not T or F");
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            const auto f = fields[2 + k];
            std::optional<Code> c;
            if (f == "-1") c = Code::mismatch;
            if (f == "0") c = Code::absent;
            if (f == "1") c = Code::match;
            if (!c) bad_row(line_no, std::string(kNames[k]) + " value '" + std::string(f) + "' is not -1, 0 or 1");
            v.codes[k] = *c;
        }
        ds.records.push_back(std::move(v));
    }
    return ds;
}

Dataset read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open feature CSV: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    auto ds = parse_feature_csv(buf.str());
    ds.provenance = "read from " + path.string();
    return ds;
}

void write_feature_csv(const Dataset& ds, const std::filesystem::path& path) {
    const auto text = feature_csv_string(ds);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write feature CSV: " + path.string());
    out << text;
    out.close();
    if (!out) throw Error(ErrorCode::io, "failed writing feature CSV: " + path.string());
}

}  // namespace bdi
