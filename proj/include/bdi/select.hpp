#pragma once

#include "bdi/encode.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bdi {

enum class Evaluator { correlation, info_gain, gain_ratio, relieff };

std::string_view evaluator_name(Evaluator e);

struct FeatureRanking {
    Evaluator evaluator = Evaluator::correlation;
    std::array<double, kFeatureCount> scores{};  // indexed by Feature
    std::vector<Feature> order;                   // descending score, ties by name
    std::vector<std::string> notes;

    double score(Feature f) const { return scores[index_of(f)]; }
};

// Builds `order` from `scores`.
FeatureRanking make_ranking(Evaluator e, const std::array<double, kFeatureCount>& scores);

// Per-feature primitives. Columns are read from every record; labels must be
// present on all records.
double entropy_bits(std::span<const double> counts);
double class_entropy(const Dataset& ds);
double information_gain(const Dataset& ds, Feature f);
double split_information(const Dataset& ds, Feature f);
double gain_ratio(const Dataset& ds, Feature f);
// |Pearson r| between the code (-1/0/1) and the class (F=0, T=1); nullopt
// when either column has zero variance.
std::optional<double> abs_correlation(const Dataset& ds, Feature f);

FeatureRanking correlation_scores(const Dataset& ds);
FeatureRanking info_gain_scores(const Dataset& ds);
FeatureRanking gain_ratio_scores(const Dataset& ds);

struct ReliefOptions {
    std::size_t neighbors_k = 10;
    std::optional<std::size_t> sample_m;  // nullopt: every instance, in order
    std::uint64_t seed = 42;
};

// ReliefF over the Hamming distance on all five codes. Neighbour ties are
// broken by record index; k is clamped per class to what is available.
// Throws Error{one_class_dataset} unless both classes are present.
FeatureRanking relieff_scores(const Dataset& ds, const ReliefOptions& options = {});

// Instances visited by ReliefF for the given options, in visiting order.
std::vector<std::size_t> relieff_sample(std::size_t n, const ReliefOptions& options);

std::vector<FeatureRanking> rank_report(const Dataset& ds, const ReliefOptions& options = {});

std::string ranking_json(const std::vector<FeatureRanking>& rankings);
std::string ranking_table(const std::vector<FeatureRanking>& rankings);

}  // namespace bdi
