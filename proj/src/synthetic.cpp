#include "bdi/synthetic.hpp"

#include "bdi/error.hpp"
#include "bdi/rng.hpp"

#include <algorithm>
#include <cmath>

namespace bdi {

namespace {

constexpr CodeDistribution kLegitimate{0.03, 0.07, 0.90};
constexpr CodeDistribution kPhishing{0.75, 0.15, 0.10};
constexpr CodeDistribution kUninformative{0.30, 0.20, 0.50};

Code draw(const CodeDistribution& d, Rng& rng) {
    const double u = rng.unit();
    if (u < d[0]) return Code::mismatch;
    if (u < d[0] + d[1]) return Code::absent;
    return Code::match;
}

}  // namespace

SyntheticSpec SyntheticSpec::standard() {
    SyntheticSpec s;
    for (auto& per_label : s.conditional) per_label = {kLegitimate, kPhishing};
    return s;
}

SyntheticSpec SyntheticSpec::single_informative(Feature informative) {
    SyntheticSpec s = noise();
    s.conditional[index_of(informative)] = {kLegitimate, kPhishing};
    return s;
}

SyntheticSpec SyntheticSpec::noise() {
    SyntheticSpec s;
    for (auto& per_label : s.conditional) per_label = {kUninformative, kUninformative};
    return s;
}

void SyntheticSpec::validate() const {
    if (!(phishing_fraction >= 0.0 && phishing_fraction <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "phishing_fraction must be in [0, 1]");
    }
    for (const auto& per_label : conditional) {
        for (const auto& d : per_label) {
            if (std::any_of(d.begin(), d.end(), [](double p) { return !(p >= 0.0); }) ||
                std::abs(d[0] + d[1] + d[2] - 1.0) > 1e-9) {
                throw Error(ErrorCode::invalid_argument, "code distribution must be non-negative and sum to 1");
            }
        }
    }
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::size_t rows, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    Dataset ds;
    ds.records.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        FeatureVector v;
        const Label l = rng.unit() < spec.phishing_fraction ? Label::phishing : Label::legitimate;
        v.label = l;
        for (auto f : kAllFeatures) v[f] = draw(spec.conditional[index_of(f)][static_cast<std::size_t>(l)], rng);
        v.source_url = "https://row" + std::to_string(i) + ".synthetic.invalid/";
        ds.records.push_back(std::move(v));
    }
    ds.provenance = "synthetic: " + std::to_string(rows) + " rows, seed " + std::to_string(seed);
    return ds;
}

double bayes_optimal_accuracy(const SyntheticSpec& spec, const FeatureSubset& subset) {
    spec.validate();
    if (subset.empty()) return std::max(spec.phishing_fraction, 1.0 - spec.phishing_fraction);
    std::size_t patterns = 1;
    for (std::size_t i = 0; i < subset.size(); ++i) patterns *= 3;
    double total = 0.0;
    for (std::size_t key = 0; key < patterns; ++key) {
        std::array<double, 2> joint{1.0 - spec.phishing_fraction, spec.phishing_fraction};
        std::size_t rest = key;
        for (auto f : subset) {
            const std::size_t s = rest % 3;
            rest /= 3;
            for (std::size_t l = 0; l < 2; ++l) joint[l] *= spec.conditional[index_of(f)][l][s];
        }
        total += std::max(joint[0], joint[1]);
    }
    return total;
}

}  // namespace bdi
