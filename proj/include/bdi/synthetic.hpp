#pragma once

#include "bdi/encode.hpp"

#include <array>
#include <cstdint>

namespace bdi {

// P(code | class) over the slots {-1, 0, +1}.
using CodeDistribution = std::array<double, 3>;

// Independent per-feature class-conditional codes; labels are Bernoulli.
struct SyntheticSpec {
    std::array<std::array<CodeDistribution, 2>, kFeatureCount> conditional{};  // [feature][label]
    double phishing_fraction = 0.5;

    // Legitimate: P(+1)=0.90, P(0)=0.07, P(-1)=0.03.
    // Phishing:   P(-1)=0.75, P(0)=0.15, P(+1)=0.10. Same for every feature.
    static SyntheticSpec standard();
    // `informative` follows standard(); every other feature draws from one
    // distribution regardless of class.
    static SyntheticSpec single_informative(Feature informative);
    // Every feature ignores the class.
    static SyntheticSpec noise();

    // Throws Error{invalid_argument} unless every distribution sums to 1 and
    // the fraction is in [0, 1].
    void validate() const;
};

Dataset generate_synthetic(const SyntheticSpec& spec, std::size_t rows, std::uint64_t seed);

// Accuracy of the Bayes classifier restricted to `subset`, by enumerating all
// 3^|subset| patterns.
double bayes_optimal_accuracy(const SyntheticSpec& spec, const FeatureSubset& subset);

}  // namespace bdi
