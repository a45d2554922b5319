#pragma once

#include "bdi/encode.hpp"

#include <cstdint>

namespace bdi {

// Phishing (T) is the positive class.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;

    std::uint64_t total() const { return tp + fn + tn + fp; }
    void record(Label actual, Label predicted);
    ConfusionCounts& operator+=(const ConfusionCounts& o);

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
    double tpr = 0;
    double fpr = 0;
    double precision = 0;
    double recall = 0;
    double f_measure = 0;
    double accuracy = 0;
    // Set when the metric's denominator was zero; the value is then 0.
    bool tpr_undefined = false;
    bool fpr_undefined = false;
    bool precision_undefined = false;
    bool f_measure_undefined = false;

    ConfusionCounts counts;
    double train_time = 0;    // seconds
    double predict_time = 0;  // seconds
};

// TPR = TP/(TP+FN), FPR = FP/(FP+TN), Precision = TP/(TP+FP),
// Recall = TPR, F = 2PR/(P+R), Accuracy = (TP+TN)/total.
// Throws Error{all_zero_counts} when total is 0.
MetricsReport compute_metrics(const ConfusionCounts& counts);

}  // namespace bdi
