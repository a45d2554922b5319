#include "bdi/metrics.hpp"

#include "bdi/error.hpp"

namespace bdi {

void ConfusionCounts::record(Label actual, Label predicted) {
    if (actual == Label::phishing) {
        predicted == Label::phishing ? ++tp : ++fn;
    } else {
        predicted == Label::legitimate ? ++tn : ++fp;
    }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fn += o.fn;
    tn += o.tn;
    fp += o.fp;
    return *this;
}

MetricsReport compute_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw Error(ErrorCode::all_zero_counts, "confusion counts are all zero");

    MetricsReport m;
    m.counts = c;
    const auto ratio = [](std::uint64_t num, std::uint64_t den, bool& undefined) {
        if (den == 0) {
            undefined = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.tpr = ratio(c.tp, c.tp + c.fn, m.tpr_undefined);
    m.fpr = ratio(c.fp, c.fp + c.tn, m.fpr_undefined);
    m.precision = ratio(c.tp, c.tp + c.fp, m.precision_undefined);
    m.recall = m.tpr;
    if (m.precision_undefined || m.tpr_undefined || m.precision + m.recall == 0.0) {
        m.f_measure_undefined = true;
        m.f_measure = 0.0;
    } else {
        m.f_measure = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    return m;
}

}  // namespace bdi
