#include "ppns/evaluation.hpp"

namespace ppns {

double SamplingTally::tnr() const {
    if (total() == 0) throw std::invalid_argument("tnr: empty sample log");
    return static_cast<double>(true_negatives) / static_cast<double>(total());
}

double SamplingTally::inf(double tn_gain, double fn_penalty) const {
    if (total() == 0) throw std::invalid_argument("inf: empty sample log");
    return (tn_gain * tn_info - fn_penalty * fn_info) / static_cast<double>(total());
}

SamplingTally tally(std::span<const SampleLogEntry> log) {
    SamplingTally t;
    for (const auto& e : log) t.add(e.label, e.info_value);
    return t;
}

double tnr(std::span<const SampleLogEntry> log) { return tally(log).tnr(); }

double inf_metric(std::span<const SampleLogEntry> log, double tn_gain, double fn_penalty) {
    return tally(log).inf(tn_gain, fn_penalty);
}

double ndcg_at_k(std::span<const std::uint8_t> hits, std::size_t relevant, int k) {
    if (relevant == 0) return 0.0;
    double dcg = 0.0;
    const auto depth = std::min<std::size_t>(hits.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < depth; ++r) {
        if (hits[r]) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
    double idcg = 0.0;
    const auto ideal = std::min<std::size_t>(relevant, static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    return dcg / idcg;
}

}  // namespace ppns
