#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "ppns/dataset.hpp"
#include "ppns/mf_model.hpp"

namespace ppns {

enum class NegativeLabel { true_negative, false_negative };

// One sampled training triple with its ground-truth label from the test set.
struct SampleLogEntry {
    int epoch = 0;
    Index user = 0;
    Index positive = 0;
    Index negative = 0;
    double info_value = 0.0;
    NegativeLabel label = NegativeLabel::true_negative;
};

// FN iff (user, item) is a held-out test positive.
inline NegativeLabel label_of(const InteractionSet& test, Index user, Index item) {
    return test.contains(user, item) ? NegativeLabel::false_negative : NegativeLabel::true_negative;
}

// Running TN / FN tallies; lets the trainer avoid materializing the whole log.
struct SamplingTally {
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;
    double tn_info = 0.0;
    double fn_info = 0.0;

    void add(NegativeLabel label, double info_value) {
        if (label == NegativeLabel::true_negative) {
            ++true_negatives;
            tn_info += info_value;
        } else {
            ++false_negatives;
            fn_info += info_value;
        }
    }
    std::size_t total() const { return true_negatives + false_negatives; }
    double tnr() const;
    double inf(double tn_gain = 1.0, double fn_penalty = 1.0) const;
};

SamplingTally tally(std::span<const SampleLogEntry> log);

// #TN / (#TN + #FN).
double tnr(std::span<const SampleLogEntry> log);

// Signed mean gradient magnitude: TN contributes +tn_gain * info, FN -fn_penalty * info.
double inf_metric(std::span<const SampleLogEntry> log, double tn_gain = 1.0, double fn_penalty = 1.0);

struct TopKMetrics {
    int k = 0;
    double precision = 0.0;
    double recall = 0.0;
    double ndcg = 0.0;
};

// Binary-gain NDCG of a ranked hit list, with the ideal DCG over min(K, relevant).
double ndcg_at_k(std::span<const std::uint8_t> hits, std::size_t relevant, int k);

/// Precision, recall and NDCG at each K, averaged over users with at least
/// one test positive. Each user's candidates are all items outside their
/// train positives, ranked by descending score with ties going to the lower
/// item id.
template <typename Scalar>
std::vector<TopKMetrics> topk(const MatrixFactorization<Scalar>& model, const SplitDataset& data,
                              std::span<const int> ks) {
    if (ks.empty()) throw std::invalid_argument("topk: no K values requested");
    for (const int k : ks) {
        if (k < 1) throw std::invalid_argument("topk: K must be >= 1");
    }
    const int k_max = *std::max_element(ks.begin(), ks.end());

    std::vector<TopKMetrics> sums(ks.size());
    std::size_t eligible = 0;
    std::vector<Index> candidates;
    std::vector<std::uint8_t> hit_flags;
    for (Index u = 0; u < data.test.num_users(); ++u) {
        const auto test_items = data.test.positives(u);
        if (test_items.empty()) continue;
        ++eligible;

        const auto scores = model.score_vector(u);
        candidates.clear();
        const auto pos = data.train.positives(u);
        auto p = pos.begin();
        for (Index j = 0; j < model.num_items(); ++j) {
            if (p != pos.end() && *p == j) {
                ++p;
                continue;
            }
            candidates.push_back(j);
        }
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(k_max), candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                          [&](Index a, Index b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });

        hit_flags.assign(take, 0);
        for (std::size_t r = 0; r < take; ++r) {
            hit_flags[r] = std::binary_search(test_items.begin(), test_items.end(), candidates[r]);
        }
        for (std::size_t q = 0; q < ks.size(); ++q) {
            const auto depth = std::min<std::size_t>(static_cast<std::size_t>(ks[q]), take);
            const auto ranked = std::span<const std::uint8_t>(hit_flags).first(depth);
            const auto hits = static_cast<double>(std::count(ranked.begin(), ranked.end(), std::uint8_t{1}));
            sums[q].precision += hits / ks[q];
            sums[q].recall += hits / static_cast<double>(test_items.size());
            sums[q].ndcg += ndcg_at_k(ranked, test_items.size(), ks[q]);
        }
    }
    if (eligible == 0) throw std::invalid_argument("topk: no user has a test positive");
    for (std::size_t q = 0; q < ks.size(); ++q) {
        sums[q].k = ks[q];
        sums[q].precision /= static_cast<double>(eligible);
        sums[q].recall /= static_cast<double>(eligible);
        sums[q].ndcg /= static_cast<double>(eligible);
    }
    return sums;
}

template <typename Scalar>
TopKMetrics topk(const MatrixFactorization<Scalar>& model, const SplitDataset& data, int k) {
    const int ks[] = {k};
    return topk(model, data, std::span<const int>(ks)).front();
}

}  // namespace ppns
