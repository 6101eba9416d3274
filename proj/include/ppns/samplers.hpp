#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ppns/dataset.hpp"
#include "ppns/mf_model.hpp"

namespace ppns {

using Rng = std::mt19937_64;

enum class SamplerKind { rns, pns, aobpr, dns, srns, ppns };

std::string_view to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(std::string_view name);

struct SamplerConfig {
    SamplerKind kind = SamplerKind::rns;
    int candidate_size = 20;             // m, for DNS / SRNS / PPNS
    double beta = 1.0;                   // weight of info in the F-beta selection
    std::optional<double> aobpr_lambda;  // unset: N / 100
    double pns_exponent = 0.75;
    int srns_history_len = 5;
    double srns_variance_weight = 1.0;

    void validate() const;
};

struct SampledNegative {
    Index item = -1;
    double score = 0.0;  // x_uj
    double info = 0.0;   // 1 - sigmoid(x_ui - x_uj)
    std::optional<double> unbias;
    double selection_value = 0.0;
};

// Gradient magnitude contributed by a negative scored x_uj against a positive scored x_ui.
inline double info(double x_ui, double x_uj) { return sigmoid(x_uj - x_ui); }

// Share of `neg_scores` that are <= x. Throws on an empty input.
double empirical_cdf(std::span<const double> neg_scores, double x);

// empirical_cdf at every query point; a branch-free count per query, O(n * q).
template <typename Scalar>
std::vector<double> empirical_cdf_batch(std::span<const Scalar> neg_scores, std::span<const Scalar> queries) {
    if (neg_scores.empty()) {
        throw std::invalid_argument("empirical_cdf: no negatives (user interacted with every item)");
    }
    const auto n = static_cast<double>(neg_scores.size());
    std::vector<double> out(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const Scalar x = queries[q];
        std::int64_t below = 0;
        for (const Scalar s : neg_scores) below += static_cast<std::int64_t>(s <= x);
        out[q] = static_cast<double>(below) / n;
    }
    return out;
}

/// Normalized posterior probability that a negative is a true negative,
/// given its rank CDF value F and its false-negative prior pfn:
///
///     [1 - F][1 - pfn] / (1 - F - pfn + 2 F pfn)
///
/// The two corners where the denominator vanishes, (F, pfn) = (1, 0) and
/// (0, 1), also have a zero numerator and return 0.
double unbias(double F, double pfn);

// (1 + beta^2) u i / (u + beta^2 i); 0 when both inputs are 0.
double fbeta_select_value(double unbias_v, double info_v, double beta);

// Up to m distinct items of I_u^-, uniformly without replacement.
std::vector<Index> sample_negative_candidates(const InteractionSet& train, Index user, int m, Rng& rng);

// Uniform draw from I_u^-.
Index draw_uniform_negative(const InteractionSet& train, Index user, Rng& rng);

// Scores of I_u^- gathered from a full score vector.
template <typename Scalar>
std::vector<Scalar> negative_scores(const InteractionSet& train, Index user,
                                    const typename MatrixFactorization<Scalar>::Vector& scores) {
    const auto pos = train.positives(user);
    std::vector<Scalar> out;
    out.reserve(static_cast<std::size_t>(train.num_negatives(user)));
    auto p = pos.begin();
    for (Index j = 0; j < static_cast<Index>(scores.size()); ++j) {
        if (p != pos.end() && *p == j) {
            ++p;
            continue;
        }
        out.push_back(scores[j]);
    }
    return out;
}

namespace detail {

void warn_candidate_clamp(int requested, Index available);

// Strict "better" for argmax with lowest-id tie-break.
inline bool better(double value, Index item, double best_value, Index best_item) {
    return value > best_value || (value == best_value && item < best_item);
}

inline int clamp_candidates(const InteractionSet& train, Index user, int m) {
    const Index available = train.num_negatives(user);
    if (available == 0) {
        throw std::invalid_argument("user " + std::to_string(user) + " has no negatives");
    }
    if (m > available) {
        warn_candidate_clamp(m, available);
        return available;
    }
    return m;
}

}  // namespace detail

template <typename Scalar>
SampledNegative make_negative(const MatrixFactorization<Scalar>& model, Index user, Index positive, Index item) {
    SampledNegative out;
    out.item = item;
    out.score = static_cast<double>(model.score(user, item));
    out.info = info(static_cast<double>(model.score(user, positive)), out.score);
    return out;
}

template <typename Scalar>
SampledNegative rns_sample(Index user, Index positive, const MatrixFactorization<Scalar>& model,
                           const InteractionSet& train, Rng& rng) {
    return make_negative(model, user, positive, draw_uniform_negative(train, user, rng));
}

// Item weights r_j^exponent and a draw routine restricted to I_u^-.
class PopularityTable {
public:
    PopularityTable(const InteractionSet& train, double exponent);

    double weight(Index item) const { return weights_[static_cast<std::size_t>(item)]; }
    // Falls back to uniform when every negative of `user` has zero weight.
    Index draw(const InteractionSet& train, Index user, Rng& rng) const;

private:
    std::vector<double> weights_;
    double total_ = 0.0;
    mutable std::discrete_distribution<Index> dist_;
};

template <typename Scalar>
SampledNegative pns_sample(Index user, Index positive, const MatrixFactorization<Scalar>& model,
                           const InteractionSet& train, const PopularityTable& table, Rng& rng) {
    auto out = make_negative(model, user, positive, table.draw(train, user, rng));
    out.selection_value = table.weight(out.item);
    return out;
}

// Cumulative exp(-(r - 1) / lambda) over ranks r = 1..N.
class RankWeightTable {
public:
    RankWeightTable(Index num_items, double lambda);

    double lambda() const { return lambda_; }
    // A 1-based rank drawn from the weights truncated to the first n ranks.
    Index draw_rank(Index n, Rng& rng) const;

private:
    double lambda_;
    std::vector<double> cumulative_;
};

template <typename Scalar>
SampledNegative aobpr_sample(Index user, Index positive, const MatrixFactorization<Scalar>& model,
                             const InteractionSet& train, const RankWeightTable& table, Rng& rng) {
    const auto scores = model.score_vector(user);
    const auto pos = train.positives(user);
    std::vector<Index> negatives;
    negatives.reserve(static_cast<std::size_t>(train.num_negatives(user)));
    auto p = pos.begin();
    for (Index j = 0; j < model.num_items(); ++j) {
        if (p != pos.end() && *p == j) {
            ++p;
            continue;
        }
        negatives.push_back(j);
    }
    if (negatives.empty()) {
        throw std::invalid_argument("user " + std::to_string(user) + " has no negatives");
    }
    const Index rank = table.draw_rank(static_cast<Index>(negatives.size()), rng);
    const auto nth = negatives.begin() + (rank - 1);
    std::nth_element(negatives.begin(), nth, negatives.end(), [&](Index a, Index b) {
        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    });
    SampledNegative out;
    out.item = *nth;
    out.score = static_cast<double>(scores[out.item]);
    out.info = info(static_cast<double>(scores[positive]), out.score);
    out.selection_value = std::exp(-static_cast<double>(rank - 1) / table.lambda());
    return out;
}

template <typename Scalar>
SampledNegative dns_sample(Index user, Index positive, const MatrixFactorization<Scalar>& model,
                           const InteractionSet& train, const SamplerConfig& cfg, Rng& rng) {
    const int m = detail::clamp_candidates(train, user, cfg.candidate_size);
    const auto candidates = sample_negative_candidates(train, user, m, rng);
    Index best = -1;
    double best_score = 0.0;
    for (const Index l : candidates) {
        const auto s = static_cast<double>(model.score(user, l));
        if (best < 0 || detail::better(s, l, best_score, best)) {
            best = l;
            best_score = s;
        }
    }
    auto out = make_negative(model, user, positive, best);
    out.selection_value = best_score;
    return out;
}

/// Per-(user, item) ring buffers of recently observed scores.
class SrnsState {
public:
    SrnsState(Index num_items, int history_len);

    int history_len() const { return history_len_; }
    // Sample standard deviation of the recorded scores; 0 with fewer than two records.
    double stddev(Index user, Index item) const;
    void record(Index user, Index item, double score);
    std::size_t tracked_pairs() const { return history_.size(); }

private:
    struct Ring {
        std::vector<double> values;
        std::size_t head = 0;
    };
    std::uint64_t key(Index user, Index item) const {
        return static_cast<std::uint64_t>(user) * static_cast<std::uint64_t>(num_items_) +
               static_cast<std::uint64_t>(item);
    }

    Index num_items_;
    int history_len_;
    std::unordered_map<std::uint64_t, Ring> history_;
};

/// Score-plus-variance hard negative selection ("SRNS-lite"): the candidate
/// maximizing x_uj + weight * std(recent x_uj) wins. Candidate scores are
/// recorded after selection.
template <typename Scalar>
SampledNegative srns_sample(Index user, Index positive, const MatrixFactorization<Scalar>& model,
                            const InteractionSet& train, SrnsState& state, const SamplerConfig& cfg, Rng& rng) {
    const int m = detail::clamp_candidates(train, user, cfg.candidate_size);
    const auto candidates = sample_negative_candidates(train, user, m, rng);
    std::vector<double> scores(candidates.size());
    Index best = -1;
    double best_value = 0.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const Index l = candidates[k];
        scores[k] = static_cast<double>(model.score(user, l));
        const double value = scores[k] + cfg.srns_variance_weight * state.stddev(user, l);
        if (best < 0 || detail::better(value, l, best_value, best)) {
            best = l;
            best_value = value;
        }
    }
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        state.record(user, candidates[k], scores[k]);
    }
    auto out = make_negative(model, user, positive, best);
    out.selection_value = best_value;
    return out;
}

/// Posterior-probability negative sampling.
///
/// Draws a candidate set from I_u^-, scores each candidate by the F-beta
/// combination of its unbiasedness and informativeness and returns the
/// maximizer. F is the empirical rank CDF over all of I_u^- (a candidate
/// counts itself) and the false-negative prior is the item's interaction
/// ratio in `train`.
template <typename Scalar>
SampledNegative ppns_sample(Index user, Index positive, const MatrixFactorization<Scalar>& model,
                            const InteractionSet& train, const SamplerConfig& cfg, Rng& rng) {
    const int m = detail::clamp_candidates(train, user, cfg.candidate_size);
    const auto scores = model.score_vector(user);
    const auto candidates = sample_negative_candidates(train, user, m, rng);

    const auto neg = negative_scores<Scalar>(train, user, scores);
    std::vector<Scalar> candidate_scores(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) candidate_scores[k] = scores[candidates[k]];
    const auto cdf = empirical_cdf_batch<Scalar>(neg, candidate_scores);

    const auto x_ui = static_cast<double>(scores[positive]);
    SampledNegative best;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const Index l = candidates[k];
        const double info_v = info(x_ui, static_cast<double>(candidate_scores[k]));
        const double unbias_v = unbias(cdf[k], interaction_ratio(train, l));
        const double value = fbeta_select_value(unbias_v, info_v, cfg.beta);
        if (best.item < 0 || detail::better(value, l, best.selection_value, best.item)) {
            best.item = l;
            best.score = static_cast<double>(candidate_scores[k]);
            best.info = info_v;
            best.unbias = unbias_v;
            best.selection_value = value;
        }
    }
    return best;
}

/// One configured sampling policy plus whatever tables or history it needs.
template <typename Scalar = double>
class NegativeSampler {
public:
    NegativeSampler(const SamplerConfig& cfg, const InteractionSet& train)
        : cfg_(cfg), train_(&train) {
        cfg_.validate();
        switch (cfg_.kind) {
            case SamplerKind::pns:
                popularity_.emplace(train, cfg_.pns_exponent);
                break;
            case SamplerKind::aobpr:
                ranks_.emplace(train.num_items(),
                               cfg_.aobpr_lambda.value_or(static_cast<double>(train.num_items()) / 100.0));
                break;
            case SamplerKind::srns:
                srns_.emplace(train.num_items(), cfg_.srns_history_len);
                break;
            default:
                break;
        }
    }

    const SamplerConfig& config() const { return cfg_; }
    SamplerKind kind() const { return cfg_.kind; }

    SampledNegative sample(Index user, Index positive, const MatrixFactorization<Scalar>& model, Rng& rng) {
        switch (cfg_.kind) {
            case SamplerKind::rns:
                return rns_sample(user, positive, model, *train_, rng);
            case SamplerKind::pns:
                return pns_sample(user, positive, model, *train_, *popularity_, rng);
            case SamplerKind::aobpr:
                return aobpr_sample(user, positive, model, *train_, *ranks_, rng);
            case SamplerKind::dns:
                return dns_sample(user, positive, model, *train_, cfg_, rng);
            case SamplerKind::srns:
                return srns_sample(user, positive, model, *train_, *srns_, cfg_, rng);
            case SamplerKind::ppns:
                return ppns_sample(user, positive, model, *train_, cfg_, rng);
        }
        throw std::logic_error("unknown sampler kind");
    }

private:
    SamplerConfig cfg_;
    const InteractionSet* train_;
    std::optional<PopularityTable> popularity_;
    std::optional<RankWeightTable> ranks_;
    std::optional<SrnsState> srns_;
};

}  // namespace ppns
