#include "ppns/samplers.hpp"

#include <atomic>

namespace ppns {

std::string_view to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::rns: return "rns";
        case SamplerKind::pns: return "pns";
        case SamplerKind::aobpr: return "aobpr";
        case SamplerKind::dns: return "dns";
        case SamplerKind::srns: return "srns";
        case SamplerKind::ppns: return "ppns";
    }
    return "unknown";
}

SamplerKind parse_sampler_kind(std::string_view name) {
    for (const auto kind : {SamplerKind::rns, SamplerKind::pns, SamplerKind::aobpr, SamplerKind::dns,
                            SamplerKind::srns, SamplerKind::ppns}) {
        if (name == to_string(kind)) return kind;
    }
    throw std::invalid_argument("unknown sampler '" + std::string(name) +
                                "' (expected rns, pns, aobpr, dns, srns or ppns)");
}

void SamplerConfig::validate() const {
    if (candidate_size < 1) throw std::invalid_argument("candidate size m must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (aobpr_lambda && !(*aobpr_lambda > 0.0)) throw std::invalid_argument("aobpr_lambda must be > 0");
    if (!(pns_exponent >= 0.0)) throw std::invalid_argument("pns_exponent must be >= 0");
    if (srns_history_len < 1) throw std::invalid_argument("srns_history_len must be >= 1");
}

double empirical_cdf(std::span<const double> neg_scores, double x) {
    if (neg_scores.empty()) {
        throw std::invalid_argument("empirical_cdf: no negatives (user interacted with every item)");
    }
    const auto below = std::count_if(neg_scores.begin(), neg_scores.end(), [x](double s) { return s <= x; });
    return static_cast<double>(below) / static_cast<double>(neg_scores.size());
}

double unbias(double F, double pfn) {
    if (!(F >= 0.0 && F <= 1.0) || !(pfn >= 0.0 && pfn <= 1.0)) {
        throw std::invalid_argument("unbias: F and pfn must lie in [0, 1]");
    }
    const double tn = (1.0 - F) * (1.0 - pfn);
    // Equals 1 - F - pfn + 2 F pfn.
    const double denom = tn + F * pfn;
    if (denom < 1e-12) return 0.0;
    return tn / denom;
}

double fbeta_select_value(double unbias_v, double info_v, double beta) {
    const double b2 = beta * beta;
    const double denom = unbias_v + b2 * info_v;
    if (denom <= 0.0) return 0.0;
    return (1.0 + b2) * unbias_v * info_v / denom;
}

Index draw_uniform_negative(const InteractionSet& train, Index user, Rng& rng) {
    if (train.num_negatives(user) == 0) {
        throw std::invalid_argument("user " + std::to_string(user) + " has no negatives");
    }
    std::uniform_int_distribution<Index> pick(0, train.num_items() - 1);
    while (true) {
        const Index j = pick(rng);
        if (!train.contains(user, j)) return j;
    }
}

std::vector<Index> sample_negative_candidates(const InteractionSet& train, Index user, int m, Rng& rng) {
    const Index available = train.num_negatives(user);
    if (available == 0) {
        throw std::invalid_argument("user " + std::to_string(user) + " has no negatives");
    }
    const auto count = static_cast<std::size_t>(std::min<Index>(m, available));
    std::vector<Index> out;
    out.reserve(count);

    if (4 * count <= static_cast<std::size_t>(available)) {
        // Sparse regime: rejection keeps this O(m) per draw in expectation.
        std::uniform_int_distribution<Index> pick(0, train.num_items() - 1);
        while (out.size() < count) {
            const Index j = pick(rng);
            if (train.contains(user, j)) continue;
            if (std::find(out.begin(), out.end(), j) != out.end()) continue;
            out.push_back(j);
        }
        return out;
    }

    std::vector<Index> pool;
    pool.reserve(static_cast<std::size_t>(available));
    const auto pos = train.positives(user);
    auto p = pos.begin();
    for (Index j = 0; j < train.num_items(); ++j) {
        if (p != pos.end() && *p == j) {
            ++p;
            continue;
        }
        pool.push_back(j);
    }
    for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
        std::swap(pool[k], pool[pick(rng)]);
        out.push_back(pool[k]);
    }
    return out;
}

namespace detail {

void warn_candidate_clamp(int requested, Index available) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
        std::cerr << "warning: candidate size m=" << requested << " exceeds |I_u^-|=" << available
                  << "; clamping (reported once)\n";
    }
}

}  // namespace detail

PopularityTable::PopularityTable(const InteractionSet& train, double exponent) {
    weights_.resize(static_cast<std::size_t>(train.num_items()));
    for (Index j = 0; j < train.num_items(); ++j) {
        const double r = interaction_ratio(train, j);
        weights_[static_cast<std::size_t>(j)] = r > 0.0 ? std::pow(r, exponent) : 0.0;
    }
    total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (total_ > 0.0) {
        dist_ = std::discrete_distribution<Index>(weights_.begin(), weights_.end());
    }
}

Index PopularityTable::draw(const InteractionSet& train, Index user, Rng& rng) const {
    double positive_mass = 0.0;
    for (const Index i : train.positives(user)) positive_mass += weights_[static_cast<std::size_t>(i)];
    // Relative slack absorbs rounding in the two sums.
    if (total_ <= 0.0 || total_ - positive_mass <= 1e-12 * total_) {
        return draw_uniform_negative(train, user, rng);
    }
    while (true) {
        const Index j = dist_(rng);
        if (!train.contains(user, j)) return j;
    }
}

RankWeightTable::RankWeightTable(Index num_items, double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("AOBPR lambda must be > 0");
    cumulative_.resize(static_cast<std::size_t>(num_items));
    double running = 0.0;
    for (Index r = 0; r < num_items; ++r) {
        running += std::exp(-static_cast<double>(r) / lambda);
        cumulative_[static_cast<std::size_t>(r)] = running;
    }
}

Index RankWeightTable::draw_rank(Index n, Rng& rng) const {
    if (n < 1 || static_cast<std::size_t>(n) > cumulative_.size()) {
        throw std::out_of_range("RankWeightTable: rank range out of bounds");
    }
    std::uniform_real_distribution<double> unit(0.0, cumulative_[static_cast<std::size_t>(n) - 1]);
    const double u = unit(rng);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.begin() + n, u);
    return static_cast<Index>(std::min<std::ptrdiff_t>(it - cumulative_.begin(), n - 1)) + 1;
}

SrnsState::SrnsState(Index num_items, int history_len) : num_items_(num_items), history_len_(history_len) {
    if (history_len < 1) throw std::invalid_argument("srns_history_len must be >= 1");
}

double SrnsState::stddev(Index user, Index item) const {
    const auto it = history_.find(key(user, item));
    if (it == history_.end() || it->second.values.size() < 2) return 0.0;
    const auto& v = it->second.values;
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0));
}

void SrnsState::record(Index user, Index item, double score) {
    auto& ring = history_[key(user, item)];
    if (ring.values.size() < static_cast<std::size_t>(history_len_)) {
        ring.values.push_back(score);
        return;
    }
    ring.values[ring.head] = score;
    ring.head = (ring.head + 1) % ring.values.size();
}

}  // namespace ppns
