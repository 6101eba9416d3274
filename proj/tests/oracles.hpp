#pragma once

// Brute-force reference implementations used only by tests. They recompute
// every quantity from its definition and share no code path with the
// library beyond the model accessors.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "ppns/dataset.hpp"
#include "ppns/evaluation.hpp"
#include "ppns/mf_model.hpp"

namespace oracle {

using ppns::Index;

inline double naive_dot(const ppns::MatrixFactorization<double>& model, Index u, Index j) {
    double acc = 0.0;
    for (Index k = 0; k < model.dim(); ++k) acc += model.user_embeddings()(u, k) * model.item_embeddings()(j, k);
    return acc;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double count_cdf(const std::vector<double>& scores, double x) {
    std::size_t c = 0;
    for (const double s : scores) {
        if (s <= x) ++c;
    }
    return static_cast<double>(c) / static_cast<double>(scores.size());
}

inline std::vector<Index> negatives_of(const ppns::InteractionSet& train, Index u) {
    std::vector<Index> out;
    for (Index j = 0; j < train.num_items(); ++j) {
        bool positive = false;
        for (const auto& p : train.pairs()) {
            if (p.user == u && p.item == j) positive = true;
        }
        if (!positive) out.push_back(j);
    }
    return out;
}

inline double posterior_tn(double F, double pfn) {
    const double tn = (1.0 - F) * (1.0 - pfn);
    const double fn = F * pfn;
    if (tn + fn == 0.0) return 0.0;
    return tn / (tn + fn);
}

// Exhaustive argmax of the F-beta rule over every negative of u.
inline Index ppns_argmax(const ppns::MatrixFactorization<double>& model, const ppns::InteractionSet& train, Index u,
                         Index i, double beta) {
    const auto neg = negatives_of(train, u);
    std::vector<double> scores;
    for (const Index l : neg) scores.push_back(naive_dot(model, u, l));
    const double x_ui = naive_dot(model, u, i);
    Index best = -1;
    double best_value = -1.0;
    for (std::size_t k = 0; k < neg.size(); ++k) {
        const double inf = 1.0 - logistic(x_ui - scores[k]);
        const double pfn = static_cast<double>(train.item_user_count(neg[k])) / train.num_users();
        const double ub = posterior_tn(count_cdf(scores, scores[k]), pfn);
        const double denom = ub + beta * beta * inf;
        const double value = denom == 0.0 ? 0.0 : (1.0 + beta * beta) * ub * inf / denom;
        if (value > best_value) {  // strict: the earlier (lower) id keeps ties
            best_value = value;
            best = neg[k];
        }
    }
    return best;
}

inline Index dns_argmax(const ppns::MatrixFactorization<double>& model, const ppns::InteractionSet& train, Index u) {
    Index best = -1;
    double best_score = 0.0;
    for (const Index l : negatives_of(train, u)) {
        const double s = naive_dot(model, u, l);
        if (best < 0 || s > best_score) {
            best = l;
            best_score = s;
        }
    }
    return best;
}

// Full stable sort of every non-train item; no heaps, no partial sorts.
inline std::vector<ppns::TopKMetrics> naive_topk(const ppns::MatrixFactorization<double>& model,
                                                 const ppns::SplitDataset& data, const std::vector<int>& ks) {
    std::vector<ppns::TopKMetrics> sums(ks.size());
    int users = 0;
    for (Index u = 0; u < data.test.num_users(); ++u) {
        std::vector<Index> test_items;
        for (const auto& p : data.test.pairs()) {
            if (p.user == u) test_items.push_back(p.item);
        }
        if (test_items.empty()) continue;
        ++users;
        std::vector<std::pair<double, Index>> ranked;
        for (Index j = 0; j < model.num_items(); ++j) {
            if (!data.train.contains(u, j)) ranked.push_back({-naive_dot(model, u, j), j});
        }
        std::stable_sort(ranked.begin(), ranked.end());
        for (std::size_t q = 0; q < ks.size(); ++q) {
            const int k = ks[q];
            double hits = 0.0;
            double dcg = 0.0;
            for (int r = 0; r < k && r < static_cast<int>(ranked.size()); ++r) {
                if (std::find(test_items.begin(), test_items.end(), ranked[r].second) != test_items.end()) {
                    hits += 1.0;
                    dcg += 1.0 / std::log2(r + 2.0);
                }
            }
            double idcg = 0.0;
            for (int r = 0; r < std::min<int>(k, static_cast<int>(test_items.size())); ++r) idcg += 1.0 / std::log2(r + 2.0);
            sums[q].k = k;
            sums[q].precision += hits / k;
            sums[q].recall += hits / static_cast<double>(test_items.size());
            sums[q].ndcg += dcg / idcg;
        }
    }
    for (auto& s : sums) {
        s.precision /= users;
        s.recall /= users;
        s.ndcg /= users;
    }
    return sums;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ppns_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace oracle
