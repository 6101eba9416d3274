#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ppns/dataset.hpp"

namespace ppns {

// Raised when an update produces a non-finite embedding entry.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Branches on the sign so exp() never overflows.
template <typename Scalar>
Scalar sigmoid(Scalar x) {
    if (x >= Scalar(0)) {
        return Scalar(1) / (Scalar(1) + std::exp(-x));
    }
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
}

// ln(sigmoid(x)) without cancellation for large |x|.
template <typename Scalar>
Scalar log_sigmoid(Scalar x) {
    if (x >= Scalar(0)) {
        return -std::log1p(std::exp(-x));
    }
    return x - std::log1p(std::exp(x));
}

struct TrainConfig {
    double learning_rate = 0.01;
    double regularization = 0.01;
    int epochs = 100;
    int batch_size = 1;
    double embed_init_scale = 0.01;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
        if (!(regularization >= 0.0)) throw std::invalid_argument("regularization must be >= 0");
        if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (!(embed_init_scale >= 0.0)) throw std::invalid_argument("embed_init_scale must be >= 0");
    }
};

struct Triple {
    Index user;
    Index positive;
    Index negative;
};

/// Dot-product matrix factorization scorer.
///
/// Embeddings are stored row-major, one row per user or item, so a single
/// embedding is a contiguous row.
template <typename Scalar = double>
class MatrixFactorization {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

    MatrixFactorization() = default;
    MatrixFactorization(Index num_users, Index num_items, Index dim)
        : users_(Matrix::Zero(num_users, dim)), items_(Matrix::Zero(num_items, dim)) {
        if (num_users < 1 || num_items < 1 || dim < 1) {
            throw std::invalid_argument("MatrixFactorization: M, N and d must all be >= 1");
        }
    }

    Index num_users() const { return static_cast<Index>(users_.rows()); }
    Index num_items() const { return static_cast<Index>(items_.rows()); }
    Index dim() const { return static_cast<Index>(users_.cols()); }

    const Matrix& user_embeddings() const { return users_; }
    const Matrix& item_embeddings() const { return items_; }
    Matrix& user_embeddings() { return users_; }
    Matrix& item_embeddings() { return items_; }

    Scalar score(Index user, Index item) const {
        check_user(user);
        check_item(item);
        return users_.row(user).dot(items_.row(item));
    }

    // Element j equals score(user, j) bit for bit: both go through the same row dot product.
    Vector score_vector(Index user) const {
        check_user(user);
        Vector out(items_.rows());
        const auto w = users_.row(user);
        for (Eigen::Index j = 0; j < items_.rows(); ++j) {
            out[j] = w.dot(items_.row(j));
        }
        return out;
    }

    bool all_finite() const { return users_.allFinite() && items_.allFinite(); }

    void check_user(Index user) const {
        if (user < 0 || user >= num_users()) {
            throw std::out_of_range("user id " + std::to_string(user) + " out of range");
        }
    }
    void check_item(Index item) const {
        if (item < 0 || item >= num_items()) {
            throw std::out_of_range("item id " + std::to_string(item) + " out of range");
        }
    }

private:
    Matrix users_;
    Matrix items_;
};

// Zero-mean uniform entries on [-scale, scale].
template <typename Scalar = double>
MatrixFactorization<Scalar> init_model(Index num_users, Index num_items, Index dim, double scale, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("init_model: embedding dimension must be >= 1");
    if (!(scale >= 0.0)) throw std::invalid_argument("init_model: scale must be >= 0");
    MatrixFactorization<Scalar> model(num_users, num_items, dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto fill = [&](auto& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                m(r, c) = static_cast<Scalar>(scale * unit(rng));
            }
        }
    };
    fill(model.user_embeddings());
    fill(model.item_embeddings());
    return model;
}

template <typename Scalar>
struct BprGradient {
    using RowVector = typename MatrixFactorization<Scalar>::RowVector;
    RowVector user;
    RowVector positive;
    RowVector negative;
    Scalar error;  // 1 - sigmoid(x_ui - x_uj)
};

// Gradient (ascent direction) of ln sigmoid(x_ui - x_uj) - lambda/2 (|w_u|^2 + |h_i|^2 + |h_j|^2).
template <typename Scalar>
BprGradient<Scalar> bpr_gradient(const MatrixFactorization<Scalar>& model, const Triple& t, Scalar lambda) {
    const auto w = model.user_embeddings().row(t.user);
    const auto hi = model.item_embeddings().row(t.positive);
    const auto hj = model.item_embeddings().row(t.negative);
    const Scalar diff = model.score(t.user, t.positive) - model.score(t.user, t.negative);
    const Scalar e = Scalar(1) - sigmoid(diff);
    BprGradient<Scalar> g;
    g.user = e * (hi - hj) - lambda * w;
    g.positive = e * w - lambda * hi;
    g.negative = -e * w - lambda * hj;
    g.error = e;
    return g;
}

// The regularized pairwise objective for a single triple.
template <typename Scalar>
Scalar bpr_objective(const MatrixFactorization<Scalar>& model, const Triple& t, Scalar lambda) {
    const Scalar diff = model.score(t.user, t.positive) - model.score(t.user, t.negative);
    const Scalar reg = model.user_embeddings().row(t.user).squaredNorm() +
                       model.item_embeddings().row(t.positive).squaredNorm() +
                       model.item_embeddings().row(t.negative).squaredNorm();
    return log_sigmoid(diff) - Scalar(0.5) * lambda * reg;
}

/// One stochastic ascent step on ln sigmoid(x_ui - x_uj) with L2 weight decay
/// on the three touched rows. All gradients use pre-update values.
template <typename Scalar>
void sgd_step(MatrixFactorization<Scalar>& model, const Triple& t, const TrainConfig& cfg) {
    model.check_user(t.user);
    model.check_item(t.positive);
    model.check_item(t.negative);
    const auto alpha = static_cast<Scalar>(cfg.learning_rate);
    const auto g = bpr_gradient(model, t, static_cast<Scalar>(cfg.regularization));
    auto w = model.user_embeddings().row(t.user);
    auto hi = model.item_embeddings().row(t.positive);
    auto hj = model.item_embeddings().row(t.negative);
    w += alpha * g.user;
    hi += alpha * g.positive;
    hj += alpha * g.negative;
    if (!w.allFinite() || !hi.allFinite() || !hj.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite embedding after update on triple (" << t.user << ", " << t.positive << ", " << t.negative
            << ")";
        throw DivergenceError(msg.str());
    }
}

}  // namespace ppns
