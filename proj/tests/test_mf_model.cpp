#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ppns/mf_model.hpp"

using namespace ppns;

TEST_CASE("init_model: shape, determinism, degenerate scale") {
    const auto m = init_model<double>(2, 3, 4, 0.01, 5);
    CHECK(m.user_embeddings().rows() == 2);
    CHECK(m.user_embeddings().cols() == 4);
    CHECK(m.item_embeddings().rows() == 3);
    CHECK(m.item_embeddings().cols() == 4);
    CHECK(m.user_embeddings().cwiseAbs().maxCoeff() <= 0.01);

    const auto again = init_model<double>(2, 3, 4, 0.01, 5);
    CHECK(m.user_embeddings() == again.user_embeddings());
    CHECK(m.item_embeddings() == again.item_embeddings());

    const auto zero = init_model<double>(2, 3, 4, 0.0, 5);
    CHECK(zero.user_embeddings().isZero(0.0));
    CHECK(zero.score_vector(1).isZero(0.0));

    CHECK_THROWS_AS(init_model<double>(2, 3, 0, 0.01, 5), std::invalid_argument);
}

TEST_CASE("init_model: float scalar") {
    const auto m = init_model<float>(3, 3, 2, 0.1, 1);
    CHECK(m.all_finite());
    CHECK(m.score_vector(0).size() == 3);
}

TEST_CASE("score") {
    MatrixFactorization<double> m(1, 3, 2);
    m.user_embeddings() << 1, 2;
    m.item_embeddings() << 3, 4, 0, 1, 0, 0;
    CHECK(m.score(0, 0) == 11.0);
    CHECK(m.score(0, 2) == 0.0);

    MatrixFactorization<double> ortho(1, 1, 2);
    ortho.user_embeddings() << 1, 0;
    ortho.item_embeddings() << 0, 1;
    CHECK(ortho.score(0, 0) == 0.0);

    CHECK_THROWS_AS(m.score(1, 0), std::out_of_range);
    CHECK_THROWS_AS(m.score(0, 3), std::out_of_range);
    CHECK_THROWS_AS(m.score(-1, 0), std::out_of_range);
}

TEST_CASE("score_vector equals element-wise score exactly") {
    for (const Index dim : {1, 3, 8, 32, 33}) {
        const auto m = init_model<double>(4, 57, dim, 0.5, static_cast<std::uint64_t>(dim));
        for (Index u = 0; u < 4; ++u) {
            const auto v = m.score_vector(u);
            REQUIRE(v.size() == 57);
            for (Index j = 0; j < 57; ++j) CHECK(v[j] == m.score(u, j));
        }
    }
    const auto single = init_model<double>(1, 1, 5, 0.5, 3);
    CHECK(single.score_vector(0)[0] == single.score(0, 0));
}

TEST_CASE("sigmoid") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786).epsilon(1e-10));
    for (const double x : {-500.0, -35.0, -1.5, -1e-8, 0.0, 2e-5, 3.0, 40.0, 500.0}) {
        CHECK(std::isfinite(sigmoid(x)));
        CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) < 1e-12);
    }
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("sgd_step: zero model is a fixed point without regularization") {
    auto m = init_model<double>(1, 2, 3, 0.0, 0);
    TrainConfig cfg;
    cfg.regularization = 0.0;
    sgd_step(m, Triple{0, 0, 1}, cfg);
    CHECK(m.user_embeddings().isZero(0.0));
    CHECK(m.item_embeddings().isZero(0.0));
}

TEST_CASE("sgd_step: saturated pair is almost pure weight decay") {
    MatrixFactorization<double> m(1, 2, 1);
    m.user_embeddings() << 10.0;
    m.item_embeddings() << 10.0, -10.0;  // x_ui - x_uj = 200
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.regularization = 0.5;
    sgd_step(m, Triple{0, 0, 1}, cfg);
    CHECK(m.user_embeddings()(0, 0) == doctest::Approx(10.0 * (1 - 0.05)).epsilon(1e-12));
    CHECK(m.item_embeddings()(0, 0) == doctest::Approx(10.0 * (1 - 0.05)).epsilon(1e-12));
    CHECK(m.item_embeddings()(1, 0) == doctest::Approx(-10.0 * (1 - 0.05)).epsilon(1e-12));
}

TEST_CASE("sgd_step: update rule from pre-update values") {
    MatrixFactorization<double> m(1, 2, 2);
    m.user_embeddings() << 0.5, -0.2;
    m.item_embeddings() << 0.1, 0.3, -0.4, 0.2;
    const Eigen::RowVector2d w = m.user_embeddings().row(0);
    const Eigen::RowVector2d hi = m.item_embeddings().row(0);
    const Eigen::RowVector2d hj = m.item_embeddings().row(1);
    const double e = 1.0 - oracle::logistic(w.dot(hi) - w.dot(hj));
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.regularization = 0.1;
    sgd_step(m, Triple{0, 0, 1}, cfg);
    const Eigen::RowVector2d w_new = w + 0.05 * (e * (hi - hj) - 0.1 * w);
    const Eigen::RowVector2d hi_new = hi + 0.05 * (e * w - 0.1 * hi);
    const Eigen::RowVector2d hj_new = hj + 0.05 * (-e * w - 0.1 * hj);
    CHECK((m.user_embeddings().row(0) - w_new).norm() < 1e-15);
    CHECK((m.item_embeddings().row(0) - hi_new).norm() < 1e-15);
    CHECK((m.item_embeddings().row(1) - hj_new).norm() < 1e-15);
}

TEST_CASE("sgd_step: small steps increase the pairwise log-likelihood") {
    std::mt19937_64 rng(11);
    TrainConfig cfg;
    cfg.learning_rate = 1e-4;
    cfg.regularization = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto m = init_model<double>(3, 5, 4, 0.3, rng());
        const Triple t{static_cast<Index>(trial % 3), 1, 4};
        double before = log_sigmoid(m.score(t.user, t.positive) - m.score(t.user, t.negative));
        for (int step = 0; step < 50; ++step) {
            sgd_step(m, t, cfg);
            const double after = log_sigmoid(m.score(t.user, t.positive) - m.score(t.user, t.negative));
            CHECK(after >= before);
            before = after;
        }
    }
}

TEST_CASE("sgd_step: non-finite result raises DivergenceError") {
    MatrixFactorization<double> m(1, 2, 1);
    m.user_embeddings() << 1e300;
    m.item_embeddings() << 1e300, -1e300;
    TrainConfig cfg;
    cfg.learning_rate = 1e10;
    cfg.regularization = 1.0;
    CHECK_THROWS_AS(sgd_step(m, Triple{0, 0, 1}, cfg), DivergenceError);
}

TEST_CASE("bpr_gradient matches central finite differences") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> lam(0.0, 0.1);
    for (int trial = 0; trial < 25; ++trial) {
        auto m = init_model<double>(3, 6, 8, 0.5, rng());
        const Triple t{static_cast<Index>(trial % 3), static_cast<Index>(trial % 6), static_cast<Index>((trial + 2) % 6)};
        const double lambda = lam(rng);
        const auto g = bpr_gradient(m, t, lambda);
        const auto objective = [&] {
            const double d = oracle::naive_dot(m, t.user, t.positive) - oracle::naive_dot(m, t.user, t.negative);
            return std::log(oracle::logistic(d)) -
                   0.5 * lambda *
                       (m.user_embeddings().row(t.user).squaredNorm() + m.item_embeddings().row(t.positive).squaredNorm() +
                        m.item_embeddings().row(t.negative).squaredNorm());
        };
        const auto check = [&](double& coord, double analytic) {
            const double h = 1e-5;
            const double saved = coord;
            coord = saved + h;
            const double up = objective();
            coord = saved - h;
            const double down = objective();
            coord = saved;
            const double numeric = (up - down) / (2 * h);
            const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
            CHECK(std::abs(numeric - analytic) / scale < 1e-4);
        };
        for (Index k = 0; k < 8; ++k) {
            check(m.user_embeddings()(t.user, k), g.user[k]);
            check(m.item_embeddings()(t.positive, k), g.positive[k]);
            check(m.item_embeddings()(t.negative, k), g.negative[k]);
        }
    }
}
