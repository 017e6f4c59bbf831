#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lobgen/chiarella.hpp"

using namespace lobgen;

TEST_CASE("fundamental demand is kappa times the value gap") {
    ChiarellaParams p;
    p.kappa = 2.0;
    CHECK(fundamental_demand(p, 101.0, 100.0) == doctest::Approx(2.0));
    CHECK(fundamental_demand(p, 100.0, 100.0) == 0.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(50.0, 150.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng), price = u(rng);
        const double d = fundamental_demand(p, v, price);
        if (v > price) CHECK(d > 0.0);
        if (v < price) CHECK(d < 0.0);
    }
}

TEST_CASE("momentum update") {
    ChiarellaParams p;
    SUBCASE("alpha 0.5, zero signal, price jump of 2") {
        p.alpha = 0.5;
        MomentumState s{0.0, 100.0};
        auto next = update_momentum(s, p, 102.0);
        CHECK(next.m == doctest::Approx(1.0));
        CHECK(next.last_price == 102.0);
    }
    SUBCASE("constant prices decay the signal geometrically") {
        p.alpha = 0.25;
        MomentumState s{8.0, 100.0};
        for (int i = 1; i <= 4; ++i) {
            s = update_momentum(s, p, 100.0);
            CHECK(s.m == doctest::Approx(8.0 * std::pow(0.75, i)));
        }
    }
    SUBCASE("alpha 1 keeps only the last price change") {
        p.alpha = 1.0;
        MomentumState s{123.0, 100.0};
        auto next = update_momentum(s, p, 97.5);
        CHECK(next.m == doctest::Approx(-2.5));
    }
}

TEST_CASE("momentum signal stays within the largest observed price change") {
    ChiarellaParams p;
    p.alpha = 0.3;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> step(0.0, 2.0);
    MomentumState s{0.0, 100.0};
    double price = 100.0, max_abs_change = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const double dp = step(rng);
        price += dp;
        max_abs_change = std::max(max_abs_change, std::abs(dp));
        s = update_momentum(s, p, price);
        REQUIRE(std::abs(s.m) <= max_abs_change + 1e-12);
    }
}

TEST_CASE("momentum demand saturates at beta") {
    ChiarellaParams p;
    p.beta = 3.0;
    p.gamma = 2.0;
    CHECK(momentum_demand(p, 0.0) == 0.0);
    CHECK(std::abs(momentum_demand(p, 10.0) - p.beta) < 1e-6);  // gamma*m = 20
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        const double m = u(rng);
        CHECK(momentum_demand(p, -m) == doctest::Approx(-momentum_demand(p, m)));
    }
}

TEST_CASE("noise demand moments and reproducibility") {
    ChiarellaParams p;
    SUBCASE("sigma 0 is silent") {
        p.sigma_noise = 0.0;
        std::mt19937_64 rng(3);
        for (int i = 0; i < 100; ++i) CHECK(noise_demand(p, rng) == 0.0);
    }
    SUBCASE("unit sigma sample moments") {
        p.sigma_noise = 1.0;
        std::mt19937_64 rng(3);
        double sum = 0.0, sum_sq = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double d = noise_demand(p, rng);
            sum += d;
            sum_sq += d * d;
        }
        const double mean = sum / n;
        const double stddev = std::sqrt(sum_sq / n - mean * mean);
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::abs(stddev - 1.0) < 0.02);
    }
    SUBCASE("fixed seed reproduces the sequence") {
        p.sigma_noise = 2.0;
        std::mt19937_64 a(77), b(77);
        for (int i = 0; i < 50; ++i) CHECK(noise_demand(p, a) == noise_demand(p, b));
    }
}

TEST_CASE("overall demand arithmetic and linearity") {
    CHECK(overall_demand(1.0, 2.0, 3.0, 1.0) == doctest::Approx(6.0));
    CHECK(overall_demand(0.0, 0.0, 0.0, 4.0) == 0.0);
    CHECK(overall_demand(1.0, 0.0, 1.0, 4.0) == doctest::Approx(6.0));  // 4 + 0 + 2

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double f = u(rng), m = u(rng), n = u(rng), dt = std::abs(u(rng)) + 0.1;
        const double base = overall_demand(f, m, n, dt);
        CHECK(overall_demand(2 * f, m, n, dt) - base == doctest::Approx(f * dt));
        CHECK(overall_demand(f, 2 * m, n, dt) - base == doctest::Approx(m));
        CHECK(overall_demand(f, m, 2 * n, dt) - base == doctest::Approx(n * std::sqrt(dt)));
    }
}

TEST_CASE("direction follows the demand sign, coin flip at zero") {
    std::mt19937_64 rng(6);
    CHECK(next_direction(0.3, rng) == Side::Bid);
    CHECK(next_direction(-5.0, rng) == Side::Ask);
    int buys = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (next_direction(0.0, rng) == Side::Bid) ++buys;
    CHECK(std::abs(static_cast<double>(buys) / n - 0.5) < 0.02);
}

TEST_CASE("GBM step") {
    std::mt19937_64 rng(8);
    SUBCASE("zero volatility drifts deterministically") {
        FundamentalPath path{100.0, 0.01, 0.0};
        gbm_step(path, 1.0, rng);
        CHECK(path.v == doctest::Approx(100.0 * std::exp(0.01)));
    }
    SUBCASE("zero drift and volatility is constant") {
        FundamentalPath path{100.0, 0.0, 0.0};
        for (int i = 0; i < 10; ++i) gbm_step(path, 1.0, rng);
        CHECK(path.v == doctest::Approx(100.0));
    }
    SUBCASE("log-increment mean matches (mu - sigma^2/2) T") {
        const double mu = 0.05, sigma = 0.2, horizon = 4.0;
        const int n_paths = 10000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n_paths; ++i) {
            FundamentalPath path{100.0, mu, sigma};
            for (int t = 0; t < 4; ++t) gbm_step(path, 1.0, rng);
            const double log_ret = std::log(path.v / 100.0);
            sum += log_ret;
            sum_sq += log_ret * log_ret;
        }
        const double mean = sum / n_paths;
        const double expected = (mu - 0.5 * sigma * sigma) * horizon;
        const double se = std::sqrt((sum_sq / n_paths - mean * mean) / n_paths);
        CHECK(std::abs(mean - expected) < 3.0 * se);
    }
}
