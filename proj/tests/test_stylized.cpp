#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lobgen/stylized.hpp"

using namespace lobgen;
using Eigen::VectorXd;

namespace {

// Plain-loop Pearson correlation of the lag-shifted segments; the oracle the
// vectorized acf() is checked against.
double acf_brute_force(const std::vector<double>& x, int lag) {
    const int m = static_cast<int>(x.size()) - lag;
    double mean_a = 0.0, mean_b = 0.0;
    for (int i = 0; i < m; ++i) {
        mean_a += x[static_cast<std::size_t>(i)];
        mean_b += x[static_cast<std::size_t>(i + lag)];
    }
    mean_a /= m;
    mean_b /= m;
    double num = 0.0, var_a = 0.0, var_b = 0.0;
    for (int i = 0; i < m; ++i) {
        const double da = x[static_cast<std::size_t>(i)] - mean_a;
        const double db = x[static_cast<std::size_t>(i + lag)] - mean_b;
        num += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    return num / std::sqrt(var_a * var_b);
}

VectorXd pareto_sample(double exponent, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(1e-12, 1.0);
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = std::pow(1.0 / u(rng), 1.0 / exponent);
    return x;
}

}  // namespace

TEST_CASE("log returns") {
    VectorXd flat(3);
    flat << 100, 100, 100;
    CHECK(log_returns(flat).isZero());

    VectorXd doubling(2);
    doubling << 100, 200;
    CHECK(log_returns(doubling)[0] == doctest::Approx(std::log(2.0)));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(50.0, 150.0);
    VectorXd prices(200);
    for (int i = 0; i < 200; ++i) prices[i] = u(rng);
    CHECK(log_returns(prices).sum() ==
          doctest::Approx(std::log(prices[199] / prices[0])).epsilon(1e-12));

    VectorXd bad(2);
    bad << 100, -1;
    CHECK_THROWS_AS(log_returns(bad), std::invalid_argument);
    CHECK_THROWS_AS(log_returns(VectorXd::Ones(1)), std::invalid_argument);
}

TEST_CASE("acf closed forms") {
    SUBCASE("constant-increment series is perfectly persistent") {
        VectorXd ramp(50);
        for (int i = 0; i < 50; ++i) ramp[i] = 3.0 + 0.5 * i;
        for (int lag : {1, 2, 5}) CHECK(acf(ramp, lag) == doctest::Approx(1.0));
    }
    SUBCASE("deterministic alternation at lag 1 is -1") {
        VectorXd alt(40);
        for (int i = 0; i < 40; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
        CHECK(acf(alt, 1) == doctest::Approx(-1.0));
        CHECK(acf(alt, 2) == doctest::Approx(1.0));
    }
    SUBCASE("zero variance throws") {
        CHECK_THROWS_AS(acf(VectorXd::Ones(20), 1), std::domain_error);
    }
    SUBCASE("lag bounds") {
        CHECK_THROWS_AS(acf(VectorXd::Random(10), 0), std::invalid_argument);
        CHECK_THROWS_AS(acf(VectorXd::Random(10), 10), std::invalid_argument);
    }
}

TEST_CASE("acf matches the brute-force oracle to 1e-10 at n=1e4") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = 10000;
    std::vector<double> raw(n);
    VectorXd x(n);
    double level = 0.0;
    for (int i = 0; i < n; ++i) {
        level = 0.6 * level + gauss(rng);  // AR(1) so lags carry signal
        raw[static_cast<std::size_t>(i)] = level;
        x[i] = level;
    }
    for (int lag : {1, 2, 3, 5, 9, 50})
        REQUIRE(std::abs(acf(x, lag) - acf_brute_force(raw, lag)) < 1e-10);
}

TEST_CASE("acf is invariant to positive affine transforms") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 2.0);
    VectorXd x(500);
    for (int i = 0; i < 500; ++i) x[i] = gauss(rng);
    for (int lag : {1, 3, 7}) {
        const double base = acf(x, lag);
        CHECK(acf((3.7 * x.array() + 11.0).matrix(), lag) == doctest::Approx(base));
        CHECK(acf((0.01 * x.array() - 4.0).matrix(), lag) == doctest::Approx(base));
    }
}

TEST_CASE("hill estimator") {
    SUBCASE("Pareto tail exponent 3 gives gamma 1/3") {
        const VectorXd x = pareto_sample(3.0, 100000, 99);
        CHECK(hill_gamma(x, 1000) == doctest::Approx(1.0 / 3.0).epsilon(0.15));
        CHECK(std::abs(hill_gamma(x, 1000) - 1.0 / 3.0) < 0.05);
    }
    SUBCASE("k = sqrt(n) rule recovers 1/a across exponents") {
        for (double a : {2.0, 4.0}) {
            const int n = 40000;
            const VectorXd x = pareto_sample(a, n, 123);
            const double est = hill_gamma(x, 200);
            CHECK(std::abs(est - 1.0 / a) < 0.05);
        }
    }
    SUBCASE("equal magnitudes give a degenerate zero tail") {
        VectorXd x = VectorXd::Ones(100);
        x.segment(0, 50) *= -1.0;
        CHECK(hill_gamma(x, 10) == doctest::Approx(0.0));
    }
    SUBCASE("fatter tails score larger gamma, smaller reciprocal") {
        const VectorXd fat = pareto_sample(2.0, 50000, 5);
        const VectorXd thin = pareto_sample(4.0, 50000, 5);
        const double g_fat = hill_gamma(fat, 500);
        const double g_thin = hill_gamma(thin, 500);
        CHECK(g_fat > g_thin);
        CHECK(1.0 / g_fat < 1.0 / g_thin);  // paper-style reporting direction
    }
    SUBCASE("insufficient nonzero tail throws") {
        VectorXd x = VectorXd::Zero(100);
        x[0] = 1.0;
        x[1] = 2.0;
        CHECK_THROWS_AS(hill_gamma(x, 5), std::invalid_argument);
        CHECK_THROWS_AS(hill_gamma(VectorXd::Random(100), 1), std::invalid_argument);
    }
}

TEST_CASE("kurtosis oracles") {
    std::mt19937_64 rng(11);
    SUBCASE("standard normal at n=1e6 is near zero") {
        std::normal_distribution<double> gauss(0.0, 1.0);
        VectorXd x(1000000);
        for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
        CHECK(std::abs(excess_kurtosis(x)) < 0.05);
    }
    SUBCASE("symmetric two-point series scores -2") {
        VectorXd x(100);
        for (int i = 0; i < 100; ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
        CHECK(excess_kurtosis(x) == doctest::Approx(-2.0));
    }
    SUBCASE("student-t(5) scores 6 within 1 at n=1e6") {
        std::student_t_distribution<double> t5(5.0);
        VectorXd x(1000000);
        for (int i = 0; i < x.size(); ++i) x[i] = t5(rng);
        CHECK(std::abs(excess_kurtosis(x) - 6.0) < 1.0);
    }
    SUBCASE("affine invariance") {
        VectorXd x = VectorXd::Random(2000);
        const double base = excess_kurtosis(x);
        CHECK(excess_kurtosis((5.0 * x.array() - 2.0).matrix()) == doctest::Approx(base));
    }
    SUBCASE("degenerate input throws") {
        CHECK_THROWS_AS(excess_kurtosis(VectorXd::Ones(10)), std::domain_error);
        CHECK_THROWS_AS(excess_kurtosis(VectorXd::Random(3)), std::invalid_argument);
    }
}

namespace {

StylizedSummary random_summary(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    StylizedSummary s;
    s.hill = std::abs(gauss(rng));
    s.hill_gamma = s.hill;
    s.sigma = std::abs(gauss(rng));
    s.kurtosis = gauss(rng);
    s.acf_returns = VectorXd::Random(9);
    s.acf_sq_returns = VectorXd::Random(9);
    s.acf_abs_returns = VectorXd::Random(20);
    return s;
}

}  // namespace

TEST_CASE("calibration loss") {
    auto a = random_summary(1);
    SUBCASE("identical summaries give zero") {
        CHECK(calibration_loss(a, a) == 0.0);
    }
    SUBCASE("single sigma difference") {
        auto b = a;
        b.sigma += 0.1;
        CHECK(calibration_loss(a, b) == doctest::Approx(0.1));
        CHECK(calibration_loss(b, a) == doctest::Approx(0.1));
    }
    SUBCASE("random summaries match the term-by-term sum") {
        auto b = random_summary(2);
        double expected = std::abs(a.hill - b.hill) + std::abs(a.sigma - b.sigma) +
                          std::abs(a.kurtosis - b.kurtosis);
        for (int i = 0; i < 9; ++i) {
            expected += std::abs(a.acf_returns[i] - b.acf_returns[i]);
            expected += std::abs(a.acf_sq_returns[i] - b.acf_sq_returns[i]);
        }
        CHECK(calibration_loss(a, b) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(calibration_loss(a, b) == doctest::Approx(calibration_loss(b, a)));
        CHECK(calibration_loss(a, b) >= 0.0);
    }
    SUBCASE("missing lags throw") {
        auto b = a;
        b.acf_returns = VectorXd::Random(5);
        CHECK_THROWS_AS(calibration_loss(a, b), std::invalid_argument);
    }
}

TEST_CASE("summaries over a simulated return series") {
    std::mt19937_64 rng(21);
    std::student_t_distribution<double> t4(4.0);
    VectorXd returns(20000);
    for (int i = 0; i < returns.size(); ++i) returns[i] = 0.01 * t4(rng);
    VectorXd direction(20000);
    for (int i = 0; i < direction.size(); ++i) direction[i] = (rng() & 1u) ? 1.0 : -1.0;

    auto s = summarize_returns(returns, direction);
    CHECK(s.acf_returns.size() == 9);
    CHECK(s.acf_sq_returns.size() == 9);
    CHECK(s.acf_abs_returns.size() == 20);
    CHECK(s.acf_direction.size() == 20);
    CHECK((s.acf_returns.array().abs() <= 1.0).all());
    CHECK(s.sigma > 0.0);

    SUBCASE("reciprocal hill convention") {
        SummaryOptions opt;
        opt.hill_reciprocal = true;
        auto r = summarize_returns(returns, VectorXd(), opt);
        CHECK(r.hill == doctest::Approx(1.0 / r.hill_gamma));
        CHECK(r.hill_gamma == doctest::Approx(s.hill_gamma));
    }
    SUBCASE("JSON round trip") {
        auto restored = StylizedSummary::from_json(s.to_json());
        CHECK(restored.hill == doctest::Approx(s.hill));
        CHECK(restored.kurtosis == doctest::Approx(s.kurtosis));
        CHECK(restored.acf_returns.isApprox(s.acf_returns));
        CHECK(restored.acf_direction.isApprox(s.acf_direction));
    }
}
