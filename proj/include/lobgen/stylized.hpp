#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lobgen {

/// r_t = ln(p_t / p_{t-1}). Throws on non-positive prices or fewer than two.
Eigen::VectorXd log_returns(const Eigen::Ref<const Eigen::VectorXd>& prices);

/// Autocorrelation at `lag`: the Pearson correlation between the series and
/// its lag-shifted self (each segment centered on its own mean). Throws when
/// either segment has zero variance or the lag leaves nothing to pair.
template <typename Derived>
double acf(const Eigen::MatrixBase<Derived>& series, int lag) {
    const Eigen::Index n = series.size();
    if (lag < 1 || lag >= n) throw std::invalid_argument("acf: lag out of range");
    const Eigen::Index m = n - lag;
    const Eigen::VectorXd head = series.derived().template cast<double>().segment(0, m);
    const Eigen::VectorXd tail = series.derived().template cast<double>().segment(lag, m);
    const Eigen::VectorXd a = head.array() - head.mean();
    const Eigen::VectorXd b = tail.array() - tail.mean();
    const double denom = std::sqrt(a.squaredNorm() * b.squaredNorm());
    if (denom == 0.0) throw std::domain_error("acf: zero variance segment");
    return a.dot(b) / denom;
}

/// Population standard deviation.
template <typename Derived>
double std_dev(const Eigen::MatrixBase<Derived>& series) {
    const Eigen::VectorXd x = series.derived().template cast<double>();
    const Eigen::ArrayXd centered = x.array() - x.mean();
    return std::sqrt(centered.square().mean());
}

/// Excess kurtosis E[(x - mu)^4] / sigma^4 - 3 (population moments; a
/// Gaussian scores 0). Requires length >= 4 and positive variance.
template <typename Derived>
double excess_kurtosis(const Eigen::MatrixBase<Derived>& series) {
    if (series.size() < 4) throw std::invalid_argument("excess_kurtosis: need at least 4 points");
    const Eigen::VectorXd x = series.derived().template cast<double>();
    const Eigen::ArrayXd centered = x.array() - x.mean();
    const double variance = centered.square().mean();
    if (variance <= 0.0) throw std::domain_error("excess_kurtosis: zero variance");
    return centered.pow(4).mean() / (variance * variance) - 3.0;
}

/// Hill estimator of the tail index reciprocal over the k largest absolute
/// values: gamma_hat = (1/k) sum ln(|r|_(i) / |r|_(k+1)). A polynomial tail
/// with exponent a gives gamma_hat ~ 1/a. Requires k >= 2 and at least k+1
/// nonzero absolute values.
double hill_gamma(const Eigen::Ref<const Eigen::VectorXd>& returns, int k);

/// floor(0.05 n) clamped to [10, 1000].
int default_tail_count(Eigen::Index n);

struct SummaryOptions {
    int loss_lags = 9;        // lags entering the calibration loss
    int long_lags = 20;       // lags for the absolute-return / direction series
    int tail_count = 0;       // 0 = default_tail_count(n)
    bool hill_reciprocal = false;  // report 1/gamma_hat instead of gamma_hat
};

/// Stylized-fact digest of one return series.
struct StylizedSummary {
    double hill = 0.0;        // selected convention (see SummaryOptions)
    double hill_gamma = 0.0;  // raw tail-index reciprocal
    double sigma = 0.0;
    double kurtosis = 0.0;
    Eigen::VectorXd acf_returns;      // lags 1..loss_lags
    Eigen::VectorXd acf_sq_returns;   // lags 1..loss_lags
    Eigen::VectorXd acf_abs_returns;  // lags 1..long_lags
    Eigen::VectorXd acf_direction;    // lags 1..long_lags, empty when no series given

    std::string to_json() const;
    static StylizedSummary from_json(const std::string& text);
};

/// Computes every statistic from a return series; `direction` is an optional
/// +1/-1 buy/sell indicator series (pass an empty vector to skip its ACF).
StylizedSummary summarize_returns(const Eigen::Ref<const Eigen::VectorXd>& returns,
                                  const Eigen::Ref<const Eigen::VectorXd>& direction,
                                  const SummaryOptions& options = {});

/// Convenience: log returns of a price path, then summarize_returns.
StylizedSummary summarize_prices(const Eigen::Ref<const Eigen::VectorXd>& prices,
                                 const SummaryOptions& options = {});

/// L1 distance over (hill, sigma, kurtosis) plus the first `loss_lags` return
/// and squared-return autocorrelations. Symmetric; zero iff those statistics
/// coincide. Throws when either side lacks the required lags.
double calibration_loss(const StylizedSummary& sim, const StylizedSummary& hist,
                        int loss_lags = 9);

}  // namespace lobgen
