#include "lobgen/stylized.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

namespace lobgen {

Eigen::VectorXd log_returns(const Eigen::Ref<const Eigen::VectorXd>& prices) {
    if (prices.size() < 2) throw std::invalid_argument("log_returns: need at least 2 prices");
    if ((prices.array() <= 0.0).any())
        throw std::invalid_argument("log_returns: non-positive price");
    return (prices.tail(prices.size() - 1).array() / prices.head(prices.size() - 1).array())
        .log()
        .matrix();
}

double hill_gamma(const Eigen::Ref<const Eigen::VectorXd>& returns, int k) {
    if (k < 2) throw std::invalid_argument("hill_gamma: k must be at least 2");
    std::vector<double> magnitudes;
    magnitudes.reserve(static_cast<std::size_t>(returns.size()));
    for (Eigen::Index i = 0; i < returns.size(); ++i) {
        const double a = std::abs(returns[i]);
        if (a > 0.0) magnitudes.push_back(a);
    }
    if (magnitudes.size() < static_cast<std::size_t>(k) + 1)
        throw std::invalid_argument("hill_gamma: not enough nonzero returns for the tail");
    std::partial_sort(magnitudes.begin(), magnitudes.begin() + k + 1, magnitudes.end(),
                      std::greater<>());
    const double threshold = magnitudes[static_cast<std::size_t>(k)];
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += std::log(magnitudes[static_cast<std::size_t>(i)] / threshold);
    return sum / static_cast<double>(k);
}

int default_tail_count(Eigen::Index n) {
    return static_cast<int>(std::clamp<Eigen::Index>(n / 20, 10, 1000));
}

StylizedSummary summarize_returns(const Eigen::Ref<const Eigen::VectorXd>& returns,
                                  const Eigen::Ref<const Eigen::VectorXd>& direction,
                                  const SummaryOptions& options) {
    StylizedSummary s;
    const int k = options.tail_count > 0 ? options.tail_count : default_tail_count(returns.size());
    s.hill_gamma = hill_gamma(returns, k);
    s.hill = options.hill_reciprocal ? 1.0 / s.hill_gamma : s.hill_gamma;
    s.sigma = std_dev(returns);
    s.kurtosis = excess_kurtosis(returns);

    const Eigen::VectorXd squared = returns.array().square().matrix();
    const Eigen::VectorXd absolute = returns.array().abs().matrix();
    s.acf_returns.resize(options.loss_lags);
    s.acf_sq_returns.resize(options.loss_lags);
    for (int lag = 1; lag <= options.loss_lags; ++lag) {
        s.acf_returns[lag - 1] = acf(returns, lag);
        s.acf_sq_returns[lag - 1] = acf(squared, lag);
    }
    s.acf_abs_returns.resize(options.long_lags);
    for (int lag = 1; lag <= options.long_lags; ++lag)
        s.acf_abs_returns[lag - 1] = acf(absolute, lag);
    if (direction.size() > 0) {
        s.acf_direction.resize(options.long_lags);
        for (int lag = 1; lag <= options.long_lags; ++lag)
            s.acf_direction[lag - 1] = acf(direction, lag);
    }
    return s;
}

StylizedSummary summarize_prices(const Eigen::Ref<const Eigen::VectorXd>& prices,
                                 const SummaryOptions& options) {
    return summarize_returns(log_returns(prices), Eigen::VectorXd(), options);
}

double calibration_loss(const StylizedSummary& sim, const StylizedSummary& hist, int loss_lags) {
    if (sim.acf_returns.size() < loss_lags || hist.acf_returns.size() < loss_lags ||
        sim.acf_sq_returns.size() < loss_lags || hist.acf_sq_returns.size() < loss_lags)
        throw std::invalid_argument("calibration_loss: summary missing required lags");
    double loss = std::abs(sim.hill - hist.hill) + std::abs(sim.sigma - hist.sigma) +
                  std::abs(sim.kurtosis - hist.kurtosis);
    for (int i = 0; i < loss_lags; ++i) {
        loss += std::abs(sim.acf_returns[i] - hist.acf_returns[i]);
        loss += std::abs(sim.acf_sq_returns[i] - hist.acf_sq_returns[i]);
    }
    return loss;
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

}  // namespace

std::string StylizedSummary::to_json() const {
    nlohmann::json j;
    j["hill"] = hill;
    j["hill_gamma"] = hill_gamma;
    j["sigma"] = sigma;
    j["kurtosis"] = kurtosis;
    j["acf_returns"] = vector_to_json(acf_returns);
    j["acf_sq_returns"] = vector_to_json(acf_sq_returns);
    j["acf_abs_returns"] = vector_to_json(acf_abs_returns);
    j["acf_direction"] = vector_to_json(acf_direction);
    return j.dump(2);
}

StylizedSummary StylizedSummary::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    StylizedSummary s;
    s.hill = j.at("hill").get<double>();
    s.hill_gamma = j.at("hill_gamma").get<double>();
    s.sigma = j.at("sigma").get<double>();
    s.kurtosis = j.at("kurtosis").get<double>();
    s.acf_returns = vector_from_json(j.at("acf_returns"));
    s.acf_sq_returns = vector_from_json(j.at("acf_sq_returns"));
    s.acf_abs_returns = vector_from_json(j.at("acf_abs_returns"));
    s.acf_direction = vector_from_json(j.at("acf_direction"));
    return s;
}

}  // namespace lobgen
