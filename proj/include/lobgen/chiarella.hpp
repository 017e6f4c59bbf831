#pragma once

#include <cstdint>
#include <random>

#include "lobgen/order_book.hpp"

namespace lobgen {

/// Coefficients of the extended Chiarella demand model: a fundamentalist
/// pulling price toward value, a saturating momentum trader and a Gaussian
/// noise trader.
struct ChiarellaParams {
    double kappa = 0.05;        // fundamentalist strength
    double beta = 0.5;          // momentum strength
    double gamma = 1.0;         // momentum saturation
    double alpha = 0.5;         // momentum decay, in (0, 1]
    double sigma_noise = 1.0;   // noise trader std, >= 0
    double delta_t = 1.0;       // event-time increment, > 0
};

/// Geometric-Brownian fundamental value path.
struct FundamentalPath {
    double v = 0.0;      // current fundamental value, > 0
    double mu = 0.0;     // drift of log value per unit time
    double sigma = 0.0;  // volatility per sqrt unit time
};

/// Exponentially decayed price-change signal.
struct MomentumState {
    double m = 0.0;
    double last_price = 0.0;
};

/// kappa * (v_t - p_t): trades toward the fundamental value.
double fundamental_demand(const ChiarellaParams& params, double v_t, double p_t);

/// M_t = (1 - alpha) M_{t-1} + alpha (p_t - p_{t-1}).
MomentumState update_momentum(const MomentumState& state, const ChiarellaParams& params,
                              double p_t);

/// beta * tanh(gamma * m): saturating trend-following demand.
double momentum_demand(const ChiarellaParams& params, double m);

/// Draw from N(0, sigma_noise).
double noise_demand(const ChiarellaParams& params, std::mt19937_64& rng);

/// D = d_f * dT + d_m + d_n * sqrt(dT).
double overall_demand(double d_f, double d_m, double d_n, double delta_t);

/// Buy when demand is positive, Sell when negative; an exact zero is broken
/// by a fair coin.
Side next_direction(double demand, std::mt19937_64& rng);

/// Advances the fundamental value one step of length dt:
/// v <- v * exp((mu - sigma^2/2) dt + sigma sqrt(dt) Z).
double gbm_step(FundamentalPath& path, double dt, std::mt19937_64& rng);

}  // namespace lobgen
