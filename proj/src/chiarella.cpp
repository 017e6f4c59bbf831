#include "lobgen/chiarella.hpp"

#include <cmath>

namespace lobgen {

double fundamental_demand(const ChiarellaParams& params, double v_t, double p_t) {
    return params.kappa * (v_t - p_t);
}

MomentumState update_momentum(const MomentumState& state, const ChiarellaParams& params,
                              double p_t) {
    MomentumState next;
    next.m = (1.0 - params.alpha) * state.m + params.alpha * (p_t - state.last_price);
    next.last_price = p_t;
    return next;
}

double momentum_demand(const ChiarellaParams& params, double m) {
    return params.beta * std::tanh(params.gamma * m);
}

double noise_demand(const ChiarellaParams& params, std::mt19937_64& rng) {
    if (params.sigma_noise <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, params.sigma_noise)(rng);
}

double overall_demand(double d_f, double d_m, double d_n, double delta_t) {
    return d_f * delta_t + d_m + d_n * std::sqrt(delta_t);
}

Side next_direction(double demand, std::mt19937_64& rng) {
    if (demand > 0.0) return Side::Bid;
    if (demand < 0.0) return Side::Ask;
    return (rng() & 1u) ? Side::Bid : Side::Ask;
}

double gbm_step(FundamentalPath& path, double dt, std::mt19937_64& rng) {
    const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
    path.v *= std::exp((path.mu - 0.5 * path.sigma * path.sigma) * dt +
                       path.sigma * std::sqrt(dt) * z);
    return path.v;
}

}  // namespace lobgen
