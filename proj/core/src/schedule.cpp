#include "sbmri/schedule.hpp"

#include <cmath>

namespace sbmri {

namespace {

// Exact integral of the symmetric triangular beta profile over [0, t].
// beta(tau) = bmin + (bmax - bmin) * (1 - |2*tau - 1|).
double beta_integral(double bmin, double bmax, double t) {
    const double d = bmax - bmin;
    if (t <= 0.5) return bmin * t + d * t * t;
    const double u = t - 0.5;
    // integral over [0, 0.5] plus the descending half.
    return bmin * 0.5 + d * 0.25 + bmin * u + d * (u - u * u);
}

} // namespace

NoiseSchedule::NoiseSchedule(double beta_min, double beta_max, std::size_t n_steps)
    : beta_min_(beta_min), beta_max_(beta_max), n_(n_steps) {
    if (!(beta_min > 0) || !(beta_min <= beta_max))
        throw ConfigError("NoiseSchedule: require 0 < beta_min <= beta_max");
    if (n_steps < 2)
        throw ConfigError("NoiseSchedule: require n_steps >= 2");

    t_grid_.resize(n_ + 1);
    sigma_sq_.resize(n_ + 1);
    sigma_bar_sq_.resize(n_ + 1);
    beta_.resize(n_);

    const double total = beta_integral(beta_min_, beta_max_, 1.0);
    for (std::size_t n = 0; n <= n_; ++n) {
        t_grid_[n] = static_cast<double>(n) / static_cast<double>(n_);
        sigma_sq_[n] = beta_integral(beta_min_, beta_max_, t_grid_[n]);
        sigma_bar_sq_[n] = total - sigma_sq_[n];
    }
    sigma_sq_[0] = 0.0;
    sigma_bar_sq_[n_] = 0.0;

    for (std::size_t n = 0; n < n_; ++n) {
        const double dt = t_grid_[n + 1] - t_grid_[n];
        beta_[n] = (sigma_sq_[n + 1] - sigma_sq_[n]) / dt;
    }
}

double NoiseSchedule::sigma(std::size_t n) const {
    check_node(n);
    return std::sqrt(sigma_sq_[n]);
}

double NoiseSchedule::sigma_bar(std::size_t n) const {
    check_node(n);
    return std::sqrt(sigma_bar_sq_[n]);
}

double NoiseSchedule::alpha_sq(std::size_t n) const {
    check_interval(n);
    return sigma_sq_[n + 1] - sigma_sq_[n];
}

} // namespace sbmri
