#pragma once

#include <cstddef>
#include <vector>

#include "sbmri/errors.hpp"

namespace sbmri {

// Discrete diffusion time grid with the accumulated bridge variances.
//
// beta(t) ramps linearly from beta_min at t=0 to beta_max at t=0.5 and
// symmetrically back down to beta_min at t=1. Accumulated variances are
// computed in closed form from the piecewise-linear profile, so the grid
// resolution never changes the nodal values.
class NoiseSchedule {
public:
    NoiseSchedule(double beta_min, double beta_max, std::size_t n_steps);

    std::size_t n_steps() const { return n_; }
    double beta_min() const { return beta_min_; }
    double beta_max() const { return beta_max_; }

    double t(std::size_t n) const { check_node(n); return t_grid_[n]; }
    // Mean diffusion rate over interval [t_n, t_{n+1}].
    double beta(std::size_t n) const { check_interval(n); return beta_[n]; }

    // sigma_t^2 = int_0^{t_n} beta, forward accumulated variance.
    double sigma_sq(std::size_t n) const { check_node(n); return sigma_sq_[n]; }
    // sigma_bar_t^2 = int_{t_n}^1 beta, backward accumulated variance.
    double sigma_bar_sq(std::size_t n) const { check_node(n); return sigma_bar_sq_[n]; }

    double sigma(std::size_t n) const;
    double sigma_bar(std::size_t n) const;
    // alpha_n^2 = int_{t_n}^{t_{n+1}} beta = sigma_sq(n+1) - sigma_sq(n).
    double alpha_sq(std::size_t n) const;

    // Total variance accumulated over [0, 1].
    double total_variance() const { return sigma_sq_[n_]; }

    bool operator==(const NoiseSchedule& o) const {
        return beta_min_ == o.beta_min_ && beta_max_ == o.beta_max_ && n_ == o.n_;
    }

private:
    void check_node(std::size_t n) const {
        if (n > n_) throw UsageError("NoiseSchedule: node index out of range");
    }
    void check_interval(std::size_t n) const {
        if (n >= n_) throw UsageError("NoiseSchedule: interval index out of range");
    }

    double beta_min_ = 0, beta_max_ = 0;
    std::size_t n_ = 0;
    std::vector<double> t_grid_;
    std::vector<double> beta_;
    std::vector<double> sigma_sq_;
    std::vector<double> sigma_bar_sq_;
};

inline NoiseSchedule make_schedule(double beta_min, double beta_max, std::size_t n_steps) {
    return NoiseSchedule(beta_min, beta_max, n_steps);
}

} // namespace sbmri
