#pragma once

#include "sbmri/complex_image.hpp"
#include "sbmri/rng.hpp"
#include "sbmri/schedule.hpp"

namespace sbmri {

// Bridge kernels between a target image x0 and a guide image x1.
// All functions are pure given the schedule and an explicit generator.
namespace bridge {

// Draw x_n ~ N(mu_n, Sigma_n) with
//   mu_n    = (sigma_bar_n^2 * x0 + sigma_n^2 * x1) / (sigma_bar_n^2 + sigma_n^2)
//   Sigma_n = sigma_n^2 * sigma_bar_n^2 / (sigma_bar_n^2 + sigma_n^2) * I.
ComplexImage sample_intermediate(const NoiseSchedule& sched, const ComplexImage& x0,
                                 const ComplexImage& x1, std::size_t n, Rng& rng);

// Same draw, but also returns the unit Gaussian field that was used
// (needed by training to form the regression target exactly).
ComplexImage sample_intermediate_recorded(const NoiseSchedule& sched, const ComplexImage& x0,
                                          const ComplexImage& x1, std::size_t n, Rng& rng,
                                          ComplexImage& z_out);

// x0^eps = x_n - sigma_n * eps_hat. Requires n >= 1 (sigma_0 = 0).
ComplexImage predict_x0(const NoiseSchedule& sched, const ComplexImage& x_n,
                        const ComplexImage& eps_hat, std::size_t n);

// One reverse step: given x0 and x_{n+1}, produce x_n.
//   mean = alpha_n^2/(alpha_n^2+sigma_n^2) * x0 + sigma_n^2/(alpha_n^2+sigma_n^2) * x_{n+1}
// Deterministic variant returns the mean; otherwise adds Gaussian noise of
// variance sigma_n^2 * alpha_n^2 / (alpha_n^2 + sigma_n^2).
ComplexImage posterior_step(const NoiseSchedule& sched, const ComplexImage& x0,
                            const ComplexImage& x_next, std::size_t n, Rng& rng,
                            bool deterministic);

// eps at index n+1 expressed through eps at index n: (sigma_{n+1}/sigma_n) * eps_n.
ComplexImage rescale_noise(const NoiseSchedule& sched, const ComplexImage& eps_n, std::size_t n);

// Deterministic flow step upward:
//   x_{n+1} = x_n + alpha_n^2 * sigma_{n+1}^2 / (sigma_n * (alpha_n^2 + sigma_n^2)) * eps_hat_n.
ComplexImage inversion_step(const NoiseSchedule& sched, const ComplexImage& x_n,
                            const ComplexImage& eps_hat_n, std::size_t n);

} // namespace bridge
} // namespace sbmri
