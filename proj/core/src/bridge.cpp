#include "sbmri/bridge.hpp"

#include <cmath>

namespace sbmri::bridge {

ComplexImage sample_intermediate_recorded(const NoiseSchedule& sched, const ComplexImage& x0,
                                          const ComplexImage& x1, std::size_t n, Rng& rng,
                                          ComplexImage& z_out) {
    x0.require_shape(x1);
    const double s2 = sched.sigma_sq(n);
    const double sb2 = sched.sigma_bar_sq(n);
    const double denom = s2 + sb2;
    const double w0 = sb2 / denom;
    const double w1 = s2 / denom;
    const double std_dev = std::sqrt(s2 * sb2 / denom);

    z_out = gaussian_image(x0.height(), x0.width(), rng);
    ComplexImage out(x0.height(), x0.width());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = w0 * x0[i] + w1 * x1[i] + std_dev * z_out[i];
    return out;
}

ComplexImage sample_intermediate(const NoiseSchedule& sched, const ComplexImage& x0,
                                 const ComplexImage& x1, std::size_t n, Rng& rng) {
    ComplexImage z;
    return sample_intermediate_recorded(sched, x0, x1, n, rng, z);
}

ComplexImage predict_x0(const NoiseSchedule& sched, const ComplexImage& x_n,
                        const ComplexImage& eps_hat, std::size_t n) {
    if (n < 1) throw UsageError("predict_x0: n must be >= 1 (sigma_0 = 0)");
    x_n.require_shape(eps_hat);
    const double s = sched.sigma(n);
    ComplexImage out = x_n;
    out.axpy(-s, eps_hat);
    return out;
}

ComplexImage posterior_step(const NoiseSchedule& sched, const ComplexImage& x0,
                            const ComplexImage& x_next, std::size_t n, Rng& rng,
                            bool deterministic) {
    if (n >= sched.n_steps()) throw UsageError("posterior_step: n must be < N");
    x0.require_shape(x_next);
    const double a2 = sched.alpha_sq(n);
    const double s2 = sched.sigma_sq(n);
    const double denom = a2 + s2;
    const double w0 = a2 / denom;
    const double w1 = s2 / denom;

    ComplexImage out(x0.height(), x0.width());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = w0 * x0[i] + w1 * x_next[i];

    if (!deterministic) {
        const double std_dev = std::sqrt(s2 * a2 / denom);
        if (std_dev > 0) {
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] += std_dev * circular_gaussian(rng);
        }
    }
    return out;
}

ComplexImage rescale_noise(const NoiseSchedule& sched, const ComplexImage& eps_n, std::size_t n) {
    if (n < 1 || n >= sched.n_steps())
        throw UsageError("rescale_noise: n must be in [1, N)");
    ComplexImage out = eps_n;
    out *= sched.sigma(n + 1) / sched.sigma(n);
    return out;
}

ComplexImage inversion_step(const NoiseSchedule& sched, const ComplexImage& x_n,
                            const ComplexImage& eps_hat_n, std::size_t n) {
    if (n < 1 || n >= sched.n_steps())
        throw UsageError("inversion_step: n must be in [1, N)");
    x_n.require_shape(eps_hat_n);
    const double a2 = sched.alpha_sq(n);
    const double s2 = sched.sigma_sq(n);
    const double s_next2 = sched.sigma_sq(n + 1);
    const double coeff = a2 * s_next2 / (sched.sigma(n) * (a2 + s2));
    ComplexImage out = x_n;
    out.axpy(coeff, eps_hat_n);
    return out;
}

} // namespace sbmri::bridge
