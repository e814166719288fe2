#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sbmri/denoiser.hpp"
#include "sbmri/mri_model.hpp"

namespace sbmri {

struct OptConfig {
    double lr = 2e-4;
    // Cosine-decays the learning rate from lr down to lr_final over the run.
    // A negative value keeps lr constant.
    double lr_final = -1.0;
    std::size_t batch = 4;
    std::size_t steps = 2000;
    std::uint64_t seed = 0;
    std::size_t log_interval = 10;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

// Adam first/second moments plus the global step counter.
struct AdamState {
    std::vector<double> m, v;
    std::size_t step = 0;

    explicit AdamState(std::size_t n_params = 0) : m(n_params, 0.0), v(n_params, 0.0) {}
};

struct TrainResult {
    std::vector<std::pair<std::size_t, double>> loss_curve; // (step, loss)
    std::size_t final_step = 0;
};

// Draws the batch for a given global step. Deterministic in (seed, step),
// which is what makes checkpoint resume reproduce an unbroken run.
TrainBatch draw_batch(const std::vector<PhantomPair>& dataset, const NoiseSchedule& sched,
                      std::size_t batch_size, std::uint64_t seed, std::size_t step);

// Runs Adam from state.step up to cfg.steps. On a non-finite loss the
// parameters are rolled back to the last logged snapshot and a
// NumericalError carrying the step index is thrown.
TrainResult train(ConvDenoiser& denoiser, AdamState& state,
                  const std::vector<PhantomPair>& dataset, const OptConfig& cfg,
                  const std::function<void(std::size_t, double)>& on_log = {});

} // namespace sbmri
