#include "sbmri/train.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sbmri/bridge.hpp"

namespace sbmri {

TrainBatch draw_batch(const std::vector<PhantomPair>& dataset, const NoiseSchedule& sched,
                      std::size_t batch_size, std::uint64_t seed, std::size_t step) {
    if (dataset.empty()) throw UsageError("draw_batch: empty dataset");
    Rng rng = make_rng(seed, 0x747261696eULL + step);
    std::uniform_int_distribution<std::size_t> pick_pair(0, dataset.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_n(1, sched.n_steps());

    TrainBatch batch;
    for (std::size_t i = 0; i < batch_size; ++i) {
        const PhantomPair& pair = dataset[pick_pair(rng)];
        const std::size_t n = pick_n(rng);
        ComplexImage x_n = bridge::sample_intermediate(sched, pair.target, pair.guide, n, rng);
        const double inv_sigma = 1.0 / sched.sigma(n);
        ComplexImage target = x_n - pair.target;
        target *= inv_sigma;
        batch.x_n.push_back(std::move(x_n));
        batch.target.push_back(std::move(target));
        batch.n.push_back(n);
    }
    return batch;
}

TrainResult train(ConvDenoiser& denoiser, AdamState& state,
                  const std::vector<PhantomPair>& dataset, const OptConfig& cfg,
                  const std::function<void(std::size_t, double)>& on_log) {
    if (dataset.empty()) throw UsageError("train: empty dataset");
    auto& params = denoiser.params();
    if (state.m.size() != params.size()) {
        if (state.m.empty() && state.v.empty()) {
            state.m.assign(params.size(), 0.0);
            state.v.assign(params.size(), 0.0);
        } else {
            throw ConfigError("train: optimizer state size does not match parameter count");
        }
    }

    TrainResult result;
    std::vector<double> snapshot = params;
    std::size_t snapshot_step = state.step;

    while (state.step < cfg.steps) {
        const std::size_t step = state.step;
        TrainBatch batch = draw_batch(dataset, denoiser.schedule(), cfg.batch, cfg.seed, step);
        const double loss = denoiser.loss_and_grad(batch);
        if (!std::isfinite(loss)) {
            params = snapshot;
            throw NumericalError("train: non-finite loss at step " + std::to_string(step) +
                                 "; parameters rolled back to step " +
                                 std::to_string(snapshot_step));
        }

        double lr = cfg.lr;
        if (cfg.lr_final >= 0.0 && cfg.steps > 0) {
            const double frac = static_cast<double>(step) / static_cast<double>(cfg.steps);
            lr = cfg.lr_final + 0.5 * (cfg.lr - cfg.lr_final) * (1.0 + std::cos(std::numbers::pi * frac));
        }

        const auto& grads = denoiser.grads();
        state.step = step + 1;
        const double t = static_cast<double>(state.step);
        const double bc1 = 1.0 - std::pow(cfg.beta1, t);
        const double bc2 = 1.0 - std::pow(cfg.beta2, t);
        bool finite = true;
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
            state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
            params[i] -= lr * (state.m[i] / bc1) / (std::sqrt(state.v[i] / bc2) + cfg.eps);
            finite = finite && std::isfinite(params[i]);
        }
        if (!finite) {
            params = snapshot;
            throw NumericalError("train: non-finite parameter after step " +
                                 std::to_string(step) + "; rolled back to step " +
                                 std::to_string(snapshot_step));
        }

        if (state.step % cfg.log_interval == 0 || state.step == cfg.steps) {
            result.loss_curve.emplace_back(state.step, loss);
            snapshot = params;
            snapshot_step = state.step;
            if (on_log) on_log(state.step, loss);
        }
    }
    result.final_step = state.step;
    return result;
}

} // namespace sbmri
