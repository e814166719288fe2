#include "sbmri/recon.hpp"

#include <chrono>
#include <string>

#include "sbmri/bridge.hpp"
#include "sbmri/rng.hpp"

namespace sbmri {

namespace {

void check_inputs(const KSpaceData& y, const ComplexImage& guide,
                  const AcquisitionModel& model, const NoiseSchedule& sched,
                  const ReconConfig& cfg) {
    if (guide.height() != model.mask.h || guide.width() != model.mask.w)
        throw ConfigError("recon: guide shape does not match the acquisition model");
    if (y.coils.size() != model.csm.coils())
        throw ConfigError("recon: k-space coil count does not match the sensitivity maps");
    if (cfg.n_inversion_steps > sched.n_steps())
        throw ConfigError("recon: n_inversion_steps exceeds the schedule length");
}

// Reverse sampling from state x at step index `start` down to index 0,
// applying the CG correction to every denoised prediction.
ComplexImage reverse_pass(ComplexImage x, std::size_t start, const KSpaceData& y,
                          const Denoiser& denoiser, const NoiseSchedule& sched,
                          const AcquisitionModel& model, const ReconConfig& cfg, Rng& rng,
                          std::vector<double>* residual_log) {
    for (std::size_t n = start; n >= 1; --n) {
        const ComplexImage eps = denoiser.eval(x, n);
        ComplexImage x0 = bridge::predict_x0(sched, x, eps, n);
        DCResult dc = cg_correct(x0, y, model, cfg.dc);
        if (residual_log) residual_log->push_back(residual(dc.x, y, model));
        x = bridge::posterior_step(sched, dc.x, x, n - 1, rng, cfg.deterministic_sampling);
        if (!x.all_finite())
            throw NumericalError("recon: non-finite state at step " + std::to_string(n));
    }
    return x;
}

} // namespace

ReconRecord guided_reconstruct(const KSpaceData& y, const ComplexImage& guide,
                               const Denoiser& denoiser, const NoiseSchedule& sched,
                               const AcquisitionModel& model, const ReconConfig& cfg) {
    check_inputs(y, guide, model, sched, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    ReconRecord rec;
    Rng rng = make_rng(cfg.seed, 0x726563ULL);
    rec.image = reverse_pass(guide, sched.n_steps(), y, denoiser, sched, model, cfg, rng,
                             &rec.step_residuals);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

ReconRecord inversion_reconstruct(const KSpaceData& y, const ComplexImage& guide,
                                  const Denoiser& denoiser, const NoiseSchedule& sched,
                                  const AcquisitionModel& model, const ReconConfig& cfg) {
    check_inputs(y, guide, model, sched, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    ReconRecord rec;
    Rng rng = make_rng(cfg.seed, 0x726563ULL);

    // Pass 1: plain guided reconstruction.
    ComplexImage x0 = reverse_pass(guide, sched.n_steps(), y, denoiser, sched, model, cfg, rng,
                                   &rec.step_residuals);
    if (cfg.n_inversion_steps == 0) {
        rec.image = std::move(x0);
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rec;
    }

    // Pass 2: deterministic inversion up the bridge. The state enters at
    // index 1 (sigma_0 = 0 carries no information to invert), so the loop
    // climbs to index N_i.
    const std::size_t ni = cfg.n_inversion_steps;
    ComplexImage x = std::move(x0);
    for (std::size_t n = 1; n < ni; ++n) {
        const ComplexImage eps = denoiser.eval(x, n);
        x = bridge::inversion_step(sched, x, eps, n);
        if (!x.all_finite())
            throw NumericalError("recon: non-finite state in inversion step " +
                                 std::to_string(n));
    }

    // Pass 3: reverse sampling from the corrected state at index N_i.
    rec.image = reverse_pass(std::move(x), ni, y, denoiser, sched, model, cfg, rng,
                             &rec.step_residuals);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

ComplexImage zero_filled(const KSpaceData& y, const CoilSensitivities& csm) {
    return adjoint_A(y, csm, y.mask);
}

} // namespace sbmri
