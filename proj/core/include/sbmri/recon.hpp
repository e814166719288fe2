#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbmri/data_consistency.hpp"
#include "sbmri/denoiser.hpp"
#include "sbmri/metrics.hpp"
#include "sbmri/schedule.hpp"

namespace sbmri {

struct ReconConfig {
    DCConfig dc;
    bool deterministic_sampling = false;
    std::size_t n_inversion_steps = 0; // N_i; 0 degenerates to guided output
    std::uint64_t seed = 0;
};

struct ReconRecord {
    ComplexImage image;
    std::vector<double> step_residuals; // ||y - A x_0||/step after each CG correction
    MetricReport metrics;               // filled when ground truth is available
    bool has_metrics = false;
    double wall_seconds = 0;
};

// One reverse pass of posterior sampling with CG data consistency,
// starting from the guide image as x_N.
ReconRecord guided_reconstruct(const KSpaceData& y, const ComplexImage& guide,
                               const Denoiser& denoiser, const NoiseSchedule& sched,
                               const AcquisitionModel& model, const ReconConfig& cfg);

// Guided pass, then the deterministic inversion pass up to index N_i,
// then a second reverse pass starting from the corrected state.
ReconRecord inversion_reconstruct(const KSpaceData& y, const ComplexImage& guide,
                                  const Denoiser& denoiser, const NoiseSchedule& sched,
                                  const AcquisitionModel& model, const ReconConfig& cfg);

// Baseline: adjoint of the acquisition operator.
ComplexImage zero_filled(const KSpaceData& y, const CoilSensitivities& csm);

} // namespace sbmri
