#pragma once

#include <vector>

#include "sbmri/mri_model.hpp"

namespace sbmri {

struct DCConfig {
    double lambda = 1.0;     // proximal weight tying the solution to x_init
    std::size_t max_iters = 10; // 0 disables the correction (returns x_init)
    double tol = 1e-6;       // relative normal-equation residual threshold
};

struct DCResult {
    ComplexImage x;
    std::vector<double> residual_log; // normal-equation residual per iteration
};

// Approximately solves (A^H A + lambda I) x = A^H y + lambda x_init by
// conjugate gradients, starting at x_init. Returns the iterate with the
// smallest normal-equation residual.
DCResult cg_correct(const ComplexImage& x_init, const KSpaceData& y,
                    const AcquisitionModel& model, const DCConfig& cfg);

// ||y - A x|| over sampled entries.
double residual(const ComplexImage& x, const KSpaceData& y, const AcquisitionModel& model);

} // namespace sbmri
