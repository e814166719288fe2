#pragma once

#include <cstdint>
#include <vector>

#include "sbmri/complex_image.hpp"
#include "sbmri/rng.hpp"

namespace sbmri {

// Per-coil complex sensitivity maps, normalized so that
// sum_c |csm_c(p)|^2 = 1 at every pixel.
struct CoilSensitivities {
    std::vector<ComplexImage> maps;

    std::size_t coils() const { return maps.size(); }
    std::size_t height() const { return maps.empty() ? 0 : maps[0].height(); }
    std::size_t width() const { return maps.empty() ? 0 : maps[0].width(); }
};

enum class MaskPattern { Lattice, VariableDensity };

// Binary k-space sampling indicator with a fully sampled center block.
struct SamplingMask {
    std::size_t h = 0, w = 0;
    std::size_t center_h = 0, center_w = 0;
    std::vector<std::uint8_t> keep; // row-major, 1 = sampled

    bool sampled(std::size_t y, std::size_t x) const { return keep[y * w + x] != 0; }
    std::size_t count() const;
    // Net acceleration R = H*W / (number of samples).
    double acceleration() const;
};

// Multi-coil k-space measurements; unsampled entries are exactly zero.
struct KSpaceData {
    std::vector<ComplexImage> coils;
    SamplingMask mask;
    double sigma_eps = 0.0;

    std::size_t n_coils() const { return coils.size(); }
    double norm() const;
};

struct AcquisitionModel {
    CoilSensitivities csm;
    SamplingMask mask;
    double sigma_eps = 0.0;
};

// y_c = mask .* FFT2(csm_c .* x), unitary FFT.
KSpaceData forward_A(const ComplexImage& x, const CoilSensitivities& csm,
                     const SamplingMask& mask);

// x = sum_c conj(csm_c) .* IFFT2(mask .* y_c); exact adjoint of forward_A.
ComplexImage adjoint_A(const KSpaceData& y, const CoilSensitivities& csm,
                       const SamplingMask& mask);

SamplingMask make_mask(std::size_t h, std::size_t w, double target_r,
                       std::size_t center_h, std::size_t center_w,
                       MaskPattern pattern, std::uint64_t seed);

CoilSensitivities make_coil_maps(std::size_t n_coils, std::size_t h, std::size_t w,
                                 std::uint64_t seed);

// forward_A(x) plus circular complex Gaussian noise of standard deviation
// sigma_eps on sampled locations only.
KSpaceData simulate_acquisition(const ComplexImage& x, const CoilSensitivities& csm,
                                const SamplingMask& mask, double sigma_eps,
                                std::uint64_t seed);

// Paired-contrast phantom: identical geometry, per-tissue intensity remap,
// plus lesions inserted into exactly one image with probability `discrepancy`.
struct PhantomPair {
    ComplexImage target; // x0
    ComplexImage guide;  // x1 / b
};

PhantomPair make_phantom_pair(std::uint64_t seed, std::size_t h, std::size_t w,
                              double discrepancy);

} // namespace sbmri
