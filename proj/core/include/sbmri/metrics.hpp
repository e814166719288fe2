#pragma once

#include <string>

#include "sbmri/complex_image.hpp"

namespace sbmri {

struct MetricReport {
    double nmse = 0;
    double psnr_db = 0; // +inf when x == ref
    double ssim = 0;
    std::string image_id;
};

// All three metrics compare magnitude images |x| vs |ref|.

// || |x| - |ref| ||^2 / || |ref| ||^2
double nmse(const ComplexImage& x, const ComplexImage& ref);

// 10 log10(peak^2 / MSE), peak = max |ref|. Returns +infinity for exact match.
double psnr(const ComplexImage& x, const ComplexImage& ref);

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// dynamic range = max |ref|.
double ssim(const ComplexImage& x, const ComplexImage& ref);

MetricReport evaluate(const ComplexImage& x, const ComplexImage& ref,
                      const std::string& image_id);

} // namespace sbmri
