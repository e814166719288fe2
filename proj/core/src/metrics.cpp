#include "sbmri/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sbmri {

namespace {

std::vector<double> magnitude(const ComplexImage& x) {
    std::vector<double> m(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) m[i] = std::abs(x[i]);
    return m;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, x);
    return m;
}

} // namespace

double nmse(const ComplexImage& x, const ComplexImage& ref) {
    x.require_shape(ref);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = std::abs(x[i]) - std::abs(ref[i]);
        num += d * d;
        den += std::norm(ref[i]);
    }
    if (den == 0) throw UsageError("nmse: reference image is all zero");
    return num / den;
}

double psnr(const ComplexImage& x, const ComplexImage& ref) {
    x.require_shape(ref);
    double mse = 0, peak = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = std::abs(ref[i]);
        const double d = std::abs(x[i]) - r;
        mse += d * d;
        peak = std::max(peak, r);
    }
    mse /= static_cast<double>(x.size());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const ComplexImage& x, const ComplexImage& ref) {
    x.require_shape(ref);
    const std::size_t h = x.height(), w = x.width();
    const std::vector<double> a = magnitude(x), b = magnitude(ref);

    constexpr int half = 5; // 11x11 window
    double win[2 * half + 1];
    double wsum = 0;
    for (int k = -half; k <= half; ++k) {
        win[k + half] = std::exp(-(k * k) / (2.0 * 1.5 * 1.5));
        wsum += win[k + half];
    }
    for (double& v : win) v /= wsum;

    const double L = max_abs(b);
    const double c1 = (0.01 * L) * (0.01 * L);
    const double c2 = (0.03 * L) * (0.03 * L);

    // Window truncated at image borders, weights renormalized.
    double total = 0;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
            double sw = 0, ma = 0, mb = 0, va = 0, vb = 0, cov = 0;
            for (int dy = -half; dy <= half; ++dy) {
                const long yy = static_cast<long>(y) + dy;
                if (yy < 0 || yy >= static_cast<long>(h)) continue;
                for (int dx = -half; dx <= half; ++dx) {
                    const long xc = static_cast<long>(xx) + dx;
                    if (xc < 0 || xc >= static_cast<long>(w)) continue;
                    const double wgt = win[dy + half] * win[dx + half];
                    const double av = a[yy * w + xc], bv = b[yy * w + xc];
                    sw += wgt;
                    ma += wgt * av;
                    mb += wgt * bv;
                    va += wgt * av * av;
                    vb += wgt * bv * bv;
                    cov += wgt * av * bv;
                }
            }
            ma /= sw; mb /= sw;
            va = va / sw - ma * ma;
            vb = vb / sw - mb * mb;
            cov = cov / sw - ma * mb;
            const double s = ((2 * ma * mb + c1) * (2 * cov + c2)) /
                             ((ma * ma + mb * mb + c1) * (va + vb + c2));
            total += s;
        }
    }
    return total / static_cast<double>(h * w);
}

MetricReport evaluate(const ComplexImage& x, const ComplexImage& ref,
                      const std::string& image_id) {
    return MetricReport{nmse(x, ref), psnr(x, ref), ssim(x, ref), image_id};
}

} // namespace sbmri
