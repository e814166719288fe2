#include "sbmri/mri_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sbmri/fft.hpp"

namespace sbmri {

std::size_t SamplingMask::count() const {
    return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), std::uint8_t{1}));
}

double SamplingMask::acceleration() const {
    const std::size_t c = count();
    if (c == 0) throw UsageError("SamplingMask: empty mask");
    return static_cast<double>(h * w) / static_cast<double>(c);
}

double KSpaceData::norm() const {
    double s = 0;
    for (const auto& c : coils) {
        const double n = c.norm();
        s += n * n;
    }
    return std::sqrt(s);
}

namespace {

void check_model(const ComplexImage& x, const CoilSensitivities& csm, const SamplingMask& mask) {
    if (csm.coils() == 0) throw UsageError("mri_model: no coils");
    if (csm.height() != x.height() || csm.width() != x.width() ||
        mask.h != x.height() || mask.w != x.width())
        throw UsageError("mri_model: shape mismatch between image, csm and mask");
}

} // namespace

KSpaceData forward_A(const ComplexImage& x, const CoilSensitivities& csm,
                     const SamplingMask& mask) {
    check_model(x, csm, mask);
    KSpaceData y;
    y.mask = mask;
    y.coils.reserve(csm.coils());
    for (const auto& map : csm.maps) {
        ComplexImage weighted(x.height(), x.width());
        for (std::size_t i = 0; i < x.size(); ++i) weighted[i] = map[i] * x[i];
        ComplexImage k = fft2(weighted);
        for (std::size_t i = 0; i < k.size(); ++i)
            if (!mask.keep[i]) k[i] = 0;
        y.coils.push_back(std::move(k));
    }
    return y;
}

ComplexImage adjoint_A(const KSpaceData& y, const CoilSensitivities& csm,
                       const SamplingMask& mask) {
    if (y.coils.empty() || y.coils.size() != csm.coils())
        throw UsageError("adjoint_A: coil count mismatch");
    check_model(y.coils[0], csm, mask);
    ComplexImage out(mask.h, mask.w);
    for (std::size_t c = 0; c < csm.coils(); ++c) {
        ComplexImage k = y.coils[c];
        for (std::size_t i = 0; i < k.size(); ++i)
            if (!mask.keep[i]) k[i] = 0;
        ComplexImage img = ifft2(k);
        const auto& map = csm.maps[c];
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += std::conj(map[i]) * img[i];
    }
    return out;
}

namespace {

// Distance of index i from the centered DC position, in mask coordinates.
bool in_center(std::size_t y, std::size_t x, std::size_t h, std::size_t w,
               std::size_t ch, std::size_t cw) {
    const std::size_t y0 = (h - ch) / 2, x0 = (w - cw) / 2;
    return y >= y0 && y < y0 + ch && x >= x0 && x < x0 + cw;
}

SamplingMask lattice_mask(std::size_t h, std::size_t w, double target_r,
                          std::size_t ch, std::size_t cw, std::uint64_t /*seed*/) {
    SamplingMask best;
    double best_err = 1e300;
    // Shifted-lattice family: sample column j when j % sx == 0, row i when
    // i % sy == (row shift derived from the column block). Search the small
    // parameter grid for the closest achievable net R.
    for (std::size_t sy = 1; sy <= 12; ++sy) {
        for (std::size_t sx = 1; sx <= 12; ++sx) {
            const std::size_t shift = std::max<std::size_t>(1, sy / 2);
            SamplingMask m{h, w, ch, cw, std::vector<std::uint8_t>(h * w, 0)};
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    if (in_center(y, x, h, w, ch, cw)) { m.keep[y * w + x] = 1; continue; }
                    if (x % sx != 0) continue;
                    const std::size_t block = x / sx;
                    if (y % sy == (block * shift) % sy) m.keep[y * w + x] = 1;
                }
            const double err = std::abs(m.acceleration() - target_r);
            if (err < best_err) { best_err = err; best = std::move(m); }
        }
    }
    return best;
}

SamplingMask vd_random_mask(std::size_t h, std::size_t w, double target_r,
                            std::size_t ch, std::size_t cw, std::uint64_t seed) {
    SamplingMask m{h, w, ch, cw, std::vector<std::uint8_t>(h * w, 0)};
    std::vector<std::size_t> outside;
    std::vector<double> weight;
    const double cy = (static_cast<double>(h) - 1) / 2, cx = (static_cast<double>(w) - 1) / 2;
    const double sigma = 0.25 * static_cast<double>(std::min(h, w));
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            if (in_center(y, x, h, w, ch, cw)) { m.keep[y * w + x] = 1; continue; }
            const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
            outside.push_back(y * w + x);
            weight.push_back(std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma)));
        }

    const std::size_t want_total =
        static_cast<std::size_t>(std::llround(static_cast<double>(h * w) / target_r));
    const std::size_t center_n = ch * cw;
    if (want_total < center_n)
        throw ConfigError("make_mask: target_r infeasible, center alone gives R = " +
                          std::to_string(static_cast<double>(h * w) / static_cast<double>(center_n)));
    const std::size_t want_extra = std::min(want_total - center_n, outside.size());

    // Weighted sampling without replacement via exponential keys.
    Rng rng = make_rng(seed, 0x6d61736bULL);
    std::vector<std::pair<double, std::size_t>> keys(outside.size());
    std::uniform_real_distribution<double> uni(1e-300, 1.0);
    for (std::size_t i = 0; i < outside.size(); ++i)
        keys[i] = {-std::log(uni(rng)) / weight[i], outside[i]};
    std::sort(keys.begin(), keys.end());
    for (std::size_t i = 0; i < want_extra; ++i) m.keep[keys[i].second] = 1;
    return m;
}

} // namespace

SamplingMask make_mask(std::size_t h, std::size_t w, double target_r,
                       std::size_t center_h, std::size_t center_w,
                       MaskPattern pattern, std::uint64_t seed) {
    if (center_h > h || center_w > w)
        throw ConfigError("make_mask: center block does not fit inside the grid");
    if (target_r < 1.0) throw ConfigError("make_mask: target_r must be >= 1");
    const double r_max = static_cast<double>(h * w) / static_cast<double>(center_h * center_w);
    if (target_r > r_max) {
        std::ostringstream os;
        os << "make_mask: target_r " << target_r << " infeasible; achievable range is [1, "
           << r_max << "] with this center block";
        throw ConfigError(os.str());
    }

    SamplingMask m;
    if (target_r <= 1.0 + 1e-12) {
        m = SamplingMask{h, w, center_h, center_w, std::vector<std::uint8_t>(h * w, 1)};
    } else if (pattern == MaskPattern::Lattice) {
        m = lattice_mask(h, w, target_r, center_h, center_w, seed);
    } else {
        m = vd_random_mask(h, w, target_r, center_h, center_w, seed);
    }

    const double r = m.acceleration();
    if (std::abs(r - target_r) > 0.1 * target_r) {
        std::ostringstream os;
        os << "make_mask: achieved R = " << r << " deviates more than 10% from target "
           << target_r;
        throw ConfigError(os.str());
    }
    return m;
}

CoilSensitivities make_coil_maps(std::size_t n_coils, std::size_t h, std::size_t w,
                                 std::uint64_t seed) {
    if (n_coils == 0) throw ConfigError("make_coil_maps: need at least one coil");
    Rng rng = make_rng(seed, 0x63736dULL);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    CoilSensitivities csm;
    csm.maps.assign(n_coils, ComplexImage(h, w));
    const double hh = static_cast<double>(h), ww = static_cast<double>(w);
    for (std::size_t c = 0; c < n_coils; ++c) {
        // Gaussian bump centered on a ring position, with a mild linear phase.
        const double ang = 2.0 * M_PI * (static_cast<double>(c) + 0.3 * uni(rng)) /
                           static_cast<double>(n_coils);
        const double cy = hh / 2 + 0.38 * hh * std::sin(ang);
        const double cx = ww / 2 + 0.38 * ww * std::cos(ang);
        const double width = 0.55 * std::min(hh, ww) * (0.9 + 0.2 * uni(rng));
        const double py = 0.5 * (uni(rng) - 0.5) / hh, px = 0.5 * (uni(rng) - 0.5) / ww;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
                const double mag = std::exp(-(dy * dy + dx * dx) / (2 * width * width));
                const double phase = 2.0 * M_PI * (py * static_cast<double>(y) +
                                                   px * static_cast<double>(x));
                csm.maps[c](y, x) = std::polar(mag + 0.05, phase);
            }
    }
    // Per-pixel normalization: sum_c |csm_c|^2 = 1.
    for (std::size_t i = 0; i < h * w; ++i) {
        double s = 0;
        for (auto& m : csm.maps) s += std::norm(m[i]);
        const double inv = 1.0 / std::sqrt(s);
        for (auto& m : csm.maps) m[i] *= inv;
    }
    return csm;
}

KSpaceData simulate_acquisition(const ComplexImage& x, const CoilSensitivities& csm,
                                const SamplingMask& mask, double sigma_eps,
                                std::uint64_t seed) {
    KSpaceData y = forward_A(x, csm, mask);
    y.sigma_eps = sigma_eps;
    if (sigma_eps > 0) {
        Rng rng = make_rng(seed, 0x6e6f697365ULL);
        for (auto& coil : y.coils)
            for (std::size_t i = 0; i < coil.size(); ++i)
                if (mask.keep[i]) coil[i] += sigma_eps * circular_gaussian(rng);
    }
    return y;
}

} // namespace sbmri
