#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sbmri/fft.hpp"
#include "sbmri/mri_model.hpp"

using namespace sbmri;

namespace {

CoilSensitivities uniform_single_coil(std::size_t h, std::size_t w) {
    CoilSensitivities csm;
    csm.maps.emplace_back(h, w, cplx{1.0, 0.0});
    return csm;
}

SamplingMask full_mask(std::size_t h, std::size_t w) {
    return SamplingMask{h, w, h, w, std::vector<std::uint8_t>(h * w, 1)};
}

cplx kspace_dot(const KSpaceData& a, const KSpaceData& b) {
    cplx s = 0;
    for (std::size_t c = 0; c < a.coils.size(); ++c) s += dot(a.coils[c], b.coils[c]);
    return s;
}

// Brute-force 2D DFT for the single-atom oracle (unitary convention).
ComplexImage dft2_bruteforce(const ComplexImage& x, int sign) {
    const std::size_t h = x.height(), w = x.width();
    ComplexImage out(h, w);
    const double scale = 1.0 / std::sqrt(static_cast<double>(h * w));
    for (std::size_t ky = 0; ky < h; ++ky)
        for (std::size_t kx = 0; kx < w; ++kx) {
            cplx acc = 0;
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t xx = 0; xx < w; ++xx) {
                    const double ph = sign * 2.0 * M_PI *
                                      (static_cast<double>(ky * y) / static_cast<double>(h) +
                                       static_cast<double>(kx * xx) / static_cast<double>(w));
                    acc += x(y, xx) * std::polar(1.0, ph);
                }
            out(ky, kx) = acc * scale;
        }
    return out;
}

} // namespace

TEST_CASE("unitary fft preserves energy and matches brute force") {
    Rng rng = make_rng(42);
    const ComplexImage x = gaussian_image(8, 8, rng);
    const ComplexImage k = fft2(x);
    CHECK(k.norm() == doctest::Approx(x.norm()).epsilon(1e-12));
    const ComplexImage oracle = dft2_bruteforce(x, -1);
    CHECK((k - oracle).norm() <= 1e-11 * x.norm());
    const ComplexImage back = ifft2(k);
    CHECK((back - x).norm() <= 1e-12 * x.norm());
}

TEST_CASE("forward_A with trivial model is the unitary FFT") {
    Rng rng = make_rng(1);
    const ComplexImage x = gaussian_image(16, 16, rng);
    const auto csm = uniform_single_coil(16, 16);
    const auto mask = full_mask(16, 16);
    const KSpaceData y = forward_A(x, csm, mask);
    CHECK(y.norm() == doctest::Approx(x.norm()).epsilon(1e-12));
    CHECK((y.coils[0] - fft2(x)).norm() <= 1e-12 * x.norm());

    const KSpaceData y0 = forward_A(ComplexImage(16, 16), csm, mask);
    CHECK(y0.norm() == 0.0);
}

TEST_CASE("forward and adjoint pass the dot-product test") {
    Rng rng = make_rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t h = 16, w = 16, coils = 1 + trial % 4;
        const auto csm = make_coil_maps(coils, h, w, 100 + trial);
        const auto mask = make_mask(h, w, 2.0 + trial % 3, 6, 6,
                                    trial % 2 ? MaskPattern::Lattice
                                              : MaskPattern::VariableDensity,
                                    trial);
        const ComplexImage x = gaussian_image(h, w, rng);
        KSpaceData yr;
        yr.mask = mask;
        for (std::size_t c = 0; c < coils; ++c) yr.coils.push_back(gaussian_image(h, w, rng));

        const KSpaceData ax = forward_A(x, csm, mask);
        const ComplexImage aty = adjoint_A(yr, csm, mask);
        const cplx lhs = kspace_dot(ax, yr);
        const cplx rhs = dot(x, aty);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * x.norm() * yr.norm());
    }
}

TEST_CASE("A^H A is identity on full mask with normalized coils") {
    Rng rng = make_rng(5);
    const auto csm = make_coil_maps(4, 32, 32, 9);
    const auto mask = full_mask(32, 32);
    const ComplexImage x = gaussian_image(32, 32, rng);
    const ComplexImage back = adjoint_A(forward_A(x, csm, mask), csm, mask);
    CHECK((back - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("A^H A is Hermitian positive semidefinite") {
    Rng rng = make_rng(15);
    const auto csm = make_coil_maps(3, 16, 16, 2);
    const auto mask = make_mask(16, 16, 3.0, 6, 6, MaskPattern::VariableDensity, 3);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexImage x = gaussian_image(16, 16, rng);
        const ComplexImage ax = adjoint_A(forward_A(x, csm, mask), csm, mask);
        const cplx q = dot(ax, x);
        CHECK(std::abs(q.imag()) <= 1e-10 * std::abs(q));
        CHECK(q.real() >= -1e-12);
    }
}

TEST_CASE("single sampled point produces a Fourier atom") {
    const std::size_t h = 8, w = 8;
    const auto csm = uniform_single_coil(h, w);
    SamplingMask mask{h, w, 1, 1, std::vector<std::uint8_t>(h * w, 0)};
    mask.keep[3 * w + 5] = 1;
    KSpaceData y;
    y.mask = mask;
    y.coils.emplace_back(h, w);
    y.coils[0](3, 5) = {1.0, 0.0};

    const ComplexImage img = adjoint_A(y, csm, mask);
    ComplexImage k(h, w);
    k(3, 5) = {1.0, 0.0};
    const ComplexImage oracle = dft2_bruteforce(k, +1);
    CHECK((img - oracle).norm() <= 1e-12);
}

TEST_CASE("masking is idempotent through the forward model") {
    Rng rng = make_rng(21);
    const auto csm = make_coil_maps(2, 16, 16, 4);
    const auto mask = make_mask(16, 16, 4.0, 4, 4, MaskPattern::Lattice, 0);
    const ComplexImage x = gaussian_image(16, 16, rng);
    KSpaceData y = forward_A(x, csm, mask);
    KSpaceData y2 = y;
    for (auto& c : y2.coils)
        for (std::size_t i = 0; i < c.size(); ++i)
            if (!mask.keep[i]) c[i] = 0;
    for (std::size_t c = 0; c < y.coils.size(); ++c)
        CHECK((y.coils[c] - y2.coils[c]).norm() == 0.0);
}

TEST_CASE("make_mask basics") {
    SUBCASE("target R = 1 gives the full mask") {
        const auto m = make_mask(64, 64, 1.0, 16, 16, MaskPattern::Lattice, 0);
        CHECK(m.count() == 64 * 64);
        CHECK(m.acceleration() == 1.0);
    }
    SUBCASE("center block is always fully sampled") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto m = make_mask(64, 64, 6.0, 16, 16, MaskPattern::VariableDensity, seed);
            for (std::size_t y = 24; y < 40; ++y)
                for (std::size_t x = 24; x < 40; ++x) CHECK(m.sampled(y, x));
        }
    }
    SUBCASE("reported R equals direct count") {
        const auto m = make_mask(64, 64, 6.0, 16, 16, MaskPattern::Lattice, 0);
        const double r = static_cast<double>(64 * 64) / static_cast<double>(m.count());
        CHECK(m.acceleration() == doctest::Approx(r).epsilon(1e-15));
        CHECK(std::abs(r - 6.0) <= 0.6);
    }
    SUBCASE("infeasible target is a configuration error") {
        CHECK_THROWS_AS(make_mask(64, 64, 64.0, 32, 32, MaskPattern::Lattice, 0), ConfigError);
        CHECK_THROWS_AS(make_mask(64, 64, 0.5, 8, 8, MaskPattern::Lattice, 0), ConfigError);
    }
}

TEST_CASE("coil maps are normalized and smooth") {
    SUBCASE("single coil normalizes to unit magnitude") {
        const auto csm = make_coil_maps(1, 32, 32, 0);
        for (std::size_t i = 0; i < csm.maps[0].size(); ++i)
            CHECK(std::abs(csm.maps[0][i]) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("per-pixel norm is one for random seeds") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto csm = make_coil_maps(4, 32, 32, seed);
            for (std::size_t i = 0; i < 32 * 32; ++i) {
                double s = 0;
                for (const auto& m : csm.maps) s += std::norm(m[i]);
                CHECK(std::abs(s - 1.0) <= 1e-6);
            }
        }
    }
    SUBCASE("maps are spatially smooth") {
        double worst = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto csm = make_coil_maps(4, 64, 64, seed);
            for (const auto& m : csm.maps)
                for (std::size_t y = 0; y + 1 < 64; ++y)
                    for (std::size_t x = 0; x + 1 < 64; ++x) {
                        worst = std::max(worst, std::abs(m(y + 1, x) - m(y, x)));
                        worst = std::max(worst, std::abs(m(y, x + 1) - m(y, x)));
                    }
        }
        CHECK(worst < 0.25); // seed-independent smoothness bound
    }
}

TEST_CASE("phantom pairs share geometry but differ in contrast") {
    SUBCASE("discrepancy 0 gives identical support") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto p = make_phantom_pair(seed, 64, 64, 0.0);
            for (std::size_t i = 0; i < p.target.size(); ++i)
                CHECK((std::abs(p.target[i]) > 0) == (std::abs(p.guide[i]) > 0));
        }
    }
    SUBCASE("discrepancy 1 differs somewhere in magnitude structure") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto p0 = make_phantom_pair(seed, 64, 64, 0.0);
            const auto p1 = make_phantom_pair(seed, 64, 64, 1.0);
            // the lesion flips intensity in exactly one of the two images
            double delta_t = 0, delta_g = 0;
            for (std::size_t i = 0; i < p0.target.size(); ++i) {
                delta_t += std::abs(std::abs(p1.target[i]) - std::abs(p0.target[i]));
                delta_g += std::abs(std::abs(p1.guide[i]) - std::abs(p0.guide[i]));
            }
            CHECK(delta_t + delta_g > 0);
        }
    }
    SUBCASE("intensity histograms differ while edges overlap") {
        // Kolmogorov-Smirnov over magnitudes inside the support, Sobel-style
        // edge IoU over the shared geometry; thresholds frozen.
        double min_ks = 1e9, min_iou = 1e9;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto p = make_phantom_pair(seed, 64, 64, 0.0);
            std::vector<double> mt, mg;
            for (std::size_t i = 0; i < p.target.size(); ++i) {
                if (std::abs(p.target[i]) > 0) mt.push_back(std::abs(p.target[i]));
                if (std::abs(p.guide[i]) > 0) mg.push_back(std::abs(p.guide[i]));
            }
            std::sort(mt.begin(), mt.end());
            std::sort(mg.begin(), mg.end());
            double ks = 0;
            for (double q = 0.0; q <= 1.0; q += 1e-3) {
                const double v = mt[static_cast<std::size_t>(q * (mt.size() - 1))];
                const auto lo = std::lower_bound(mg.begin(), mg.end(), v);
                const double cdf_g =
                    static_cast<double>(lo - mg.begin()) / static_cast<double>(mg.size());
                ks = std::max(ks, std::abs(q - cdf_g));
            }
            min_ks = std::min(min_ks, ks);

            auto edges = [](const ComplexImage& img) {
                std::vector<bool> e(img.size(), false);
                for (std::size_t y = 1; y + 1 < img.height(); ++y)
                    for (std::size_t x = 1; x + 1 < img.width(); ++x) {
                        const double gy =
                            std::abs(img(y + 1, x)) - std::abs(img(y - 1, x));
                        const double gx =
                            std::abs(img(y, x + 1)) - std::abs(img(y, x - 1));
                        e[y * img.width() + x] = std::sqrt(gy * gy + gx * gx) > 0.08;
                    }
                return e;
            };
            const auto et = edges(p.target), eg = edges(p.guide);
            std::size_t inter = 0, uni = 0;
            for (std::size_t i = 0; i < et.size(); ++i) {
                inter += (et[i] && eg[i]);
                uni += (et[i] || eg[i]);
            }
            min_iou = std::min(min_iou, static_cast<double>(inter) / static_cast<double>(uni));
        }
        CHECK(min_ks > 0.1);
        CHECK(min_iou > 0.8);
    }
}

TEST_CASE("simulate_acquisition noise model") {
    const auto p = make_phantom_pair(0, 32, 32, 0.0);
    const auto csm = make_coil_maps(4, 32, 32, 0);
    const auto mask = make_mask(32, 32, 4.0, 8, 8, MaskPattern::Lattice, 0);

    SUBCASE("sigma_eps = 0 equals the clean forward model") {
        const KSpaceData clean = forward_A(p.target, csm, mask);
        const KSpaceData sim = simulate_acquisition(p.target, csm, mask, 0.0, 3);
        for (std::size_t c = 0; c < clean.coils.size(); ++c)
            CHECK((clean.coils[c] - sim.coils[c]).norm() == 0.0);
    }
    SUBCASE("unsampled entries stay exactly zero") {
        const KSpaceData sim = simulate_acquisition(p.target, csm, mask, 0.05, 3);
        for (const auto& c : sim.coils)
            for (std::size_t i = 0; i < c.size(); ++i)
                if (!mask.keep[i]) CHECK(c[i] == cplx{0.0, 0.0});
    }
    SUBCASE("noise energy matches sigma_eps^2 x samples x coils") {
        const double sigma_eps = 0.05;
        const KSpaceData clean = forward_A(p.target, csm, mask);
        const double expect =
            sigma_eps * sigma_eps * static_cast<double>(mask.count() * csm.coils());
        double acc = 0;
        const int seeds = 100;
        for (int s = 0; s < seeds; ++s) {
            const KSpaceData sim = simulate_acquisition(p.target, csm, mask, sigma_eps, s);
            for (std::size_t c = 0; c < sim.coils.size(); ++c)
                for (std::size_t i = 0; i < sim.coils[c].size(); ++i)
                    acc += std::norm(sim.coils[c][i] - clean.coils[c][i]);
        }
        acc /= seeds;
        CHECK(std::abs(acc - expect) <= 0.1 * expect);
    }
}
