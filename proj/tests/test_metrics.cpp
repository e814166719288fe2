#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sbmri/metrics.hpp"
#include "sbmri/rng.hpp"

using namespace sbmri;

TEST_CASE("nmse basics") {
    Rng rng = make_rng(1);
    const ComplexImage ref = gaussian_image(16, 16, rng);
    CHECK(nmse(ref, ref) == 0.0);
    CHECK(nmse(ComplexImage(16, 16), ref) == doctest::Approx(1.0).epsilon(1e-12));

    ComplexImage scaled = ref;
    scaled *= 1.1;
    CHECK(nmse(scaled, ref) == doctest::Approx(0.01).epsilon(1e-10));

    CHECK_THROWS_AS(nmse(ref, ComplexImage(16, 16)), UsageError);
}

TEST_CASE("psnr basics and dual implementation") {
    Rng rng = make_rng(2);
    const ComplexImage ref = gaussian_image(16, 16, rng);
    CHECK(std::isinf(psnr(ref, ref)));

    SUBCASE("MSE equal to peak^2 gives 0 dB") {
        ComplexImage r2(2, 2), x2(2, 2);
        r2[0] = 1.0; // peak 1, other pixels 0
        x2[0] = 0.0;
        x2[1] = 1.0;
        x2[2] = 1.0;
        x2[3] = 1.0;
        // per-pixel squared error = 1 everywhere -> MSE = 1 = peak^2
        CHECK(psnr(x2, r2) == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("agrees with an independently coded route") {
        for (int t = 0; t < 10; ++t) {
            const ComplexImage a = gaussian_image(16, 16, rng);
            const ComplexImage b = gaussian_image(16, 16, rng);
            // route 2: 20 log10(peak) - 10 log10(MSE)
            double peak = 0, mse = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                peak = std::max(peak, std::abs(b[i]));
                const double d = std::abs(a[i]) - std::abs(b[i]);
                mse += d * d;
            }
            mse /= static_cast<double>(a.size());
            const double oracle = 20.0 * std::log10(peak) - 10.0 * std::log10(mse);
            CHECK(psnr(a, b) == doctest::Approx(oracle).epsilon(1e-9));
        }
    }
}

TEST_CASE("ssim basics") {
    Rng rng = make_rng(3);
    const ComplexImage ref = gaussian_image(32, 32, rng);
    CHECK(ssim(ref, ref) == doctest::Approx(1.0).epsilon(1e-12));

    SUBCASE("constant images reduce to the luminance term") {
        const double a = 0.4, b = 0.9;
        const ComplexImage xa(32, 32, a), xb(32, 32, b);
        const double c1 = (0.01 * b) * (0.01 * b);
        const double expect = (2 * a * b + c1) / (a * a + b * b + c1);
        CHECK(ssim(xa, xb) == doctest::Approx(expect).epsilon(1e-10));
    }

    SUBCASE("noise monotonically degrades ssim") {
        ComplexImage base(32, 32);
        for (std::size_t y = 0; y < 32; ++y)
            for (std::size_t x = 0; x < 32; ++x)
                base(y, x) = std::sin(0.3 * static_cast<double>(y)) +
                             std::cos(0.2 * static_cast<double>(x)) + 2.0;
        double prev = 1.1;
        for (int level = 1; level <= 10; ++level) {
            // common noise field scaled up per level keeps the comparison clean
            Rng noise_rng = make_rng(99);
            ComplexImage noisy = base;
            const double amp = 0.03 * level;
            for (std::size_t i = 0; i < noisy.size(); ++i)
                noisy[i] += amp * circular_gaussian(noise_rng);
            const double s = ssim(noisy, base);
            CHECK(s < prev);
            prev = s;
        }
    }
}

TEST_CASE("nmse and psnr are permutation covariant") {
    Rng rng = make_rng(4);
    const ComplexImage a = gaussian_image(16, 16, rng);
    const ComplexImage b = gaussian_image(16, 16, rng);

    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);

    ComplexImage pa(16, 16), pb(16, 16);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        pa[i] = a[perm[i]];
        pb[i] = b[perm[i]];
    }
    CHECK(nmse(pa, pb) == doctest::Approx(nmse(a, b)).epsilon(1e-14));
    CHECK(psnr(pa, pb) == doctest::Approx(psnr(a, b)).epsilon(1e-14));
}

TEST_CASE("nmse zero iff magnitudes match") {
    ComplexImage a(4, 4), b(4, 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::polar(1.0 + static_cast<double>(i), 0.3);
        b[i] = std::polar(1.0 + static_cast<double>(i), -1.2); // same magnitude, any phase
    }
    CHECK(nmse(a, b) <= 1e-28); // |polar()| rounds, so not exactly zero
    a[3] *= 1.01;
    CHECK(nmse(a, b) > 0.0);
}
