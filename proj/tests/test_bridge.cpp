#include <doctest.h>

#include <cmath>

#include "sbmri/bridge.hpp"

using namespace sbmri;

namespace {

ComplexImage constant_image(std::size_t h, std::size_t w, cplx v) {
    return ComplexImage(h, w, v);
}

ComplexImage random_image(std::size_t h, std::size_t w, Rng& rng) {
    return gaussian_image(h, w, rng);
}

} // namespace

TEST_CASE("sample_intermediate hits the endpoints exactly") {
    const auto s = make_schedule(1e-5, 0.3, 20);
    Rng rng = make_rng(1);
    const ComplexImage x0 = random_image(8, 8, rng), x1 = random_image(8, 8, rng);
    const ComplexImage at0 = bridge::sample_intermediate(s, x0, x1, 0, rng);
    const ComplexImage atN = bridge::sample_intermediate(s, x0, x1, 20, rng);
    CHECK((at0 - x0).norm() == 0.0);
    CHECK((atN - x1).norm() == 0.0);
}

TEST_CASE("sample_intermediate matches the closed-form moments at the midpoint") {
    const auto s = make_schedule(1e-5, 0.3, 10);
    const std::size_t n = 5;
    const ComplexImage x0 = constant_image(8, 8, 0.0), x1 = constant_image(8, 8, 2.0);

    const double s2 = s.sigma_sq(n), sb2 = s.sigma_bar_sq(n);
    const double var = s2 * sb2 / (s2 + sb2);

    Rng rng = make_rng(7);
    const std::size_t draws = 10000;
    double mean_acc = 0, var_acc = 0;
    const std::size_t total = draws * 64;
    for (std::size_t k = 0; k < draws; ++k) {
        const ComplexImage x = bridge::sample_intermediate(s, x0, x1, n, rng);
        for (std::size_t i = 0; i < x.size(); ++i) {
            mean_acc += x[i].real();
            var_acc += std::norm(x[i] - cplx{1.0, 0.0});
        }
    }
    const double mean = mean_acc / static_cast<double>(total);
    const double emp_var = var_acc / static_cast<double>(total);
    // pixels within one draw are independent, so aggregate freely
    const double se = std::sqrt(var / 2.0 / static_cast<double>(total));
    CHECK(std::abs(mean - 1.0) <= 3.0 * se);
    CHECK(std::abs(emp_var - var) <= 0.05 * var);
}

TEST_CASE("predict_x0 inverts the training target") {
    const auto s = make_schedule(1e-5, 0.3, 50);
    Rng rng = make_rng(3);
    const ComplexImage x0 = random_image(16, 16, rng), x1 = random_image(16, 16, rng);

    SUBCASE("zero eps returns the state") {
        const ComplexImage x = random_image(16, 16, rng);
        const ComplexImage out = bridge::predict_x0(s, x, ComplexImage(16, 16), 7);
        CHECK((out - x).norm() == 0.0);
    }
    SUBCASE("algebraic inverse of the mean path") {
        const std::size_t n = 23;
        const double s2 = s.sigma_sq(n), sb2 = s.sigma_bar_sq(n);
        ComplexImage x_n(16, 16);
        for (std::size_t i = 0; i < x_n.size(); ++i)
            x_n[i] = (sb2 * x0[i] + s2 * x1[i]) / (s2 + sb2);
        ComplexImage eps(16, 16);
        const double inv_sigma = 1.0 / s.sigma(n);
        for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (x_n[i] - x0[i]) * inv_sigma;
        const ComplexImage rec = bridge::predict_x0(s, x_n, eps, n);
        CHECK((rec - x0).norm() <= 1e-12 * x0.norm());
    }
    SUBCASE("round trip re-adds exactly") {
        const std::size_t n = 31;
        const ComplexImage x_n = random_image(16, 16, rng);
        const ComplexImage eps = random_image(16, 16, rng);
        ComplexImage back = bridge::predict_x0(s, x_n, eps, n);
        back.axpy(s.sigma(n), eps);
        CHECK((back - x_n).norm() <= 1e-12 * x_n.norm());
    }
    SUBCASE("n = 0 is rejected") {
        CHECK_THROWS_AS(bridge::predict_x0(s, x0, x1, 0), UsageError);
    }
}

TEST_CASE("posterior_step weights and edge behavior") {
    const auto s = make_schedule(1e-5, 0.3, 40);
    Rng rng = make_rng(11);
    const ComplexImage x0 = random_image(8, 8, rng), x_next = random_image(8, 8, rng);

    SUBCASE("n = 0 returns x0 exactly") {
        const ComplexImage out = bridge::posterior_step(s, x0, x_next, 0, rng, true);
        CHECK((out - x0).norm() == 0.0);
    }
    SUBCASE("constant inputs are a fixed point") {
        const ComplexImage c = constant_image(8, 8, {1.5, -0.5});
        const ComplexImage out = bridge::posterior_step(s, c, c, 17, rng, true);
        CHECK((out - c).norm() <= 1e-14 * c.norm());
    }
    SUBCASE("deterministic step equals independently recomputed affine combination") {
        for (std::size_t n : {1u, 5u, 20u, 39u}) {
            // second route: weights from stored integrals, applied pixelwise
            const double a2 = s.sigma_sq(n + 1) - s.sigma_sq(n);
            const double s2 = s.sigma_sq(n);
            ComplexImage expect(8, 8);
            for (std::size_t i = 0; i < expect.size(); ++i)
                expect[i] = (a2 * x0[i] + s2 * x_next[i]) / (a2 + s2);
            const ComplexImage out = bridge::posterior_step(s, x0, x_next, n, rng, true);
            CHECK((out - expect).norm() <= 1e-13 * expect.norm());
        }
    }
    SUBCASE("posterior weights sum to one") {
        for (std::size_t n = 0; n < 40; ++n) {
            const double a2 = s.alpha_sq(n), s2 = s.sigma_sq(n);
            CHECK(std::abs(a2 / (a2 + s2) + s2 / (a2 + s2) - 1.0) <= 1e-15);
        }
    }
    SUBCASE("n out of range") {
        CHECK_THROWS_AS(bridge::posterior_step(s, x0, x_next, 40, rng, true), UsageError);
    }
}

TEST_CASE("rescale_noise scales norms by sigma ratio") {
    const auto s = make_schedule(1e-5, 0.3, 30);
    Rng rng = make_rng(5);
    SUBCASE("zero stays zero") {
        const ComplexImage out = bridge::rescale_noise(s, ComplexImage(8, 8), 4);
        CHECK(out.norm() == 0.0);
    }
    SUBCASE("constant-beta ratio is sqrt(t ratio)") {
        const auto flat = make_schedule(1.0, 1.0, 10);
        const ComplexImage eps = constant_image(8, 8, 1.0);
        const ComplexImage out = bridge::rescale_noise(flat, eps, 3);
        const double expect = std::sqrt(flat.t(4) / flat.t(3));
        CHECK(std::abs(out[0].real() - expect) <= 1e-14);
    }
    SUBCASE("norm scaling on random noise") {
        for (std::size_t n : {1u, 2u, 13u, 29u}) {
            const ComplexImage eps = random_image(16, 16, rng);
            const ComplexImage out = bridge::rescale_noise(s, eps, n);
            CHECK(out.norm() ==
                  doctest::Approx(eps.norm() * s.sigma(n + 1) / s.sigma(n)).epsilon(1e-13));
        }
    }
    SUBCASE("n = 0 rejected") {
        CHECK_THROWS_AS(bridge::rescale_noise(s, ComplexImage(8, 8), 0), UsageError);
    }
}

TEST_CASE("one-step inversion round trip is exact") {
    const auto s = make_schedule(1e-5, 0.3, 64);
    Rng outer = make_rng(2024);
    std::uniform_int_distribution<std::size_t> pick_n(1, 63);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = pick_n(outer);
        const ComplexImage x_n = gaussian_image(8, 8, outer);
        const ComplexImage eps = gaussian_image(8, 8, outer);

        const ComplexImage x_up = bridge::inversion_step(s, x_n, eps, n);
        ComplexImage x0 = x_up;
        x0.axpy(-s.sigma(n + 1), bridge::rescale_noise(s, eps, n));
        Rng dummy = make_rng(0);
        const ComplexImage back = bridge::posterior_step(s, x0, x_up, n, dummy, true);
        CHECK((back - x_n).norm() <= 1e-10 * x_n.norm());
    }
}

TEST_CASE("inversion coefficient near the top of the bridge") {
    const auto s = make_schedule(1e-5, 0.3, 64);
    const std::size_t n = 63;
    const double a2 = s.alpha_sq(n), s2 = s.sigma_sq(n);
    const double expect = a2 * s.sigma_sq(64) / (s.sigma(n) * (a2 + s2));
    const ComplexImage x(8, 8), eps(8, 8, cplx{1.0, 0.0});
    const ComplexImage out = bridge::inversion_step(s, x, eps, n);
    CHECK(out[0].real() == doctest::Approx(expect).epsilon(1e-13));
    CHECK_THROWS_AS(bridge::inversion_step(s, x, eps, 0), UsageError);
    CHECK_THROWS_AS(bridge::inversion_step(s, x, eps, 64), UsageError);
}

TEST_CASE("deterministic posterior chain with true x0 telescopes to x0") {
    const auto s = make_schedule(1e-5, 0.3, 25);
    Rng rng = make_rng(9);
    const ComplexImage x0 = gaussian_image(8, 8, rng);
    ComplexImage x = gaussian_image(8, 8, rng); // x_N = arbitrary guide
    for (std::size_t n = 25; n >= 1; --n)
        x = bridge::posterior_step(s, x0, x, n - 1, rng, true);
    CHECK((x - x0).norm() <= 1e-12 * x0.norm());
}
