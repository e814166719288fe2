#include "sbmri/mri_model.hpp"

#include <cmath>

namespace sbmri {

namespace {

struct Ellipse {
    double cy, cx;     // center, normalized [-1, 1]
    double ry, rx;     // semi-axes, normalized
    double angle;      // radians
    int tissue;        // tissue class index
};

bool inside(const Ellipse& e, double y, double x) {
    const double dy = y - e.cy, dx = x - e.cx;
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    const double u = c * dx + s * dy, v = -s * dx + c * dy;
    return (u * u) / (e.rx * e.rx) + (v * v) / (e.ry * e.ry) <= 1.0;
}

// Distinct monotone intensity lookups per contrast. Tissue 0 is the outer
// shell; higher indices are interior structures.
constexpr int kTissues = 6;
constexpr double kTargetLut[kTissues] = {0.30, 0.95, 0.55, 0.75, 0.40, 0.85};
constexpr double kGuideLut[kTissues] = {0.80, 0.35, 0.90, 0.50, 0.65, 0.25};

} // namespace

PhantomPair make_phantom_pair(std::uint64_t seed, std::size_t h, std::size_t w,
                              double discrepancy) {
    if (discrepancy < 0 || discrepancy > 1)
        throw ConfigError("make_phantom_pair: discrepancy must be in [0, 1]");
    Rng rng = make_rng(seed, 0x7068616eULL);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // Shared geometry: outer shell plus a handful of interior ellipses.
    std::vector<Ellipse> shapes;
    shapes.push_back({0.0, 0.0, 0.82, 0.70, 0.0, 0});
    const int n_inner = 4 + static_cast<int>(uni(rng) * 3.0); // 4..6
    for (int k = 0; k < n_inner; ++k) {
        Ellipse e;
        e.cy = 1.1 * (uni(rng) - 0.5);
        e.cx = 0.9 * (uni(rng) - 0.5);
        e.ry = 0.08 + 0.25 * uni(rng);
        e.rx = 0.08 + 0.25 * uni(rng);
        e.angle = 2.0 * M_PI * uni(rng);
        e.tissue = 1 + static_cast<int>(uni(rng) * (kTissues - 1));
        if (e.tissue >= kTissues) e.tissue = kTissues - 1;
        shapes.push_back(e);
    }

    // Lesions live in exactly one of the two images. At discrepancy = 1 at
    // least one is always present.
    std::vector<Ellipse> lesions;
    std::vector<bool> lesion_in_target;
    const int n_lesion_slots = 3;
    for (int k = 0; k < n_lesion_slots; ++k) {
        const double roll = uni(rng);
        const bool in_target = uni(rng) < 0.5;
        Ellipse e;
        e.cy = 0.9 * (uni(rng) - 0.5);
        e.cx = 0.8 * (uni(rng) - 0.5);
        e.ry = 0.04 + 0.06 * uni(rng);
        e.rx = 0.04 + 0.06 * uni(rng);
        e.angle = 2.0 * M_PI * uni(rng);
        e.tissue = -1;
        const bool present = (k == 0 && discrepancy >= 1.0) || roll < discrepancy;
        if (present && inside(shapes[0], e.cy, e.cx)) {
            lesions.push_back(e);
            lesion_in_target.push_back(in_target);
        }
    }
    if (discrepancy >= 1.0 && lesions.empty()) {
        lesions.push_back({0.2, 0.1, 0.08, 0.08, 0.0, -1});
        lesion_in_target.push_back(true);
    }

    // Smooth phase field shared by both contrasts.
    const double ph_a = 0.6 * (uni(rng) - 0.5), ph_b = 0.6 * (uni(rng) - 0.5);
    const double ph_c = 1.5 * (uni(rng) - 0.5);

    PhantomPair out{ComplexImage(h, w), ComplexImage(h, w)};
    for (std::size_t iy = 0; iy < h; ++iy) {
        for (std::size_t ix = 0; ix < w; ++ix) {
            const double y = 2.0 * (static_cast<double>(iy) + 0.5) / static_cast<double>(h) - 1.0;
            const double x = 2.0 * (static_cast<double>(ix) + 0.5) / static_cast<double>(w) - 1.0;
            if (!inside(shapes[0], y, x)) continue;
            int tissue = shapes[0].tissue;
            for (std::size_t k = 1; k < shapes.size(); ++k)
                if (inside(shapes[k], y, x)) tissue = shapes[k].tissue;
            double mt = kTargetLut[tissue];
            double mg = kGuideLut[tissue];
            for (std::size_t k = 0; k < lesions.size(); ++k) {
                if (!inside(lesions[k], y, x)) continue;
                if (lesion_in_target[k]) mt = 1.0; else mg = 1.0;
            }
            const double phase = ph_c * std::sin(M_PI * (ph_a * y + ph_b * x)) +
                                 0.8 * (ph_a * y * y - ph_b * x * x);
            const cplx ph = std::polar(1.0, phase);
            out.target(iy, ix) = mt * ph;
            out.guide(iy, ix) = mg * ph;
        }
    }
    return out;
}

} // namespace sbmri
