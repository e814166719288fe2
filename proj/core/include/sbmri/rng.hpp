#pragma once

#include <cstdint>
#include <random>

#include "sbmri/complex_image.hpp"

namespace sbmri {

using Rng = std::mt19937_64;

// splitmix64-style mixing so derived streams are decorrelated.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(mix_seed(seed, stream));
}

// Circular complex Gaussian: real and imaginary parts are independent
// N(0, 1/2) so that E|z|^2 = 1.
inline cplx circular_gaussian(Rng& rng) {
    static constexpr double half = 0.7071067811865476; // 1/sqrt(2)
    std::normal_distribution<double> n(0.0, 1.0);
    double re = n(rng);
    double im = n(rng);
    return {re * half, im * half};
}

inline ComplexImage gaussian_image(std::size_t h, std::size_t w, Rng& rng) {
    ComplexImage z(h, w);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = circular_gaussian(rng);
    return z;
}

} // namespace sbmri
