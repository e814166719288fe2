#pragma once

#include "sbmri/complex_image.hpp"

namespace sbmri {

// Unitary 2D DFT (Parseval-preserving: both directions scaled by 1/sqrt(H*W)).
ComplexImage fft2(const ComplexImage& x);
ComplexImage ifft2(const ComplexImage& x);

} // namespace sbmri
