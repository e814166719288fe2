#pragma once

#include <cstddef>
#include <vector>

namespace sbmri::nn {

// Dense C x H x W activation buffer, row-major within each channel.
struct Tensor {
    std::size_t c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(std::size_t c_, std::size_t h_, std::size_t w_) : c(c_), h(h_), w(w_), v(c_ * h_ * w_, 0.0) {}

    double* chan(std::size_t ci) { return v.data() + ci * h * w; }
    const double* chan(std::size_t ci) const { return v.data() + ci * h * w; }
    std::size_t plane() const { return h * w; }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

// 3x3 same-padding convolution. Weights laid out [out][in][ky][kx], bias [out].
void conv3x3_forward(const Tensor& in, Tensor& out, const double* w, const double* b,
                     std::size_t in_ch, std::size_t out_ch);

// Accumulates dW/db into gw/gb and writes the input gradient into gin.
void conv3x3_backward(const Tensor& in, const Tensor& gout, Tensor& gin, double* gw, double* gb,
                      const double* w, std::size_t in_ch, std::size_t out_ch);

struct GroupNormCache {
    std::vector<double> mean, inv_std; // per group
    Tensor xhat;
};

void groupnorm_forward(const Tensor& in, Tensor& out, const double* gamma, const double* beta,
                       std::size_t groups, GroupNormCache& cache);

void groupnorm_backward(const Tensor& gout, Tensor& gin, double* ggamma, double* gbeta,
                        const double* gamma, std::size_t groups, const GroupNormCache& cache);

void silu_forward(const Tensor& in, Tensor& out);
void silu_backward(const Tensor& in, const Tensor& gout, Tensor& gin);

} // namespace sbmri::nn
