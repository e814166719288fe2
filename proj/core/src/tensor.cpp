#include "tensor.hpp"

#include <cmath>

namespace sbmri::nn {

namespace {

// out_row[x] += w0 in_row[x-1] + w1 in_row[x] + w2 in_row[x+1], zero-padded.
inline void stencil_row(double* __restrict__ out_row, const double* __restrict__ in_row,
                        long w_px, double w0, double w1, double w2) {
    out_row[0] += w1 * in_row[0] + w2 * in_row[1];
    for (long x = 1; x < w_px - 1; ++x)
        out_row[x] += w0 * in_row[x - 1] + w1 * in_row[x] + w2 * in_row[x + 1];
    out_row[w_px - 1] += w0 * in_row[w_px - 2] + w1 * in_row[w_px - 1];
}

} // namespace

void conv3x3_forward(const Tensor& in, Tensor& out, const double* w, const double* b,
                     std::size_t in_ch, std::size_t out_ch) {
    const long H = static_cast<long>(in.h), W = static_cast<long>(in.w);
    for (std::size_t co = 0; co < out_ch; ++co) {
        double* op = out.chan(co);
        const double bias = b[co];
        for (long i = 0; i < H * W; ++i) op[i] = bias;
        for (std::size_t ci = 0; ci < in_ch; ++ci) {
            const double* ip = in.chan(ci);
            const double* k = w + (co * in_ch + ci) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const long dy = ky - 1;
                const long y0 = std::max(0L, -dy), y1 = std::min(H, H - dy);
                for (long y = y0; y < y1; ++y)
                    stencil_row(op + y * W, ip + (y + dy) * W, W, k[ky * 3], k[ky * 3 + 1],
                                k[ky * 3 + 2]);
            }
        }
    }
}

void conv3x3_backward(const Tensor& in, const Tensor& gout, Tensor& gin, double* gw, double* gb,
                      const double* w, std::size_t in_ch, std::size_t out_ch) {
    const long H = static_cast<long>(in.h), W = static_cast<long>(in.w);
    gin.zero();
    for (std::size_t co = 0; co < out_ch; ++co) {
        const double* gp = gout.chan(co);
        double gbias = 0;
        for (long i = 0; i < H * W; ++i) gbias += gp[i];
        gb[co] += gbias;
        for (std::size_t ci = 0; ci < in_ch; ++ci) {
            const double* ip = in.chan(ci);
            double* gi = gin.chan(ci);
            const double* k = w + (co * in_ch + ci) * 9;
            // input gradient: correlate gout with the flipped kernel
            for (int ky = 0; ky < 3; ++ky) {
                const long dy = ky - 1;
                const long y0 = std::max(0L, dy), y1 = std::min(H, H + dy);
                for (long y = y0; y < y1; ++y)
                    stencil_row(gi + y * W, gp + (y - dy) * W, W, k[ky * 3 + 2],
                                k[ky * 3 + 1], k[ky * 3]);
            }
            // weight gradient: one fused pass per kernel row
            for (int ky = 0; ky < 3; ++ky) {
                const long dy = ky - 1;
                const long y0 = std::max(0L, -dy), y1 = std::min(H, H - dy);
                double g0 = 0, g1 = 0, g2 = 0;
                for (long y = y0; y < y1; ++y) {
                    const double* __restrict__ grow = gp + y * W;
                    const double* __restrict__ irow = ip + (y + dy) * W;
                    for (long x = 1; x < W - 1; ++x) {
                        g0 += grow[x] * irow[x - 1];
                        g1 += grow[x] * irow[x];
                        g2 += grow[x] * irow[x + 1];
                    }
                    g1 += grow[0] * irow[0] + grow[W - 1] * irow[W - 1];
                    g2 += grow[0] * irow[1];
                    g0 += grow[W - 1] * irow[W - 2];
                }
                double* gwk = gw + ((co * in_ch + ci) * 3 + ky) * 3;
                gwk[0] += g0;
                gwk[1] += g1;
                gwk[2] += g2;
            }
        }
    }
}

void groupnorm_forward(const Tensor& in, Tensor& out, const double* gamma, const double* beta,
                       std::size_t groups, GroupNormCache& cache) {
    constexpr double eps = 1e-5;
    const std::size_t cpg = in.c / groups;
    const std::size_t plane = in.plane();
    const std::size_t gsize = cpg * plane;
    cache.mean.assign(groups, 0.0);
    cache.inv_std.assign(groups, 0.0);
    cache.xhat = Tensor(in.c, in.h, in.w);

    for (std::size_t g = 0; g < groups; ++g) {
        const double* base = in.v.data() + g * gsize;
        double mean = 0;
        for (std::size_t i = 0; i < gsize; ++i) mean += base[i];
        mean /= static_cast<double>(gsize);
        double var = 0;
        for (std::size_t i = 0; i < gsize; ++i) {
            const double d = base[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(gsize);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        cache.mean[g] = mean;
        cache.inv_std[g] = inv_std;

        double* xh = cache.xhat.v.data() + g * gsize;
        for (std::size_t i = 0; i < gsize; ++i) xh[i] = (base[i] - mean) * inv_std;
        for (std::size_t cc = 0; cc < cpg; ++cc) {
            const std::size_t ch = g * cpg + cc;
            const double gm = gamma[ch], bt = beta[ch];
            const double* xhc = cache.xhat.chan(ch);
            double* oc = out.chan(ch);
            for (std::size_t i = 0; i < plane; ++i) oc[i] = gm * xhc[i] + bt;
        }
    }
}

void groupnorm_backward(const Tensor& gout, Tensor& gin, double* ggamma, double* gbeta,
                        const double* gamma, std::size_t groups, const GroupNormCache& cache) {
    const std::size_t cpg = gout.c / groups;
    const std::size_t plane = gout.plane();
    const std::size_t gsize = cpg * plane;

    for (std::size_t g = 0; g < groups; ++g) {
        // Per-channel parameter grads and the two group-wide means.
        double sum_gdy = 0, sum_gdy_xhat = 0;
        for (std::size_t cc = 0; cc < cpg; ++cc) {
            const std::size_t ch = g * cpg + cc;
            const double* go = gout.chan(ch);
            const double* xh = cache.xhat.chan(ch);
            double dg = 0, db = 0;
            for (std::size_t i = 0; i < plane; ++i) {
                dg += go[i] * xh[i];
                db += go[i];
            }
            ggamma[ch] += dg;
            gbeta[ch] += db;
            sum_gdy += gamma[ch] * db;
            sum_gdy_xhat += gamma[ch] * dg;
        }
        const double mean_gdy = sum_gdy / static_cast<double>(gsize);
        const double mean_gdy_xhat = sum_gdy_xhat / static_cast<double>(gsize);
        const double inv_std = cache.inv_std[g];
        for (std::size_t cc = 0; cc < cpg; ++cc) {
            const std::size_t ch = g * cpg + cc;
            const double* go = gout.chan(ch);
            const double* xh = cache.xhat.chan(ch);
            double* gi = gin.chan(ch);
            const double gm = gamma[ch];
            for (std::size_t i = 0; i < plane; ++i)
                gi[i] = inv_std * (gm * go[i] - mean_gdy - xh[i] * mean_gdy_xhat);
        }
    }
}

void silu_forward(const Tensor& in, Tensor& out) {
    for (std::size_t i = 0; i < in.v.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-in.v[i]));
        out.v[i] = in.v[i] * s;
    }
}

void silu_backward(const Tensor& in, const Tensor& gout, Tensor& gin) {
    for (std::size_t i = 0; i < in.v.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-in.v[i]));
        gin.v[i] = gout.v[i] * s * (1.0 + in.v[i] * (1.0 - s));
    }
}

} // namespace sbmri::nn
