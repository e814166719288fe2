#include "sbmri/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "sbmri/rng.hpp"
#include "tensor.hpp"

namespace sbmri {

using nn::Tensor;

namespace {

struct ConvSpec {
    std::size_t w_off, b_off, in_ch, out_ch;
};
struct AffineSpec {
    std::size_t gamma_off, beta_off;
};
struct LinearSpec {
    std::size_t w_off, b_off, in_dim, out_dim;
};

std::vector<double> time_embedding(double t, std::size_t dim) {
    // Standard log-spaced frequency bank on t scaled to [0, 1000].
    std::vector<double> emb(dim);
    const std::size_t half = dim / 2;
    for (std::size_t k = 0; k < half; ++k) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) /
                                     static_cast<double>(half > 1 ? half - 1 : 1));
        emb[k] = std::sin(1000.0 * t * freq);
        emb[half + k] = std::cos(1000.0 * t * freq);
    }
    return emb;
}

} // namespace

struct ConvDenoiser::Net {
    ConvSpec conv_in;
    struct Block {
        AffineSpec gn1;
        ConvSpec conv1;
        LinearSpec temb;
        AffineSpec gn2;
        ConvSpec conv2;
    };
    std::vector<Block> blocks;
    ConvSpec conv_out;
    std::size_t total = 0;

    static Net layout(const DenoiserArch& a) {
        Net n;
        std::size_t off = 0;
        auto conv = [&](std::size_t in_ch, std::size_t out_ch) {
            ConvSpec c{off, off + in_ch * out_ch * 9, in_ch, out_ch};
            off += in_ch * out_ch * 9 + out_ch;
            return c;
        };
        auto affine = [&](std::size_t ch) {
            AffineSpec g{off, off + ch};
            off += 2 * ch;
            return g;
        };
        auto linear = [&](std::size_t in_dim, std::size_t out_dim) {
            LinearSpec l{off, off + in_dim * out_dim, in_dim, out_dim};
            off += in_dim * out_dim + out_dim;
            return l;
        };
        n.conv_in = conv(2, a.channels);
        n.blocks.resize(a.blocks);
        for (auto& b : n.blocks) {
            b.gn1 = affine(a.channels);
            b.conv1 = conv(a.channels, a.channels);
            b.temb = linear(a.time_dim, a.channels);
            b.gn2 = affine(a.channels);
            b.conv2 = conv(a.channels, a.channels);
        }
        n.conv_out = conv(a.channels, 2);
        n.total = off;
        return n;
    }
};

namespace {

// Per-eval activation cache; sized once per call.
struct BlockCache {
    Tensor gn1_out, act1_out, conv1_out, gn2_out, act2_out, conv2_out, block_in;
    nn::GroupNormCache gn1_cache, gn2_cache;
};

struct ForwardCache {
    Tensor input, conv_in_out, output;
    std::vector<BlockCache> blocks;
};

void norm_or_copy(const Tensor& in, Tensor& out, const double* gamma, const double* beta,
                  const DenoiserArch& arch, nn::GroupNormCache& cache) {
    if (arch.use_norm) {
        nn::groupnorm_forward(in, out, gamma, beta, arch.groups, cache);
    } else {
        out = in;
    }
}

void act_or_copy(const Tensor& in, Tensor& out, const DenoiserArch& arch) {
    if (arch.use_activation) nn::silu_forward(in, out); else out = in;
}

} // namespace

ConvDenoiser::ConvDenoiser(const DenoiserArch& arch, const NoiseSchedule& sched,
                           std::uint64_t init_seed)
    : arch_(arch), sched_(sched), net_(std::make_unique<Net>(Net::layout(arch))) {
    if (arch.channels % arch.groups != 0)
        throw ConfigError("ConvDenoiser: channels must be divisible by groups");
    if (arch.time_dim % 2 != 0)
        throw ConfigError("ConvDenoiser: time_dim must be even");
    params_.assign(net_->total, 0.0);
    grads_.assign(net_->total, 0.0);

    Rng rng = make_rng(init_seed, 0x696e6974ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto init_conv = [&](const ConvSpec& c, double gain) {
        const double std_dev = gain * std::sqrt(2.0 / static_cast<double>(c.in_ch * 9));
        for (std::size_t i = 0; i < c.in_ch * c.out_ch * 9; ++i)
            params_[c.w_off + i] = std_dev * normal(rng);
    };
    init_conv(net_->conv_in, 1.0);
    for (auto& b : net_->blocks) {
        for (std::size_t c = 0; c < arch.channels; ++c) params_[b.gn1.gamma_off + c] = 1.0;
        init_conv(b.conv1, 1.0);
        for (std::size_t i = 0; i < b.temb.in_dim * b.temb.out_dim; ++i)
            params_[b.temb.w_off + i] = 0.01 * normal(rng);
        for (std::size_t c = 0; c < arch.channels; ++c) params_[b.gn2.gamma_off + c] = 1.0;
        init_conv(b.conv2, 1.0 / std::sqrt(static_cast<double>(arch.blocks)));
    }
    // conv_out stays zero so the untrained network predicts zero noise.
}

ConvDenoiser::~ConvDenoiser() = default;

namespace {

Tensor image_to_tensor(const ComplexImage& x) {
    Tensor t(2, x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
        t.v[i] = x[i].real();
        t.v[t.plane() + i] = x[i].imag();
    }
    return t;
}

ComplexImage tensor_to_image(const Tensor& t) {
    ComplexImage x(t.h, t.w);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = {t.v[i], t.v[t.plane() + i]};
    return x;
}

} // namespace

// Shared forward pass; cache may be null when only the output is needed.
static Tensor forward_net(const DenoiserArch& arch, const ConvDenoiser::Net& net,
                          const std::vector<double>& params, const Tensor& input,
                          const std::vector<double>& temb, ForwardCache* cache) {
    const std::size_t H = arch.height, W = arch.width, C = arch.channels;
    Tensor x(C, H, W);
    nn::conv3x3_forward(input, x, params.data() + net.conv_in.w_off,
                        params.data() + net.conv_in.b_off, 2, C);
    if (cache) {
        cache->input = input;
        cache->conv_in_out = x;
        cache->blocks.resize(net.blocks.size());
    }
    for (std::size_t bi = 0; bi < net.blocks.size(); ++bi) {
        const auto& b = net.blocks[bi];
        BlockCache local;
        BlockCache& bc = cache ? cache->blocks[bi] : local;
        bc.block_in = x;

        bc.gn1_out = Tensor(C, H, W);
        norm_or_copy(x, bc.gn1_out, params.data() + b.gn1.gamma_off,
                     params.data() + b.gn1.beta_off, arch, bc.gn1_cache);
        bc.act1_out = Tensor(C, H, W);
        act_or_copy(bc.gn1_out, bc.act1_out, arch);

        bc.conv1_out = Tensor(C, H, W);
        nn::conv3x3_forward(bc.act1_out, bc.conv1_out, params.data() + b.conv1.w_off,
                            params.data() + b.conv1.b_off, C, C);
        // learned time bias, one scalar per channel
        for (std::size_t c = 0; c < C; ++c) {
            double bias = params[b.temb.b_off + c];
            for (std::size_t k = 0; k < b.temb.in_dim; ++k)
                bias += params[b.temb.w_off + c * b.temb.in_dim + k] * temb[k];
            double* p = bc.conv1_out.chan(c);
            for (std::size_t i = 0; i < H * W; ++i) p[i] += bias;
        }

        bc.gn2_out = Tensor(C, H, W);
        norm_or_copy(bc.conv1_out, bc.gn2_out, params.data() + b.gn2.gamma_off,
                     params.data() + b.gn2.beta_off, arch, bc.gn2_cache);
        bc.act2_out = Tensor(C, H, W);
        act_or_copy(bc.gn2_out, bc.act2_out, arch);

        bc.conv2_out = Tensor(C, H, W);
        nn::conv3x3_forward(bc.act2_out, bc.conv2_out, params.data() + b.conv2.w_off,
                            params.data() + b.conv2.b_off, C, C);
        for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += bc.conv2_out.v[i];
    }
    Tensor out(2, H, W);
    nn::conv3x3_forward(x, out, params.data() + net.conv_out.w_off,
                        params.data() + net.conv_out.b_off, C, 2);
    if (cache) cache->output = x; // pre-conv_out feature map
    return out;
}

// Backward through the network; gout is the gradient at the output tensor.
static void backward_net(const DenoiserArch& arch, const ConvDenoiser::Net& net,
                         const std::vector<double>& params, const ForwardCache& cache,
                         const std::vector<double>& temb, const Tensor& gout,
                         std::vector<double>& grads) {
    const std::size_t H = arch.height, W = arch.width, C = arch.channels;

    Tensor gx(C, H, W);
    nn::conv3x3_backward(cache.output, gout, gx, grads.data() + net.conv_out.w_off,
                         grads.data() + net.conv_out.b_off, params.data() + net.conv_out.w_off,
                         C, 2);

    Tensor t1(C, H, W), t2(C, H, W);
    for (std::size_t bi = net.blocks.size(); bi-- > 0;) {
        const auto& b = net.blocks[bi];
        const BlockCache& bc = cache.blocks[bi];

        // residual: gradient flows both through the branch and the skip.
        Tensor gbranch(C, H, W);
        nn::conv3x3_backward(bc.act2_out, gx, gbranch, grads.data() + b.conv2.w_off,
                             grads.data() + b.conv2.b_off, params.data() + b.conv2.w_off, C, C);
        if (arch.use_activation) {
            nn::silu_backward(bc.gn2_out, gbranch, t1);
        } else {
            t1 = gbranch;
        }
        Tensor gconv1(C, H, W);
        if (arch.use_norm) {
            nn::groupnorm_backward(t1, gconv1, grads.data() + b.gn2.gamma_off,
                                   grads.data() + b.gn2.beta_off,
                                   params.data() + b.gn2.gamma_off, arch.groups, bc.gn2_cache);
        } else {
            gconv1 = t1;
        }

        // time-bias gradient: sum over pixels per channel
        for (std::size_t c = 0; c < C; ++c) {
            const double* p = gconv1.chan(c);
            double s = 0;
            for (std::size_t i = 0; i < H * W; ++i) s += p[i];
            grads[b.temb.b_off + c] += s;
            for (std::size_t k = 0; k < b.temb.in_dim; ++k)
                grads[b.temb.w_off + c * b.temb.in_dim + k] += s * temb[k];
        }

        Tensor gact1(C, H, W);
        nn::conv3x3_backward(bc.act1_out, gconv1, gact1, grads.data() + b.conv1.w_off,
                             grads.data() + b.conv1.b_off, params.data() + b.conv1.w_off, C, C);
        if (arch.use_activation) {
            nn::silu_backward(bc.gn1_out, gact1, t2);
        } else {
            t2 = gact1;
        }
        Tensor gin(C, H, W);
        if (arch.use_norm) {
            nn::groupnorm_backward(t2, gin, grads.data() + b.gn1.gamma_off,
                                   grads.data() + b.gn1.beta_off,
                                   params.data() + b.gn1.gamma_off, arch.groups, bc.gn1_cache);
        } else {
            gin = t2;
        }
        for (std::size_t i = 0; i < gx.v.size(); ++i) gx.v[i] += gin.v[i];
    }

    Tensor ginput(2, H, W);
    nn::conv3x3_backward(cache.input, gx, ginput, grads.data() + net.conv_in.w_off,
                         grads.data() + net.conv_in.b_off, params.data() + net.conv_in.w_off,
                         2, C);
}

ComplexImage ConvDenoiser::eval(const ComplexImage& x, std::size_t n) const {
    if (x.height() != arch_.height || x.width() != arch_.width)
        throw UsageError("ConvDenoiser::eval: image shape does not match the architecture");
    if (n < 1 || n > sched_.n_steps())
        throw UsageError("ConvDenoiser::eval: step index out of range");
    const std::vector<double> temb = time_embedding(sched_.t(n), arch_.time_dim);
    Tensor out = forward_net(arch_, *net_, params_, image_to_tensor(x), temb, nullptr);
    return tensor_to_image(out);
}

namespace {

void check_batch(const TrainBatch& batch, const DenoiserArch& arch, const NoiseSchedule& sched) {
    if (batch.x_n.empty()) throw UsageError("ConvDenoiser: empty batch");
    if (batch.x_n.size() != batch.target.size() || batch.x_n.size() != batch.n.size())
        throw UsageError("ConvDenoiser: inconsistent batch arrays");
    for (std::size_t i = 0; i < batch.x_n.size(); ++i) {
        if (batch.x_n[i].height() != arch.height || batch.x_n[i].width() != arch.width)
            throw UsageError("ConvDenoiser: batch image shape mismatch");
        if (batch.n[i] < 1 || batch.n[i] > sched.n_steps())
            throw UsageError("ConvDenoiser: batch step index out of range");
        if (!batch.target[i].all_finite())
            throw UsageError("ConvDenoiser: non-finite batch target");
    }
}

} // namespace

double ConvDenoiser::loss(const TrainBatch& batch) const {
    check_batch(batch, arch_, sched_);
    const double plane = static_cast<double>(arch_.height * arch_.width);
    double total = 0;
    for (std::size_t i = 0; i < batch.x_n.size(); ++i) {
        const ComplexImage pred = eval(batch.x_n[i], batch.n[i]);
        double s = 0;
        for (std::size_t p = 0; p < pred.size(); ++p) s += std::norm(pred[p] - batch.target[i][p]);
        total += s / plane;
    }
    return total / static_cast<double>(batch.x_n.size());
}

double ConvDenoiser::loss_and_grad(const TrainBatch& batch) {
    check_batch(batch, arch_, sched_);
    std::fill(grads_.begin(), grads_.end(), 0.0);
    const double plane = static_cast<double>(arch_.height * arch_.width);
    const double bsz = static_cast<double>(batch.x_n.size());
    double total = 0;
    for (std::size_t i = 0; i < batch.x_n.size(); ++i) {
        const std::vector<double> temb = time_embedding(sched_.t(batch.n[i]), arch_.time_dim);
        ForwardCache cache;
        Tensor out = forward_net(arch_, *net_, params_, image_to_tensor(batch.x_n[i]), temb,
                                 &cache);
        const Tensor tgt = image_to_tensor(batch.target[i]);
        Tensor gout(2, arch_.height, arch_.width);
        double s = 0;
        for (std::size_t p = 0; p < out.v.size(); ++p) {
            const double d = out.v[p] - tgt.v[p];
            s += d * d;
            gout.v[p] = 2.0 * d / (plane * bsz);
        }
        total += s / plane;
        backward_net(arch_, *net_, params_, cache, temb, gout, grads_);
    }
    return total / bsz;
}

double grad_check(ConvDenoiser& d, const TrainBatch& batch, double h, std::size_t n_probe,
                  std::uint64_t seed) {
    const double base_loss = d.loss_and_grad(batch);
    (void)base_loss;
    std::vector<double> analytic = d.grads();

    Rng rng = make_rng(seed, 0x67636bULL);
    std::uniform_int_distribution<std::size_t> pick(0, d.params().size() - 1);
    double worst = 0;
    for (std::size_t k = 0; k < n_probe; ++k) {
        const std::size_t idx = pick(rng);
        const double orig = d.params()[idx];
        d.params()[idx] = orig + h;
        const double lp = d.loss(batch);
        d.params()[idx] = orig - h;
        const double lm = d.loss(batch);
        d.params()[idx] = orig;
        const double fd = (lp - lm) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(analytic[idx]), 1e-8});
        worst = std::max(worst, std::abs(fd - analytic[idx]) / denom);
    }
    return worst;
}

} // namespace sbmri
