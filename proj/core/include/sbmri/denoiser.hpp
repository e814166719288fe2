#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "sbmri/complex_image.hpp"
#include "sbmri/schedule.hpp"

namespace sbmri {

// Noise-predictor interface consumed by the reconstruction pipelines.
// Implementations must be deterministic and reentrant for shared state.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual ComplexImage eval(const ComplexImage& x, std::size_t n) const = 0;
};

struct DenoiserArch {
    std::size_t height = 64, width = 64;
    std::size_t channels = 16;   // hidden width
    std::size_t blocks = 3;      // residual blocks
    std::size_t time_dim = 64;   // sinusoidal embedding size
    std::size_t groups = 4;      // group-norm groups
    bool use_norm = true;
    bool use_activation = true;  // false gives a purely linear network

    bool operator==(const DenoiserArch&) const = default;
};

struct TrainBatch {
    std::vector<ComplexImage> x_n;     // bridge states
    std::vector<ComplexImage> target;  // (x_n - x0) / sigma_n
    std::vector<std::size_t> n;        // step indices, all >= 1
};

// Residual convolutional noise predictor over two real channels (re, im),
// conditioned on t_n through a per-block learned bias from a sinusoidal
// time embedding. The final conv is zero-initialized.
class ConvDenoiser : public Denoiser {
public:
    ConvDenoiser(const DenoiserArch& arch, const NoiseSchedule& sched, std::uint64_t init_seed);
    ~ConvDenoiser() override;

    ComplexImage eval(const ComplexImage& x, std::size_t n) const override;

    // Mean squared modulus error against the batch targets.
    double loss(const TrainBatch& batch) const;
    // Same value, plus parameter gradients accumulated into grads().
    double loss_and_grad(const TrainBatch& batch);

    const DenoiserArch& arch() const { return arch_; }
    const NoiseSchedule& schedule() const { return sched_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::vector<double>& grads() { return grads_; }

    struct Net; // internal flat-parameter layout, defined in the .cpp

private:
    DenoiserArch arch_;
    NoiseSchedule sched_;
    std::vector<double> params_;
    std::vector<double> grads_;
    std::unique_ptr<Net> net_; // layer offsets into the flat parameter vector
};

// Compares analytic gradients against central finite differences on
// n_probe randomly selected parameters; returns the worst relative error.
double grad_check(ConvDenoiser& d, const TrainBatch& batch, double h,
                  std::size_t n_probe = 64, std::uint64_t seed = 17);

} // namespace sbmri
