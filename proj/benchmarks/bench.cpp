#include <benchmark/benchmark.h>

#include "sbmri/data_consistency.hpp"
#include "sbmri/denoiser.hpp"
#include "sbmri/fft.hpp"
#include "sbmri/recon.hpp"
#include "sbmri/train.hpp"

using namespace sbmri;

namespace {

AcquisitionModel bench_model(std::size_t h, std::size_t w, std::size_t coils, double r) {
    AcquisitionModel m;
    m.csm = make_coil_maps(coils, h, w, 1);
    m.mask = r <= 1.0 ? SamplingMask{h, w, h, w, std::vector<std::uint8_t>(h * w, 1)}
                      : make_mask(h, w, r, h / 8, w / 8, MaskPattern::Lattice, 1);
    return m;
}

void bm_fft2(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng = make_rng(2);
    const ComplexImage x = gaussian_image(n, n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(fft2(x));
}
BENCHMARK(bm_fft2)->Arg(64)->Arg(256);

void bm_cg_correct(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng = make_rng(3);
    const auto model = bench_model(n, n, 4, 6.0);
    const ComplexImage truth = gaussian_image(n, n, rng);
    const KSpaceData y = forward_A(truth, model.csm, model.mask);
    const ComplexImage init = gaussian_image(n, n, rng);
    const DCConfig cfg{1.0, 10, 1e-6};
    for (auto _ : state) benchmark::DoNotOptimize(cg_correct(init, y, model, cfg));
}
BENCHMARK(bm_cg_correct)->Arg(64);

void bm_denoiser_eval(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    DenoiserArch arch;
    arch.height = arch.width = n;
    const auto sched = make_schedule(1e-5, 0.3, 50);
    const ConvDenoiser d(arch, sched, 4);
    Rng rng = make_rng(5);
    const ComplexImage x = gaussian_image(n, n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(d.eval(x, 25));
}
BENCHMARK(bm_denoiser_eval)->Arg(64);

void bm_train_step(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    DenoiserArch arch;
    arch.height = arch.width = n;
    const auto sched = make_schedule(1e-5, 0.3, 50);
    ConvDenoiser d(arch, sched, 6);
    std::vector<PhantomPair> ds;
    for (std::uint64_t s = 0; s < 4; ++s) ds.push_back(make_phantom_pair(s, n, n, 0.0));
    std::size_t step = 0;
    for (auto _ : state) {
        const TrainBatch b = draw_batch(ds, sched, 4, 7, step++);
        benchmark::DoNotOptimize(d.loss_and_grad(b));
    }
}
BENCHMARK(bm_train_step)->Arg(64);

void bm_guided_recon(benchmark::State& state) {
    const std::size_t n = 64;
    DenoiserArch arch;
    arch.height = arch.width = n;
    const auto sched = make_schedule(1e-5, 0.3, 50);
    const ConvDenoiser d(arch, sched, 8);
    const auto model = bench_model(n, n, 4, 6.0);
    const auto pair = make_phantom_pair(9, n, n, 0.0);
    const KSpaceData y = forward_A(pair.target, model.csm, model.mask);
    ReconConfig cfg;
    cfg.deterministic_sampling = true;
    for (auto _ : state)
        benchmark::DoNotOptimize(guided_reconstruct(y, pair.guide, d, sched, model, cfg));
}
BENCHMARK(bm_guided_recon);

} // namespace

BENCHMARK_MAIN();
