#include <benchmark/benchmark.h>

#include "lfs/rng.hpp"
#include "lfs/spectral.hpp"

using namespace lfs;

namespace {

Image make_image(int side) {
    SeededRng rng(7);
    Image img(side, side);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

void BM_dft2(benchmark::State& state) {
    const Image img = make_image(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto s = dft2(img);
        benchmark::DoNotOptimize(s);
    }
}

void BM_low_pass(benchmark::State& state) {
    const Image img = make_image(static_cast<int>(state.range(0)));
    const CutoffRadius d{0.3 * spectrum_r_max(img.width, img.height)};
    for (auto _ : state) {
        Image out = low_pass(img, d);
        benchmark::DoNotOptimize(out);
    }
}

void BM_azimuthal(benchmark::State& state) {
    const Image img = make_image(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        RadialSpectrum rs = azimuthal_integral(img);
        benchmark::DoNotOptimize(rs);
    }
}

void BM_focal_frequency_loss(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    SeededRng rng(11);
    FeatureMap q(side, side), t(side, side);
    for (double& v : q.data) v = rng.uniform(-0.2, 0.2);
    for (double& v : t.data) v = rng.uniform(-0.2, 0.2);
    FeatureMap grad;
    for (auto _ : state) {
        double l = focal_frequency_loss(q, t, &grad);
        benchmark::DoNotOptimize(l);
    }
}

} // namespace

BENCHMARK(BM_dft2)->Arg(64)->Arg(256);
BENCHMARK(BM_low_pass)->Arg(64)->Arg(256);
BENCHMARK(BM_azimuthal)->Arg(64)->Arg(256);
BENCHMARK(BM_focal_frequency_loss)->Arg(64);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
}
