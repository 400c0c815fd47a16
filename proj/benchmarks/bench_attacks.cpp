#include <benchmark/benchmark.h>

#include "lfs/attacks.hpp"
#include "lfs/rng.hpp"

using namespace lfs;

namespace {

Image make_image(int side) {
    SeededRng rng(9);
    Image img(side, side);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

void BM_jpeg_exact(benchmark::State& state) {
    const Image img = make_image(64);
    for (auto _ : state) {
        Image out = jpeg_attack(img, 75, AttackMode::exact);
        benchmark::DoNotOptimize(out);
    }
}

void BM_jpeg_differentiable(benchmark::State& state) {
    const Image img = make_image(64);
    for (auto _ : state) {
        Image out = jpeg_attack(img, 75, AttackMode::differentiable);
        benchmark::DoNotOptimize(out);
    }
}

void BM_attack_layer(benchmark::State& state) {
    const Image img = make_image(64);
    AttackConfig cfg;
    SeededRng rng(11);
    for (auto _ : state) {
        auto [out, plan] = attack_layer(img, cfg, rng, AttackMode::differentiable);
        benchmark::DoNotOptimize(out);
    }
}

} // namespace

BENCHMARK(BM_jpeg_exact);
BENCHMARK(BM_jpeg_differentiable);
BENCHMARK(BM_attack_layer);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
}
