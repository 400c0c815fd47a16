#include <benchmark/benchmark.h>

#include "lfs/models.hpp"
#include "lfs/rng.hpp"
#include "lfs/training.hpp"

using namespace lfs;

namespace {

TrainConfig desk_config() {
    TrainConfig cfg;
    return cfg; // desk-scale defaults
}

nn::Tensor random_batch(int n, int side, SeededRng& rng) {
    nn::Tensor t(n, 3, side, side);
    for (double& v : t.v) v = rng.uniform();
    return t;
}

void BM_embedder_forward(benchmark::State& state) {
    SeededRng rng(3);
    const TrainConfig cfg = desk_config();
    Embedder emb(cfg.embedder, rng);
    const nn::Tensor x = random_batch(static_cast<int>(state.range(0)), cfg.side, rng);
    for (auto _ : state) {
        nn::Tensor q = emb.forward(x, true);
        benchmark::DoNotOptimize(q);
    }
}

void BM_retriever_forward(benchmark::State& state) {
    SeededRng rng(5);
    const TrainConfig cfg = desk_config();
    Retriever ret(cfg.retriever, rng);
    const nn::Tensor x = random_batch(static_cast<int>(state.range(0)), cfg.side, rng);
    for (auto _ : state) {
        nn::Tensor y = ret.forward(x, true);
        benchmark::DoNotOptimize(y);
    }
}

void BM_train_step(benchmark::State& state) {
    TrainConfig cfg = desk_config();
    cfg.batch_size = static_cast<int>(state.range(0));
    Trainer trainer(cfg);
    SeededRng rng(7);
    std::vector<Image> covers, secrets;
    for (int i = 0; i < cfg.batch_size; ++i) {
        Image c(cfg.side, cfg.side), s(cfg.side, cfg.side);
        for (double& v : c.data) v = rng.uniform();
        for (double& v : s.data) v = rng.uniform();
        covers.push_back(c);
        secrets.push_back(s);
    }
    int step = 0;
    for (auto _ : state) {
        TrainLogRecord rec = trainer.step(covers, secrets, 1, ++step);
        benchmark::DoNotOptimize(rec);
    }
}

} // namespace

BENCHMARK(BM_embedder_forward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_retriever_forward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_train_step)->Arg(8)->Unit(benchmark::kMillisecond)->MinTime(5.0);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
}
