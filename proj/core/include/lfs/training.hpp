#ifndef LFS_TRAINING_HPP
#define LFS_TRAINING_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lfs/attacks.hpp"
#include "lfs/dataset.hpp"
#include "lfs/image.hpp"
#include "lfs/models.hpp"

namespace lfs {

struct LossWeights {
    double emb = 1.0;
    double freq = 1.0;
    double ret = 1.0;
    double cln = 1.0;

    void validate() const;
};

struct AblationFlags {
    bool use_attack_layer = true;
    bool use_freq_loss = true;
    bool use_clean_loss = true;
};

struct TrainConfig {
    int side = 64;
    double cutoff_d256 = 50.0; // quoted at 256x256, auto-scaled to `side`
    int batch_size = 8;
    int steps_per_epoch = 100;
    int epochs = 10;
    double learning_rate = 1e-4;
    double beta1 = 0.1;
    double beta2 = 0.5;
    double lr_decay = 0.2;   // multiplied in every lr_decay_every epochs
    int lr_decay_every = 3;
    std::uint64_t seed = 7;
    std::string pairing = "shared"; // cover/secret pools: "shared" | "disjoint"

    LossWeights weights;
    AblationFlags flags;
    EmbedderSpec embedder;
    RetrieverSpec retriever;
    AttackConfig attack;

    double effective_cutoff() const;
    double lr_at_epoch(int epoch_1based) const;
    void validate() const;

    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
};

struct TrainLogRecord {
    int epoch = 0;
    int step = 0;
    double l_emb = 0.0;
    double l_freq = 0.0;
    double l_ret = 0.0;
    double l_cln = 0.0;
    double total = 0.0;
    double lr = 0.0;
    std::array<int, 6> attack_counts{}; // lowpass, blur, noise, jitter, resize_crop, jpeg

    static std::string csv_header();
    std::string csv_row() const;
};

// ---- loss terms ----

double embedding_loss(const Image& cover, const Image& container);
double retrieval_loss(const Image& secret, const Image& recovered);
double clean_loss(const Image& r_clean, int side);

struct LossComponents {
    double emb = 0.0;
    double freq = 0.0;
    double ret = 0.0;
    double cln = 0.0;
};

// Weighted sum; disabled terms contribute exactly zero. Throws
// numeric_error on non-finite components.
double total_loss(const LossComponents& c, const LossWeights& w, const AblationFlags& flags);

// ---- trainer ----

class Trainer {
public:
    explicit Trainer(const TrainConfig& cfg);

    // One joint gradient step on a prepared batch.
    TrainLogRecord step(const std::vector<Image>& covers, const std::vector<Image>& secrets,
                        int epoch, int step_index);

    Embedder& embedder() { return *embedder_; }
    Retriever& retriever() { return *retriever_; }
    const TrainConfig& config() const { return cfg_; }

    void save(const std::string& path, int epoch) const;

private:
    TrainConfig cfg_;
    std::unique_ptr<Embedder> embedder_;
    std::unique_ptr<Retriever> retriever_;
    std::vector<nn::Param*> params_;
    std::vector<nn::Tensor> adam_m_, adam_v_;
    std::uint64_t adam_step_ = 0;
    double current_lr_ = 0.0;

    void adam_update();
    friend struct TrainerTestAccess;
};

struct TrainResult {
    std::string final_checkpoint;
    std::vector<TrainLogRecord> log;
};

using TrainProgress = std::function<void(const TrainLogRecord&)>;

// Full training run: loads the pool, pairs covers and secrets without
// replacement per epoch, applies the decayed learning-rate schedule,
// checkpoints every epoch, writes train_log.csv into out_dir.
TrainResult train(const TrainConfig& cfg, const DatasetSplit& data, const std::string& out_dir,
                  const TrainProgress& progress = nullptr);

} // namespace lfs

#endif
