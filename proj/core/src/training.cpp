#include "lfs/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lfs/errors.hpp"
#include "lfs/image_io.hpp"
#include "lfs/spectral.hpp"

namespace fs = std::filesystem;

namespace lfs {

using json = nlohmann::json;
using nn::Tensor;

namespace {

constexpr std::uint64_t kPairTag = 0x50u;
constexpr std::uint64_t kAttackTag = 0xa7u;
constexpr double kAdamEps = 1e-8;

int attack_slot(AttackId id) {
    switch (id) {
        case AttackId::lowpass: return 0;
        case AttackId::blur: return 1;
        case AttackId::noise: return 2;
        case AttackId::jitter: return 3;
        case AttackId::resize_crop: return 4;
        case AttackId::jpeg: return 5;
        default: return -1;
    }
}

} // namespace

void LossWeights::validate() const {
    if (emb < 0.0 || freq < 0.0 || ret < 0.0 || cln < 0.0)
        throw config_error("loss weights must be non-negative");
    if (emb == 0.0 && freq == 0.0 && ret == 0.0 && cln == 0.0)
        throw config_error("at least one loss weight must be positive");
}

double TrainConfig::effective_cutoff() const {
    return scale_cutoff(cutoff_d256, side);
}

double TrainConfig::lr_at_epoch(int epoch_1based) const {
    const int k = (epoch_1based - 1) / lr_decay_every;
    return learning_rate * std::pow(lr_decay, k);
}

void TrainConfig::validate() const {
    if (side < 4) throw config_error("side must be >= 4");
    if (batch_size < 1 || steps_per_epoch < 1 || epochs < 0)
        throw config_error("batch size and steps must be positive, epochs non-negative");
    if (learning_rate <= 0.0 || lr_decay <= 0.0 || lr_decay_every < 1)
        throw config_error("learning-rate schedule values must be positive");
    if (cutoff_d256 < 0.0) throw config_error("cutoff must be non-negative");
    if (pairing != "shared" && pairing != "disjoint")
        throw config_error("pairing must be 'shared' or 'disjoint'");
    weights.validate();
    attack.validate();
}

std::string TrainConfig::to_json() const {
    json j;
    j["side"] = side;
    j["cutoff_d256"] = cutoff_d256;
    j["batch_size"] = batch_size;
    j["steps_per_epoch"] = steps_per_epoch;
    j["epochs"] = epochs;
    j["learning_rate"] = learning_rate;
    j["beta1"] = beta1;
    j["beta2"] = beta2;
    j["lr_decay"] = lr_decay;
    j["lr_decay_every"] = lr_decay_every;
    j["seed"] = seed;
    j["pairing"] = pairing;
    j["weights"] = {{"emb", weights.emb}, {"freq", weights.freq}, {"ret", weights.ret},
                    {"cln", weights.cln}};
    j["flags"] = {{"use_attack_layer", flags.use_attack_layer},
                  {"use_freq_loss", flags.use_freq_loss},
                  {"use_clean_loss", flags.use_clean_loss}};
    j["embedder"] = {{"base_channels", embedder.base_channels},
                     {"max_channels", embedder.max_channels},
                     {"strength", embedder.strength},
                     {"residual_mode", embedder.residual_mode == ResidualMode::zero_centered
                                           ? "zero_centered"
                                           : "raw_sigmoid"}};
    j["retriever"] = {{"base_channels", retriever.base_channels},
                      {"downsample_blocks", retriever.downsample_blocks},
                      {"residual_blocks", retriever.residual_blocks},
                      {"upsample_blocks", retriever.upsample_blocks}};
    j["attack"] = {{"per_attack_probability", attack.per_attack_probability},
                   {"include_geometric_in_training", attack.include_geometric_in_training},
                   {"jpeg_quality_range", attack.jpeg_quality_range},
                   {"blur_sigma_range", attack.blur_sigma_range},
                   {"blur_kernel", attack.blur_kernel},
                   {"noise_sigma", attack.noise_sigma},
                   {"lowpass_frac_range", attack.lowpass_frac_range},
                   {"jitter",
                    {{"brightness", attack.jitter.brightness},
                     {"contrast", attack.jitter.contrast},
                     {"saturation", attack.jitter.saturation},
                     {"hue", attack.jitter.hue}}},
                   {"crop_scale", attack.crop_scale}};
    return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
    TrainConfig c;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    c.side = j.value("side", c.side);
    c.cutoff_d256 = j.value("cutoff_d256", c.cutoff_d256);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.lr_decay_every = j.value("lr_decay_every", c.lr_decay_every);
    c.seed = j.value("seed", c.seed);
    c.pairing = j.value("pairing", c.pairing);
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        c.weights.emb = w.value("emb", c.weights.emb);
        c.weights.freq = w.value("freq", c.weights.freq);
        c.weights.ret = w.value("ret", c.weights.ret);
        c.weights.cln = w.value("cln", c.weights.cln);
    }
    if (j.contains("flags")) {
        const auto& f = j["flags"];
        c.flags.use_attack_layer = f.value("use_attack_layer", c.flags.use_attack_layer);
        c.flags.use_freq_loss = f.value("use_freq_loss", c.flags.use_freq_loss);
        c.flags.use_clean_loss = f.value("use_clean_loss", c.flags.use_clean_loss);
    }
    if (j.contains("embedder")) {
        const auto& e = j["embedder"];
        c.embedder.base_channels = e.value("base_channels", c.embedder.base_channels);
        c.embedder.max_channels = e.value("max_channels", c.embedder.max_channels);
        c.embedder.strength = e.value("strength", c.embedder.strength);
        c.embedder.residual_mode = e.value("residual_mode", std::string("zero_centered")) ==
                                           "raw_sigmoid"
                                       ? ResidualMode::raw_sigmoid
                                       : ResidualMode::zero_centered;
    }
    if (j.contains("retriever")) {
        const auto& r = j["retriever"];
        c.retriever.base_channels = r.value("base_channels", c.retriever.base_channels);
        c.retriever.downsample_blocks =
            r.value("downsample_blocks", c.retriever.downsample_blocks);
        c.retriever.residual_blocks = r.value("residual_blocks", c.retriever.residual_blocks);
        c.retriever.upsample_blocks = r.value("upsample_blocks", c.retriever.upsample_blocks);
    }
    if (j.contains("attack")) {
        const auto& a = j["attack"];
        c.attack.per_attack_probability =
            a.value("per_attack_probability", c.attack.per_attack_probability);
        c.attack.include_geometric_in_training =
            a.value("include_geometric_in_training", c.attack.include_geometric_in_training);
        if (a.contains("jpeg_quality_range"))
            c.attack.jpeg_quality_range = a["jpeg_quality_range"].get<std::array<int, 2>>();
        if (a.contains("blur_sigma_range"))
            c.attack.blur_sigma_range = a["blur_sigma_range"].get<std::array<double, 2>>();
        c.attack.blur_kernel = a.value("blur_kernel", c.attack.blur_kernel);
        c.attack.noise_sigma = a.value("noise_sigma", c.attack.noise_sigma);
        if (a.contains("lowpass_frac_range"))
            c.attack.lowpass_frac_range = a["lowpass_frac_range"].get<std::array<double, 2>>();
        if (a.contains("jitter")) {
            const auto& jt = a["jitter"];
            c.attack.jitter.brightness = jt.value("brightness", c.attack.jitter.brightness);
            c.attack.jitter.contrast = jt.value("contrast", c.attack.jitter.contrast);
            c.attack.jitter.saturation = jt.value("saturation", c.attack.jitter.saturation);
            c.attack.jitter.hue = jt.value("hue", c.attack.jitter.hue);
        }
        if (a.contains("crop_scale"))
            c.attack.crop_scale = a["crop_scale"].get<std::array<double, 2>>();
    }
    c.embedder.side = c.side;
    c.retriever.side = c.side;
    return c;
}

std::string TrainLogRecord::csv_header() {
    return "epoch,step,l_emb,l_freq,l_ret,l_cln,total,lr,"
           "atk_lowpass,atk_blur,atk_noise,atk_jitter,atk_resize_crop,atk_jpeg";
}

std::string TrainLogRecord::csv_row() const {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%d,%d,%d,%d,%d",
                  epoch, step, l_emb, l_freq, l_ret, l_cln, total, lr, attack_counts[0],
                  attack_counts[1], attack_counts[2], attack_counts[3], attack_counts[4],
                  attack_counts[5]);
    return buf;
}

// ---- loss terms ----

namespace {

double mse_span(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(n);
}

} // namespace

double embedding_loss(const Image& cover, const Image& container) {
    require(cover.same_shape(container), "embedding_loss: shape mismatch");
    return mse_span(cover.data.data(), container.data.data(), cover.size());
}

double retrieval_loss(const Image& secret, const Image& recovered) {
    require(secret.same_shape(recovered), "retrieval_loss: shape mismatch");
    return mse_span(secret.data.data(), recovered.data.data(), secret.size());
}

double clean_loss(const Image& r_clean, int side) {
    require(r_clean.width == side && r_clean.height == side, "clean_loss: shape mismatch");
    double acc = 0.0;
    for (double v : r_clean.data) acc += v * v;
    return acc / static_cast<double>(r_clean.size());
}

double total_loss(const LossComponents& c, const LossWeights& w, const AblationFlags& flags) {
    if (!std::isfinite(c.emb) || !std::isfinite(c.freq) || !std::isfinite(c.ret) ||
        !std::isfinite(c.cln))
        throw numeric_error("non-finite loss component");
    double total = w.emb * c.emb + w.ret * c.ret;
    if (flags.use_freq_loss) total += w.freq * c.freq;
    if (flags.use_clean_loss) total += w.cln * c.cln;
    if (!std::isfinite(total)) throw numeric_error("non-finite total loss");
    return total;
}

// ---- trainer ----

Trainer::Trainer(const TrainConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    cfg_.embedder.side = cfg_.side;
    cfg_.retriever.side = cfg_.side;
    auto rng = derive_rng(cfg_.seed, {0x171u}); // weight init stream
    embedder_ = std::make_unique<Embedder>(cfg_.embedder, rng);
    retriever_ = std::make_unique<Retriever>(cfg_.retriever, rng);
    for (auto* p : embedder_->params()) params_.push_back(p);
    for (auto* p : retriever_->params()) params_.push_back(p);
    for (auto* p : params_) {
        adam_m_.emplace_back(p->value.n, p->value.c, p->value.h, p->value.w);
        adam_v_.emplace_back(p->value.n, p->value.c, p->value.h, p->value.w);
    }
}

void Trainer::adam_update() {
    ++adam_step_;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam_step_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam_step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& p = *params_[k];
        auto& m = adam_m_[k];
        auto& v = adam_v_[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad.v[i];
            m.v[i] = b1 * m.v[i] + (1.0 - b1) * g;
            v.v[i] = b2 * v.v[i] + (1.0 - b2) * g * g;
            const double mhat = m.v[i] / bc1;
            const double vhat = v.v[i] / bc2;
            p.value.v[i] -= current_lr_ * mhat / (std::sqrt(vhat) + kAdamEps);
        }
        p.grad.zero();
    }
}

TrainLogRecord Trainer::step(const std::vector<Image>& covers, const std::vector<Image>& secrets,
                             int epoch, int step_index) {
    require(!covers.empty() && covers.size() == secrets.size(),
            "train step: covers and secrets must pair up");
    const int N = static_cast<int>(covers.size());
    const int side = covers[0].width;
    for (const auto& im : covers) require(im.width == side && im.height == side, "batch shape");
    for (const auto& im : secrets) require(im.width == side && im.height == side, "batch shape");

    current_lr_ = cfg_.lr_at_epoch(epoch);
    TrainLogRecord rec;
    rec.epoch = epoch;
    rec.step = step_index;
    rec.lr = current_lr_;

    const std::size_t item = static_cast<std::size_t>(3) * side * side;
    const double numel = static_cast<double>(N) * item;

    Tensor C(N, 3, side, side), S(N, 3, side, side);
    for (int i = 0; i < N; ++i) {
        std::copy(covers[i].data.begin(), covers[i].data.end(), C.item(i));
        std::copy(secrets[i].data.begin(), secrets[i].data.end(), S.item(i));
    }

    // Clean branch first: backward immediately so the retriever's layer
    // caches are free for the container branch.
    if (cfg_.flags.use_clean_loss) {
        Tensor null_hat = retriever_->forward(C, true);
        double acc = 0.0;
        for (double v : null_hat.v) acc += v * v;
        rec.l_cln = acc / numel;
        Tensor g(N, 3, side, side);
        const double scale = cfg_.weights.cln * 2.0 / numel;
        for (std::size_t i = 0; i < g.size(); ++i) g.v[i] = scale * null_hat.v[i];
        retriever_->backward(g);
    }

    // Embedding
    Tensor q = embedder_->forward(S, true);

    // Frequency loss against the detached low-passed target
    Tensor dq_freq(N, 3, side, side);
    if (cfg_.flags.use_freq_loss) {
        const CutoffRadius d{cfg_.effective_cutoff()};
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            FeatureMap fq(side, side);
            std::copy(q.item(i), q.item(i) + item, fq.data.begin());
            FeatureMap target = low_pass(fq, d);
            FeatureMap grad;
            acc += focal_frequency_loss(fq, target, &grad);
            std::copy(grad.data.begin(), grad.data.end(), dq_freq.item(i));
        }
        rec.l_freq = acc / N;
    }

    // Container with clamp mask
    Tensor Cp(N, 3, side, side);
    std::vector<std::uint8_t> pass(Cp.size());
    for (std::size_t i = 0; i < Cp.size(); ++i) {
        const double v = C.v[i] + q.v[i];
        pass[i] = (v >= 0.0 && v <= 1.0) ? 1 : 0;
        Cp.v[i] = std::clamp(v, 0.0, 1.0);
    }
    rec.l_emb = mse_span(C.v.data(), Cp.v.data(), Cp.size());

    // Attack layer
    Tensor Ca = Cp;
    std::vector<AttackTape> tapes(N);
    bool attacked = false;
    if (cfg_.flags.use_attack_layer) {
        attacked = true;
        for (int i = 0; i < N; ++i) {
            auto rng = derive_rng(cfg_.seed, {kAttackTag, static_cast<std::uint64_t>(epoch),
                                              static_cast<std::uint64_t>(step_index),
                                              static_cast<std::uint64_t>(i)});
            AttackPlan plan = sample_attack_plan(cfg_.attack, side, side, rng);
            for (const auto& s : plan.steps) {
                const int slot = attack_slot(s.id);
                if (slot >= 0 && s.active) ++rec.attack_counts[slot];
            }
            Image img(side, side);
            std::copy(Cp.item(i), Cp.item(i) + item, img.data.begin());
            Image out = attack_forward(img, plan, tapes[i]);
            std::copy(out.data.begin(), out.data.end(), Ca.item(i));
        }
    }

    // Retrieval branch
    Tensor Sp = retriever_->forward(Ca, true);
    rec.l_ret = mse_span(S.v.data(), Sp.v.data(), Sp.size());
    Tensor gret(N, 3, side, side);
    {
        const double scale = cfg_.weights.ret * 2.0 / numel;
        for (std::size_t i = 0; i < gret.size(); ++i) gret.v[i] = scale * (Sp.v[i] - S.v[i]);
    }
    Tensor dCa = retriever_->backward(gret);

    // Back through the attack layer to the container
    Tensor dCp(N, 3, side, side);
    if (attacked) {
        for (int i = 0; i < N; ++i) {
            FeatureMap g(side, side);
            std::copy(dCa.item(i), dCa.item(i) + item, g.data.begin());
            FeatureMap out = attack_backward(g, tapes[i]);
            std::copy(out.data.begin(), out.data.end(), dCp.item(i));
        }
    } else {
        dCp = dCa;
    }
    {
        const double scale = cfg_.weights.emb * 2.0 / numel;
        for (std::size_t i = 0; i < dCp.size(); ++i) dCp.v[i] += scale * (Cp.v[i] - C.v[i]);
    }

    // Through the container clamp into the feature map
    Tensor dq(N, 3, side, side);
    for (std::size_t i = 0; i < dq.size(); ++i) dq.v[i] = pass[i] ? dCp.v[i] : 0.0;
    if (cfg_.flags.use_freq_loss) {
        const double scale = cfg_.weights.freq / N;
        for (std::size_t i = 0; i < dq.size(); ++i) dq.v[i] += scale * dq_freq.v[i];
    }
    embedder_->backward(dq);

    LossComponents comp{rec.l_emb, rec.l_freq, rec.l_ret, rec.l_cln};
    rec.total = total_loss(comp, cfg_.weights, cfg_.flags);
    adam_update();
    return rec;
}

void Trainer::save(const std::string& path, int epoch) const {
    CheckpointExtra extra;
    extra.adam_step = adam_step_;
    extra.epoch = epoch;
    extra.config_json = cfg_.to_json();
    extra.rng_state = SeededRng(cfg_.seed).state();
    for (std::size_t k = 0; k < params_.size(); ++k) {
        extra.opt_tensors.emplace("m." + params_[k]->name, adam_m_[k]);
        extra.opt_tensors.emplace("v." + params_[k]->name, adam_v_[k]);
    }
    save_checkpoint(path, *embedder_, *retriever_, &extra);
}

// ---- full run ----

TrainResult train(const TrainConfig& cfg, const DatasetSplit& data, const std::string& out_dir,
                  const TrainProgress& progress) {
    cfg.validate();
    if (data.train.empty()) throw config_error("training set is empty");
    fs::create_directories(out_dir);

    std::vector<Image> pool;
    pool.reserve(data.train.size());
    for (const auto& path : data.train) pool.push_back(load_image(path, cfg.side));

    Trainer trainer(cfg);
    TrainResult result;

    std::ofstream log_csv(fs::path(out_dir) / "train_log.csv");
    if (!log_csv) throw io_error("cannot write train_log.csv in '" + out_dir + "'");
    log_csv << TrainLogRecord::csv_header() << '\n';

    const std::size_t n = pool.size();
    std::vector<std::size_t> cover_ids(n), secret_ids(n);
    for (std::size_t i = 0; i < n; ++i) cover_ids[i] = secret_ids[i] = i;

    // Disjoint pairing splits the pool in half; shared draws both roles
    // from the full pool with independent orders.
    std::size_t cover_lo = 0, cover_hi = n, secret_lo = 0, secret_hi = n;
    if (cfg.pairing == "disjoint") {
        require(n >= 2, "disjoint pairing needs at least two images");
        cover_hi = n / 2;
        secret_lo = n / 2;
    }

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        auto rng = derive_rng(cfg.seed, {kPairTag, static_cast<std::uint64_t>(epoch)});
        auto shuffle_range = [&rng](std::vector<std::size_t>& v, std::size_t lo, std::size_t hi) {
            for (std::size_t i = hi - lo - 1; i > 0; --i) {
                const std::size_t j = rng.uniform_int(i + 1);
                std::swap(v[lo + i], v[lo + j]);
            }
        };
        shuffle_range(cover_ids, cover_lo, cover_hi);
        shuffle_range(secret_ids, secret_lo, secret_hi);
        std::size_t cpos = cover_lo, spos = secret_lo;

        for (int s = 1; s <= cfg.steps_per_epoch; ++s) {
            std::vector<Image> covers, secrets;
            covers.reserve(cfg.batch_size);
            secrets.reserve(cfg.batch_size);
            for (int b = 0; b < cfg.batch_size; ++b) {
                if (cpos >= cover_hi) {
                    shuffle_range(cover_ids, cover_lo, cover_hi);
                    cpos = cover_lo;
                }
                if (spos >= secret_hi) {
                    shuffle_range(secret_ids, secret_lo, secret_hi);
                    spos = secret_lo;
                }
                covers.push_back(pool[cover_ids[cpos++]]);
                secrets.push_back(pool[secret_ids[spos++]]);
            }
            TrainLogRecord rec = trainer.step(covers, secrets, epoch, s);
            log_csv << rec.csv_row() << '\n';
            result.log.push_back(rec);
            if (progress) progress(rec);
        }
        trainer.save((fs::path(out_dir) / ("epoch_" + std::to_string(epoch) + ".ckpt")).string(),
                     epoch);
        log_csv.flush();
    }

    const std::string final_path = (fs::path(out_dir) / "final.ckpt").string();
    trainer.save(final_path, cfg.epochs);
    result.final_checkpoint = final_path;
    return result;
}

} // namespace lfs
