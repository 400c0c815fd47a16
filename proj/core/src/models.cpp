#include "lfs/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include <json.hpp>

#include "lfs/errors.hpp"

namespace lfs {

using json = nlohmann::json;
using nn::Tensor;

namespace {

bool is_pow2(int n) {
    return n > 0 && (n & (n - 1)) == 0;
}

int ilog2(int n) {
    int k = 0;
    while ((1 << k) < n) ++k;
    return k;
}

void check_input(const Tensor& x, int min_side) {
    require(x.c == 3, "network input must have 3 channels");
    require(x.h == x.w, "network input must be square");
    require(is_pow2(x.h) && x.h >= min_side, "network input side must be a power of two >= 2^depth");
}

} // namespace

int EmbedderSpec::depth() const {
    return ilog2(side);
}

std::vector<int> EmbedderSpec::widths() const {
    std::vector<int> w(depth());
    for (int i = 0; i < depth(); ++i)
        w[i] = std::min(base_channels << i, max_channels);
    return w;
}

void EmbedderSpec::validate() const {
    if (!is_pow2(side) || side < 4) throw config_error("embedder side must be a power of two >= 4");
    if (base_channels < 1 || max_channels < base_channels)
        throw config_error("embedder channel widths invalid");
    if (strength <= 0.0 || strength > 1.0)
        throw config_error("embedding strength must lie in (0,1]");
}

void RetrieverSpec::validate() const {
    if (!is_pow2(side) || side < 4) throw config_error("retriever side must be a power of two >= 4");
    if (base_channels < 1) throw config_error("retriever base channels invalid");
    if (downsample_blocks < 1 || upsample_blocks < 1 || residual_blocks < 0)
        throw config_error("retriever block counts invalid");
}

namespace detail {

Tensor ResBlock::forward(const Tensor& x, bool train) {
    Tensor y = bn2.forward(conv2.forward(act.forward(bn1.forward(conv1.forward(x, train), train), train), train), train);
    require(y.same_shape(x), "ResBlock: shape drift");
    for (std::size_t i = 0; i < y.size(); ++i) y.v[i] += x.v[i];
    return y;
}

Tensor ResBlock::backward(const Tensor& dy) {
    Tensor dx = conv1.backward(bn1.backward(act.backward(conv2.backward(bn2.backward(dy)))));
    for (std::size_t i = 0; i < dx.size(); ++i) dx.v[i] += dy.v[i];
    return dx;
}

} // namespace detail

// ---- Embedder ----

Embedder::Embedder(const EmbedderSpec& spec, SeededRng& rng) : spec_(spec) {
    spec_.validate();
    const auto w = spec_.widths();
    const int depth = spec_.depth();
    require(depth >= 2, "embedder needs at least two levels");

    enc_.reserve(depth);
    for (int i = 0; i < depth; ++i) {
        const int cin = i == 0 ? 3 : w[i - 1];
        enc_.push_back(std::make_unique<detail::EncBlock>("embed.enc" + std::to_string(i), cin,
                                                          w[i], rng));
    }
    // decoder block j consumes concat(prev, enc skip) and emits w[depth-2-j]
    dec_.reserve(depth - 1);
    for (int j = 0; j < depth - 1; ++j) {
        const int cin = j == 0 ? w[depth - 1] : 2 * w[depth - 1 - j];
        const int cout = w[depth - 2 - j];
        dec_.push_back(std::make_unique<detail::DecBlock>("embed.dec" + std::to_string(j), cin,
                                                          cout, rng));
    }
    final_ = std::make_unique<nn::ConvTranspose2d>("embed.final", 2 * w[0], 3, 4, 2, 1, rng);
}

nn::Tensor Embedder::forward(const nn::Tensor& secret, bool train) {
    check_input(secret, spec_.side);
    const int depth = spec_.depth();

    enc_out_.assign(depth, Tensor());
    Tensor x = secret;
    for (int i = 0; i < depth; ++i) {
        x = enc_[i]->forward(x, train);
        enc_out_[i] = x;
    }

    cat_first_channels_.assign(depth - 1, 0);
    Tensor d = dec_[0]->forward(enc_out_[depth - 1], train);
    for (int j = 1; j < depth - 1; ++j) {
        cat_first_channels_[j] = d.c;
        d = dec_[j]->forward(nn::concat_channels(d, enc_out_[depth - 1 - j]), train);
    }
    cat_first_channels_[0] = d.c; // channels entering the final concat
    Tensor sig = out_act_.forward(final_->forward(nn::concat_channels(d, enc_out_[0]), train), train);

    if (spec_.residual_mode == ResidualMode::raw_sigmoid) return sig;
    Tensor q = sig;
    const double a = spec_.strength;
    for (double& v : q.v) v = a * (2.0 * v - 1.0);
    return q;
}

nn::Tensor Embedder::backward(const nn::Tensor& dq) {
    const int depth = spec_.depth();
    Tensor dsig = dq;
    if (spec_.residual_mode == ResidualMode::zero_centered) {
        const double a = 2.0 * spec_.strength;
        for (double& v : dsig.v) v *= a;
    }

    std::vector<Tensor> skip_grads(depth);
    Tensor dcat = final_->backward(out_act_.backward(dsig));
    Tensor d, skip;
    nn::split_channels(dcat, cat_first_channels_[0], d, skip);
    skip_grads[0] = std::move(skip);

    for (int j = depth - 2; j >= 1; --j) {
        Tensor dprev = dec_[j]->backward(d);
        nn::split_channels(dprev, cat_first_channels_[j], d, skip);
        skip_grads[depth - 1 - j] = std::move(skip);
    }
    Tensor g = dec_[0]->backward(d); // gradient at enc_out_[depth-1]

    for (int i = depth - 1; i >= 0; --i) {
        if (i != depth - 1 && skip_grads[i].size() > 0)
            for (std::size_t k = 0; k < g.size(); ++k) g.v[k] += skip_grads[i].v[k];
        g = enc_[i]->backward(g);
    }
    return g;
}

std::vector<nn::Param*> Embedder::params() {
    std::vector<nn::Param*> out;
    for (auto& b : enc_)
        for (auto* p : b->conv.params()) out.push_back(p);
    for (auto& b : enc_)
        for (auto* p : b->bn.params()) out.push_back(p);
    for (auto& b : dec_)
        for (auto* p : b->conv.params()) out.push_back(p);
    for (auto& b : dec_)
        for (auto* p : b->bn.params()) out.push_back(p);
    for (auto* p : final_->params()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, nn::Tensor*>> Embedder::state_tensors() {
    std::vector<std::pair<std::string, nn::Tensor*>> out;
    for (auto* p : params()) out.emplace_back(p->name, &p->value);
    int i = 0;
    for (auto& b : enc_) {
        const std::string base = "embed.enc" + std::to_string(i++) + ".bn";
        out.emplace_back(base + ".running_mean", &b->bn.running_mean());
        out.emplace_back(base + ".running_var", &b->bn.running_var());
    }
    i = 0;
    for (auto& b : dec_) {
        const std::string base = "embed.dec" + std::to_string(i++) + ".bn";
        out.emplace_back(base + ".running_mean", &b->bn.running_mean());
        out.emplace_back(base + ".running_var", &b->bn.running_var());
    }
    return out;
}

// ---- Retriever ----

Retriever::Retriever(const RetrieverSpec& spec, SeededRng& rng) : spec_(spec) {
    spec_.validate();
    const int b = spec_.base_channels;
    const int trunk = 2 * b;

    for (int i = 0; i < spec_.downsample_blocks; ++i) {
        const bool last = i == spec_.downsample_blocks - 1;
        const int cin = i == 0 ? 3 : b;
        const int cout = last ? trunk : b;
        down_.push_back(std::make_unique<detail::ConvBnRelu>(
            "retrieve.down" + std::to_string(i), cin, cout, 3, last ? 2 : 1, 1, rng));
    }
    for (int i = 0; i < spec_.residual_blocks; ++i)
        res_.push_back(
            std::make_unique<detail::ResBlock>("retrieve.res" + std::to_string(i), trunk, rng));
    up_first_ = std::make_unique<detail::DeconvBnRelu>("retrieve.up0", trunk, b, rng);
    for (int i = 1; i < spec_.upsample_blocks; ++i)
        up_rest_.push_back(std::make_unique<detail::ConvBnRelu>(
            "retrieve.up" + std::to_string(i), b, b, 3, 1, 1, rng));
    head_ = std::make_unique<nn::Conv2d>("retrieve.head", b, 3, 3, 1, 1, rng);
}

nn::Tensor Retriever::forward(const nn::Tensor& x, bool train) {
    check_input(x, 4);
    Tensor t = x;
    for (auto& blk : down_) t = blk->forward(t, train);
    for (auto& blk : res_) t = blk->forward(t, train);
    t = up_first_->forward(t, train);
    for (auto& blk : up_rest_) t = blk->forward(t, train);
    return out_act_.forward(head_->forward(t, train), train);
}

nn::Tensor Retriever::backward(const nn::Tensor& dy) {
    Tensor g = head_->backward(out_act_.backward(dy));
    for (auto it = up_rest_.rbegin(); it != up_rest_.rend(); ++it) g = (*it)->backward(g);
    g = up_first_->backward(g);
    for (auto it = res_.rbegin(); it != res_.rend(); ++it) g = (*it)->backward(g);
    for (auto it = down_.rbegin(); it != down_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<nn::Param*> Retriever::params() {
    std::vector<nn::Param*> out;
    auto push = [&out](std::vector<nn::Param*> ps) {
        for (auto* p : ps) out.push_back(p);
    };
    for (auto& b : down_) {
        push(b->conv.params());
        push(b->bn.params());
    }
    for (auto& b : res_) {
        push(b->conv1.params());
        push(b->bn1.params());
        push(b->conv2.params());
        push(b->bn2.params());
    }
    push(up_first_->conv.params());
    push(up_first_->bn.params());
    for (auto& b : up_rest_) {
        push(b->conv.params());
        push(b->bn.params());
    }
    push(head_->params());
    return out;
}

std::vector<std::pair<std::string, nn::Tensor*>> Retriever::state_tensors() {
    std::vector<std::pair<std::string, nn::Tensor*>> out;
    for (auto* p : params()) out.emplace_back(p->name, &p->value);
    auto add_bn = [&out](const std::string& base, nn::BatchNorm2d& bn) {
        out.emplace_back(base + ".running_mean", &bn.running_mean());
        out.emplace_back(base + ".running_var", &bn.running_var());
    };
    int i = 0;
    for (auto& b : down_) add_bn("retrieve.down" + std::to_string(i++) + ".bn", b->bn);
    i = 0;
    for (auto& b : res_) {
        add_bn("retrieve.res" + std::to_string(i) + ".bn1", b->bn1);
        add_bn("retrieve.res" + std::to_string(i) + ".bn2", b->bn2);
        ++i;
    }
    add_bn("retrieve.up0.bn", up_first_->bn);
    i = 1;
    for (auto& b : up_rest_) add_bn("retrieve.up" + std::to_string(i++) + ".bn", b->bn);
    return out;
}

// ---- spec-level single-image operations ----

FeatureMap embed(Embedder& embedder, const Image& secret) {
    require(secret.square(), "embed: secret must be square");
    Tensor s(1, 3, secret.height, secret.width);
    std::copy(secret.data.begin(), secret.data.end(), s.v.begin());
    Tensor q = embedder.forward(s, false);
    FeatureMap fm(secret.width, secret.height);
    std::copy(q.v.begin(), q.v.end(), fm.data.begin());
    return fm;
}

Image make_container(const Image& cover, const FeatureMap& q) {
    require(cover.width == q.width && cover.height == q.height,
            "make_container: shape mismatch");
    Image out = cover;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = std::clamp(out.data[i] + q.data[i], 0.0, 1.0);
    return out;
}

Image retrieve(Retriever& retriever, const Image& x) {
    require(x.square(), "retrieve: input must be square");
    Tensor t(1, 3, x.height, x.width);
    std::copy(x.data.begin(), x.data.end(), t.v.begin());
    Tensor y = retriever.forward(t, false);
    Image out(x.width, x.height);
    std::copy(y.v.begin(), y.v.end(), out.data.begin());
    return out;
}

// ---- checkpoint ----

namespace {

constexpr char kMagic[8] = {'L', 'F', 'S', 'C', 'K', 'P', 'T', '1'};

json spec_to_json(const EmbedderSpec& s) {
    return json{{"side", s.side},
                {"base_channels", s.base_channels},
                {"max_channels", s.max_channels},
                {"strength", s.strength},
                {"residual_mode",
                 s.residual_mode == ResidualMode::zero_centered ? "zero_centered" : "raw_sigmoid"}};
}

json spec_to_json(const RetrieverSpec& s) {
    return json{{"side", s.side},
                {"base_channels", s.base_channels},
                {"downsample_blocks", s.downsample_blocks},
                {"residual_blocks", s.residual_blocks},
                {"upsample_blocks", s.upsample_blocks}};
}

EmbedderSpec embedder_spec_from_json(const json& j) {
    EmbedderSpec s;
    s.side = j.at("side").get<int>();
    s.base_channels = j.at("base_channels").get<int>();
    s.max_channels = j.at("max_channels").get<int>();
    s.strength = j.at("strength").get<double>();
    s.residual_mode = j.at("residual_mode").get<std::string>() == "raw_sigmoid"
                          ? ResidualMode::raw_sigmoid
                          : ResidualMode::zero_centered;
    return s;
}

RetrieverSpec retriever_spec_from_json(const json& j) {
    RetrieverSpec s;
    s.side = j.at("side").get<int>();
    s.base_channels = j.at("base_channels").get<int>();
    s.downsample_blocks = j.at("downsample_blocks").get<int>();
    s.residual_blocks = j.at("residual_blocks").get<int>();
    s.upsample_blocks = j.at("upsample_blocks").get<int>();
    return s;
}

json tensor_meta(const Tensor& t, std::uint64_t offset) {
    return json{{"shape", {t.n, t.c, t.h, t.w}}, {"offset", offset}, {"count", t.size()}};
}

} // namespace

void save_checkpoint(const std::string& path, Embedder& embedder, Retriever& retriever,
                     const CheckpointExtra* extra) {
    auto etensors = embedder.state_tensors();
    auto rtensors = retriever.state_tensors();

    json header;
    header["embedder_spec"] = spec_to_json(embedder.spec());
    header["retriever_spec"] = spec_to_json(retriever.spec());

    std::uint64_t offset = 0;
    json table = json::object();
    std::vector<const Tensor*> blobs;
    auto add = [&](const std::string& name, const Tensor& t) {
        table[name] = tensor_meta(t, offset);
        offset += t.size();
        blobs.push_back(&t);
    };
    for (auto& [name, t] : etensors) add(name, *t);
    for (auto& [name, t] : rtensors) add(name, *t);
    if (extra) {
        for (const auto& [name, t] : extra->opt_tensors) add("opt." + name, t);
        header["adam_step"] = extra->adam_step;
        header["rng_state"] = extra->rng_state;
        header["epoch"] = extra->epoch;
        header["config"] = extra->config_json;
    }
    header["tensors"] = std::move(table);

    const std::string htxt = header.dump();
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw io_error("cannot write checkpoint '" + path + "'");
    std::fwrite(kMagic, 1, sizeof kMagic, f);
    const std::uint64_t hlen = htxt.size();
    std::fwrite(&hlen, sizeof hlen, 1, f);
    std::fwrite(htxt.data(), 1, htxt.size(), f);
    for (const Tensor* t : blobs)
        std::fwrite(t->v.data(), sizeof(double), t->v.size(), f);
    if (std::fclose(f) != 0) throw io_error("short write to checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw io_error("cannot open checkpoint '" + path + "'");
    char magic[8];
    std::uint64_t hlen = 0;
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kMagic, 8) != 0 ||
        std::fread(&hlen, sizeof hlen, 1, f) != 1) {
        std::fclose(f);
        throw io_error("'" + path + "' is not a checkpoint file");
    }
    std::string htxt(hlen, '\0');
    if (std::fread(htxt.data(), 1, hlen, f) != hlen) {
        std::fclose(f);
        throw io_error("truncated checkpoint '" + path + "'");
    }
    json header = json::parse(htxt);

    Checkpoint ckpt;
    ckpt.embedder_spec = embedder_spec_from_json(header.at("embedder_spec"));
    ckpt.retriever_spec = retriever_spec_from_json(header.at("retriever_spec"));
    SeededRng dummy(0); // all tensors are overwritten below
    ckpt.embedder = std::make_unique<Embedder>(ckpt.embedder_spec, dummy);
    ckpt.retriever = std::make_unique<Retriever>(ckpt.retriever_spec, dummy);

    const long data_start = std::ftell(f);
    auto read_tensor = [&](const json& meta, Tensor& t) {
        const auto shape = meta.at("shape");
        t = Tensor(shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>(),
                   shape[3].get<int>());
        const std::uint64_t count = meta.at("count").get<std::uint64_t>();
        require(count == t.size(), "checkpoint tensor size mismatch");
        std::fseek(f, data_start + static_cast<long>(meta.at("offset").get<std::uint64_t>() *
                                                     sizeof(double)),
                   SEEK_SET);
        if (std::fread(t.v.data(), sizeof(double), count, f) != count)
            throw io_error("truncated checkpoint '" + path + "'");
    };

    const json& table = header.at("tensors");
    auto fill = [&](std::vector<std::pair<std::string, Tensor*>> tensors) {
        for (auto& [name, t] : tensors) {
            if (!table.contains(name)) throw io_error("checkpoint missing tensor '" + name + "'");
            Tensor tmp;
            read_tensor(table.at(name), tmp);
            require(tmp.same_shape(*t), "checkpoint shape mismatch for '" + name + "'");
            *t = std::move(tmp);
        }
    };
    fill(ckpt.embedder->state_tensors());
    fill(ckpt.retriever->state_tensors());

    if (header.contains("adam_step")) {
        ckpt.has_extra = true;
        ckpt.extra.adam_step = header.at("adam_step").get<std::uint64_t>();
        ckpt.extra.epoch = header.at("epoch").get<int>();
        ckpt.extra.config_json = header.value("config", "");
        auto rs = header.at("rng_state");
        for (int i = 0; i < 4; ++i) ckpt.extra.rng_state[i] = rs[i].get<std::uint64_t>();
        for (auto& [name, meta] : table.items()) {
            if (name.rfind("opt.", 0) != 0) continue;
            Tensor t;
            read_tensor(meta, t);
            ckpt.extra.opt_tensors.emplace(name.substr(4), std::move(t));
        }
    }
    std::fclose(f);
    return ckpt;
}

} // namespace lfs
