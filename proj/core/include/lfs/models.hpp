#ifndef LFS_MODELS_HPP
#define LFS_MODELS_HPP

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lfs/image.hpp"
#include "lfs/nn.hpp"
#include "lfs/rng.hpp"

namespace lfs {

// How the raw sigmoid output of the embedding network becomes the
// additive feature map. zero_centered maps to strength*(2*sigma - 1) so
// the container can move in both directions; raw_sigmoid adds the
// sigmoid output directly.
enum class ResidualMode { zero_centered, raw_sigmoid };

struct EmbedderSpec {
    int side = 64;
    int base_channels = 16;
    int max_channels = 256;
    double strength = 0.2;
    ResidualMode residual_mode = ResidualMode::zero_centered;

    int depth() const;                // number of 2x downsamplings; bottleneck is 1x1
    std::vector<int> widths() const;  // encoder channels per level
    void validate() const;
};

struct RetrieverSpec {
    int side = 64;
    int base_channels = 16;
    int downsample_blocks = 2; // the last one has stride 2
    int residual_blocks = 9;   // 2 convolutions each
    int upsample_blocks = 2;   // the first one is the transposed conv

    void validate() const;
};

namespace detail {

struct EncBlock {
    nn::Conv2d conv;
    nn::LeakyReLU act;
    nn::BatchNorm2d bn;
    EncBlock(const std::string& name, int cin, int cout, SeededRng& rng)
        : conv(name + ".conv", cin, cout, 4, 2, 1, rng), act(0.2), bn(name + ".bn", cout) {}
    nn::Tensor forward(const nn::Tensor& x, bool train) {
        return bn.forward(act.forward(conv.forward(x, train), train), train);
    }
    nn::Tensor backward(const nn::Tensor& dy) {
        return conv.backward(act.backward(bn.backward(dy)));
    }
};

struct DecBlock {
    nn::ConvTranspose2d conv;
    nn::ReLU act;
    nn::BatchNorm2d bn;
    DecBlock(const std::string& name, int cin, int cout, SeededRng& rng)
        : conv(name + ".conv", cin, cout, 4, 2, 1, rng), bn(name + ".bn", cout) {}
    nn::Tensor forward(const nn::Tensor& x, bool train) {
        return bn.forward(act.forward(conv.forward(x, train), train), train);
    }
    nn::Tensor backward(const nn::Tensor& dy) {
        return conv.backward(act.backward(bn.backward(dy)));
    }
};

struct ConvBnRelu {
    nn::Conv2d conv;
    nn::BatchNorm2d bn;
    nn::ReLU act;
    ConvBnRelu(const std::string& name, int cin, int cout, int k, int stride, int pad,
               SeededRng& rng)
        : conv(name + ".conv", cin, cout, k, stride, pad, rng), bn(name + ".bn", cout) {}
    nn::Tensor forward(const nn::Tensor& x, bool train) {
        return act.forward(bn.forward(conv.forward(x, train), train), train);
    }
    nn::Tensor backward(const nn::Tensor& dy) {
        return conv.backward(bn.backward(act.backward(dy)));
    }
};

struct DeconvBnRelu {
    nn::ConvTranspose2d conv;
    nn::BatchNorm2d bn;
    nn::ReLU act;
    DeconvBnRelu(const std::string& name, int cin, int cout, SeededRng& rng)
        : conv(name + ".conv", cin, cout, 4, 2, 1, rng), bn(name + ".bn", cout) {}
    nn::Tensor forward(const nn::Tensor& x, bool train) {
        return act.forward(bn.forward(conv.forward(x, train), train), train);
    }
    nn::Tensor backward(const nn::Tensor& dy) {
        return conv.backward(bn.backward(act.backward(dy)));
    }
};

struct ResBlock {
    nn::Conv2d conv1;
    nn::BatchNorm2d bn1;
    nn::ReLU act;
    nn::Conv2d conv2;
    nn::BatchNorm2d bn2;
    ResBlock(const std::string& name, int ch, SeededRng& rng)
        : conv1(name + ".conv1", ch, ch, 3, 1, 1, rng), bn1(name + ".bn1", ch),
          conv2(name + ".conv2", ch, ch, 3, 1, 1, rng), bn2(name + ".bn2", ch) {}
    nn::Tensor forward(const nn::Tensor& x, bool train);
    nn::Tensor backward(const nn::Tensor& dy);
};

} // namespace detail

// UNet-style encoder/decoder: 4x4 stride-2 convolutions down to a 1x1
// bottleneck, transposed convolutions back up with skip concatenation,
// sigmoid output mapped to the additive feature map.
class Embedder {
public:
    Embedder(const EmbedderSpec& spec, SeededRng& rng);

    nn::Tensor forward(const nn::Tensor& secret, bool train);
    nn::Tensor backward(const nn::Tensor& dq);

    std::vector<nn::Param*> params();
    std::vector<std::pair<std::string, nn::Tensor*>> state_tensors();
    const EmbedderSpec& spec() const { return spec_; }

private:
    EmbedderSpec spec_;
    std::vector<std::unique_ptr<detail::EncBlock>> enc_;
    std::vector<std::unique_ptr<detail::DecBlock>> dec_;
    std::unique_ptr<nn::ConvTranspose2d> final_;
    nn::Sigmoid out_act_;
    std::vector<nn::Tensor> enc_out_;
    std::vector<int> cat_first_channels_;
};

// Down-sampling head, residual trunk, up-sampling tail, sigmoid output.
class Retriever {
public:
    Retriever(const RetrieverSpec& spec, SeededRng& rng);

    nn::Tensor forward(const nn::Tensor& x, bool train);
    nn::Tensor backward(const nn::Tensor& dy);

    std::vector<nn::Param*> params();
    std::vector<std::pair<std::string, nn::Tensor*>> state_tensors();
    const RetrieverSpec& spec() const { return spec_; }

private:
    RetrieverSpec spec_;
    std::vector<std::unique_ptr<detail::ConvBnRelu>> down_;
    std::vector<std::unique_ptr<detail::ResBlock>> res_;
    std::unique_ptr<detail::DeconvBnRelu> up_first_;
    std::vector<std::unique_ptr<detail::ConvBnRelu>> up_rest_;
    std::unique_ptr<nn::Conv2d> head_;
    nn::Sigmoid out_act_;
};

// ---- spec-level operations on single images ----

FeatureMap embed(Embedder& embedder, const Image& secret);
Image make_container(const Image& cover, const FeatureMap& q);
Image retrieve(Retriever& retriever, const Image& x);

// ---- checkpointing ----

struct CheckpointExtra {
    std::map<std::string, nn::Tensor> opt_tensors; // optimizer moments, keyed by param name
    std::uint64_t adam_step = 0;
    std::array<std::uint64_t, 4> rng_state{};
    int epoch = 0;
    std::string config_json;
};

void save_checkpoint(const std::string& path, Embedder& embedder, Retriever& retriever,
                     const CheckpointExtra* extra = nullptr);

struct Checkpoint {
    EmbedderSpec embedder_spec;
    RetrieverSpec retriever_spec;
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<Retriever> retriever;
    CheckpointExtra extra;
    bool has_extra = false;
};

Checkpoint load_checkpoint(const std::string& path);

} // namespace lfs

#endif
