#ifndef LFS_NN_HPP
#define LFS_NN_HPP

#include <memory>
#include <string>
#include <vector>

#include "lfs/rng.hpp"

namespace lfs::nn {

// NCHW double tensor. Double precision everywhere: the gradient
// contracts are stated in double, and the desk-scale networks are small
// enough that GEMM throughput is not the bottleneck.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_, double fill = 0.0)
        : n(n_), c(c_), h(h_), w(w_),
          v(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

    std::size_t size() const { return v.size(); }
    std::size_t item_size() const { return static_cast<std::size_t>(c) * h * w; }
    double* item(int i) { return v.data() + i * item_size(); }
    const double* item(int i) const { return v.data() + i * item_size(); }
    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool train) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual std::vector<Param*> params() { return {}; }
};

class Conv2d : public Layer {
public:
    Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad,
           SeededRng& rng);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }

    int out_size(int in) const { return (in + 2 * pad_ - kernel_) / stride_ + 1; }

private:
    int in_ch_, out_ch_, kernel_, stride_, pad_;
    Param weight_; // (out_ch, in_ch, k, k)
    Param bias_;   // (out_ch)
    Tensor x_;
};

class ConvTranspose2d : public Layer {
public:
    ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad,
                    SeededRng& rng);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }

    int out_size(int in) const { return (in - 1) * stride_ - 2 * pad_ + kernel_; }

private:
    int in_ch_, out_ch_, kernel_, stride_, pad_;
    Param weight_; // (in_ch, out_ch, k, k)
    Param bias_;
    Tensor x_;
};

// Per-batch statistics while training, frozen running averages at
// evaluation. Population variance normalizes, the unbiased estimate
// feeds the running average.
class BatchNorm2d : public Layer {
public:
    BatchNorm2d(std::string name, int channels, double momentum = 0.1, double eps = 1e-5);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    std::vector<Param*> params() override { return {&gamma_, &beta_}; }

    Tensor& running_mean() { return running_mean_; }
    Tensor& running_var() { return running_var_; }

private:
    int channels_;
    double momentum_, eps_;
    Param gamma_, beta_;
    Tensor running_mean_, running_var_;
    Tensor xhat_;
    std::vector<double> invstd_;
    bool trained_forward_ = false;
};

class ReLU : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::vector<std::uint8_t> mask_;
};

class LeakyReLU : public Layer {
public:
    explicit LeakyReLU(double slope = 0.2) : slope_(slope) {}
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;

private:
    double slope_;
    std::vector<std::uint8_t> mask_;
};

class Sigmoid : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;

private:
    Tensor y_;
};

// channel concatenation for skip connections
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& d, int ca, Tensor& da, Tensor& db);

} // namespace lfs::nn

#endif
