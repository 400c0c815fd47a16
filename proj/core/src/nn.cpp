#include "lfs/nn.hpp"

#include <cmath>

#include <Eigen/Core>

#include "lfs/errors.hpp"

namespace lfs::nn {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

// im2col for one item: col(K, P) with K = C*k*k, P = oh*ow, zero padding.
void im2col(const double* x, int c, int h, int w, int kernel, int stride, int pad, int oh, int ow,
            double* col) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t pcount = static_cast<std::size_t>(oh) * ow;
    std::size_t row = 0;
    for (int ci = 0; ci < c; ++ci) {
        const double* src = x + ci * plane;
        for (int ky = 0; ky < kernel; ++ky)
            for (int kx = 0; kx < kernel; ++kx, ++row) {
                double* dst = col + row * pcount;
                std::size_t p = 0;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) {
                        for (int ox = 0; ox < ow; ++ox) dst[p++] = 0.0;
                        continue;
                    }
                    const double* srow = src + static_cast<std::size_t>(iy) * w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        dst[p++] = (ix >= 0 && ix < w) ? srow[ix] : 0.0;
                    }
                }
            }
    }
}

// adjoint: scatter col(K, P) back into the input grid
void col2im(const double* col, int c, int h, int w, int kernel, int stride, int pad, int oh,
            int ow, double* x) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t pcount = static_cast<std::size_t>(oh) * ow;
    std::fill(x, x + static_cast<std::size_t>(c) * plane, 0.0);
    std::size_t row = 0;
    for (int ci = 0; ci < c; ++ci) {
        double* dst = x + ci * plane;
        for (int ky = 0; ky < kernel; ++ky)
            for (int kx = 0; kx < kernel; ++kx, ++row) {
                const double* src = col + row * pcount;
                std::size_t p = 0;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) {
                        p += ow;
                        continue;
                    }
                    double* drow = dst + static_cast<std::size_t>(iy) * w;
                    for (int ox = 0; ox < ow; ++ox, ++p) {
                        const int ix = ox * stride - pad + kx;
                        if (ix >= 0 && ix < w) drow[ix] += src[p];
                    }
                }
            }
    }
}

void init_uniform(Tensor& t, double bound, SeededRng& rng) {
    for (double& v : t.v) v = rng.uniform(-bound, bound);
}

} // namespace

// ---- Conv2d ----

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad,
               SeededRng& rng)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
    weight_.name = name + ".weight";
    weight_.value = Tensor(out_ch, in_ch, kernel, kernel);
    weight_.grad = Tensor(out_ch, in_ch, kernel, kernel);
    bias_.name = name + ".bias";
    bias_.value = Tensor(1, out_ch, 1, 1);
    bias_.grad = Tensor(1, out_ch, 1, 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * kernel * kernel);
    init_uniform(weight_.value, bound, rng);
    init_uniform(bias_.value, bound, rng);
}

Tensor Conv2d::forward(const Tensor& x, bool) {
    require(x.c == in_ch_, "Conv2d: channel mismatch");
    x_ = x;
    const int oh = out_size(x.h), ow = out_size(x.w);
    require(oh > 0 && ow > 0, "Conv2d: output would be empty");
    Tensor y(x.n, out_ch_, oh, ow);

    const std::size_t K = static_cast<std::size_t>(in_ch_) * kernel_ * kernel_;
    const std::size_t P = static_cast<std::size_t>(oh) * ow;
    std::vector<double> col(K * P * x.n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x.n; ++i)
        im2col(x.item(i), in_ch_, x.h, x.w, kernel_, stride_, pad_, oh, ow, col.data() + i * K * P);

    // one GEMM over the whole batch: (out_ch x K) * (K x N*P)
    ConstMapRM wmat(weight_.value.v.data(), out_ch_, K);
    for (int i = 0; i < x.n; ++i) {
        ConstMapRM cmat(col.data() + i * K * P, K, P);
        MapRM ymat(y.item(i), out_ch_, P);
        ymat.noalias() = wmat * cmat;
    }
    for (int i = 0; i < x.n; ++i)
        for (int c = 0; c < out_ch_; ++c) {
            double* p = y.item(i) + static_cast<std::size_t>(c) * P;
            const double b = bias_.value.v[c];
            for (std::size_t j = 0; j < P; ++j) p[j] += b;
        }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    const int oh = dy.h, ow = dy.w;
    const std::size_t K = static_cast<std::size_t>(in_ch_) * kernel_ * kernel_;
    const std::size_t P = static_cast<std::size_t>(oh) * ow;

    std::vector<double> col(K * P * x_.n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x_.n; ++i)
        im2col(x_.item(i), in_ch_, x_.h, x_.w, kernel_, stride_, pad_, oh, ow,
               col.data() + i * K * P);

    MapRM dwmat(weight_.grad.v.data(), out_ch_, K);
    for (int i = 0; i < x_.n; ++i) {
        ConstMapRM dymat(dy.item(i), out_ch_, P);
        ConstMapRM cmat(col.data() + i * K * P, K, P);
        dwmat.noalias() += dymat * cmat.transpose();
    }
    for (int i = 0; i < x_.n; ++i)
        for (int c = 0; c < out_ch_; ++c) {
            const double* p = dy.item(i) + static_cast<std::size_t>(c) * P;
            double acc = 0.0;
            for (std::size_t j = 0; j < P; ++j) acc += p[j];
            bias_.grad.v[c] += acc;
        }

    Tensor dx(x_.n, in_ch_, x_.h, x_.w);
    ConstMapRM wmat(weight_.value.v.data(), out_ch_, K);
    std::vector<double> dcol(K * P);
    for (int i = 0; i < x_.n; ++i) {
        ConstMapRM dymat(dy.item(i), out_ch_, P);
        MapRM dcmat(dcol.data(), K, P);
        dcmat.noalias() = wmat.transpose() * dymat;
        col2im(dcol.data(), in_ch_, x_.h, x_.w, kernel_, stride_, pad_, oh, ow, dx.item(i));
    }
    return dx;
}

// ---- ConvTranspose2d ----

ConvTranspose2d::ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel, int stride,
                                 int pad, SeededRng& rng)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
    weight_.name = name + ".weight";
    weight_.value = Tensor(in_ch, out_ch, kernel, kernel);
    weight_.grad = Tensor(in_ch, out_ch, kernel, kernel);
    bias_.name = name + ".bias";
    bias_.value = Tensor(1, out_ch, 1, 1);
    bias_.grad = Tensor(1, out_ch, 1, 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * kernel * kernel);
    init_uniform(weight_.value, bound, rng);
    init_uniform(bias_.value, bound, rng);
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool) {
    require(x.c == in_ch_, "ConvTranspose2d: channel mismatch");
    x_ = x;
    const int oh = out_size(x.h), ow = out_size(x.w);
    Tensor y(x.n, out_ch_, oh, ow);

    // transposed conv = scatter of (out_ch*k*k x in_ch) * X
    const std::size_t K = static_cast<std::size_t>(out_ch_) * kernel_ * kernel_;
    const std::size_t P = static_cast<std::size_t>(x.h) * x.w;
    ConstMapRM wmat(weight_.value.v.data(), in_ch_, K);
    std::vector<double> colbuf(K * P);
    for (int i = 0; i < x.n; ++i) {
        ConstMapRM xmat(x.item(i), in_ch_, P);
        MapRM cmat(colbuf.data(), K, P);
        cmat.noalias() = wmat.transpose() * xmat;
        // col layout matches im2col of the adjoint conv (kernel, stride, pad)
        col2im(colbuf.data(), out_ch_, oh, ow, kernel_, stride_, pad_, x.h, x.w, y.item(i));
    }
    const std::size_t OP = static_cast<std::size_t>(oh) * ow;
    for (int i = 0; i < x.n; ++i)
        for (int c = 0; c < out_ch_; ++c) {
            double* p = y.item(i) + static_cast<std::size_t>(c) * OP;
            const double b = bias_.value.v[c];
            for (std::size_t j = 0; j < OP; ++j) p[j] += b;
        }
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& dy) {
    const int oh = dy.h, ow = dy.w;
    const std::size_t K = static_cast<std::size_t>(out_ch_) * kernel_ * kernel_;
    const std::size_t P = static_cast<std::size_t>(x_.h) * x_.w;

    // im2col over the gradient of the output grid
    std::vector<double> col(K * P * x_.n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x_.n; ++i)
        im2col(dy.item(i), out_ch_, oh, ow, kernel_, stride_, pad_, x_.h, x_.w,
               col.data() + i * K * P);

    MapRM dwmat(weight_.grad.v.data(), in_ch_, K);
    for (int i = 0; i < x_.n; ++i) {
        ConstMapRM xmat(x_.item(i), in_ch_, P);
        ConstMapRM cmat(col.data() + i * K * P, K, P);
        dwmat.noalias() += xmat * cmat.transpose();
    }
    const std::size_t OP = static_cast<std::size_t>(oh) * ow;
    for (int i = 0; i < x_.n; ++i)
        for (int c = 0; c < out_ch_; ++c) {
            const double* p = dy.item(i) + static_cast<std::size_t>(c) * OP;
            double acc = 0.0;
            for (std::size_t j = 0; j < OP; ++j) acc += p[j];
            bias_.grad.v[c] += acc;
        }

    Tensor dx(x_.n, in_ch_, x_.h, x_.w);
    ConstMapRM wmat(weight_.value.v.data(), in_ch_, K);
    for (int i = 0; i < x_.n; ++i) {
        ConstMapRM cmat(col.data() + i * K * P, K, P);
        MapRM dxmat(dx.item(i), in_ch_, P);
        dxmat.noalias() = wmat * cmat;
    }
    return dx;
}

// ---- BatchNorm2d ----

BatchNorm2d::BatchNorm2d(std::string name, int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
    gamma_.name = name + ".gamma";
    gamma_.value = Tensor(1, channels, 1, 1, 1.0);
    gamma_.grad = Tensor(1, channels, 1, 1);
    beta_.name = name + ".beta";
    beta_.value = Tensor(1, channels, 1, 1, 0.0);
    beta_.grad = Tensor(1, channels, 1, 1);
    running_mean_ = Tensor(1, channels, 1, 1, 0.0);
    running_var_ = Tensor(1, channels, 1, 1, 1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
    require(x.c == channels_, "BatchNorm2d: channel mismatch");
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    const std::size_t ns = static_cast<std::size_t>(x.n) * plane;
    Tensor y(x.n, x.c, x.h, x.w);
    trained_forward_ = train;
    if (train) {
        xhat_ = Tensor(x.n, x.c, x.h, x.w);
        invstd_.assign(channels_, 0.0);
    }
    for (int c = 0; c < channels_; ++c) {
        double mean, var;
        if (train) {
            double acc = 0.0;
            for (int i = 0; i < x.n; ++i) {
                const double* p = x.item(i) + c * plane;
                for (std::size_t j = 0; j < plane; ++j) acc += p[j];
            }
            mean = acc / static_cast<double>(ns);
            double vacc = 0.0;
            for (int i = 0; i < x.n; ++i) {
                const double* p = x.item(i) + c * plane;
                for (std::size_t j = 0; j < plane; ++j) {
                    const double d = p[j] - mean;
                    vacc += d * d;
                }
            }
            var = vacc / static_cast<double>(ns);
            const double unbiased = ns > 1 ? vacc / static_cast<double>(ns - 1) : var;
            running_mean_.v[c] = (1.0 - momentum_) * running_mean_.v[c] + momentum_ * mean;
            running_var_.v[c] = (1.0 - momentum_) * running_var_.v[c] + momentum_ * unbiased;
        } else {
            mean = running_mean_.v[c];
            var = running_var_.v[c];
        }
        const double inv = 1.0 / std::sqrt(var + eps_);
        if (train) invstd_[c] = inv;
        const double g = gamma_.value.v[c], b = beta_.value.v[c];
        for (int i = 0; i < x.n; ++i) {
            const double* p = x.item(i) + c * plane;
            double* q = y.item(i) + c * plane;
            double* xh = train ? xhat_.item(i) + c * plane : nullptr;
            for (std::size_t j = 0; j < plane; ++j) {
                const double h = (p[j] - mean) * inv;
                if (xh) xh[j] = h;
                q[j] = g * h + b;
            }
        }
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
    require(trained_forward_, "BatchNorm2d: backward requires a training-mode forward");
    const std::size_t plane = static_cast<std::size_t>(dy.h) * dy.w;
    const double ns = static_cast<double>(dy.n) * plane;
    Tensor dx(dy.n, dy.c, dy.h, dy.w);
    for (int c = 0; c < channels_; ++c) {
        const double g = gamma_.value.v[c];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int i = 0; i < dy.n; ++i) {
            const double* p = dy.item(i) + c * plane;
            const double* xh = xhat_.item(i) + c * plane;
            for (std::size_t j = 0; j < plane; ++j) {
                sum_dy += p[j];
                sum_dy_xhat += p[j] * xh[j];
            }
        }
        gamma_.grad.v[c] += sum_dy_xhat;
        beta_.grad.v[c] += sum_dy;
        const double inv = invstd_[c];
        for (int i = 0; i < dy.n; ++i) {
            const double* p = dy.item(i) + c * plane;
            const double* xh = xhat_.item(i) + c * plane;
            double* q = dx.item(i) + c * plane;
            for (std::size_t j = 0; j < plane; ++j) {
                q[j] = g * inv * (p[j] - sum_dy / ns - xh[j] * sum_dy_xhat / ns);
            }
        }
    }
    return dx;
}

// ---- activations ----

Tensor ReLU::forward(const Tensor& x, bool) {
    Tensor y = x;
    mask_.assign(x.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x.v[i] > 0.0)
            mask_[i] = 1;
        else
            y.v[i] = 0.0;
    }
    return y;
}

Tensor ReLU::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dy.size(); ++i)
        if (!mask_[i]) dx.v[i] = 0.0;
    return dx;
}

Tensor LeakyReLU::forward(const Tensor& x, bool) {
    Tensor y = x;
    mask_.assign(x.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x.v[i] > 0.0)
            mask_[i] = 1;
        else
            y.v[i] *= slope_;
    }
    return y;
}

Tensor LeakyReLU::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dy.size(); ++i)
        if (!mask_[i]) dx.v[i] *= slope_;
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x, bool) {
    Tensor y = x;
    for (double& v : y.v) v = 1.0 / (1.0 + std::exp(-v));
    y_ = y;
    return y;
}

Tensor Sigmoid::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dy.size(); ++i) dx.v[i] *= y_.v[i] * (1.0 - y_.v[i]);
    return dx;
}

// ---- concat ----

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require(a.n == b.n && a.h == b.h && a.w == b.w, "concat: spatial shape mismatch");
    Tensor y(a.n, a.c + b.c, a.h, a.w);
    const std::size_t pa = a.item_size(), pb = b.item_size();
    for (int i = 0; i < a.n; ++i) {
        std::copy(a.item(i), a.item(i) + pa, y.item(i));
        std::copy(b.item(i), b.item(i) + pb, y.item(i) + pa);
    }
    return y;
}

void split_channels(const Tensor& d, int ca, Tensor& da, Tensor& db) {
    da = Tensor(d.n, ca, d.h, d.w);
    db = Tensor(d.n, d.c - ca, d.h, d.w);
    const std::size_t pa = da.item_size(), pb = db.item_size();
    for (int i = 0; i < d.n; ++i) {
        std::copy(d.item(i), d.item(i) + pa, da.item(i));
        std::copy(d.item(i) + pa, d.item(i) + pa + pb, db.item(i));
    }
}

} // namespace lfs::nn
