#include <doctest.h>

#include <cmath>
#include <functional>

#include "lfs/nn.hpp"
#include "lfs/rng.hpp"

using namespace lfs;
using nn::Tensor;

namespace {

Tensor random_tensor(int n, int c, int h, int w, SeededRng& rng, double amp = 1.0) {
    Tensor t(n, c, h, w);
    for (double& v : t.v) v = rng.uniform(-amp, amp);
    return t;
}

// Scalar probe loss: sum of y .* r for a fixed random projection r, so
// dL/dy = r and backward() can be checked coordinate by coordinate.
struct Probe {
    Tensor r;
    explicit Probe(const Tensor& like, SeededRng& rng) {
        r = Tensor(like.n, like.c, like.h, like.w);
        for (double& v : r.v) v = rng.uniform(-1.0, 1.0);
    }
    double value(const Tensor& y) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) acc += y.v[i] * r.v[i];
        return acc;
    }
};

// Central finite differences on every parameter and the input.
void check_layer_gradients(nn::Layer& layer, const Tensor& x, double tol = 1e-6) {
    SeededRng rng(777);
    Tensor y = layer.forward(x, true);
    const Probe probe(y, rng);
    for (auto* p : layer.params()) p->grad.zero();
    layer.forward(x, true); // refresh caches after the probe sizing pass
    const Tensor dx = layer.backward(probe.r);

    auto fd = [&](std::function<double*(void)> coord) {
        const double h = 1e-6;
        double* v = coord();
        const double saved = *v;
        *v = saved + h;
        const double fp = probe.value(layer.forward(x, true));
        *v = saved - h;
        const double fm = probe.value(layer.forward(x, true));
        *v = saved;
        return (fp - fm) / (2.0 * h);
    };

    SeededRng pick(31);
    for (auto* p : layer.params()) {
        for (int t = 0; t < 8; ++t) {
            const std::size_t i = pick.uniform_int(p->value.size());
            const double want = fd([&] { return &p->value.v[i]; });
            const double got = p->grad.v[i];
            const double denom = std::max({std::abs(want), std::abs(got), 1e-8});
            CHECK(std::abs(want - got) / denom < tol);
        }
    }
    Tensor xm = x;
    for (int t = 0; t < 8; ++t) {
        const std::size_t i = pick.uniform_int(x.size());
        const double h = 1e-6;
        const double saved = xm.v[i];
        xm.v[i] = saved + h;
        const double fp = probe.value(layer.forward(xm, true));
        xm.v[i] = saved - h;
        const double fm = probe.value(layer.forward(xm, true));
        xm.v[i] = saved;
        const double want = (fp - fm) / (2.0 * h);
        const double got = dx.v[i];
        const double denom = std::max({std::abs(want), std::abs(got), 1e-8});
        CHECK(std::abs(want - got) / denom < tol);
    }
}

} // namespace

TEST_CASE("conv2d output shape") {
    SeededRng rng(1);
    nn::Conv2d conv("c", 3, 8, 4, 2, 1, rng);
    const Tensor x = random_tensor(2, 3, 16, 16, rng);
    const Tensor y = conv.forward(x, true);
    CHECK(y.n == 2);
    CHECK(y.c == 8);
    CHECK(y.h == 8);
    CHECK(y.w == 8);
}

TEST_CASE("conv2d matches a naive direct convolution") {
    SeededRng rng(3);
    nn::Conv2d conv("c", 2, 3, 3, 1, 1, rng);
    const Tensor x = random_tensor(1, 2, 5, 5, rng);
    const Tensor y = conv.forward(x, true);

    auto* w = conv.params()[0];
    auto* b = conv.params()[1];
    for (int oc = 0; oc < 3; ++oc)
        for (int oy = 0; oy < 5; ++oy)
            for (int ox = 0; ox < 5; ++ox) {
                double acc = b->value.v[oc];
                for (int ic = 0; ic < 2; ++ic)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            const int iy = oy - 1 + ky, ix = ox - 1 + kx;
                            if (iy < 0 || iy >= 5 || ix < 0 || ix >= 5) continue;
                            acc += w->value.v[((oc * 2 + ic) * 3 + ky) * 3 + kx] *
                                   x.v[(ic * 5 + iy) * 5 + ix];
                        }
                CHECK(y.v[(oc * 5 + oy) * 5 + ox] == doctest::Approx(acc).epsilon(1e-12));
            }
}

TEST_CASE("conv2d gradients (stride 1 and stride 2)") {
    SeededRng rng(5);
    {
        nn::Conv2d conv("a", 2, 3, 3, 1, 1, rng);
        check_layer_gradients(conv, random_tensor(2, 2, 6, 6, rng));
    }
    {
        nn::Conv2d conv("b", 3, 4, 4, 2, 1, rng);
        check_layer_gradients(conv, random_tensor(2, 3, 8, 8, rng));
    }
}

TEST_CASE("conv_transpose2d doubles the side and passes gradient checks") {
    SeededRng rng(7);
    nn::ConvTranspose2d deconv("d", 4, 2, 4, 2, 1, rng);
    const Tensor x = random_tensor(2, 4, 5, 5, rng);
    const Tensor y = deconv.forward(x, true);
    CHECK(y.h == 10);
    CHECK(y.w == 10);
    check_layer_gradients(deconv, x);
}

TEST_CASE("batchnorm normalizes and its gradients include the batch coupling") {
    SeededRng rng(9);
    nn::BatchNorm2d bn("bn", 3);
    Tensor x = random_tensor(3, 3, 4, 4, rng, 2.0);
    for (double& v : x.v) v += 0.7;
    const Tensor y = bn.forward(x, true);
    // per-channel output statistics are standardized
    const std::size_t plane = 16;
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < plane; ++j) mean += y.item(i)[c * plane + j];
        mean /= 3 * plane;
        for (int i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < plane; ++j) {
                const double d = y.item(i)[c * plane + j] - mean;
                var += d * d;
            }
        var /= 3 * plane;
        CHECK(mean == doctest::Approx(0.0).epsilon(0).scale(1).epsilon(1e-9));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
    check_layer_gradients(bn, x, 1e-5);
}

TEST_CASE("batchnorm eval mode uses frozen running statistics") {
    SeededRng rng(11);
    nn::BatchNorm2d bn("bn", 2);
    const Tensor x = random_tensor(4, 2, 3, 3, rng);
    for (int i = 0; i < 20; ++i) bn.forward(x, true);
    const Tensor y1 = bn.forward(x, false);
    const Tensor y2 = bn.forward(x, false);
    for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1.v[i] == y2.v[i]);
    // after many passes over the same batch, running stats approach the
    // batch stats, so eval output approaches train output
    const Tensor yt = bn.forward(x, true);
    for (std::size_t i = 0; i < y1.size(); ++i)
        CHECK(y1.v[i] == doctest::Approx(yt.v[i]).epsilon(0.15));
}

TEST_CASE("activation gradients") {
    SeededRng rng(13);
    {
        nn::ReLU relu;
        check_layer_gradients(relu, random_tensor(2, 3, 4, 4, rng));
    }
    {
        nn::LeakyReLU lrelu(0.2);
        check_layer_gradients(lrelu, random_tensor(2, 3, 4, 4, rng));
    }
    {
        nn::Sigmoid sig;
        check_layer_gradients(sig, random_tensor(2, 3, 4, 4, rng));
    }
}

TEST_CASE("concat and split are mutual inverses") {
    SeededRng rng(17);
    const Tensor a = random_tensor(2, 3, 4, 4, rng);
    const Tensor b = random_tensor(2, 5, 4, 4, rng);
    const Tensor cat = nn::concat_channels(a, b);
    CHECK(cat.c == 8);
    Tensor ra, rb;
    nn::split_channels(cat, 3, ra, rb);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(ra.v[i] == a.v[i]);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(rb.v[i] == b.v[i]);
}
