#include <doctest.h>

#include <cmath>

#include "lfs/attacks.hpp"
#include "lfs/dataset.hpp"
#include "lfs/errors.hpp"
#include "lfs/metrics.hpp"
#include "lfs/rng.hpp"

using namespace lfs;

namespace {

Image random_image(int side, SeededRng& rng, double lo = 0.0, double hi = 1.0) {
    Image img(side, side);
    for (double& v : img.data) v = rng.uniform(lo, hi);
    return img;
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

double mean_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m += std::abs(a.data[i] - b.data[i]);
    return m / a.size();
}

// Directional adjoint check: <v, J u> from finite differences of the
// forward map must equal <J^T v, u> from the tape adjoint.
void check_attack_adjoint(const SampledAttack& step, const Image& x, SeededRng& rng,
                          double tol = 1e-4) {
    AttackPlan plan;
    plan.steps.push_back(step);

    AttackTape tape;
    const Image y0 = attack_forward(x, plan, tape);
    REQUIRE(tape.steps.size() == 1);
    for (auto m : tape.steps[0].pass_mask) REQUIRE(m == 1); // probe inputs must not clamp

    FeatureMap u(x.width, x.height), v(x.width, x.height);
    for (double& e : u.data) e = rng.uniform(-1.0, 1.0);
    for (double& e : v.data) e = rng.uniform(-1.0, 1.0);

    const double h = 1e-6;
    Image xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp.data[i] += h * u.data[i];
        xm.data[i] -= h * u.data[i];
    }
    AttackTape tp, tm;
    const Image yp = attack_forward(xp, plan, tp);
    const Image ym = attack_forward(xm, plan, tm);
    double v_Ju = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        v_Ju += v.data[i] * (yp.data[i] - ym.data[i]) / (2.0 * h);

    const FeatureMap jt_v = attack_backward(v, tape);
    double jtv_u = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) jtv_u += jt_v.data[i] * u.data[i];

    const double denom = std::max({std::abs(v_Ju), std::abs(jtv_u), 1e-10});
    CHECK(std::abs(v_Ju - jtv_u) / denom < tol);
}

} // namespace

TEST_CASE("exact jpeg at quality 100 is near-lossless on textures") {
    SeededRng rng(3);
    const Image img = synth_texture(64, rng);
    const Image out = jpeg_attack(img, 100, AttackMode::exact);
    CHECK(psnr(quantize8(img), out) >= 40.0);
}

TEST_CASE("jpeg keeps constant images constant") {
    Image img(64, 64);
    for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = 0.42;
    for (int q : {10, 50, 90}) {
        for (AttackMode mode : {AttackMode::exact, AttackMode::differentiable}) {
            const Image out = jpeg_attack(img, q, mode);
            CHECK(max_abs_diff(img, out) <= 2.0 / 255.0);
        }
    }
}

TEST_CASE("differentiable jpeg tracks the exact codec") {
    SeededRng rng(7);
    for (int q : {40, 75, 90}) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Image img = synth_texture(64, rng);
            acc += mean_abs_diff(jpeg_attack(img, q, AttackMode::exact),
                                 jpeg_attack(img, q, AttackMode::differentiable));
        }
        CHECK(acc / 3.0 <= 3.0 / 255.0);
    }
}

TEST_CASE("gaussian blur preserves constants and the near-delta limit") {
    Image img(32, 32);
    for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = 0.3;
    CHECK(max_abs_diff(img, gaussian_blur(img, 1.5, 7)) < 1e-12);

    SeededRng rng(11);
    const Image tex = random_image(32, rng, 0.1, 0.9);
    CHECK(max_abs_diff(tex, gaussian_blur(tex, 1e-3, 7)) < 1e-6);
}

TEST_CASE("gaussian blur of an impulse equals the sampled kernel") {
    Image img(32, 32, 0.0);
    img.at(0, 16, 16) = 1.0;
    const double sigma = 1.0;
    const Image out = gaussian_blur(img, sigma, 7);

    // closed-form separable kernel, normalized per axis
    double k[7], sum = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double d = i - 3;
        k[i] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx)
            CHECK(out.at(0, 16 + dy, 16 + dx) ==
                  doctest::Approx(k[dy + 3] * k[dx + 3]).epsilon(1e-9));
}

TEST_CASE("additive noise: zero sigma, empirical scale, determinism") {
    SeededRng rng(13);
    const Image img = random_image(64, rng, 0.3, 0.7);
    SeededRng r0(1);
    CHECK(max_abs_diff(img, additive_noise(img, 0.0, r0)) == 0.0);

    Image mid(64, 64);
    for (double& v : mid.data) v = 0.5;
    const Image noisy = additive_noise_seeded(mid, 10.0, 99);
    double var = 0.0;
    for (std::size_t i = 0; i < mid.size(); ++i) {
        const double d = noisy.data[i] - 0.5;
        var += d * d;
    }
    const double stddev = std::sqrt(var / mid.size());
    CHECK(stddev == doctest::Approx(10.0 / 255.0).epsilon(0.10));

    const Image again = additive_noise_seeded(mid, 10.0, 99);
    CHECK(max_abs_diff(noisy, again) == 0.0);
}

TEST_CASE("color jitter identity and brightness semantics") {
    SeededRng rng(17);
    const Image img = random_image(16, rng, 0.2, 0.8);
    SeededRng r0(1);
    const Image same = color_jitter(img, JitterStrength{0, 0, 0, 0}, r0);
    CHECK(max_abs_diff(img, same) < 1e-12);

    Image half(16, 16);
    for (double& v : half.data) v = 0.5;
    JitterFactors f;
    f.brightness = 1.1;
    const Image brighter = color_jitter_apply(half, f);
    for (double v : brighter.data) CHECK(v == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("saturation-only jitter leaves grayscale images unchanged") {
    SeededRng rng(19);
    Image gray(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const double v = rng.uniform(0.1, 0.9);
            for (int c = 0; c < 3; ++c) gray.at(c, y, x) = v;
        }
    JitterFactors f;
    f.saturation = 1.4;
    CHECK(max_abs_diff(gray, color_jitter_apply(gray, f)) < 1e-12);
    f = JitterFactors{};
    f.hue_turns = 0.07; // hue rotation also fixes the gray axis
    CHECK(max_abs_diff(gray, color_jitter_apply(gray, f)) < 1e-9);
}

TEST_CASE("resize_crop with unit scale is the identity") {
    SeededRng rng(23);
    const Image img = random_image(32, rng);
    SeededRng r0(5);
    CHECK(max_abs_diff(img, resize_crop(img, 1.0, 1.0, r0)) < 1e-6);
}

TEST_CASE("crop of a quadrant pattern yields the quadrant color") {
    Image img(32, 32);
    const double colors[4][3] = {{0.9, 0.1, 0.1}, {0.1, 0.9, 0.1}, {0.1, 0.1, 0.9}, {0.9, 0.9, 0.1}};
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const int qd = (y < 16 ? 0 : 2) + (x < 16 ? 0 : 1);
            for (int c = 0; c < 3; ++c) img.at(c, y, x) = colors[qd][c];
        }
    const Image out = crop_resize(img, CropRect{0, 0, 16, 16}, 32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            for (int c = 0; c < 3; ++c)
                CHECK(out.at(c, y, x) == doctest::Approx(colors[0][c]).epsilon(1e-12));
}

TEST_CASE("resize_crop preserves dimensions for any draw") {
    SeededRng rng(29);
    const Image img = random_image(32, rng);
    for (int t = 0; t < 20; ++t) {
        const Image out = resize_crop(img, 0.5, 1.0, rng);
        CHECK(out.width == 32);
        CHECK(out.height == 32);
    }
}

TEST_CASE("poisson noise stays in range") {
    SeededRng rng(31);
    const Image img = random_image(32, rng);
    const Image out = poisson_noise(img, 255.0, rng);
    for (double v : out.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("attack layer with zero probability is the identity with an idle plan") {
    SeededRng rng(37);
    const Image img = random_image(32, rng);
    AttackConfig cfg;
    cfg.per_attack_probability = 0.0;
    auto [out, plan] = attack_layer(img, cfg, rng, AttackMode::exact);
    CHECK(max_abs_diff(img, out) == 0.0);
    CHECK_FALSE(plan.any_active());
    CHECK(plan.steps.size() == 4); // the default training pool
}

TEST_CASE("attack layer activation frequency approaches (1-p)^4") {
    AttackConfig cfg; // 4-attack pool at p = 0.25
    int none = 0;
    const int trials = 2000;
    SeededRng rng(41);
    for (int t = 0; t < trials; ++t) {
        const AttackPlan plan = sample_attack_plan(cfg, 64, 64, rng);
        if (!plan.any_active()) ++none;
    }
    CHECK(static_cast<double>(none) / trials == doctest::Approx(0.3164).epsilon(0.15));
}

TEST_CASE("logged plans replay bit-exactly through JSON") {
    SeededRng rng(43);
    const Image img = random_image(64, rng, 0.1, 0.9);
    AttackConfig cfg;
    cfg.per_attack_probability = 0.9;
    cfg.include_geometric_in_training = true;
    auto [out, plan] = attack_layer(img, cfg, rng, AttackMode::exact);
    REQUIRE(plan.any_active());
    CHECK(plan.steps.size() == 6);

    const AttackPlan back = plan_from_json(plan_to_json(plan));
    const Image replay = apply_attack_plan(img, back, AttackMode::exact);
    CHECK(max_abs_diff(out, replay) == 0.0);

    const Image replay_diff = apply_attack_plan(img, back, AttackMode::differentiable);
    const Image direct_diff = apply_attack_plan(img, plan, AttackMode::differentiable);
    CHECK(max_abs_diff(replay_diff, direct_diff) == 0.0);
}

TEST_CASE("attacks map valid images to valid images") {
    SeededRng rng(47);
    AttackConfig cfg;
    cfg.per_attack_probability = 0.8;
    cfg.include_geometric_in_training = true;
    for (int t = 0; t < 10; ++t) {
        const Image img = random_image(32, rng);
        auto [out, plan] = attack_layer(img, cfg, rng,
                                        t % 2 ? AttackMode::exact : AttackMode::differentiable);
        CHECK(out.width == 32);
        CHECK(out.height == 32);
        for (double v : out.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("differentiable attack adjoints match finite differences") {
    SeededRng rng(53);
    // inputs biased to the interior so clamps stay inactive
    const Image x = random_image(8, rng, 0.35, 0.65);

    SUBCASE("low-pass") {
        SampledAttack s;
        s.id = AttackId::lowpass;
        s.active = true;
        s.lowpass_d = 3.0;
        check_attack_adjoint(s, x, rng);
    }
    SUBCASE("blur") {
        SampledAttack s;
        s.id = AttackId::blur;
        s.active = true;
        s.blur_sigma = 1.2;
        s.blur_kernel = 5;
        check_attack_adjoint(s, x, rng);
    }
    SUBCASE("noise") {
        SampledAttack s;
        s.id = AttackId::noise;
        s.active = true;
        s.noise_sigma8 = 5.0;
        s.noise_seed = 9;
        check_attack_adjoint(s, x, rng);
    }
    SUBCASE("jitter with given factors") {
        SampledAttack s;
        s.id = AttackId::jitter;
        s.active = true;
        s.jitter = {1.05, 0.93, 1.08, 0.03};
        check_attack_adjoint(s, x, rng);
    }
    SUBCASE("resize crop") {
        SampledAttack s;
        s.id = AttackId::resize_crop;
        s.active = true;
        s.crop = CropRect{1, 2, 5, 6};
        check_attack_adjoint(s, x, rng);
    }
}

TEST_CASE("straight-through jpeg backward is the identity under the clamp mask") {
    // With orthonormal block DCT, mutually inverse color matrices and
    // identity-gradient rounding, the surrogate Jacobian is exactly the
    // identity; the adjoint reduces to the clamp mask.
    SeededRng rng(59);
    const Image x = random_image(16, rng, 0.3, 0.7);
    AttackPlan plan;
    SampledAttack s;
    s.id = AttackId::jpeg;
    s.active = true;
    s.jpeg_quality = 75;
    plan.steps.push_back(s);

    AttackTape tape;
    const Image y = attack_forward(x, plan, tape);
    for (double v : y.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    FeatureMap g(16, 16);
    for (double& v : g.data) v = rng.uniform(-1.0, 1.0);
    const FeatureMap back = attack_backward(g, tape);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (tape.steps[0].pass_mask[i])
            CHECK(back.data[i] == g.data[i]);
        else
            CHECK(back.data[i] == 0.0);
    }
}

TEST_CASE("invalid attack configurations are rejected") {
    AttackConfig cfg;
    cfg.per_attack_probability = 1.5;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = AttackConfig{};
    cfg.blur_kernel = 4;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = AttackConfig{};
    cfg.crop_scale = {0.0, 0.5};
    CHECK_THROWS_AS(cfg.validate(), config_error);
    CHECK_THROWS_AS(jpeg_attack(Image(8, 8), 0, AttackMode::exact), contract_error);
}
