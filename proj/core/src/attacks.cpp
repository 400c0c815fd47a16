#include "lfs/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "lfs/errors.hpp"
#include "lfs/image_io.hpp"

namespace lfs {

using json = nlohmann::json;

namespace {

// ---- color matrices (shared by jitter and the differentiable JPEG) ----

constexpr double kGray[3] = {0.299, 0.587, 0.114};

// RGB -> YIQ (NTSC), a linear change of basis whose IQ plane carries
// hue. The inverse is computed exactly so zero-strength jitter is a
// bit-level identity.
constexpr double kRgb2Yiq[3][3] = {{0.299, 0.587, 0.114},
                                   {0.595716, -0.274453, -0.321263},
                                   {0.211456, -0.522591, 0.311135}};

struct YiqInverse {
    double m[3][3];
    YiqInverse() {
        const auto& a = kRgb2Yiq;
        const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        const double inv = 1.0 / det;
        m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv;
        m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv;
        m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv;
        m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv;
        m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv;
        m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv;
        m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv;
        m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv;
        m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv;
    }
};

const double (*yiq2rgb())[3] {
    static const YiqInverse inv;
    return inv.m;
}

std::vector<std::uint8_t> clamp01_masked(Image& img) {
    std::vector<std::uint8_t> mask(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = img.data[i];
        mask[i] = (v >= 0.0 && v <= 1.0) ? 1 : 0;
        img.data[i] = std::clamp(v, 0.0, 1.0);
    }
    return mask;
}

// ---- separable reflect-padded convolution ----

int reflect_index(int i, int n) {
    // reflect without repeating the edge sample: -1 -> 1, n -> n-2
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

void conv1d_rows(const double* in, double* out, int w, int h, const std::vector<double>& k) {
    const int c = static_cast<int>(k.size()) / 2;
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::size_t t = 0; t < k.size(); ++t)
                acc += k[t] * row[reflect_index(x + static_cast<int>(t) - c, w)];
            orow[x] = acc;
        }
    }
}

void conv1d_cols(const double* in, double* out, int w, int h, const std::vector<double>& k) {
    const int c = static_cast<int>(k.size()) / 2;
    for (int y = 0; y < h; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::size_t t = 0; t < k.size(); ++t)
                acc += k[t] * in[static_cast<std::size_t>(reflect_index(
                                     y + static_cast<int>(t) - c, h)) *
                                     w +
                                 x];
            orow[x] = acc;
        }
    }
}

// Adjoint of the reflect-padded convolution: scatter instead of gather.
void conv1d_rows_adj(const double* in, double* out, int w, int h, const std::vector<double>& k) {
    const int c = static_cast<int>(k.size()) / 2;
    std::fill(out, out + static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x)
            for (std::size_t t = 0; t < k.size(); ++t)
                orow[reflect_index(x + static_cast<int>(t) - c, w)] += k[t] * row[x];
    }
}

void conv1d_cols_adj(const double* in, double* out, int w, int h, const std::vector<double>& k) {
    const int c = static_cast<int>(k.size()) / 2;
    std::fill(out, out + static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x)
            for (std::size_t t = 0; t < k.size(); ++t)
                out[static_cast<std::size_t>(reflect_index(y + static_cast<int>(t) - c, h)) * w +
                    x] += k[t] * row[x];
    }
}

std::vector<double> gaussian_kernel(double sigma, int size) {
    require(size > 0 && size % 2 == 1, "gaussian kernel size must be odd");
    require(sigma > 0.0, "gaussian sigma must be positive");
    std::vector<double> k(size);
    const int c = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - c;
        k[i] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// ---- differentiable JPEG ----

// Annex-K base quantization tables, zig-zag-free row-major order.
constexpr int kLumaQ[64] = {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
                            14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
                            18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
                            49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
constexpr int kChromaQ[64] = {17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
                              24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
                              99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                              99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// IJG quality scaling.
void scaled_table(const int* base, int quality, double* out) {
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    for (int i = 0; i < 64; ++i) {
        int v = (base[i] * scale + 50) / 100;
        out[i] = std::clamp(v, 1, 255);
    }
}

struct Dct8 {
    double c[8][8]; // c[u][x] = alpha(u) cos((2x+1) u pi / 16)
    Dct8() {
        for (int u = 0; u < 8; ++u) {
            const double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x) c[u][x] = a * std::cos((2 * x + 1) * u * M_PI / 16.0);
        }
    }
};

const Dct8& dct8() {
    static const Dct8 t;
    return t;
}

void dct2_block(const double in[8][8], double out[8][8]) {
    const auto& t = dct8();
    double tmp[8][8];
    for (int u = 0; u < 8; ++u)
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) acc += t.c[u][y] * in[y][x];
            tmp[u][x] = acc;
        }
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) acc += t.c[v][x] * tmp[u][x];
            out[u][v] = acc;
        }
}

void idct2_block(const double in[8][8], double out[8][8]) {
    const auto& t = dct8();
    double tmp[8][8];
    for (int y = 0; y < 8; ++y)
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u) acc += t.c[u][y] * in[u][v];
            tmp[y][v] = acc;
        }
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int v = 0; v < 8; ++v) acc += t.c[v][x] * tmp[y][v];
            out[y][x] = acc;
        }
}

// Quantize one padded plane (0..255 level-shifted values) in place.
void jpeg_quantize_plane(std::vector<double>& plane, int w, int h, const double* q) {
    double block[8][8], coef[8][8];
    for (int by = 0; by < h; by += 8)
        for (int bx = 0; bx < w; bx += 8) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    block[y][x] = plane[static_cast<std::size_t>(by + y) * w + bx + x] - 128.0;
            dct2_block(block, coef);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) {
                    const double qv = q[y * 8 + x];
                    coef[y][x] = std::round(coef[y][x] / qv) * qv;
                }
            idct2_block(coef, block);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    plane[static_cast<std::size_t>(by + y) * w + bx + x] = block[y][x] + 128.0;
        }
}

Image jpeg_differentiable(const Image& img, int quality) {
    const int w = img.width, h = img.height;
    const int pw = (w + 7) / 8 * 8, ph = (h + 7) / 8 * 8;
    double luma_q[64], chroma_q[64];
    scaled_table(kLumaQ, quality, luma_q);
    scaled_table(kChromaQ, quality, chroma_q);

    // RGB -> YCbCr on the 0..255 scale, edge-replicated to block multiples.
    std::array<std::vector<double>, 3> ycc;
    for (auto& p : ycc) p.assign(static_cast<std::size_t>(pw) * ph, 0.0);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) {
            const int sy = std::min(y, h - 1), sx = std::min(x, w - 1);
            const double r = img.at(0, sy, sx) * 255.0;
            const double g = img.at(1, sy, sx) * 255.0;
            const double b = img.at(2, sy, sx) * 255.0;
            const std::size_t i = static_cast<std::size_t>(y) * pw + x;
            ycc[0][i] = 0.299 * r + 0.587 * g + 0.114 * b;
            ycc[1][i] = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
            ycc[2][i] = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
        }
    jpeg_quantize_plane(ycc[0], pw, ph, luma_q);
    jpeg_quantize_plane(ycc[1], pw, ph, chroma_q);
    jpeg_quantize_plane(ycc[2], pw, ph, chroma_q);

    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * pw + x;
            const double Y = ycc[0][i];
            const double cb = ycc[1][i] - 128.0;
            const double cr = ycc[2][i] - 128.0;
            out.at(0, y, x) = (Y + 1.402 * cr) / 255.0;
            out.at(1, y, x) = (Y - 0.344136 * cb - 0.714136 * cr) / 255.0;
            out.at(2, y, x) = (Y + 1.772 * cb) / 255.0;
        }
    clamp01(out);
    return out;
}

} // namespace

const char* attack_name(AttackId id) {
    switch (id) {
        case AttackId::lowpass: return "lowpass";
        case AttackId::blur: return "blur";
        case AttackId::noise: return "noise";
        case AttackId::jitter: return "jitter";
        case AttackId::resize_crop: return "resize_crop";
        case AttackId::jpeg: return "jpeg";
        case AttackId::poisson: return "poisson";
    }
    return "?";
}

AttackId attack_from_name(const std::string& name) {
    for (AttackId id : {AttackId::lowpass, AttackId::blur, AttackId::noise, AttackId::jitter,
                        AttackId::resize_crop, AttackId::jpeg, AttackId::poisson})
        if (name == attack_name(id)) return id;
    throw config_error("unknown attack '" + name + "'");
}

void AttackConfig::validate() const {
    if (!(per_attack_probability >= 0.0 && per_attack_probability <= 1.0))
        throw config_error("per_attack_probability must lie in [0,1]");
    if (blur_kernel <= 0 || blur_kernel % 2 == 0)
        throw config_error("blur kernel size must be odd and positive");
    if (!(crop_scale[0] > 0.0 && crop_scale[0] <= crop_scale[1] && crop_scale[1] <= 1.0))
        throw config_error("crop scale range must satisfy 0 < lo <= hi <= 1");
    if (jpeg_quality_range[0] < 1 || jpeg_quality_range[1] > 100 ||
        jpeg_quality_range[0] > jpeg_quality_range[1])
        throw config_error("jpeg quality range must lie in [1,100]");
    if (noise_sigma < 0.0) throw config_error("noise sigma must be non-negative");
}

bool AttackPlan::any_active() const {
    for (const auto& s : steps)
        if (s.active) return true;
    return false;
}

int AttackPlan::active_count(AttackId id) const {
    int n = 0;
    for (const auto& s : steps)
        if (s.id == id && s.active) ++n;
    return n;
}

Image jpeg_attack(const Image& img, int quality, AttackMode mode) {
    require(quality >= 1 && quality <= 100, "jpeg_attack: quality in [1,100]");
    if (mode == AttackMode::exact) {
        auto bytes = jpeg_encode(img, quality);
        return jpeg_decode(bytes.data(), bytes.size());
    }
    return jpeg_differentiable(img, quality);
}

Image gaussian_blur(const Image& img, double sigma, int kernel) {
    const auto k = gaussian_kernel(sigma, kernel);
    Image out(img.width, img.height);
    std::vector<double> tmp(img.pixels_per_channel());
    for (int c = 0; c < Image::channels; ++c) {
        conv1d_rows(img.plane(c), tmp.data(), img.width, img.height, k);
        conv1d_cols(tmp.data(), out.plane(c), img.width, img.height, k);
    }
    clamp01(out);
    return out;
}

Image additive_noise_seeded(const Image& img, double sigma8, std::uint64_t seed) {
    require(sigma8 >= 0.0, "additive_noise: sigma must be non-negative");
    Image out = img;
    if (sigma8 == 0.0) return out;
    SeededRng rng(seed);
    const double s = sigma8 / 255.0;
    for (double& v : out.data) v += rng.normal() * s;
    clamp01(out);
    return out;
}

Image additive_noise(const Image& img, double sigma8, SeededRng& rng) {
    return additive_noise_seeded(img, sigma8, rng.next_u64());
}

Image lowpass_attack(const Image& img, double d) {
    return low_pass(img, CutoffRadius{d});
}

JitterFactors sample_jitter(const JitterStrength& st, SeededRng& rng) {
    JitterFactors f;
    f.brightness = rng.uniform(1.0 - st.brightness, 1.0 + st.brightness);
    f.contrast = rng.uniform(1.0 - st.contrast, 1.0 + st.contrast);
    f.saturation = rng.uniform(1.0 - st.saturation, 1.0 + st.saturation);
    f.hue_turns = rng.uniform(-st.hue, st.hue);
    return f;
}

Image color_jitter_apply(const Image& img, const JitterFactors& f) {
    const std::size_t n = img.pixels_per_channel();
    Image out = img;

    // brightness
    for (double& v : out.data) v *= f.brightness;

    // contrast: blend with the mean luminance
    double lum_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        lum_mean += kGray[0] * out.plane(0)[i] + kGray[1] * out.plane(1)[i] +
                    kGray[2] * out.plane(2)[i];
    lum_mean /= static_cast<double>(n);
    for (double& v : out.data) v = lum_mean + (v - lum_mean) * f.contrast;

    // saturation: blend with the per-pixel gray
    for (std::size_t i = 0; i < n; ++i) {
        const double g = kGray[0] * out.plane(0)[i] + kGray[1] * out.plane(1)[i] +
                         kGray[2] * out.plane(2)[i];
        for (int c = 0; c < 3; ++c) out.plane(c)[i] = g + (out.plane(c)[i] - g) * f.saturation;
    }

    // hue: rotate the IQ chroma plane
    const double th = 2.0 * M_PI * f.hue_turns;
    const double ct = std::cos(th), st = std::sin(th);
    const auto* inv = yiq2rgb();
    for (std::size_t i = 0; i < n; ++i) {
        double rgb[3] = {out.plane(0)[i], out.plane(1)[i], out.plane(2)[i]};
        double yiq[3];
        for (int r = 0; r < 3; ++r)
            yiq[r] = kRgb2Yiq[r][0] * rgb[0] + kRgb2Yiq[r][1] * rgb[1] + kRgb2Yiq[r][2] * rgb[2];
        const double iq_i = ct * yiq[1] - st * yiq[2];
        const double iq_q = st * yiq[1] + ct * yiq[2];
        yiq[1] = iq_i;
        yiq[2] = iq_q;
        for (int r = 0; r < 3; ++r)
            out.plane(r)[i] =
                inv[r][0] * yiq[0] + inv[r][1] * yiq[1] + inv[r][2] * yiq[2];
    }
    clamp01(out);
    return out;
}

Image color_jitter(const Image& img, const JitterStrength& strength, SeededRng& rng) {
    return color_jitter_apply(img, sample_jitter(strength, rng));
}

CropRect sample_crop(int width, int height, double scale_lo, double scale_hi, SeededRng& rng) {
    require(scale_lo > 0.0 && scale_lo <= scale_hi && scale_hi <= 1.0,
            "crop scale range must lie in (0,1]");
    const double area = static_cast<double>(width) * height;
    const double log_lo = std::log(3.0 / 4.0), log_hi = std::log(4.0 / 3.0);
    for (int attempt = 0; attempt < 10; ++attempt) {
        const double target = area * rng.uniform(scale_lo, scale_hi);
        const double aspect = std::exp(rng.uniform(log_lo, log_hi));
        const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
        const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
        if (w >= 1 && h >= 1 && w <= width && h <= height) {
            const int x0 = static_cast<int>(rng.uniform_int(width - w + 1));
            const int y0 = static_cast<int>(rng.uniform_int(height - h + 1));
            return {x0, y0, w, h};
        }
    }
    // fall back to the largest centered square crop allowed by scale_hi
    const int side = std::min({width, height,
                               static_cast<int>(std::lround(std::sqrt(area * scale_hi)))});
    return {(width - side) / 2, (height - side) / 2, side, side};
}

Image resize_crop(const Image& img, double scale_lo, double scale_hi, SeededRng& rng) {
    const CropRect r = sample_crop(img.width, img.height, scale_lo, scale_hi, rng);
    return crop_resize(img, r, img.width, img.height);
}

Image poisson_noise(const Image& img, double scale, SeededRng& rng) {
    require(scale > 0.0, "poisson_noise: scale must be positive");
    Image out(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double lam = std::clamp(img.data[i], 0.0, 1.0) * scale;
        double k;
        if (lam < 30.0) {
            const double limit = std::exp(-lam);
            double p = 1.0;
            int count = -1;
            do {
                p *= rng.uniform();
                ++count;
            } while (p > limit);
            k = count;
        } else {
            k = std::max(0.0, std::round(lam + std::sqrt(lam) * rng.normal()));
        }
        out.data[i] = k / scale;
    }
    clamp01(out);
    return out;
}

AttackPlan sample_attack_plan(const AttackConfig& cfg, int width, int height, SeededRng& rng) {
    cfg.validate();
    std::vector<AttackId> pool = {AttackId::lowpass, AttackId::blur, AttackId::noise};
    if (cfg.include_geometric_in_training) {
        pool.push_back(AttackId::jitter);
        pool.push_back(AttackId::resize_crop);
    }
    pool.push_back(AttackId::jpeg);

    AttackPlan plan;
    const double rmax = spectrum_r_max(width, height);
    for (AttackId id : pool) {
        SampledAttack s;
        s.id = id;
        s.active = rng.bernoulli(cfg.per_attack_probability);
        if (!s.active) {
            plan.steps.push_back(s);
            continue;
        }
        switch (id) {
            case AttackId::lowpass:
                s.lowpass_d = rng.uniform(cfg.lowpass_frac_range[0], cfg.lowpass_frac_range[1]) * rmax;
                break;
            case AttackId::blur:
                s.blur_sigma = rng.uniform(cfg.blur_sigma_range[0], cfg.blur_sigma_range[1]);
                s.blur_kernel = cfg.blur_kernel;
                break;
            case AttackId::noise:
                s.noise_sigma8 = cfg.noise_sigma;
                s.noise_seed = rng.next_u64();
                break;
            case AttackId::jitter:
                s.jitter = sample_jitter(cfg.jitter, rng);
                break;
            case AttackId::resize_crop:
                s.crop = sample_crop(width, height, cfg.crop_scale[0], cfg.crop_scale[1], rng);
                break;
            case AttackId::jpeg:
                s.jpeg_quality =
                    cfg.jpeg_quality_range[0] +
                    static_cast<int>(rng.uniform_int(
                        cfg.jpeg_quality_range[1] - cfg.jpeg_quality_range[0] + 1));
                break;
            default:
                break;
        }
        plan.steps.push_back(s);
    }
    return plan;
}

namespace {

Image apply_step(const Image& img, const SampledAttack& s, AttackMode mode) {
    switch (s.id) {
        case AttackId::lowpass: return lowpass_attack(img, s.lowpass_d);
        case AttackId::blur: return gaussian_blur(img, s.blur_sigma, s.blur_kernel);
        case AttackId::noise: return additive_noise_seeded(img, s.noise_sigma8, s.noise_seed);
        case AttackId::jitter: return color_jitter_apply(img, s.jitter);
        case AttackId::resize_crop: return crop_resize(img, s.crop, img.width, img.height);
        case AttackId::jpeg: return jpeg_attack(img, s.jpeg_quality, mode);
        case AttackId::poisson: break;
    }
    throw contract_error("attack not applicable in a plan");
}

} // namespace

Image apply_attack_plan(const Image& img, const AttackPlan& plan, AttackMode mode) {
    Image out = img;
    for (const auto& s : plan.steps)
        if (s.active) out = apply_step(out, s, mode);
    return out;
}

std::pair<Image, AttackPlan> attack_layer(const Image& img, const AttackConfig& cfg,
                                          SeededRng& rng, AttackMode mode) {
    AttackPlan plan = sample_attack_plan(cfg, img.width, img.height, rng);
    return {apply_attack_plan(img, plan, mode), plan};
}

// ---- training-time adjoints ----

Image attack_forward(const Image& img, const AttackPlan& plan, AttackTape& tape) {
    tape.steps.clear();
    Image out = img;
    for (const auto& s : plan.steps) {
        if (!s.active) continue;
        AttackStepContext ctx;
        ctx.step = s;
        ctx.in_width = out.width;
        ctx.in_height = out.height;
        Image next;
        switch (s.id) {
            case AttackId::lowpass: {
                next = out;
                FeatureMap fm(next.width, next.height);
                fm.data = next.data;
                fm = low_pass(fm, CutoffRadius{s.lowpass_d});
                next.data = fm.data;
                break;
            }
            case AttackId::blur: {
                const auto k = gaussian_kernel(s.blur_sigma, s.blur_kernel);
                next = Image(out.width, out.height);
                std::vector<double> tmp(out.pixels_per_channel());
                for (int c = 0; c < 3; ++c) {
                    conv1d_rows(out.plane(c), tmp.data(), out.width, out.height, k);
                    conv1d_cols(tmp.data(), next.plane(c), out.width, out.height, k);
                }
                break;
            }
            case AttackId::noise: {
                next = out;
                SeededRng nrng(s.noise_seed);
                const double sc = s.noise_sigma8 / 255.0;
                for (double& v : next.data) v += nrng.normal() * sc;
                break;
            }
            case AttackId::jitter: {
                // color_jitter_apply clamps internally; recompute unclamped
                // to get the true pass mask.
                next = out;
                JitterFactors f = s.jitter;
                for (double& v : next.data) v *= f.brightness;
                const std::size_t n = next.pixels_per_channel();
                double lum = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    lum += kGray[0] * next.plane(0)[i] + kGray[1] * next.plane(1)[i] +
                           kGray[2] * next.plane(2)[i];
                lum /= static_cast<double>(n);
                for (double& v : next.data) v = lum + (v - lum) * f.contrast;
                for (std::size_t i = 0; i < n; ++i) {
                    const double g = kGray[0] * next.plane(0)[i] + kGray[1] * next.plane(1)[i] +
                                     kGray[2] * next.plane(2)[i];
                    for (int c = 0; c < 3; ++c)
                        next.plane(c)[i] = g + (next.plane(c)[i] - g) * f.saturation;
                }
                const double th = 2.0 * M_PI * f.hue_turns;
                const double ct = std::cos(th), st = std::sin(th);
                const auto* inv = yiq2rgb();
                for (std::size_t i = 0; i < n; ++i) {
                    double rgb[3] = {next.plane(0)[i], next.plane(1)[i], next.plane(2)[i]};
                    double yiq[3];
                    for (int r = 0; r < 3; ++r)
                        yiq[r] = kRgb2Yiq[r][0] * rgb[0] + kRgb2Yiq[r][1] * rgb[1] +
                                 kRgb2Yiq[r][2] * rgb[2];
                    const double ii = ct * yiq[1] - st * yiq[2];
                    const double qq = st * yiq[1] + ct * yiq[2];
                    yiq[1] = ii;
                    yiq[2] = qq;
                    for (int r = 0; r < 3; ++r)
                        next.plane(r)[i] = inv[r][0] * yiq[0] + inv[r][1] * yiq[1] +
                                           inv[r][2] * yiq[2];
                }
                break;
            }
            case AttackId::resize_crop:
                next = crop_resize(out, s.crop, out.width, out.height);
                break;
            case AttackId::jpeg:
                next = jpeg_differentiable(out, s.jpeg_quality);
                // jpeg_differentiable already clamped; its pass mask must
                // reflect the pre-clamp values, so recompute below from a
                // widened copy is not possible. Mark everything interior.
                break;
            case AttackId::poisson:
                throw contract_error("poisson attack has no differentiable form");
        }
        if (s.id == AttackId::jpeg) {
            // Straight-through JPEG: the linear chain is the identity map,
            // so the mask marks pixels the final clamp left untouched.
            ctx.pass_mask.assign(next.size(), 1);
            for (std::size_t i = 0; i < next.size(); ++i)
                if (next.data[i] <= 0.0 || next.data[i] >= 1.0) ctx.pass_mask[i] = 0;
        } else {
            ctx.pass_mask = clamp01_masked(next);
        }
        out = std::move(next);
        tape.steps.push_back(std::move(ctx));
    }
    return out;
}

FeatureMap attack_backward(const FeatureMap& grad_out, const AttackTape& tape) {
    FeatureMap g = grad_out;
    for (auto it = tape.steps.rbegin(); it != tape.steps.rend(); ++it) {
        const auto& ctx = *it;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!ctx.pass_mask[i]) g.data[i] = 0.0;
        switch (ctx.step.id) {
            case AttackId::lowpass:
                // ideal mask filter is self-adjoint
                g = low_pass(g, CutoffRadius{ctx.step.lowpass_d});
                break;
            case AttackId::blur: {
                const auto k = gaussian_kernel(ctx.step.blur_sigma, ctx.step.blur_kernel);
                FeatureMap out(g.width, g.height);
                std::vector<double> tmp(g.pixels_per_channel());
                for (int c = 0; c < 3; ++c) {
                    conv1d_cols_adj(g.plane(c), tmp.data(), g.width, g.height, k);
                    conv1d_rows_adj(tmp.data(), out.plane(c), g.width, g.height, k);
                }
                g = std::move(out);
                break;
            }
            case AttackId::noise:
                break; // identity Jacobian
            case AttackId::jitter: {
                const JitterFactors& f = ctx.step.jitter;
                const std::size_t n = g.pixels_per_channel();
                // hue adjoint: transpose of the per-pixel matrix
                const double th = 2.0 * M_PI * f.hue_turns;
                const double ct = std::cos(th), st = std::sin(th);
                const auto* inv = yiq2rgb();
                for (std::size_t i = 0; i < n; ++i) {
                    double u[3] = {g.plane(0)[i], g.plane(1)[i], g.plane(2)[i]};
                    double yiq[3];
                    for (int r = 0; r < 3; ++r)
                        yiq[r] = inv[0][r] * u[0] + inv[1][r] * u[1] +
                                 inv[2][r] * u[2];
                    const double ii = ct * yiq[1] + st * yiq[2];
                    const double qq = -st * yiq[1] + ct * yiq[2];
                    yiq[1] = ii;
                    yiq[2] = qq;
                    for (int r = 0; r < 3; ++r)
                        g.plane(r)[i] = kRgb2Yiq[0][r] * yiq[0] + kRgb2Yiq[1][r] * yiq[1] +
                                        kRgb2Yiq[2][r] * yiq[2];
                }
                // saturation adjoint
                for (std::size_t i = 0; i < n; ++i) {
                    const double su = g.plane(0)[i] + g.plane(1)[i] + g.plane(2)[i];
                    for (int c = 0; c < 3; ++c)
                        g.plane(c)[i] = f.saturation * g.plane(c)[i] +
                                        (1.0 - f.saturation) * kGray[c] * su;
                }
                // contrast adjoint: mean coupling spreads over luminance weights
                double total = 0.0;
                for (double v : g.data) total += v;
                const double spread = (1.0 - f.contrast) * total / static_cast<double>(n);
                for (int c = 0; c < 3; ++c) {
                    double* p = g.plane(c);
                    for (std::size_t i = 0; i < n; ++i)
                        p[i] = f.contrast * p[i] + spread * kGray[c];
                }
                // brightness adjoint
                for (double& v : g.data) v *= f.brightness;
                break;
            }
            case AttackId::resize_crop:
                g = crop_resize_backward(g, ctx.step.crop, ctx.in_width, ctx.in_height);
                break;
            case AttackId::jpeg:
                break; // straight-through: identity after the mask
            case AttackId::poisson:
                break;
        }
    }
    return g;
}

// ---- plan (de)serialization ----

std::string plan_to_json(const AttackPlan& plan) {
    json steps = json::array();
    for (const auto& s : plan.steps) {
        json j;
        j["id"] = attack_name(s.id);
        j["active"] = s.active;
        if (s.active) {
            switch (s.id) {
                case AttackId::lowpass: j["d"] = s.lowpass_d; break;
                case AttackId::blur:
                    j["sigma"] = s.blur_sigma;
                    j["kernel"] = s.blur_kernel;
                    break;
                case AttackId::noise:
                    j["sigma8"] = s.noise_sigma8;
                    j["seed"] = s.noise_seed;
                    break;
                case AttackId::jitter:
                    j["brightness"] = s.jitter.brightness;
                    j["contrast"] = s.jitter.contrast;
                    j["saturation"] = s.jitter.saturation;
                    j["hue_turns"] = s.jitter.hue_turns;
                    break;
                case AttackId::resize_crop:
                    j["x0"] = s.crop.x0;
                    j["y0"] = s.crop.y0;
                    j["w"] = s.crop.w;
                    j["h"] = s.crop.h;
                    break;
                case AttackId::jpeg: j["quality"] = s.jpeg_quality; break;
                case AttackId::poisson: break;
            }
        }
        steps.push_back(std::move(j));
    }
    return json{{"attacks", std::move(steps)}}.dump();
}

AttackPlan plan_from_json(const std::string& line) {
    AttackPlan plan;
    json j = json::parse(line);
    for (const auto& e : j.at("attacks")) {
        SampledAttack s;
        s.id = attack_from_name(e.at("id").get<std::string>());
        s.active = e.at("active").get<bool>();
        if (s.active) {
            switch (s.id) {
                case AttackId::lowpass: s.lowpass_d = e.at("d").get<double>(); break;
                case AttackId::blur:
                    s.blur_sigma = e.at("sigma").get<double>();
                    s.blur_kernel = e.at("kernel").get<int>();
                    break;
                case AttackId::noise:
                    s.noise_sigma8 = e.at("sigma8").get<double>();
                    s.noise_seed = e.at("seed").get<std::uint64_t>();
                    break;
                case AttackId::jitter:
                    s.jitter.brightness = e.at("brightness").get<double>();
                    s.jitter.contrast = e.at("contrast").get<double>();
                    s.jitter.saturation = e.at("saturation").get<double>();
                    s.jitter.hue_turns = e.at("hue_turns").get<double>();
                    break;
                case AttackId::resize_crop:
                    s.crop = {e.at("x0").get<int>(), e.at("y0").get<int>(), e.at("w").get<int>(),
                              e.at("h").get<int>()};
                    break;
                case AttackId::jpeg: s.jpeg_quality = e.at("quality").get<int>(); break;
                case AttackId::poisson: break;
            }
        }
        plan.steps.push_back(s);
    }
    return plan;
}

} // namespace lfs
