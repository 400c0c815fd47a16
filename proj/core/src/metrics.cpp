#include "lfs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lfs/errors.hpp"

namespace lfs {

namespace {

void check_shapes(const Image& x, const Image& y, const char* op) {
    require(x.same_shape(y), std::string(op) + ": shape mismatch");
    require(!x.data.empty(), std::string(op) + ": empty image");
}

double mse(const Image& x, const Image& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data[i] - y.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

} // namespace

double psnr(const Image& x, const Image& y, PixelScale scale) {
    check_shapes(x, y, "psnr");
    double err, peak;
    if (scale == PixelScale::eight_bit) {
        err = mse(quantize8(x), quantize8(y)) * 255.0 * 255.0;
        peak = 255.0;
    } else {
        err = mse(x, y);
        peak = 1.0;
    }
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    // 20*log10(peak) - 10*log10(MSE), folded into one log so the
    // maximum-difference case lands exactly on 0 dB.
    return -10.0 * std::log10(err / (peak * peak));
}

namespace {

double ssim_channel(const double* x, const double* y, std::size_t n, const SsimConstants& k) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    // Population convention throughout, matching the plain means above.
    vx /= n;
    vy /= n;
    cov /= n;
    const double c1 = k.c1(), c2 = k.c2();
    return ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
           ((mx * mx + my * my + c1) * (vx + vy + c2));
}

} // namespace

double ssim(const Image& x, const Image& y, const SsimConstants& k) {
    check_shapes(x, y, "ssim");
    const std::size_t n = x.pixels_per_channel();
    double acc = 0.0;
    for (int c = 0; c < Image::channels; ++c) acc += ssim_channel(x.plane(c), y.plane(c), n, k);
    return acc / Image::channels;
}

double ssim_windowed(const Image& x, const Image& y, int window, const SsimConstants& k) {
    check_shapes(x, y, "ssim");
    require(window > 0, "ssim_windowed: window must be positive");
    double acc = 0.0;
    int count = 0;
    std::vector<double> bx(static_cast<std::size_t>(window) * window);
    std::vector<double> by(bx.size());
    for (int c = 0; c < Image::channels; ++c)
        for (int y0 = 0; y0 + window <= x.height; y0 += window)
            for (int x0 = 0; x0 + window <= x.width; x0 += window) {
                for (int dy = 0; dy < window; ++dy)
                    for (int dx = 0; dx < window; ++dx) {
                        bx[dy * window + dx] = x.at(c, y0 + dy, x0 + dx);
                        by[dy * window + dx] = y.at(c, y0 + dy, x0 + dx);
                    }
                acc += ssim_channel(bx.data(), by.data(), bx.size(), k);
                ++count;
            }
    require(count > 0, "ssim_windowed: window larger than image");
    return acc / count;
}

double ncc(const Image& s, const Image& s_hat) {
    check_shapes(s, s_hat, "ncc");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        dot += s.data[i] * s_hat.data[i];
        na += s.data[i] * s.data[i];
        nb += s_hat.data[i] * s_hat.data[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw numeric_error("ncc undefined: zero-norm operand");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double success_rate(const std::vector<double>& ncc_values, double threshold) {
    require(!ncc_values.empty(), "success_rate: empty set");
    std::size_t valid = 0;
    for (double v : ncc_values)
        if (v > threshold) ++valid;
    return static_cast<double>(valid) / static_cast<double>(ncc_values.size());
}

Image residue(const Image& a, const Image& b, double gain) {
    check_shapes(a, b, "residue");
    Image out(a.width, a.height);
    for (std::size_t i = 0; i < a.size(); ++i)
        out.data[i] = std::clamp(gain * std::abs(a.data[i] - b.data[i]), 0.0, 1.0);
    return out;
}

double MetricReport::mean_psnr() const {
    double acc = 0.0;
    for (const auto& r : rows) acc += r.psnr_db;
    return rows.empty() ? 0.0 : acc / rows.size();
}

double MetricReport::mean_ssim() const {
    double acc = 0.0;
    for (const auto& r : rows) acc += r.ssim;
    return rows.empty() ? 0.0 : acc / rows.size();
}

double MetricReport::mean_ncc() const {
    double acc = 0.0;
    for (const auto& r : rows) acc += r.ncc;
    return rows.empty() ? 0.0 : acc / rows.size();
}

double MetricReport::sr() const {
    if (rows.empty()) return 0.0;
    std::size_t valid = 0;
    for (const auto& r : rows)
        if (r.valid) ++valid;
    return static_cast<double>(valid) / rows.size();
}

std::string MetricReport::to_csv() const {
    std::ostringstream os;
    os << "id,psnr_db,ssim,ncc,valid\n";
    for (const auto& r : rows)
        os << r.id << ',' << fmt(r.psnr_db) << ',' << fmt(r.ssim) << ',' << fmt(r.ncc) << ','
           << (r.valid ? 1 : 0) << '\n';
    return os.str();
}

std::string MetricReport::to_json() const {
    std::ostringstream os;
    os << "{\n  \"ncc_threshold\": " << fmt(ncc_threshold) << ",\n  \"rows\": [\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << "    {\"id\": \"" << r.id << "\", \"psnr_db\": \"" << fmt(r.psnr_db)
           << "\", \"ssim\": " << fmt(r.ssim) << ", \"ncc\": " << fmt(r.ncc)
           << ", \"valid\": " << (r.valid ? "true" : "false") << "}"
           << (i + 1 < rows.size() ? ",\n" : "\n");
    }
    os << "  ],\n  \"aggregate\": {\"mean_psnr\": \"" << fmt(mean_psnr())
       << "\", \"mean_ssim\": " << fmt(mean_ssim()) << ", \"mean_ncc\": " << fmt(mean_ncc())
       << ", \"sr\": " << fmt(sr()) << "}\n}\n";
    return os.str();
}

} // namespace lfs
