#include "lfs/resample.hpp"

#include <algorithm>
#include <cmath>

#include "lfs/errors.hpp"

namespace lfs {

Image crop(const Image& img, const CropRect& r) {
    require(r.w > 0 && r.h > 0, "crop: empty rectangle");
    require(r.x0 >= 0 && r.y0 >= 0 && r.x0 + r.w <= img.width && r.y0 + r.h <= img.height,
            "crop: rectangle outside image");
    Image out(r.w, r.h);
    for (int c = 0; c < Image::channels; ++c)
        for (int y = 0; y < r.h; ++y)
            for (int x = 0; x < r.w; ++x)
                out.at(c, y, x) = img.at(c, y + r.y0, x + r.x0);
    return out;
}

Image center_crop_square(const Image& img) {
    const int side = std::min(img.width, img.height);
    CropRect r{(img.width - side) / 2, (img.height - side) / 2, side, side};
    return crop(img, r);
}

namespace {

struct Tap {
    int i0, i1;
    double w0, w1;
};

// Source taps for one output coordinate along an axis of length in_n.
Tap tap_for(int out_i, int out_n, int in_n) {
    const double scale = static_cast<double>(in_n) / out_n;
    double src = (out_i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in_n - 1));
    const int i0 = static_cast<int>(std::floor(src));
    const int i1 = std::min(i0 + 1, in_n - 1);
    const double f = src - i0;
    return {i0, i1, 1.0 - f, f};
}

} // namespace

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    require(out_w > 0 && out_h > 0, "resize: output size must be positive");
    if (out_w == img.width && out_h == img.height) return img;
    Image out(out_w, out_h);
    std::vector<Tap> xt(out_w), yt(out_h);
    for (int x = 0; x < out_w; ++x) xt[x] = tap_for(x, out_w, img.width);
    for (int y = 0; y < out_h; ++y) yt[y] = tap_for(y, out_h, img.height);
    for (int c = 0; c < Image::channels; ++c) {
        const double* src = img.plane(c);
        double* dst = out.plane(c);
        for (int y = 0; y < out_h; ++y) {
            const Tap& ty = yt[y];
            const double* r0 = src + static_cast<std::size_t>(ty.i0) * img.width;
            const double* r1 = src + static_cast<std::size_t>(ty.i1) * img.width;
            for (int x = 0; x < out_w; ++x) {
                const Tap& tx = xt[x];
                const double top = tx.w0 * r0[tx.i0] + tx.w1 * r0[tx.i1];
                const double bot = tx.w0 * r1[tx.i0] + tx.w1 * r1[tx.i1];
                dst[static_cast<std::size_t>(y) * out_w + x] = ty.w0 * top + ty.w1 * bot;
            }
        }
    }
    return out;
}

Image crop_resize(const Image& img, const CropRect& r, int out_w, int out_h) {
    return resize_bilinear(crop(img, r), out_w, out_h);
}

FeatureMap crop_resize_backward(const FeatureMap& dy, const CropRect& r, int in_w, int in_h) {
    FeatureMap dx(in_w, in_h, 0.0);
    std::vector<Tap> xt(dy.width), yt(dy.height);
    for (int x = 0; x < dy.width; ++x) xt[x] = tap_for(x, dy.width, r.w);
    for (int y = 0; y < dy.height; ++y) yt[y] = tap_for(y, dy.height, r.h);
    for (int c = 0; c < FeatureMap::channels; ++c) {
        const double* g = dy.plane(c);
        double* out = dx.plane(c);
        for (int y = 0; y < dy.height; ++y) {
            const Tap& ty = yt[y];
            const std::size_t row0 = static_cast<std::size_t>(ty.i0 + r.y0) * in_w + r.x0;
            const std::size_t row1 = static_cast<std::size_t>(ty.i1 + r.y0) * in_w + r.x0;
            for (int x = 0; x < dy.width; ++x) {
                const Tap& tx = xt[x];
                const double v = g[static_cast<std::size_t>(y) * dy.width + x];
                out[row0 + tx.i0] += ty.w0 * tx.w0 * v;
                out[row0 + tx.i1] += ty.w0 * tx.w1 * v;
                out[row1 + tx.i0] += ty.w1 * tx.w0 * v;
                out[row1 + tx.i1] += ty.w1 * tx.w1 * v;
            }
        }
    }
    return dx;
}

} // namespace lfs
