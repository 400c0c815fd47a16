#include "lfs/image.hpp"

#include <algorithm>
#include <cmath>

#include "lfs/errors.hpp"

namespace lfs {

Image null_image(int side) {
    require(side >= 1, "null_image: side must be >= 1");
    return Image(side, side, 0.0);
}

void clamp01(Image& img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

Image clamped01(Image img) {
    clamp01(img);
    return img;
}

std::vector<std::uint8_t> to_rgb8(const Image& img) {
    std::vector<std::uint8_t> out(img.size());
    const std::size_t n = img.pixels_per_channel();
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < Image::channels; ++c) {
            const double v = std::clamp(img.data[c * n + i], 0.0, 1.0);
            out[i * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    }
    return out;
}

Image from_rgb8(const std::uint8_t* rgb, int width, int height) {
    Image img(width, height);
    const std::size_t n = img.pixels_per_channel();
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < Image::channels; ++c) {
            img.data[c * n + i] = rgb[i * 3 + c] / 255.0;
        }
    }
    return img;
}

Image quantize8(const Image& img) {
    Image out(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        out.data[i] = std::lround(v * 255.0) / 255.0;
    }
    return out;
}

double mean_intensity(const Image& img) {
    double s = 0.0;
    for (double v : img.data) s += v;
    return img.size() ? s / static_cast<double>(img.size()) : 0.0;
}

} // namespace lfs
