#ifndef LFS_IMAGE_HPP
#define LFS_IMAGE_HPP

#include <cstdint>
#include <vector>

namespace lfs {

// 3-channel raster with unit-range pixels, channel-major (plane) layout:
// data[c*W*H + y*W + x]. Cover, secret, container and recovered images
// all use this type; 8-bit conversion happens only at file boundaries
// and inside the JPEG codec path.
struct Image {
    static constexpr int channels = 3;

    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(channels) * w * h, fill) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * width * height; }
    const double* plane(int c) const {
        return data.data() + static_cast<std::size_t>(c) * width * height;
    }

    std::size_t pixels_per_channel() const {
        return static_cast<std::size_t>(width) * height;
    }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
    bool square() const { return width == height; }
};

// Same storage as Image but without the unit-range invariant: the
// embedding-network output added onto the cover. Values are bounded by
// the configured embedding strength, not by [0,1].
struct FeatureMap {
    static constexpr int channels = 3;

    int width = 0;
    int height = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(channels) * w * h, fill) {}

    double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * width * height; }
    const double* plane(int c) const {
        return data.data() + static_cast<std::size_t>(c) * width * height;
    }
    std::size_t pixels_per_channel() const {
        return static_cast<std::size_t>(width) * height;
    }
    std::size_t size() const { return data.size(); }
    bool same_shape(const FeatureMap& o) const { return width == o.width && height == o.height; }
};

Image null_image(int side);

void clamp01(Image& img);
Image clamped01(Image img);

// round(clamp(v,0,1)*255); interleaved RGB byte order for codecs.
std::vector<std::uint8_t> to_rgb8(const Image& img);
Image from_rgb8(const std::uint8_t* rgb, int width, int height);

// Quantize through the 8-bit representation and back. Changes no pixel
// by more than 1/255 (tests assert the tighter 0.5/255 bound).
Image quantize8(const Image& img);

double mean_intensity(const Image& img);

} // namespace lfs

#endif
