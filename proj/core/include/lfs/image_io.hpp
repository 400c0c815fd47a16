#ifndef LFS_IMAGE_IO_HPP
#define LFS_IMAGE_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lfs/image.hpp"

namespace lfs {

enum class ImageFormat { png, jpeg };

struct SaveOptions {
    ImageFormat format = ImageFormat::png;
    int jpeg_quality = 90;
};

// Decode (PNG or JPEG, sniffed from the file magic), center-crop to
// square and bilinear-resize to side x side. Grayscale and paletted
// PNGs are expanded to RGB; alpha is dropped.
Image load_image(const std::string& path, int side);

// Decode without any geometry change.
Image load_image_raw(const std::string& path);

void save_image(const Image& img, const std::string& path, const SaveOptions& opts = {});
void save_png(const Image& img, const std::string& path);

// In-memory JPEG codec, 4:4:4 sampling. This is the one exact-codec
// path in the project: save_image(jpeg) and the exact JPEG attack both
// go through it.
std::vector<std::uint8_t> jpeg_encode(const Image& img, int quality);
Image jpeg_decode(const std::uint8_t* data, std::size_t size);

} // namespace lfs

#endif
