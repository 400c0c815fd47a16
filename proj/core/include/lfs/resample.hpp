#ifndef LFS_RESAMPLE_HPP
#define LFS_RESAMPLE_HPP

#include "lfs/image.hpp"

namespace lfs {

struct CropRect {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;
};

Image crop(const Image& img, const CropRect& r);
Image center_crop_square(const Image& img);

// Bilinear, pixel-center convention: src = (dst + 0.5) * scale - 0.5,
// edge-clamped. Linear in the input pixels.
Image resize_bilinear(const Image& img, int out_w, int out_h);

// crop + resize back to the source size, with the adjoint used when the
// geometric attack participates in training. backward scatters gradient
// from the output grid into the crop window.
Image crop_resize(const Image& img, const CropRect& r, int out_w, int out_h);
FeatureMap crop_resize_backward(const FeatureMap& dy, const CropRect& r, int in_w, int in_h);

} // namespace lfs

#endif
