#ifndef LFS_METRICS_HPP
#define LFS_METRICS_HPP

#include <string>
#include <vector>

#include "lfs/image.hpp"

namespace lfs {

enum class PixelScale {
    unit,     // doubles in [0,1], max = 1
    eight_bit // quantize to 0..255 integers first; comparable to 8-bit tooling
};

// 20*log10(max) - 10*log10(MSE); +inf for identical inputs.
double psnr(const Image& x, const Image& y, PixelScale scale = PixelScale::unit);

struct SsimConstants {
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

// Global-statistics SSIM, population mean/variance/covariance per
// channel, averaged over channels. A sliding-window variant exists for
// cross-tool comparison; everything in the evaluation protocol uses the
// global form.
double ssim(const Image& x, const Image& y, const SsimConstants& k = {});
double ssim_windowed(const Image& x, const Image& y, int window = 8, const SsimConstants& k = {});

// Cosine of the flattened pixel vectors (channels concatenated).
// Throws numeric_error on a zero-norm operand rather than returning 0.
double ncc(const Image& s, const Image& s_hat);

// Fraction of pairs with ncc strictly greater than the threshold.
double success_rate(const std::vector<double>& ncc_values, double threshold = 0.95);

// clamp(gain * |a - b|, 0, 1)
Image residue(const Image& a, const Image& b, double gain = 10.0);

struct MetricRow {
    std::string id;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double ncc = 0.0;
    bool valid = false;
};

struct MetricReport {
    std::vector<MetricRow> rows;
    double ncc_threshold = 0.95;

    double mean_psnr() const;
    double mean_ssim() const;
    double mean_ncc() const;
    double sr() const; // (# valid) / (# rows)

    std::string to_csv() const;
    std::string to_json() const;
};

} // namespace lfs

#endif
