#ifndef LFS_SPECTRAL_HPP
#define LFS_SPECTRAL_HPP

#include <array>
#include <complex>
#include <vector>

#include "lfs/image.hpp"

namespace lfs {

// Centered complex spectrum of one channel: DC sits at (W/2, H/2),
// bins[v*W + u]. Forward transform is unnormalized, the inverse carries
// the 1/(W*H) factor, so Parseval reads
//   sum |pixel|^2 = (1/(W*H)) * sum |bin|^2.
struct Spectrum {
    int width = 0;
    int height = 0;
    std::vector<std::complex<double>> bins;

    std::complex<double>& at(int v, int u) { return bins[static_cast<std::size_t>(v) * width + u]; }
    std::complex<double> at(int v, int u) const {
        return bins[static_cast<std::size_t>(v) * width + u];
    }
};

// Radius of the kept low-frequency disk, in centered-spectrum pixel
// units. Valid range [0, r_max].
struct CutoffRadius {
    double d = 0.0;
};

double spectrum_r_max(int width, int height);

// The default cutoff is quoted at 256x256; at other resolutions the
// effective radius scales with the side.
double scale_cutoff(double d_at_256, int side);

// Integrated squared magnitude per nearest-integer radius bin,
// length floor(side/2)+1. Corner bins beyond side/2 fold into the last
// entry so the total equals the Parseval energy.
struct RadialSpectrum {
    std::vector<double> values;
};

Spectrum dft2_plane(const double* plane, int width, int height);
std::vector<double> idft2_plane(const Spectrum& spec);

std::array<Spectrum, 3> dft2(const Image& img);
Image idft2(const std::array<Spectrum, 3>& spectra);

// Ideal circular masks on the centered spectrum. The Image variants
// take the real part and clamp to [0,1]; the FeatureMap variant leaves
// values unclamped (it produces loss targets, where clamping would
// change the spectrum being matched).
Image low_pass(const Image& img, CutoffRadius d);
Image high_pass(const Image& img, CutoffRadius d);
FeatureMap low_pass(const FeatureMap& fm, CutoffRadius d);
FeatureMap high_pass(const FeatureMap& fm, CutoffRadius d);

// Frequency-space weighted squared spectral distance, averaged over
// channels. The weight is |F_q - F_target| normalized to max 1 over the
// whole map and treated as a constant. If grad_q is non-null it
// receives d loss / d q (no gradient flows to target).
double focal_frequency_loss(const FeatureMap& q, const FeatureMap& target,
                            FeatureMap* grad_q = nullptr);

RadialSpectrum azimuthal_integral(const Image& img, bool normalize = false);

// Energy fraction of a feature map beyond radius d. Diagnostic for how
// well the frequency regularization confines the embedding.
double out_of_band_energy_fraction(const FeatureMap& fm, CutoffRadius d);

} // namespace lfs

#endif
