#include "lfs/spectral.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "lfs/errors.hpp"

namespace lfs {

namespace {

using cplx = std::complex<double>;

bool is_pow2(int n) {
    return n > 0 && (n & (n - 1)) == 0;
}

// Iterative radix-2 Cooley-Tukey, in place. inverse applies the
// conjugate kernel without scaling; callers divide by n.
void fft1(cplx* a, int n, int stride, bool inverse, std::vector<cplx>& scratch) {
    if (n == 1) return;
    scratch.resize(n);
    for (int i = 0; i < n; ++i) scratch[i] = a[static_cast<std::size_t>(i) * stride];

    // bit-reversal permutation
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(scratch[i], scratch[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / len;
        const cplx wn(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const cplx u = scratch[i + k];
                const cplx v = scratch[i + k + len / 2] * w;
                scratch[i + k] = u + v;
                scratch[i + k + len / 2] = u - v;
                w *= wn;
            }
        }
    }
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * stride] = scratch[i];
}

// 2D transform with DC at (0,0). Inverse is unscaled.
void fft2_std(std::vector<cplx>& a, int w, int h, bool inverse) {
    std::vector<cplx> scratch;
    for (int y = 0; y < h; ++y) fft1(a.data() + static_cast<std::size_t>(y) * w, w, 1, inverse, scratch);
    for (int x = 0; x < w; ++x) fft1(a.data() + x, h, w, inverse, scratch);
}

std::vector<cplx> shift_to_centered(const std::vector<cplx>& std_layout, int w, int h) {
    std::vector<cplx> out(std_layout.size());
    for (int v = 0; v < h; ++v) {
        const int sv = (v + h / 2) % h;
        for (int u = 0; u < w; ++u) {
            const int su = (u + w / 2) % w;
            out[static_cast<std::size_t>(v) * w + u] = std_layout[static_cast<std::size_t>(sv) * w + su];
        }
    }
    return out;
}

std::vector<cplx> shift_to_std(const std::vector<cplx>& centered, int w, int h) {
    std::vector<cplx> out(centered.size());
    for (int sv = 0; sv < h; ++sv) {
        const int v = (sv + h / 2) % h;
        for (int su = 0; su < w; ++su) {
            const int u = (su + w / 2) % w;
            out[static_cast<std::size_t>(sv) * w + su] = centered[static_cast<std::size_t>(v) * w + u];
        }
    }
    return out;
}

void check_transform_size(int w, int h) {
    require(is_pow2(w) && is_pow2(h),
            "spectral transforms require power-of-two dimensions");
}

// Signed frequency offset of a standard-layout index.
inline int signed_freq(int k, int n) {
    return k < (n + 1) / 2 ? k : k - n;
}

// Filter one plane in place through the ideal mask. keep_low keeps
// r <= d, otherwise r > d; the two masks partition the bins exactly.
void filter_plane(double* plane, int w, int h, double d, bool keep_low) {
    std::vector<cplx> a(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = plane[i];
    fft2_std(a, w, h, false);
    const double d2 = d * d;
    for (int v = 0; v < h; ++v) {
        const double dv = signed_freq(v, h);
        for (int u = 0; u < w; ++u) {
            const double du = signed_freq(u, w);
            const bool low = du * du + dv * dv <= d2;
            if (low != keep_low) a[static_cast<std::size_t>(v) * w + u] = 0.0;
        }
    }
    fft2_std(a, w, h, true);
    const double norm = 1.0 / (static_cast<double>(w) * h);
    for (std::size_t i = 0; i < a.size(); ++i) plane[i] = a[i].real() * norm;
}

void check_cutoff(CutoffRadius d, int w, int h) {
    if (!(d.d >= 0.0 && d.d <= spectrum_r_max(w, h)))
        throw config_error("cutoff radius outside [0, r_max]");
}

} // namespace

double spectrum_r_max(int width, int height) {
    return std::hypot(width / 2.0, height / 2.0);
}

double scale_cutoff(double d_at_256, int side) {
    return d_at_256 * side / 256.0;
}

Spectrum dft2_plane(const double* plane, int width, int height) {
    check_transform_size(width, height);
    std::vector<cplx> a(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = plane[i];
    fft2_std(a, width, height, false);
    Spectrum s;
    s.width = width;
    s.height = height;
    s.bins = shift_to_centered(a, width, height);
    return s;
}

std::vector<double> idft2_plane(const Spectrum& spec) {
    check_transform_size(spec.width, spec.height);
    auto a = shift_to_std(spec.bins, spec.width, spec.height);
    fft2_std(a, spec.width, spec.height, true);
    const double norm = 1.0 / (static_cast<double>(spec.width) * spec.height);
    std::vector<double> out(a.size());
#ifndef NDEBUG
    double max_imag = 0.0;
#endif
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i].real() * norm;
#ifndef NDEBUG
        max_imag = std::max(max_imag, std::abs(a[i].imag()) * norm);
#endif
    }
#ifndef NDEBUG
    // Spectra of real images must invert to real pixels; anything above
    // numeric residue means the spectrum was edited asymmetrically.
    assert(max_imag <= 1e-9 * std::max(1.0, std::abs(out[0])) + 1e-9);
#endif
    return out;
}

std::array<Spectrum, 3> dft2(const Image& img) {
    return {dft2_plane(img.plane(0), img.width, img.height),
            dft2_plane(img.plane(1), img.width, img.height),
            dft2_plane(img.plane(2), img.width, img.height)};
}

Image idft2(const std::array<Spectrum, 3>& spectra) {
    Image out(spectra[0].width, spectra[0].height);
    for (int c = 0; c < 3; ++c) {
        require(spectra[c].width == out.width && spectra[c].height == out.height,
                "idft2: channel spectra differ in shape");
        auto plane = idft2_plane(spectra[c]);
        std::copy(plane.begin(), plane.end(), out.plane(c));
    }
    return out;
}

Image low_pass(const Image& img, CutoffRadius d) {
    check_transform_size(img.width, img.height);
    check_cutoff(d, img.width, img.height);
    Image out = img;
    for (int c = 0; c < Image::channels; ++c)
        filter_plane(out.plane(c), out.width, out.height, d.d, true);
    clamp01(out);
    return out;
}

Image high_pass(const Image& img, CutoffRadius d) {
    check_transform_size(img.width, img.height);
    check_cutoff(d, img.width, img.height);
    Image out = img;
    for (int c = 0; c < Image::channels; ++c)
        filter_plane(out.plane(c), out.width, out.height, d.d, false);
    clamp01(out);
    return out;
}

FeatureMap low_pass(const FeatureMap& fm, CutoffRadius d) {
    check_transform_size(fm.width, fm.height);
    check_cutoff(d, fm.width, fm.height);
    FeatureMap out = fm;
    for (int c = 0; c < FeatureMap::channels; ++c)
        filter_plane(out.plane(c), out.width, out.height, d.d, true);
    return out;
}

FeatureMap high_pass(const FeatureMap& fm, CutoffRadius d) {
    check_transform_size(fm.width, fm.height);
    check_cutoff(d, fm.width, fm.height);
    FeatureMap out = fm;
    for (int c = 0; c < FeatureMap::channels; ++c)
        filter_plane(out.plane(c), out.width, out.height, d.d, false);
    return out;
}

double focal_frequency_loss(const FeatureMap& q, const FeatureMap& target, FeatureMap* grad_q) {
    require(q.same_shape(target), "focal_frequency_loss: shape mismatch");
    check_transform_size(q.width, q.height);
    const int w = q.width, h = q.height;
    const std::size_t n = q.pixels_per_channel();

    std::array<std::vector<cplx>, 3> diff;
    double max_amp = 0.0;
    for (int c = 0; c < 3; ++c) {
        diff[c].assign(n, cplx(0.0, 0.0));
        const double* pq = q.plane(c);
        const double* pt = target.plane(c);
        for (std::size_t i = 0; i < n; ++i) diff[c][i] = pq[i] - pt[i];
        fft2_std(diff[c], w, h, false);
        for (const cplx& z : diff[c]) max_amp = std::max(max_amp, std::abs(z));
    }

    const double inv_wh = 1.0 / (static_cast<double>(w) * h);
    const double wnorm = max_amp > 0.0 ? 1.0 / max_amp : 0.0;
    double loss = 0.0;
    if (grad_q) *grad_q = FeatureMap(w, h, 0.0);

    for (int c = 0; c < 3; ++c) {
        std::vector<cplx> weighted;
        if (grad_q) weighted.assign(n, cplx(0.0, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const double amp2 = std::norm(diff[c][i]);
            const double wgt = std::sqrt(amp2) * wnorm;
            loss += wgt * amp2;
            if (grad_q) weighted[i] = wgt * diff[c][i];
        }
        if (grad_q) {
            fft2_std(weighted, w, h, true);
            double* g = grad_q->plane(c);
            // d/dq of (1/(WH)) sum w |F_q - F_t|^2, w held constant:
            // 2/(WH) * Re(unscaled inverse DFT), then the 1/3 channel mean.
            const double scale = 2.0 * inv_wh / 3.0;
            for (std::size_t i = 0; i < n; ++i) g[i] = weighted[i].real() * scale;
        }
    }
    return loss * inv_wh / 3.0;
}

RadialSpectrum azimuthal_integral(const Image& img, bool normalize) {
    require(img.square(), "azimuthal_integral: image must be square");
    check_transform_size(img.width, img.height);
    const int side = img.width;
    const int nbins = side / 2 + 1;
    RadialSpectrum rs;
    rs.values.assign(nbins, 0.0);

    for (int c = 0; c < Image::channels; ++c) {
        Spectrum s = dft2_plane(img.plane(c), side, side);
        for (int v = 0; v < side; ++v) {
            const double dv = v - side / 2;
            for (int u = 0; u < side; ++u) {
                const double du = u - side / 2;
                int k = static_cast<int>(std::lround(std::hypot(du, dv)));
                if (k >= nbins) k = nbins - 1; // corner bins fold into the last ring
                rs.values[k] += std::norm(s.at(v, u));
            }
        }
    }
    if (normalize) {
        double total = 0.0;
        for (double v : rs.values) total += v;
        if (total > 0.0)
            for (double& v : rs.values) v /= total;
    }
    return rs;
}

double out_of_band_energy_fraction(const FeatureMap& fm, CutoffRadius d) {
    check_transform_size(fm.width, fm.height);
    const double d2 = d.d * d.d;
    double total = 0.0, out_band = 0.0;
    for (int c = 0; c < FeatureMap::channels; ++c) {
        Spectrum s = dft2_plane(fm.plane(c), fm.width, fm.height);
        for (int v = 0; v < fm.height; ++v) {
            const double dv = v - fm.height / 2;
            for (int u = 0; u < fm.width; ++u) {
                const double du = u - fm.width / 2;
                const double e = std::norm(s.at(v, u));
                total += e;
                if (du * du + dv * dv > d2) out_band += e;
            }
        }
    }
    return total > 0.0 ? out_band / total : 0.0;
}

} // namespace lfs
