#include "lfs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "lfs/errors.hpp"
#include "lfs/image_io.hpp"
#include "lfs/spectral.hpp"

namespace fs = std::filesystem;

namespace lfs {

std::vector<std::string> list_images(const std::string& dir) {
    if (!fs::is_directory(dir)) throw config_error("dataset directory '" + dir + "' not found");
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

DatasetSplit make_splits(std::vector<std::string> paths, std::size_t eval_count, SeededRng& rng) {
    if (eval_count >= paths.size())
        throw config_error("eval_count must be smaller than the number of paths");
    // Fisher-Yates with our own draws, so the split depends only on the seed.
    for (std::size_t i = paths.size() - 1; i > 0; --i) {
        const std::size_t j = rng.uniform_int(i + 1);
        std::swap(paths[i], paths[j]);
    }
    DatasetSplit split;
    split.eval.assign(paths.begin(), paths.begin() + eval_count);
    split.train.assign(paths.begin() + eval_count, paths.end());
    return split;
}

DatasetSplit load_dataset(const std::string& root, std::size_t eval_count, std::uint64_t seed) {
    const fs::path train_dir = fs::path(root) / "train";
    const fs::path eval_dir = fs::path(root) / "eval";
    if (fs::is_directory(train_dir) && fs::is_directory(eval_dir)) {
        DatasetSplit split;
        split.train = list_images(train_dir.string());
        split.eval = list_images(eval_dir.string());
        if (split.train.empty() || split.eval.empty())
            throw config_error("dataset '" + root + "' has an empty train or eval directory");
        return split;
    }
    auto rng = derive_rng(seed, {0x5b1177u});
    return make_splits(list_images(root), eval_count, rng);
}

namespace {

void add_dither(Image& img, SeededRng& rng, double amp) {
    for (double& v : img.data) v += rng.uniform(-amp, amp);
    clamp01(img);
}

Image checkerboard(int side, SeededRng& rng) {
    Image img(side, side);
    // coarse cells only: the pattern stays in the low-frequency band
    const int cell = side / static_cast<int>(2 << rng.uniform_int(2)); // side/2..side/8
    double ca[3], cb[3];
    for (int c = 0; c < 3; ++c) {
        ca[c] = rng.uniform(0.0, 1.0);
        cb[c] = rng.uniform(0.0, 1.0);
    }
    const int ox = static_cast<int>(rng.uniform_int(cell));
    const int oy = static_cast<int>(rng.uniform_int(cell));
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const bool a = (((x + ox) / cell) + ((y + oy) / cell)) % 2 == 0;
            for (int c = 0; c < 3; ++c) img.at(c, y, x) = a ? ca[c] : cb[c];
        }
    return img;
}

// Fine high-frequency detail overlay, well above the embedding band.
void add_detail(Image& img, SeededRng& rng) {
    const int kind = static_cast<int>(rng.uniform_int(3));
    if (kind == 0) return;
    const double amp = rng.uniform(0.02, 0.08);
    if (kind == 1) {
        const double freq = rng.uniform(0.55, 0.95) * (img.width / 2.0); // near-Nyquist stripes
        const double angle = rng.uniform(0.0, M_PI);
        const double kx = std::cos(angle) * freq / img.width;
        const double ky = std::sin(angle) * freq / img.width;
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const double v = amp * std::sin(2.0 * M_PI * (kx * x + ky * y) + phase);
                for (int c = 0; c < 3; ++c) img.at(c, y, x) += v;
            }
    } else {
        const int cell = 2; // pixel-scale checker
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const double v = (((x / cell) + (y / cell)) % 2 == 0) ? amp : -amp;
                for (int c = 0; c < 3; ++c) img.at(c, y, x) += v;
            }
    }
}

Image gradient(int side, SeededRng& rng) {
    Image img(side, side);
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const double gx = std::cos(angle), gy = std::sin(angle);
    const double cycles = rng.uniform(0.5, 2.0);
    double c0[3], c1[3];
    for (int c = 0; c < 3; ++c) {
        c0[c] = rng.uniform(0.0, 1.0);
        c1[c] = rng.uniform(0.0, 1.0);
    }
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            double t = (gx * x + gy * y) / side;
            t = 0.5 + 0.5 * std::sin(2.0 * M_PI * t * cycles);
            for (int c = 0; c < 3; ++c) img.at(c, y, x) = c0[c] + (c1[c] - c0[c]) * t;
        }
    return img;
}

Image blobs(int side, SeededRng& rng) {
    Image img(side, side, 0.0);
    double base[3];
    for (int c = 0; c < 3; ++c) base[c] = rng.uniform(0.1, 0.6);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) img.at(c, y, x) = base[c];
    const int nblobs = 3 + static_cast<int>(rng.uniform_int(6));
    for (int b = 0; b < nblobs; ++b) {
        const double cx = rng.uniform(0.0, side);
        const double cy = rng.uniform(0.0, side);
        const double r = rng.uniform(side / 12.0, side / 3.0);
        double amp[3];
        for (int c = 0; c < 3; ++c) amp[c] = rng.uniform(-0.5, 0.5);
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                const double d2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (r * r);
                const double g = std::exp(-d2);
                for (int c = 0; c < 3; ++c) img.at(c, y, x) += amp[c] * g;
            }
    }
    clamp01(img);
    return img;
}

Image stripes(int side, SeededRng& rng) {
    Image img(side, side);
    const double angle = rng.uniform(0.0, M_PI);
    const double freq = rng.uniform(1.0, 3.5); // broad bands, low frequency
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    double c0[3], c1[3];
    for (int c = 0; c < 3; ++c) {
        c0[c] = rng.uniform(0.0, 1.0);
        c1[c] = rng.uniform(0.0, 1.0);
    }
    const double kx = std::cos(angle) * freq / side;
    const double ky = std::sin(angle) * freq / side;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const double t = 0.5 + 0.5 * std::sin(2.0 * M_PI * (kx * x + ky * y) + phase);
            for (int c = 0; c < 3; ++c) img.at(c, y, x) = c0[c] + (c1[c] - c0[c]) * t;
        }
    return img;
}

Image bandlimited_noise(int side, SeededRng& rng) {
    // Random low-band spectrum with a radial power falloff, inverted to
    // pixels. Content is kept below ~side/16 so the textures stay smooth.
    Image img(side, side);
    const double falloff = rng.uniform(1.5, 2.5);
    const double band = side / 16.0;
    for (int c = 0; c < 3; ++c) {
        Spectrum s;
        s.width = s.height = side;
        s.bins.assign(static_cast<std::size_t>(side) * side, {0.0, 0.0});
        for (int v = 0; v < side; ++v)
            for (int u = 0; u < side; ++u) {
                const double du = u - side / 2, dv = v - side / 2;
                const double r = std::hypot(du, dv);
                if (r == 0.0) {
                    s.at(v, u) = {rng.uniform(0.3, 0.7) * side * side, 0.0};
                    continue;
                }
                if (r > band) continue;
                const double mag = std::pow(r, -falloff) * side * side * 0.3;
                const double ph = rng.uniform(0.0, 2.0 * M_PI);
                s.at(v, u) = {mag * std::cos(ph), mag * std::sin(ph)};
            }
        // Hermitian symmetrization keeps the inverse real.
        for (int v = 0; v < side; ++v)
            for (int u = 0; u < side; ++u) {
                const int mu = (side - u) % side;
                const int mv = (side - v) % side;
                if (mu == u && mv == v) {
                    s.at(v, u) = {s.at(v, u).real(), 0.0};
                } else if (v * side + u > mv * side + mu) {
                    s.at(v, u) = std::conj(s.at(mv, mu));
                }
            }
        auto plane = idft2_plane(s);
        double lo = plane[0], hi = plane[0];
        for (double x : plane) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        const double span = hi > lo ? hi - lo : 1.0;
        for (int i = 0; i < side * side; ++i)
            img.plane(c)[i] = (plane[i] - lo) / span;
    }
    return img;
}

} // namespace

Image synth_texture(int side, SeededRng& rng) {
    // Smooth low-frequency base plus optional near-Nyquist detail and a
    // broadband dither. The mid band is left quiet, which matches how
    // natural covers thin out with rising frequency.
    Image img;
    switch (rng.uniform_int(5)) {
        case 0: img = checkerboard(side, rng); break;
        case 1: img = gradient(side, rng); break;
        case 2: img = blobs(side, rng); break;
        case 3: img = stripes(side, rng); break;
        default: img = bandlimited_noise(side, rng); break;
    }
    add_detail(img, rng);
    add_dither(img, rng, 0.02);
    return img;
}

void generate_dataset(const std::string& root, int count_train, int count_eval, int side,
                      std::uint64_t seed) {
    const fs::path train_dir = fs::path(root) / "train";
    const fs::path eval_dir = fs::path(root) / "eval";
    fs::create_directories(train_dir);
    fs::create_directories(eval_dir);
    auto rng = derive_rng(seed, {0x7e37u});
    char name[32];
    for (int i = 0; i < count_train; ++i) {
        std::snprintf(name, sizeof name, "t%05d.png", i);
        save_png(synth_texture(side, rng), (train_dir / name).string());
    }
    for (int i = 0; i < count_eval; ++i) {
        std::snprintf(name, sizeof name, "e%05d.png", i);
        save_png(synth_texture(side, rng), (eval_dir / name).string());
    }
}

} // namespace lfs
