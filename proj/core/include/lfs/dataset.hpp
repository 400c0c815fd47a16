#ifndef LFS_DATASET_HPP
#define LFS_DATASET_HPP

#include <string>
#include <vector>

#include "lfs/image.hpp"
#include "lfs/rng.hpp"

namespace lfs {

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> eval;
};

// Sorted so directory iteration order does not leak into results.
std::vector<std::string> list_images(const std::string& dir);

// Shuffle and cut: the first eval_count shuffled paths become the
// evaluation set. Deterministic under the rng seed.
DatasetSplit make_splits(std::vector<std::string> paths, std::size_t eval_count, SeededRng& rng);

// Load a split from <root>/{train,eval} if those subdirectories exist,
// otherwise split a flat directory with make_splits.
DatasetSplit load_dataset(const std::string& root, std::size_t eval_count, std::uint64_t seed);

// Procedural texture for desk-scale runs: checkerboards, gradients,
// band-limited noise, blob fields, stripes, each with a little
// broadband dither so every image has energy across the spectrum.
Image synth_texture(int side, SeededRng& rng);

// Write count_train + count_eval synthetic textures as
// <root>/train/*.png and <root>/eval/*.png.
void generate_dataset(const std::string& root, int count_train, int count_eval, int side,
                      std::uint64_t seed);

} // namespace lfs

#endif
