#ifndef LFS_EVALUATE_HPP
#define LFS_EVALUATE_HPP

#include <string>
#include <vector>

#include "lfs/attacks.hpp"
#include "lfs/metrics.hpp"
#include "lfs/models.hpp"
#include "lfs/spectral.hpp"

namespace lfs {

// Fixed attack parameters for the evaluation protocol. All of them are
// CLI flags; reports record the values used.
struct EvalAttackParams {
    int jpeg_quality = 50;
    double blur_sigma = 1.0;
    int blur_kernel = 7;
    double lowpass_frac = 0.5; // fraction of r_max
    JitterStrength jitter;
    double crop_scale = 0.75;
};

struct EvalPair {
    std::string id;
    Image cover;
    Image secret;
};

// Deterministic cover/secret pairing over the evaluation set: secrets
// are a seeded permutation of the same pool.
std::vector<EvalPair> build_eval_pairs(const std::vector<std::string>& paths, int side,
                                       std::uint64_t seed, std::size_t limit = 0);

struct FidelityReport {
    MetricReport container; // (cover, container)
    MetricReport recovered; // (secret, recovered from clean container)
};

FidelityReport evaluate_fidelity(Embedder& embedder, Retriever& retriever,
                                 const std::vector<EvalPair>& pairs, double threshold = 0.95);

struct AttackOutcome {
    std::string attack;
    double mean_ncc = 0.0;
    double sr = 0.0;
};

// One row per protocol attack: jpeg, lowpass, blur, jitter, resize_crop.
std::vector<AttackOutcome> evaluate_robustness(Embedder& embedder, Retriever& retriever,
                                               const std::vector<EvalPair>& pairs,
                                               const EvalAttackParams& params, std::uint64_t seed,
                                               double threshold = 0.95);

struct SpecificityReport {
    AttackOutcome clean;         // NCC(secret, R(cover)); lower is better
    AttackOutcome damaged_clean; // NCC(secret, R(A(cover)))
};

SpecificityReport evaluate_specificity(Embedder& embedder, Retriever& retriever,
                                       const std::vector<EvalPair>& pairs,
                                       const AttackConfig& attack_cfg, std::uint64_t seed,
                                       double threshold = 0.95);

struct SweepRow {
    std::string filter; // "lowpass" | "highpass"
    double d = 0.0;
    double mean_ncc = 0.0;
    double sr = 0.0;
};

std::vector<SweepRow> sweep_filters(Embedder& embedder, Retriever& retriever,
                                    const std::vector<EvalPair>& pairs,
                                    const std::vector<double>& d_values, double threshold = 0.95);

RadialSpectrum average_azimuthal(const std::vector<Image>& images);

std::string attack_outcomes_csv(const std::vector<AttackOutcome>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace lfs

#endif
