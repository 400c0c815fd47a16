#ifndef LFS_ATTACKS_HPP
#define LFS_ATTACKS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lfs/image.hpp"
#include "lfs/resample.hpp"
#include "lfs/rng.hpp"
#include "lfs/spectral.hpp"

namespace lfs {

enum class AttackId { lowpass, blur, noise, jitter, resize_crop, jpeg, poisson };
enum class AttackMode {
    exact,          // evaluation path; JPEG goes through the real codec
    differentiable  // training path; JPEG is block-DCT with straight-through rounding
};

const char* attack_name(AttackId id);
AttackId attack_from_name(const std::string& name);

struct JitterStrength {
    double brightness = 0.2;
    double contrast = 0.2;
    double saturation = 0.2;
    double hue = 0.1; // turns
};

// Multiplicative factors actually applied; hue is a rotation in turns.
struct JitterFactors {
    double brightness = 1.0;
    double contrast = 1.0;
    double saturation = 1.0;
    double hue_turns = 0.0;
};

struct AttackConfig {
    double per_attack_probability = 0.25;
    bool include_geometric_in_training = false;

    std::array<int, 2> jpeg_quality_range{40, 90};
    std::array<double, 2> blur_sigma_range{0.5, 2.0};
    int blur_kernel = 7;
    double noise_sigma = 10.0; // 8-bit scale, divided by 255 internally
    std::array<double, 2> lowpass_frac_range{0.4, 0.9}; // fraction of r_max
    JitterStrength jitter;
    std::array<double, 2> crop_scale{0.5, 1.0};

    void validate() const;
};

struct SampledAttack {
    AttackId id = AttackId::lowpass;
    bool active = false;

    double lowpass_d = 0.0;
    double blur_sigma = 0.0;
    int blur_kernel = 0;
    double noise_sigma8 = 0.0;
    std::uint64_t noise_seed = 0;
    JitterFactors jitter;
    CropRect crop;
    int jpeg_quality = 0;
};

// Ordered record of one attack-layer draw. Replaying a plan reproduces
// the damaged image bit-exactly in either mode.
struct AttackPlan {
    std::vector<SampledAttack> steps;

    bool any_active() const;
    int active_count(AttackId id) const;
};

std::string plan_to_json(const AttackPlan& plan);
AttackPlan plan_from_json(const std::string& line);

// ---- individual attacks ----

Image jpeg_attack(const Image& img, int quality, AttackMode mode);
Image gaussian_blur(const Image& img, double sigma, int kernel);
Image additive_noise(const Image& img, double sigma8, SeededRng& rng);
Image additive_noise_seeded(const Image& img, double sigma8, std::uint64_t seed);
Image lowpass_attack(const Image& img, double d);

JitterFactors sample_jitter(const JitterStrength& strength, SeededRng& rng);
Image color_jitter(const Image& img, const JitterStrength& strength, SeededRng& rng);
Image color_jitter_apply(const Image& img, const JitterFactors& f);

CropRect sample_crop(int width, int height, double scale_lo, double scale_hi, SeededRng& rng);
Image resize_crop(const Image& img, double scale_lo, double scale_hi, SeededRng& rng);

// Photon-count noise; excluded from the training pool and the standard
// evaluation protocol.
Image poisson_noise(const Image& img, double scale, SeededRng& rng);

// ---- stochastic composition ----

AttackPlan sample_attack_plan(const AttackConfig& cfg, int width, int height, SeededRng& rng);
Image apply_attack_plan(const Image& img, const AttackPlan& plan, AttackMode mode);
std::pair<Image, AttackPlan> attack_layer(const Image& img, const AttackConfig& cfg,
                                          SeededRng& rng, AttackMode mode = AttackMode::exact);

// ---- training-time adjoints ----
//
// attack_forward applies the plan in differentiable mode and records
// what each step's adjoint needs (clamp masks and sampled parameters;
// every step is linear given its parameters). attack_backward maps the
// gradient at the damaged image back to the container.

struct AttackStepContext {
    SampledAttack step;
    std::vector<std::uint8_t> pass_mask; // 1 where the step's final clamp passed through
    int in_width = 0;
    int in_height = 0;
};

struct AttackTape {
    std::vector<AttackStepContext> steps;
};

Image attack_forward(const Image& img, const AttackPlan& plan, AttackTape& tape);
FeatureMap attack_backward(const FeatureMap& grad_out, const AttackTape& tape);

} // namespace lfs

#endif
