#include "lfs/evaluate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lfs/errors.hpp"
#include "lfs/image_io.hpp"

namespace lfs {

namespace {

constexpr std::uint64_t kPairPermTag = 0xe7a1u;
constexpr std::uint64_t kRobustTag = 0x20b0u;
constexpr std::uint64_t kDamagedTag = 0xdc11u;

double safe_ncc(const Image& a, const Image& b) {
    try {
        return ncc(a, b);
    } catch (const numeric_error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

AttackOutcome summarize(const std::string& name, const std::vector<double>& nccs,
                        double threshold) {
    AttackOutcome out;
    out.attack = name;
    double acc = 0.0;
    std::size_t valid = 0;
    for (double v : nccs) {
        acc += v;
        if (v > threshold) ++valid;
    }
    out.mean_ncc = nccs.empty() ? 0.0 : acc / nccs.size();
    out.sr = nccs.empty() ? 0.0 : static_cast<double>(valid) / nccs.size();
    return out;
}

std::string fmtg(double v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

} // namespace

std::vector<EvalPair> build_eval_pairs(const std::vector<std::string>& paths, int side,
                                       std::uint64_t seed, std::size_t limit) {
    require(!paths.empty(), "evaluation set is empty");
    std::size_t count = paths.size();
    if (limit > 0 && limit < count) count = limit;

    std::vector<Image> images;
    images.reserve(count);
    for (std::size_t i = 0; i < count; ++i) images.push_back(load_image(paths[i], side));

    // secrets are a seeded permutation of the pool
    auto rng = derive_rng(seed, {kPairPermTag});
    std::vector<std::size_t> perm(count);
    for (std::size_t i = 0; i < count; ++i) perm[i] = i;
    for (std::size_t i = count - 1; i > 0; --i) {
        const std::size_t j = rng.uniform_int(i + 1);
        std::swap(perm[i], perm[j]);
    }

    std::vector<EvalPair> pairs;
    pairs.reserve(count);
    char id[32];
    for (std::size_t i = 0; i < count; ++i) {
        std::snprintf(id, sizeof id, "pair%05zu", i);
        pairs.push_back({id, images[i], images[perm[i]]});
    }
    return pairs;
}

FidelityReport evaluate_fidelity(Embedder& embedder, Retriever& retriever,
                                 const std::vector<EvalPair>& pairs, double threshold) {
    require(!pairs.empty(), "evaluate_fidelity: empty pair set");
    FidelityReport rep;
    rep.container.ncc_threshold = threshold;
    rep.recovered.ncc_threshold = threshold;
    for (const auto& p : pairs) {
        const FeatureMap q = embed(embedder, p.secret);
        const Image container = make_container(p.cover, q);
        const Image recovered = retrieve(retriever, container);

        MetricRow rc{p.id, psnr(p.cover, container), ssim(p.cover, container),
                     safe_ncc(p.cover, container), false};
        rc.valid = rc.ncc > threshold;
        rep.container.rows.push_back(rc);

        MetricRow rs{p.id, psnr(p.secret, recovered), ssim(p.secret, recovered),
                     safe_ncc(p.secret, recovered), false};
        rs.valid = rs.ncc > threshold;
        rep.recovered.rows.push_back(rs);
    }
    return rep;
}

std::vector<AttackOutcome> evaluate_robustness(Embedder& embedder, Retriever& retriever,
                                               const std::vector<EvalPair>& pairs,
                                               const EvalAttackParams& params, std::uint64_t seed,
                                               double threshold) {
    require(!pairs.empty(), "evaluate_robustness: empty pair set");
    const int side = pairs[0].cover.width;
    const double rmax = spectrum_r_max(side, side);

    std::vector<double> ncc_jpeg, ncc_lp, ncc_blur, ncc_jit, ncc_crop;
    std::size_t idx = 0;
    for (const auto& p : pairs) {
        const FeatureMap q = embed(embedder, p.secret);
        const Image container = make_container(p.cover, q);
        auto rng = derive_rng(seed, {kRobustTag, idx++});

        const Image a_jpeg = jpeg_attack(container, params.jpeg_quality, AttackMode::exact);
        const Image a_lp = lowpass_attack(container, params.lowpass_frac * rmax);
        const Image a_blur = gaussian_blur(container, params.blur_sigma, params.blur_kernel);
        const Image a_jit = color_jitter(container, params.jitter, rng);
        const Image a_crop = resize_crop(container, params.crop_scale, params.crop_scale, rng);

        ncc_jpeg.push_back(safe_ncc(p.secret, retrieve(retriever, a_jpeg)));
        ncc_lp.push_back(safe_ncc(p.secret, retrieve(retriever, a_lp)));
        ncc_blur.push_back(safe_ncc(p.secret, retrieve(retriever, a_blur)));
        ncc_jit.push_back(safe_ncc(p.secret, retrieve(retriever, a_jit)));
        ncc_crop.push_back(safe_ncc(p.secret, retrieve(retriever, a_crop)));
    }
    return {summarize("jpeg", ncc_jpeg, threshold), summarize("lowpass", ncc_lp, threshold),
            summarize("blur", ncc_blur, threshold), summarize("jitter", ncc_jit, threshold),
            summarize("resize_crop", ncc_crop, threshold)};
}

SpecificityReport evaluate_specificity(Embedder& embedder, Retriever& retriever,
                                       const std::vector<EvalPair>& pairs,
                                       const AttackConfig& attack_cfg, std::uint64_t seed,
                                       double threshold) {
    require(!pairs.empty(), "evaluate_specificity: empty pair set");
    (void)embedder;
    std::vector<double> ncc_clean, ncc_damaged;
    std::size_t idx = 0;
    for (const auto& p : pairs) {
        const Image r_clean = retrieve(retriever, p.cover);
        ncc_clean.push_back(safe_ncc(p.secret, r_clean));

        auto rng = derive_rng(seed, {kDamagedTag, idx++});
        const auto [damaged, plan] = attack_layer(p.cover, attack_cfg, rng, AttackMode::exact);
        const Image r_damaged = retrieve(retriever, damaged);
        ncc_damaged.push_back(safe_ncc(p.secret, r_damaged));
    }
    return {summarize("clean", ncc_clean, threshold),
            summarize("damaged_clean", ncc_damaged, threshold)};
}

std::vector<SweepRow> sweep_filters(Embedder& embedder, Retriever& retriever,
                                    const std::vector<EvalPair>& pairs,
                                    const std::vector<double>& d_values, double threshold) {
    require(!pairs.empty(), "sweep_filters: empty pair set");
    require(!d_values.empty(), "sweep_filters: empty d list");

    std::vector<Image> containers;
    containers.reserve(pairs.size());
    for (const auto& p : pairs)
        containers.push_back(make_container(p.cover, embed(embedder, p.secret)));

    std::vector<SweepRow> rows;
    for (bool low : {true, false}) {
        for (double d : d_values) {
            std::vector<double> nccs;
            nccs.reserve(pairs.size());
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const Image attacked = low ? low_pass(containers[i], CutoffRadius{d})
                                           : high_pass(containers[i], CutoffRadius{d});
                nccs.push_back(safe_ncc(pairs[i].secret, retrieve(retriever, attacked)));
            }
            const AttackOutcome o = summarize(low ? "lowpass" : "highpass", nccs, threshold);
            rows.push_back({o.attack, d, o.mean_ncc, o.sr});
        }
    }
    return rows;
}

RadialSpectrum average_azimuthal(const std::vector<Image>& images) {
    require(!images.empty(), "average_azimuthal: empty image set");
    RadialSpectrum acc = azimuthal_integral(images[0]);
    for (std::size_t i = 1; i < images.size(); ++i) {
        const RadialSpectrum s = azimuthal_integral(images[i]);
        require(s.values.size() == acc.values.size(), "average_azimuthal: mixed image sizes");
        for (std::size_t k = 0; k < acc.values.size(); ++k) acc.values[k] += s.values[k];
    }
    for (double& v : acc.values) v /= static_cast<double>(images.size());
    return acc;
}

std::string attack_outcomes_csv(const std::vector<AttackOutcome>& rows) {
    std::ostringstream os;
    os << "attack,mean_ncc,sr\n";
    for (const auto& r : rows) os << r.attack << ',' << fmtg(r.mean_ncc) << ',' << fmtg(r.sr) << '\n';
    return os.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "filter,d,mean_ncc,sr\n";
    for (const auto& r : rows)
        os << r.filter << ',' << fmtg(r.d) << ',' << fmtg(r.mean_ncc) << ',' << fmtg(r.sr) << '\n';
    return os.str();
}

} // namespace lfs
