// Command-line front end: training, embedding/extraction, attacks, the
// evaluation protocols, frequency analyses and report emission.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "lfs/attacks.hpp"
#include "lfs/dataset.hpp"
#include "lfs/errors.hpp"
#include "lfs/evaluate.hpp"
#include "lfs/image_io.hpp"
#include "lfs/metrics.hpp"
#include "lfs/models.hpp"
#include "lfs/report.hpp"
#include "lfs/spectral.hpp"
#include "lfs/training.hpp"

namespace fs = std::filesystem;
using namespace lfs;

namespace {

constexpr const char* kVersion = "lfstego 0.1.0";

// Exit codes: 0 ok, 2 config/usage, 3 I/O, 4 numeric, 5 contract.
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitContract = 5;

std::string default_out(const std::string& command) {
    if (const char* root = std::getenv("LFSTEGO_OUT_ROOT"))
        return (fs::path(root) / command).string();
    return "out-" + command;
}

RunManifest make_manifest(const std::string& command, std::uint64_t seed,
                          const std::string& config_text, int argc, char** argv) {
    RunManifest m;
    m.command = command;
    m.version = kVersion;
    m.seed = seed;
    m.config_text = config_text;
    for (int i = 0; i < argc; ++i) m.args.emplace_back(argv[i]);
    return m;
}

TrainConfig load_train_config(const std::string& path) {
    if (path.empty()) return TrainConfig{};
    return TrainConfig::from_json(read_text_file(path));
}

struct LoadedModel {
    Checkpoint ckpt;
    int side = 0;
};

LoadedModel open_model(const std::string& path) {
    LoadedModel m{load_checkpoint(path), 0};
    m.side = m.ckpt.embedder_spec.side;
    return m;
}

std::vector<std::string> eval_paths_for(const std::string& data_root, std::size_t eval_count,
                                        std::uint64_t seed) {
    const fs::path eval_dir = fs::path(data_root) / "eval";
    if (fs::is_directory(eval_dir)) return list_images(eval_dir.string());
    return load_dataset(data_root, eval_count, seed).eval;
}

void report_progress(const TrainLogRecord& rec) {
    if (rec.step % 20 == 0 || rec.step == 1)
        std::cerr << "epoch " << rec.epoch << " step " << rec.step << " total " << rec.total
                  << " (emb " << rec.l_emb << " freq " << rec.l_freq << " ret " << rec.l_ret
                  << " cln " << rec.l_cln << ")\n";
}

// ---- subcommand bodies ----

int cmd_gendata(const std::string& out, int train_count, int eval_count, int side,
                std::uint64_t seed, int argc, char** argv) {
    write_manifest(out, make_manifest("gendata", seed, "", argc, argv));
    generate_dataset(out, train_count, eval_count, side, seed);
    std::cout << "wrote " << train_count << " train + " << eval_count << " eval images to " << out
              << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_root, std::string out,
              std::optional<std::uint64_t> seed, int argc, char** argv) {
    TrainConfig cfg = load_train_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out.empty()) out = default_out("train");
    write_manifest(out, make_manifest("train", cfg.seed, cfg.to_json(), argc, argv));

    DatasetSplit split = load_dataset(data_root, 0, cfg.seed);
    TrainResult result = train(cfg, split, out, report_progress);
    std::cout << "final checkpoint: " << result.final_checkpoint << "\n";
    return 0;
}

int cmd_embed(const std::string& ckpt_path, const std::string& cover_path,
              const std::string& secret_path, std::string out, int argc, char** argv) {
    if (out.empty()) out = default_out("embed");
    auto model = open_model(ckpt_path);
    write_manifest(out, make_manifest("embed", 0, "", argc, argv));

    const Image cover = load_image(cover_path, model.side);
    const Image secret = load_image(secret_path, model.side);
    const FeatureMap q = embed(*model.ckpt.embedder, secret);
    const Image container = make_container(cover, q);

    save_png(container, (fs::path(out) / "container.png").string());

    // raw feature map plus a viewable rendering centered at gray
    std::ofstream qd(fs::path(out) / "feature_map.bin", std::ios::binary);
    qd.write(reinterpret_cast<const char*>(q.data.data()),
             static_cast<std::streamsize>(q.data.size() * sizeof(double)));
    Image qviz(q.width, q.height);
    const double a = model.ckpt.embedder_spec.strength;
    for (std::size_t i = 0; i < q.data.size(); ++i)
        qviz.data[i] = 0.5 + q.data[i] / (2.0 * a);
    clamp01(qviz);
    save_png(qviz, (fs::path(out) / "feature_map.png").string());

    write_text_file((fs::path(out) / "container_spectrum.csv").string(),
                    radial_csv(azimuthal_integral(container)));

    std::cout << "psnr_container_db=" << psnr(cover, container) << "\n";
    return 0;
}

int cmd_extract(const std::string& ckpt_path, const std::string& image_path,
                const std::string& reference_path, double threshold, std::string out, int argc,
                char** argv) {
    if (out.empty()) out = default_out("extract");
    auto model = open_model(ckpt_path);
    write_manifest(out, make_manifest("extract", 0, "", argc, argv));

    const Image input = load_image(image_path, model.side);
    const Image recovered = retrieve(*model.ckpt.retriever, input);
    save_png(recovered, (fs::path(out) / "recovered.png").string());
    std::cout << "mean_intensity=" << mean_intensity(recovered) << "\n";
    if (!reference_path.empty()) {
        const Image ref = load_image(reference_path, model.side);
        const double v = ncc(ref, recovered);
        std::cout << "ncc=" << v << "\nvalid=" << (v > threshold ? 1 : 0) << "\n";
    }
    return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& data_root,
                 const std::string& protocol, std::string out, std::uint64_t seed,
                 std::size_t limit, double threshold, const EvalAttackParams& params,
                 const std::string& format, int argc, char** argv) {
    if (out.empty()) out = default_out("evaluate");
    auto model = open_model(ckpt_path);
    write_manifest(out, make_manifest("evaluate-" + protocol, seed, "", argc, argv));

    auto paths = eval_paths_for(data_root, limit ? limit : 100, seed);
    auto pairs = build_eval_pairs(paths, model.side, seed, limit);
    Embedder& E = *model.ckpt.embedder;
    Retriever& R = *model.ckpt.retriever;

    if (protocol == "fidelity") {
        FidelityReport rep = evaluate_fidelity(E, R, pairs, threshold);
        if (format == "json") {
            write_text_file((fs::path(out) / "fidelity_container.json").string(),
                            rep.container.to_json());
            write_text_file((fs::path(out) / "fidelity_recovered.json").string(),
                            rep.recovered.to_json());
        } else {
            write_text_file((fs::path(out) / "fidelity_container.csv").string(),
                            rep.container.to_csv());
            write_text_file((fs::path(out) / "fidelity_recovered.csv").string(),
                            rep.recovered.to_csv());
        }
        std::cout << "container mean psnr=" << rep.container.mean_psnr()
                  << " ssim=" << rep.container.mean_ssim()
                  << "\nrecovered mean psnr=" << rep.recovered.mean_psnr()
                  << " ssim=" << rep.recovered.mean_ssim() << "\n";
    } else if (protocol == "robustness") {
        auto rows = evaluate_robustness(E, R, pairs, params, seed, threshold);
        write_text_file((fs::path(out) / "robustness.csv").string(), attack_outcomes_csv(rows));
        for (const auto& r : rows)
            std::cout << r.attack << " ncc=" << r.mean_ncc << " sr=" << r.sr << "\n";
    } else if (protocol == "specificity") {
        AttackConfig acfg; // damaged-clean runs the training attack layer, exact codecs
        acfg.include_geometric_in_training = true;
        SpecificityReport rep = evaluate_specificity(E, R, pairs, acfg, seed, threshold);
        write_text_file((fs::path(out) / "specificity.csv").string(),
                        attack_outcomes_csv({rep.clean, rep.damaged_clean}));
        std::cout << "clean ncc=" << rep.clean.mean_ncc << " sr=" << rep.clean.sr
                  << "\ndamaged_clean ncc=" << rep.damaged_clean.mean_ncc
                  << " sr=" << rep.damaged_clean.sr << "\n";
    } else {
        throw config_error("unknown protocol '" + protocol + "'");
    }
    return 0;
}

int cmd_freq_analysis(const std::string& dir, const std::string& compare_dir, std::string out,
                      int side, int argc, char** argv) {
    if (out.empty()) out = default_out("freq-analysis");
    write_manifest(out, make_manifest("freq-analysis", 0, "", argc, argv));

    auto load_all = [side](const std::string& d) {
        std::vector<Image> images;
        for (const auto& p : list_images(d)) images.push_back(load_image(p, side));
        if (images.empty()) throw config_error("no images in '" + d + "'");
        return images;
    };
    const RadialSpectrum a = average_azimuthal(load_all(dir));
    std::vector<SvgSeries> series{{fs::path(dir).filename().string(), a.values}};
    std::string csv;
    if (!compare_dir.empty()) {
        const RadialSpectrum b = average_azimuthal(load_all(compare_dir));
        csv = radial_csv(a, &b);
        series.push_back({fs::path(compare_dir).filename().string(), b.values});
    } else {
        csv = radial_csv(a);
    }
    write_text_file((fs::path(out) / "spectrum.csv").string(), csv);
    write_text_file((fs::path(out) / "spectrum.svg").string(),
                    svg_line_chart(series, "Averaged azimuthal power spectrum", "radius bin",
                                   "energy"));
    std::cout << "wrote spectrum.csv and spectrum.svg to " << out << "\n";
    return 0;
}

int cmd_sweep_filters(const std::string& ckpt_path, const std::string& data_root,
                      std::vector<double> d_values, std::string out, std::uint64_t seed,
                      std::size_t limit, double threshold, int argc, char** argv) {
    if (out.empty()) out = default_out("sweep-filters");
    auto model = open_model(ckpt_path);
    write_manifest(out, make_manifest("sweep-filters", seed, "", argc, argv));

    if (d_values.empty()) {
        // Table-style defaults quoted at 256, scaled to the model side.
        for (double d256 : {1.0, 20.0, 40.0, 60.0, 80.0})
            d_values.push_back(scale_cutoff(d256, model.side));
    }
    auto paths = eval_paths_for(data_root, limit ? limit : 100, seed);
    auto pairs = build_eval_pairs(paths, model.side, seed, limit);
    auto rows = sweep_filters(*model.ckpt.embedder, *model.ckpt.retriever, pairs, d_values,
                              threshold);
    write_text_file((fs::path(out) / "sweep.csv").string(), sweep_csv(rows));
    for (const auto& r : rows)
        std::cout << r.filter << " d=" << r.d << " ncc=" << r.mean_ncc << " sr=" << r.sr << "\n";
    return 0;
}

int cmd_residue(const std::string& a_path, const std::string& b_path, const std::string& out_path,
                double gain) {
    const Image a = load_image_raw(a_path);
    const Image b = load_image_raw(b_path);
    save_png(residue(a, b, gain), out_path);
    return 0;
}

int cmd_attack(const std::string& type, const std::string& in_path, const std::string& out_path,
               int quality, double d, double sigma, int kernel, double noise_sigma,
               double brightness, double contrast, double saturation, double hue, double scale_lo,
               double scale_hi, double poisson_scale, double probability, bool geometric,
               const std::string& mode_name, std::uint64_t seed, const std::string& plan_path,
               const std::string& replay_path) {
    const Image img = load_image_raw(in_path);
    const AttackMode mode =
        mode_name == "differentiable" ? AttackMode::differentiable : AttackMode::exact;
    SeededRng rng(seed);
    Image out;
    if (!replay_path.empty()) {
        const AttackPlan plan = plan_from_json(read_text_file(replay_path));
        out = apply_attack_plan(img, plan, mode);
    } else if (type == "jpeg") {
        out = jpeg_attack(img, quality, mode);
    } else if (type == "lowpass") {
        out = lowpass_attack(img, d >= 0.0 ? d : 0.5 * spectrum_r_max(img.width, img.height));
    } else if (type == "highpass") {
        out = high_pass(img, CutoffRadius{d >= 0.0 ? d : 0.0});
    } else if (type == "blur") {
        out = gaussian_blur(img, sigma, kernel);
    } else if (type == "noise") {
        out = additive_noise(img, noise_sigma, rng);
    } else if (type == "jitter") {
        out = color_jitter(img, JitterStrength{brightness, contrast, saturation, hue}, rng);
    } else if (type == "resize_crop") {
        out = resize_crop(img, scale_lo, scale_hi, rng);
    } else if (type == "poisson") {
        out = poisson_noise(img, poisson_scale, rng);
    } else if (type == "layer") {
        AttackConfig cfg;
        cfg.per_attack_probability = probability;
        cfg.include_geometric_in_training = geometric;
        auto [attacked, plan] = attack_layer(img, cfg, rng, mode);
        out = attacked;
        if (!plan_path.empty()) write_text_file(plan_path, plan_to_json(plan) + "\n");
    } else {
        throw config_error("unknown attack type '" + type + "'");
    }
    save_png(out, out_path);
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& knockout,
               const std::string& data_root, std::string out, const std::string& baseline_ckpt,
               std::optional<std::uint64_t> seed, std::size_t limit, int argc, char** argv) {
    TrainConfig cfg = load_train_config(config_path);
    if (seed) cfg.seed = *seed;
    if (knockout == "attack_layer")
        cfg.flags.use_attack_layer = false;
    else if (knockout == "freq_loss")
        cfg.flags.use_freq_loss = false;
    else if (knockout == "clean_loss")
        cfg.flags.use_clean_loss = false;
    else if (!knockout.empty())
        throw config_error("knockout must be attack_layer, freq_loss or clean_loss");
    if (out.empty()) out = default_out("ablate");
    write_manifest(out, make_manifest("ablate:" + (knockout.empty() ? "none" : knockout), cfg.seed,
                                      cfg.to_json(), argc, argv));

    DatasetSplit split = load_dataset(data_root, 0, cfg.seed);
    TrainResult result = train(cfg, split, out, report_progress);

    if (!baseline_ckpt.empty()) {
        auto knocked = open_model(result.final_checkpoint);
        auto base = open_model(baseline_ckpt);
        auto paths = eval_paths_for(data_root, limit ? limit : 100, cfg.seed);
        auto pairs = build_eval_pairs(paths, knocked.side, cfg.seed, limit);

        auto summarize_model = [&](Checkpoint& m) {
            FidelityReport fid = evaluate_fidelity(*m.embedder, *m.retriever, pairs);
            AttackConfig acfg;
            SpecificityReport spec =
                evaluate_specificity(*m.embedder, *m.retriever, pairs, acfg, cfg.seed);
            const CutoffRadius d{scale_cutoff(cfg.cutoff_d256, knocked.side)};
            double oob = 0.0;
            for (const auto& p : pairs) oob += out_of_band_energy_fraction(embed(*m.embedder, p.secret), d);
            oob /= static_cast<double>(pairs.size());
            std::ostringstream row;
            row.precision(9);
            row << fid.container.mean_psnr() << ',' << spec.clean.mean_ncc << ','
                << spec.clean.sr << ',' << oob;
            return row.str();
        };
        std::ostringstream csv;
        csv << "model,container_psnr,clean_ncc,clean_sr,oob_energy_fraction\n";
        csv << "knockout_" << (knockout.empty() ? "none" : knockout) << ','
            << summarize_model(knocked.ckpt) << '\n';
        csv << "baseline," << summarize_model(base.ckpt) << '\n';
        write_text_file((fs::path(out) / "ablate_compare.csv").string(), csv.str());
    }
    std::cout << "final checkpoint: " << result.final_checkpoint << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) +
                 " - hide a secret image in the low-frequency band of a cover image"};
    app.require_subcommand(1);

    // gendata
    auto* gen = app.add_subcommand("gendata", "generate a procedural texture dataset");
    std::string gen_out;
    int gen_train = 240, gen_eval = 100, gen_side = 64;
    std::uint64_t gen_seed = 7;
    gen->add_option("--out", gen_out, "output dataset root")->required();
    gen->add_option("--train", gen_train, "train image count");
    gen->add_option("--eval", gen_eval, "eval image count");
    gen->add_option("--side", gen_side, "image side");
    gen->add_option("--seed", gen_seed, "rng seed");

    // train
    auto* tr = app.add_subcommand("train", "train the embedding and retrieval networks");
    std::string tr_config, tr_data, tr_out;
    std::optional<std::uint64_t> tr_seed;
    tr->add_option("--config", tr_config, "train config JSON");
    tr->add_option("--data", tr_data, "dataset root")->required();
    tr->add_option("--out", tr_out, "output directory");
    tr->add_option("--seed", tr_seed, "seed override");

    // embed
    auto* em = app.add_subcommand("embed", "embed a secret into a cover image");
    std::string em_ckpt, em_cover, em_secret, em_out;
    em->add_option("--checkpoint", em_ckpt)->required();
    em->add_option("--cover", em_cover)->required();
    em->add_option("--secret", em_secret)->required();
    em->add_option("--out", em_out, "output directory");

    // extract
    auto* ex = app.add_subcommand("extract", "retrieve the hidden image");
    std::string ex_ckpt, ex_image, ex_ref, ex_out;
    double ex_threshold = 0.95;
    ex->add_option("--checkpoint", ex_ckpt)->required();
    ex->add_option("--image", ex_image)->required();
    ex->add_option("--reference", ex_ref, "secret image for NCC");
    ex->add_option("--ncc-threshold", ex_threshold);
    ex->add_option("--out", ex_out, "output directory");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "run an evaluation protocol over the eval set");
    std::string ev_ckpt, ev_data, ev_protocol, ev_out, ev_format = "csv";
    std::uint64_t ev_seed = 7;
    std::size_t ev_limit = 0;
    double ev_threshold = 0.95;
    EvalAttackParams ev_params;
    ev->add_option("--checkpoint", ev_ckpt)->required();
    ev->add_option("--data", ev_data, "dataset root or eval dir")->required();
    ev->add_option("--protocol", ev_protocol, "fidelity|robustness|specificity")->required();
    ev->add_option("--out", ev_out);
    ev->add_option("--seed", ev_seed);
    ev->add_option("--limit", ev_limit, "max eval pairs (0 = all)");
    ev->add_option("--ncc-threshold", ev_threshold);
    ev->add_option("--jpeg-quality", ev_params.jpeg_quality);
    ev->add_option("--blur-sigma", ev_params.blur_sigma);
    ev->add_option("--blur-kernel", ev_params.blur_kernel);
    ev->add_option("--lowpass-frac", ev_params.lowpass_frac);
    ev->add_option("--jitter-strength", ev_params.jitter.brightness);
    ev->add_option("--crop-scale", ev_params.crop_scale);
    ev->add_option("--format", ev_format, "csv|json");

    // freq-analysis
    auto* fa = app.add_subcommand("freq-analysis", "averaged azimuthal spectrum of a directory");
    std::string fa_dir, fa_compare, fa_out;
    int fa_side = 64;
    fa->add_option("dir", fa_dir, "image directory")->required();
    fa->add_option("--compare", fa_compare, "second directory for comparison");
    fa->add_option("--side", fa_side, "analysis side");
    fa->add_option("--out", fa_out);

    // sweep-filters
    auto* sw = app.add_subcommand("sweep-filters", "NCC/SR table for high/low-pass attacks");
    std::string sw_ckpt, sw_data, sw_out;
    std::vector<double> sw_d;
    std::uint64_t sw_seed = 7;
    std::size_t sw_limit = 0;
    double sw_threshold = 0.95;
    sw->add_option("--checkpoint", sw_ckpt)->required();
    sw->add_option("--data", sw_data)->required();
    sw->add_option("--d", sw_d, "cutoff radii in pixels")->expected(-1);
    sw->add_option("--out", sw_out);
    sw->add_option("--seed", sw_seed);
    sw->add_option("--limit", sw_limit);
    sw->add_option("--ncc-threshold", sw_threshold);

    // residue
    auto* rs = app.add_subcommand("residue", "amplified |a-b| difference image");
    std::string rs_a, rs_b, rs_out;
    double rs_gain = 10.0;
    rs->add_option("a", rs_a)->required();
    rs->add_option("b", rs_b)->required();
    rs->add_option("--out", rs_out, "output PNG")->required();
    rs->add_option("--gain", rs_gain);

    // attack
    auto* at = app.add_subcommand("attack", "apply one attack (or the whole layer) to an image");
    std::string at_type, at_in, at_out, at_mode = "exact", at_plan, at_replay;
    int at_quality = 75, at_kernel = 7;
    double at_d = -1.0, at_sigma = 1.0, at_noise_sigma = 10.0;
    double at_b = 0.2, at_c = 0.2, at_s = 0.2, at_h = 0.1;
    double at_lo = 0.5, at_hi = 1.0, at_poisson = 255.0, at_p = 0.25;
    bool at_geom = false;
    std::uint64_t at_seed = 7;
    at->add_option("--type", at_type,
                   "jpeg|lowpass|highpass|blur|noise|jitter|resize_crop|poisson|layer");
    at->add_option("input", at_in)->required();
    at->add_option("output", at_out)->required();
    at->add_option("--quality", at_quality);
    at->add_option("--d", at_d, "cutoff radius in pixels");
    at->add_option("--sigma", at_sigma, "blur sigma");
    at->add_option("--kernel", at_kernel);
    at->add_option("--noise-sigma", at_noise_sigma, "8-bit noise sigma");
    at->add_option("--brightness", at_b);
    at->add_option("--contrast", at_c);
    at->add_option("--saturation", at_s);
    at->add_option("--hue", at_h);
    at->add_option("--scale-lo", at_lo);
    at->add_option("--scale-hi", at_hi);
    at->add_option("--poisson-scale", at_poisson);
    at->add_option("--p", at_p, "per-attack probability (layer)");
    at->add_flag("--geometric", at_geom, "include jitter and resize-crop in the layer");
    at->add_option("--mode", at_mode, "exact|differentiable");
    at->add_option("--seed", at_seed);
    at->add_option("--plan-out", at_plan, "write the sampled plan JSON (layer)");
    at->add_option("--replay", at_replay, "replay a logged plan JSON");

    // ablate
    auto* ab = app.add_subcommand("ablate", "train with one building block knocked out");
    std::string ab_config, ab_knockout, ab_data, ab_out, ab_baseline;
    std::optional<std::uint64_t> ab_seed;
    std::size_t ab_limit = 0;
    ab->add_option("--config", ab_config);
    ab->add_option("--knockout", ab_knockout, "attack_layer|freq_loss|clean_loss");
    ab->add_option("--data", ab_data)->required();
    ab->add_option("--out", ab_out);
    ab->add_option("--baseline", ab_baseline, "checkpoint of the full model for comparison");
    ab->add_option("--seed", ab_seed);
    ab->add_option("--limit", ab_limit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (gen->parsed())
            return cmd_gendata(gen_out, gen_train, gen_eval, gen_side, gen_seed, argc, argv);
        if (tr->parsed()) return cmd_train(tr_config, tr_data, tr_out, tr_seed, argc, argv);
        if (em->parsed()) return cmd_embed(em_ckpt, em_cover, em_secret, em_out, argc, argv);
        if (ex->parsed())
            return cmd_extract(ex_ckpt, ex_image, ex_ref, ex_threshold, ex_out, argc, argv);
        if (ev->parsed())
            return cmd_evaluate(ev_ckpt, ev_data, ev_protocol, ev_out, ev_seed, ev_limit,
                                ev_threshold, ev_params, ev_format, argc, argv);
        if (fa->parsed()) return cmd_freq_analysis(fa_dir, fa_compare, fa_out, fa_side, argc, argv);
        if (sw->parsed())
            return cmd_sweep_filters(sw_ckpt, sw_data, sw_d, sw_out, sw_seed, sw_limit,
                                     sw_threshold, argc, argv);
        if (rs->parsed()) return cmd_residue(rs_a, rs_b, rs_out, rs_gain);
        if (at->parsed())
            return cmd_attack(at_type, at_in, at_out, at_quality, at_d, at_sigma, at_kernel,
                              at_noise_sigma, at_b, at_c, at_s, at_h, at_lo, at_hi, at_poisson,
                              at_p, at_geom, at_mode, at_seed, at_plan, at_replay);
        if (ab->parsed())
            return cmd_ablate(ab_config, ab_knockout, ab_data, ab_out, ab_baseline, ab_seed,
                              ab_limit, argc, argv);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const io_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const contract_error& e) {
        std::cerr << "contract error: " << e.what() << "\n";
        return kExitContract;
    }
    return 0;
}
