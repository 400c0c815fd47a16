// Acceptance suite: one pass/fail line per criterion.
//
//   1  spectral correctness          6  end-to-end desk training
//   2  focal frequency loss          7  frequency alignment
//   3  metric oracles                8  high/low-pass sweep
//   4  attack fidelity               9  ablation directions (--ablations)
//   5  model differentiability      10  determinism
//
// Usage: acceptance [--only 1,2] [--skip 6] [--ablations] [--work DIR]

#include <chrono>
#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "lfs/attacks.hpp"
#include "lfs/dataset.hpp"
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

fs::path g_work = "acceptance_work";
bool g_run_ablations = false;

struct CheckList {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << "    failed: " << what << "\n";
        }
    }
    template <typename T>
    void expect_le(T value, T bound, const std::string& what) {
        std::ostringstream os;
        os << what << " (" << value << " <= " << bound << ")";
        expect(value <= bound, os.str());
    }
    template <typename T>
    void expect_ge(T value, T bound, const std::string& what) {
        std::ostringstream os;
        os << what << " (" << value << " >= " << bound << ")";
        expect(value >= bound, os.str());
    }
};

Image random_image(int side, SeededRng& rng, double lo = 0.0, double hi = 1.0) {
    Image img(side, side);
    for (double& v : img.data) v = rng.uniform(lo, hi);
    return img;
}

FeatureMap random_map(int side, SeededRng& rng, double amp) {
    FeatureMap fm(side, side);
    for (double& v : fm.data) v = rng.uniform(-amp, amp);
    return fm;
}

// ---- criterion 1: spectral correctness ----

bool criterion1(CheckList& c) {
    SeededRng rng(101);
    const int side = 64;
    const Image img = random_image(side, rng);
    const double rmax = spectrum_r_max(side, side);

    const Image allpass = low_pass(img, CutoffRadius{rmax});
    double max_diff = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i)
        max_diff = std::max(max_diff, std::abs(allpass.data[i] - img.data[i]));
    c.expect_le(max_diff, 1e-6, "low_pass identity at d >= r_max");

    const Image dc = low_pass(img, CutoffRadius{0.0});
    double dc_err = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
        double mean = 0.0;
        for (std::size_t i = 0; i < img.pixels_per_channel(); ++i) mean += img.plane(ch)[i];
        mean /= static_cast<double>(img.pixels_per_channel());
        for (std::size_t i = 0; i < img.pixels_per_channel(); ++i)
            dc_err = std::max(dc_err, std::abs(dc.plane(ch)[i] - mean));
    }
    c.expect_le(dc_err, 1e-5, "DC-only at d = 0");

    FeatureMap fm(side, side);
    for (std::size_t i = 0; i < fm.size(); ++i) fm.data[i] = img.data[i] - 0.5;
    double part_err = 0.0;
    for (double d : {0.0, 7.3, 20.0, rmax}) {
        const FeatureMap lo = low_pass(fm, CutoffRadius{d});
        const FeatureMap hi = high_pass(fm, CutoffRadius{d});
        for (std::size_t i = 0; i < fm.size(); ++i)
            part_err = std::max(part_err, std::abs(lo.data[i] + hi.data[i] - fm.data[i]));
    }
    c.expect_le(part_err, 1e-6, "low+high partition reconstructs the input");

    double pix_energy = 0.0;
    for (double v : img.data) pix_energy += v * v;
    double spec_energy = 0.0;
    for (const auto& s : dft2(img))
        for (const auto& z : s.bins) spec_energy += std::norm(z);
    spec_energy /= static_cast<double>(side) * side;
    c.expect_le(std::abs(pix_energy - spec_energy) / pix_energy, 1e-6, "Parseval");

    const RadialSpectrum rs = azimuthal_integral(img);
    double radial_total = 0.0;
    for (double v : rs.values) radial_total += v;
    const double spec_total = spec_energy * side * side;
    c.expect_le(std::abs(radial_total - spec_total) / spec_total, 1e-6,
                "radial energy accounting");
    return c.ok;
}

// ---- criterion 2: focal frequency loss ----

bool criterion2(CheckList& c) {
    SeededRng rng(202);
    const FeatureMap same = random_map(8, rng, 0.4);
    c.expect(focal_frequency_loss(same, same) == 0.0, "zero loss on equal spectra");

    const int side = 8;
    const FeatureMap q = random_map(side, rng, 0.4);
    const FeatureMap target = random_map(side, rng, 0.4);
    FeatureMap grad;
    focal_frequency_loss(q, target, &grad);

    // independent naive-DFT oracle with the weight held at its base value
    // (the weight enters the loss as a detached constant)
    const std::size_t item = q.pixels_per_channel();
    std::vector<double> w(3 * item);
    {
        std::vector<std::complex<double>> diff(3 * item);
        double max_amp = 0.0;
        for (int ch = 0; ch < 3; ++ch)
            for (int v = 0; v < side; ++v)
                for (int u = 0; u < side; ++u) {
                    std::complex<double> acc(0, 0);
                    for (int y = 0; y < side; ++y)
                        for (int x = 0; x < side; ++x) {
                            const double ang = -2.0 * M_PI * (u * x + v * y) / side;
                            acc += (q.plane(ch)[y * side + x] - target.plane(ch)[y * side + x]) *
                                   std::complex<double>(std::cos(ang), std::sin(ang));
                        }
                    diff[ch * item + v * side + u] = acc;
                    max_amp = std::max(max_amp, std::abs(acc));
                }
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::abs(diff[i]) / max_amp;
    }
    auto loss_at = [&](const FeatureMap& x) {
        double acc = 0.0;
        for (int ch = 0; ch < 3; ++ch)
            for (int v = 0; v < side; ++v)
                for (int u = 0; u < side; ++u) {
                    std::complex<double> f(0, 0);
                    for (int y = 0; y < side; ++y)
                        for (int xx = 0; xx < side; ++xx) {
                            const double ang = -2.0 * M_PI * (u * xx + v * y) / side;
                            f += (x.plane(ch)[y * side + xx] -
                                  target.plane(ch)[y * side + xx]) *
                                 std::complex<double>(std::cos(ang), std::sin(ang));
                        }
                    acc += w[ch * item + v * side + u] * std::norm(f);
                }
        return acc / (side * side) / 3.0;
    };

    // full-vector central differences; the loss is quadratic in q with
    // the weight fixed, so truncation vanishes and only roundoff remains
    double err2 = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double h = 1e-6;
        FeatureMap plus = q, minus = q;
        plus.data[i] += h;
        minus.data[i] -= h;
        const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
        err2 += (fd - grad.data[i]) * (fd - grad.data[i]);
        norm2 += fd * fd;
    }
    c.expect_le(std::sqrt(err2 / norm2), 1e-6, "gradient vs central finite differences");
    c.detail << "    relative_error=" << std::sqrt(err2 / norm2) << "\n";
    return c.ok;
}

// ---- criterion 3: metric oracles ----

bool criterion3(CheckList& c) {
    Image black(16, 16, 0.0), white(16, 16, 1.0);
    c.expect(psnr(black, white, PixelScale::eight_bit) == 0.0, "PSNR exactly 0 dB at max diff");

    Image a(16, 16, 100.0 / 255.0), b(16, 16, 101.0 / 255.0);
    c.expect_le(std::abs(psnr(a, b, PixelScale::eight_bit) - 48.1308), 1e-3,
                "PSNR 48.1308 dB for one-step diff");

    const double c1 = 1e-4;
    Image x25(16, 16, 0.25), x75(16, 16, 0.75);
    const double want = (2.0 * 0.25 * 0.75 + c1) / (0.25 * 0.25 + 0.75 * 0.75 + c1);
    c.expect_le(std::abs(ssim(x25, x75) - want), 1e-6, "SSIM constant-image closed form");
    Image zero(16, 16, 0.0), one(16, 16, 1.0);
    c.expect_le(std::abs(ssim(zero, one) - c1 / (1.0 + c1)), 1e-6,
                "SSIM opposite-constant closed form");

    SeededRng rng(303);
    Image s(16, 16);
    for (double& v : s.data) v = rng.uniform(0.0, 0.5);
    Image s2 = s;
    for (double& v : s2.data) v *= 2.0;
    c.expect(ncc(s, s) == 1.0, "NCC identity exact");
    c.expect_le(std::abs(ncc(s, s2) - 1.0), 1e-12, "NCC scale invariance");
    Image left(16, 16, 0.0), right(16, 16, 0.0);
    for (int ch = 0; ch < 3; ++ch)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 8; ++x) {
                left.at(ch, y, x) = 0.5;
                right.at(ch, y, x + 8) = 0.5;
            }
    c.expect(ncc(left, right) == 0.0, "NCC orthogonality exact");

    c.expect(success_rate({0.96, 0.94}) == 0.5, "SR threshold arithmetic");
    c.expect(success_rate({0.95}) == 0.0, "SR strict inequality");

    // scalar-loop oracles on 100 random pairs
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Image u = random_image(16, rng), v = random_image(16, rng);
        double se = 0.0, dot = 0.0, nu = 0.0, nv = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            se += (u.data[i] - v.data[i]) * (u.data[i] - v.data[i]);
            dot += u.data[i] * v.data[i];
            nu += u.data[i] * u.data[i];
            nv += v.data[i] * v.data[i];
        }
        worst = std::max(worst, std::abs(psnr(u, v) - (-10.0 * std::log10(se / u.size()))));
        worst = std::max(worst, std::abs(ncc(u, v) - dot / std::sqrt(nu * nv)));
        double ssim_oracle = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
            const double* pu = u.plane(ch);
            const double* pv = v.plane(ch);
            const std::size_t n = u.pixels_per_channel();
            double mu = 0, mv = 0;
            for (std::size_t i = 0; i < n; ++i) {
                mu += pu[i];
                mv += pv[i];
            }
            mu /= n;
            mv /= n;
            double vu = 0, vv = 0, cov = 0;
            for (std::size_t i = 0; i < n; ++i) {
                vu += (pu[i] - mu) * (pu[i] - mu);
                vv += (pv[i] - mv) * (pv[i] - mv);
                cov += (pu[i] - mu) * (pv[i] - mv);
            }
            vu /= n;
            vv /= n;
            cov /= n;
            ssim_oracle += ((2 * mu * mv + 1e-4) * (2 * cov + 9e-4)) /
                           ((mu * mu + mv * mv + 1e-4) * (vu + vv + 9e-4));
        }
        worst = std::max(worst, std::abs(ssim(u, v) - ssim_oracle / 3.0));
    }
    c.expect_le(worst, 1e-9, "metric agreement with scalar-loop oracles");
    return c.ok;
}

// ---- criterion 4: attack fidelity ----

bool criterion4(CheckList& c) {
    SeededRng rng(404);
    double acc = 0.0;
    for (int i = 0; i < 10; ++i) {
        const Image img = synth_texture(64, rng);
        const Image exact = jpeg_attack(img, 75, AttackMode::exact);
        const Image diff = jpeg_attack(img, 75, AttackMode::differentiable);
        double mad = 0.0;
        for (std::size_t k = 0; k < img.size(); ++k)
            mad += std::abs(exact.data[k] - diff.data[k]);
        acc += mad / img.size();
    }
    const double mean_mad = acc / 10.0;
    c.expect_le(mean_mad, 3.0 / 255.0, "differentiable vs exact JPEG at quality 75");
    c.detail << "    jpeg_mean_abs_diff=" << mean_mad * 255.0 << "/255\n";

    AttackConfig cfg; // 4-attack pool, p = 0.25
    int none = 0;
    SeededRng draw(405);
    for (int t = 0; t < 10000; ++t)
        if (!sample_attack_plan(cfg, 64, 64, draw).any_active()) ++none;
    const double freq = none / 10000.0;
    c.expect_le(std::abs(freq - 0.3164), 0.02, "no-attack frequency over 10k draws");
    c.detail << "    no_attack_frequency=" << freq << "\n";

    AttackConfig full;
    full.per_attack_probability = 0.9;
    full.include_geometric_in_training = true;
    const Image img = synth_texture(64, rng);
    SeededRng arng(406);
    auto [attacked, plan] = attack_layer(img, full, arng, AttackMode::exact);
    const AttackPlan reloaded = plan_from_json(plan_to_json(plan));
    const Image replay = apply_attack_plan(img, reloaded, AttackMode::exact);
    bool bitexact = attacked.size() == replay.size();
    for (std::size_t i = 0; bitexact && i < attacked.size(); ++i)
        bitexact = attacked.data[i] == replay.data[i];
    c.expect(bitexact, "attack plan replay is bit-exact");
    return c.ok;
}

// ---- criterion 5: model differentiability ----

bool criterion5(CheckList& c) {
    const int side = 8;
    TrainConfig cfg;
    cfg.side = side;
    cfg.embedder.side = side;
    cfg.embedder.base_channels = 4;
    cfg.embedder.max_channels = 8;
    cfg.retriever.side = side;
    cfg.retriever.base_channels = 4;
    cfg.retriever.residual_blocks = 1;

    SeededRng init(505);
    Embedder emb(cfg.embedder, init);
    Retriever ret(cfg.retriever, init);
    const CutoffRadius d{cfg.effective_cutoff()};

    SeededRng data(506);
    nn::Tensor C(2, 3, side, side), S(2, 3, side, side);
    for (double& v : C.v) v = data.uniform(0.15, 0.85);
    for (double& v : S.v) v = data.uniform(0.15, 0.85);
    const double numel = static_cast<double>(C.size());
    const std::size_t item = C.item_size();

    // frozen frequency target and weight (both detached in the objective)
    std::vector<FeatureMap> targets(2);
    std::vector<std::vector<double>> wfix(2);
    {
        nn::Tensor q0 = emb.forward(S, true);
        for (int i = 0; i < 2; ++i) {
            FeatureMap fq(side, side);
            std::copy(q0.item(i), q0.item(i) + item, fq.data.begin());
            targets[i] = low_pass(fq, d);
            std::vector<double> amps(item);
            double max_amp = 0.0;
            for (int ch = 0; ch < 3; ++ch) {
                std::vector<double> diffp(static_cast<std::size_t>(side) * side);
                for (std::size_t k = 0; k < diffp.size(); ++k)
                    diffp[k] = fq.plane(ch)[k] - targets[i].plane(ch)[k];
                const Spectrum sp = dft2_plane(diffp.data(), side, side);
                for (std::size_t k = 0; k < diffp.size(); ++k) {
                    amps[ch * diffp.size() + k] = std::abs(sp.bins[k]);
                    max_amp = std::max(max_amp, amps[ch * diffp.size() + k]);
                }
            }
            wfix[i].assign(item, 0.0);
            for (std::size_t k = 0; k < item; ++k)
                wfix[i][k] = max_amp > 0 ? amps[k] / max_amp : 0.0;
        }
    }
    auto loss_value = [&]() {
        nn::Tensor null_hat = ret.forward(C, true);
        double l_cln = 0.0;
        for (double v : null_hat.v) l_cln += v * v;
        l_cln /= numel;

        nn::Tensor q = emb.forward(S, true);
        double l_freq = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int ch = 0; ch < 3; ++ch) {
                std::vector<double> diffp(static_cast<std::size_t>(side) * side);
                for (std::size_t k = 0; k < diffp.size(); ++k)
                    diffp[k] = q.item(i)[ch * diffp.size() + k] - targets[i].plane(ch)[k];
                const Spectrum sp = dft2_plane(diffp.data(), side, side);
                for (std::size_t k = 0; k < diffp.size(); ++k)
                    l_freq += wfix[i][ch * diffp.size() + k] * std::norm(sp.bins[k]);
            }
        l_freq = l_freq / (side * side) / 3.0 / 2.0;

        nn::Tensor Cp(2, 3, side, side);
        for (std::size_t i = 0; i < Cp.size(); ++i)
            Cp.v[i] = std::clamp(C.v[i] + q.v[i], 0.0, 1.0);
        double l_emb = 0.0;
        for (std::size_t i = 0; i < Cp.size(); ++i)
            l_emb += (Cp.v[i] - C.v[i]) * (Cp.v[i] - C.v[i]);
        l_emb /= numel;

        nn::Tensor Sp = ret.forward(Cp, true);
        double l_ret = 0.0;
        for (std::size_t i = 0; i < Sp.size(); ++i)
            l_ret += (Sp.v[i] - S.v[i]) * (Sp.v[i] - S.v[i]);
        l_ret /= numel;
        return l_emb + l_freq + l_ret + l_cln;
    };

    for (auto* p : emb.params()) p->grad.zero();
    for (auto* p : ret.params()) p->grad.zero();
    {
        nn::Tensor null_hat = ret.forward(C, true);
        nn::Tensor g(2, 3, side, side);
        for (std::size_t i = 0; i < g.size(); ++i) g.v[i] = 2.0 * null_hat.v[i] / numel;
        ret.backward(g);

        nn::Tensor q = emb.forward(S, true);
        nn::Tensor dq_freq(2, 3, side, side);
        for (int i = 0; i < 2; ++i) {
            FeatureMap fq(side, side);
            std::copy(q.item(i), q.item(i) + item, fq.data.begin());
            FeatureMap grad;
            focal_frequency_loss(fq, targets[i], &grad);
            std::copy(grad.data.begin(), grad.data.end(), dq_freq.item(i));
        }
        nn::Tensor Cp(2, 3, side, side);
        std::vector<std::uint8_t> pass(Cp.size());
        for (std::size_t i = 0; i < Cp.size(); ++i) {
            const double v = C.v[i] + q.v[i];
            pass[i] = (v >= 0.0 && v <= 1.0) ? 1 : 0;
            Cp.v[i] = std::clamp(v, 0.0, 1.0);
        }
        nn::Tensor Sp = ret.forward(Cp, true);
        nn::Tensor gret(2, 3, side, side);
        for (std::size_t i = 0; i < gret.size(); ++i)
            gret.v[i] = 2.0 * (Sp.v[i] - S.v[i]) / numel;
        nn::Tensor dCp = ret.backward(gret);
        for (std::size_t i = 0; i < dCp.size(); ++i)
            dCp.v[i] += 2.0 * (Cp.v[i] - C.v[i]) / numel;
        nn::Tensor dq(2, 3, side, side);
        for (std::size_t i = 0; i < dq.size(); ++i)
            dq.v[i] = (pass[i] ? dCp.v[i] : 0.0) + dq_freq.v[i] / 2.0;
        emb.backward(dq);
    }

    std::vector<nn::Param*> all;
    for (auto* p : emb.params()) all.push_back(p);
    for (auto* p : ret.params()) all.push_back(p);
    SeededRng pick(507);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        auto* p = all[pick.uniform_int(all.size())];
        const std::size_t i = pick.uniform_int(p->value.size());
        const double h = 1e-5 * std::max(1.0, std::abs(p->value.v[i]));
        const double saved = p->value.v[i];
        p->value.v[i] = saved + h;
        const double fp = loss_value();
        p->value.v[i] = saved - h;
        const double fm = loss_value();
        p->value.v[i] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double an = p->grad.v[i];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-7});
        worst = std::max(worst, std::abs(fd - an) / denom);
    }
    c.expect_le(worst, 1e-3, "end-to-end gradient vs finite differences");
    c.detail << "    worst_relative_error=" << worst << "\n";

    // checkpoint round trip: bit-exact forward
    const fs::path ckpt_path = g_work / "crit5.ckpt";
    fs::create_directories(g_work);
    save_checkpoint(ckpt_path.string(), emb, ret);
    Checkpoint back = load_checkpoint(ckpt_path.string());
    nn::Tensor probe(1, 3, side, side);
    SeededRng prng(508);
    for (double& v : probe.v) v = prng.uniform();
    const nn::Tensor q_a = emb.forward(probe, false);
    const nn::Tensor q_b = back.embedder->forward(probe, false);
    const nn::Tensor r_a = ret.forward(probe, false);
    const nn::Tensor r_b = back.retriever->forward(probe, false);
    bool exact = true;
    for (std::size_t i = 0; i < q_a.size(); ++i) exact &= q_a.v[i] == q_b.v[i];
    for (std::size_t i = 0; i < r_a.size(); ++i) exact &= r_a.v[i] == r_b.v[i];
    c.expect(exact, "checkpoint reload reproduces forward passes bit-exactly");
    return c.ok;
}

// ---- desk-scale trained state shared by criteria 6-10 ----

struct DeskRun {
    TrainConfig cfg;
    std::string run_dir;
    Checkpoint model;
    std::vector<EvalPair> pairs;
    FidelityReport fidelity;
    std::vector<AttackOutcome> robustness;
    SpecificityReport specificity;
    std::string freq_csv;
    std::string sweep_csv_text;
    RadialSpectrum covers_spectrum, containers_spectrum;
    std::vector<SweepRow> sweep_rows;
};

TrainConfig desk_config() {
    TrainConfig cfg; // desk-scale defaults: side 64, batch 8, 100x10 steps
    cfg.seed = 7;
    cfg.retriever.residual_blocks = 5;
    return cfg;
}

std::vector<double> sweep_d_values(int side) {
    const double rmax = spectrum_r_max(side, side);
    return {1.0, 5.0, scale_cutoff(50.0, side), 20.0, 0.625 * rmax, 0.75 * rmax, rmax};
}

DeskRun run_desk(const std::string& tag) {
    DeskRun out;
    out.cfg = desk_config();
    const fs::path data_dir = g_work / "data";
    if (!fs::exists(data_dir / "train"))
        generate_dataset(data_dir.string(), 240, 100, out.cfg.side, 11);
    const DatasetSplit split = load_dataset(data_dir.string(), 0, out.cfg.seed);

    out.run_dir = (g_work / tag).string();
    const fs::path ckpt = fs::path(out.run_dir) / "final.ckpt";
    if (!fs::exists(ckpt)) {
        const auto t0 = std::chrono::steady_clock::now();
        train(out.cfg, split, out.run_dir, [&](const TrainLogRecord& rec) {
            if (rec.step == out.cfg.steps_per_epoch) {
                const double dt =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::cerr << "  [" << tag << "] epoch " << rec.epoch << " total " << rec.total
                          << " (emb " << rec.l_emb << " freq " << rec.l_freq << " ret "
                          << rec.l_ret << " cln " << rec.l_cln << ") " << dt << "s\n";
            }
        });
    }
    out.model = load_checkpoint(ckpt.string());
    out.pairs = build_eval_pairs(split.eval, out.cfg.side, out.cfg.seed);

    Embedder& E = *out.model.embedder;
    Retriever& R = *out.model.retriever;
    out.fidelity = evaluate_fidelity(E, R, out.pairs);
    out.robustness = evaluate_robustness(E, R, out.pairs, EvalAttackParams{}, out.cfg.seed);
    AttackConfig damaged_cfg;
    damaged_cfg.include_geometric_in_training = true;
    out.specificity = evaluate_specificity(E, R, out.pairs, damaged_cfg, out.cfg.seed);

    std::vector<Image> covers, containers;
    for (const auto& p : out.pairs) {
        covers.push_back(p.cover);
        containers.push_back(make_container(p.cover, embed(E, p.secret)));
    }
    out.covers_spectrum = average_azimuthal(covers);
    out.containers_spectrum = average_azimuthal(containers);
    out.freq_csv = radial_csv(out.covers_spectrum, &out.containers_spectrum);

    out.sweep_rows = sweep_filters(E, R, out.pairs, sweep_d_values(out.cfg.side));
    out.sweep_csv_text = sweep_csv(out.sweep_rows);

    // persist every report for inspection and the determinism comparison
    write_text_file(out.run_dir + "/fidelity_container.csv", out.fidelity.container.to_csv());
    write_text_file(out.run_dir + "/fidelity_recovered.csv", out.fidelity.recovered.to_csv());
    write_text_file(out.run_dir + "/robustness.csv", attack_outcomes_csv(out.robustness));
    write_text_file(out.run_dir + "/specificity.csv",
                    attack_outcomes_csv({out.specificity.clean, out.specificity.damaged_clean}));
    write_text_file(out.run_dir + "/freq_alignment.csv", out.freq_csv);
    write_text_file(out.run_dir + "/sweep.csv", out.sweep_csv_text);
    return out;
}

std::optional<DeskRun>& primary_run() {
    static std::optional<DeskRun> run;
    return run;
}

DeskRun& ensure_primary() {
    if (!primary_run()) primary_run() = run_desk("desk_run1");
    return *primary_run();
}

// ---- criterion 6: end-to-end desk training ----

bool criterion6(CheckList& c) {
    DeskRun& run = ensure_primary();

    const double container_psnr = run.fidelity.container.mean_psnr();
    c.expect_ge(container_psnr, 30.0, "(a) container PSNR over the eval set");

    const double clean_sr = run.fidelity.recovered.sr();
    c.expect_ge(clean_sr, 0.8, "(b) clean-container retrieval SR");

    c.expect(run.specificity.clean.sr == 0.0, "(c) SR on clean inputs is zero");
    c.expect(run.specificity.damaged_clean.sr == 0.0, "(c) SR on damaged-clean inputs is zero");
    c.expect_le(run.specificity.clean.mean_ncc, 0.6, "(c) mean NCC(secret, R(clean))");

    double sr_blur = 0.0, sr_crop = 0.0;
    for (const auto& r : run.robustness) {
        if (r.attack == "blur") sr_blur = r.sr;
        if (r.attack == "resize_crop") sr_crop = r.sr;
    }
    c.expect_ge(sr_blur, sr_crop, "(d) SR(blur) >= SR(resize-crop)");

    c.detail << "    container_psnr=" << container_psnr << " recovered_sr=" << clean_sr
             << " clean_ncc=" << run.specificity.clean.mean_ncc
             << " damaged_ncc=" << run.specificity.damaged_clean.mean_ncc
             << " sr_blur=" << sr_blur << " sr_crop=" << sr_crop << "\n";
    return c.ok;
}

// ---- criterion 7: frequency alignment ----

bool criterion7(CheckList& c) {
    DeskRun& run = ensure_primary();
    const auto& cov = run.covers_spectrum.values;
    const auto& ctn = run.containers_spectrum.values;
    const std::size_t k = cov.size();
    const std::size_t lo = (3 * (k - 1)) / 4; // top-quartile radial band
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = lo; i < k; ++i) {
        if (cov[i] <= 0.0) continue;
        acc += std::abs(ctn[i] - cov[i]) / cov[i];
        ++n;
    }
    const double mean_rel = n ? acc / n : 1.0;
    c.expect_le(mean_rel, 0.10, "container spectrum deviation in the top-quartile band");
    c.detail << "    mean_relative_deviation=" << mean_rel << " over bins [" << lo << ","
             << k - 1 << "]\n";
    return c.ok;
}

// ---- criterion 8: high/low-pass sweep ----

bool criterion8(CheckList& c) {
    DeskRun& run = ensure_primary();
    const double rmax = spectrum_r_max(run.cfg.side, run.cfg.side);
    for (const auto& row : run.sweep_rows) {
        if (row.filter == "lowpass" && row.d >= 0.625 * rmax - 1e-9)
            c.expect_ge(row.sr, 0.7, "low-pass SR at d = " + std::to_string(row.d));
        if (row.filter == "highpass")
            c.expect_le(row.sr, 0.1, "high-pass SR at d = " + std::to_string(row.d));
    }
    c.detail << "    " << std::string(run.sweep_csv_text).substr(0, 0);
    return c.ok;
}

// ---- criterion 9: ablation directions (optional) ----

bool criterion9(CheckList& c) {
    DeskRun& full = ensure_primary();
    const fs::path data_dir = g_work / "data";
    const DatasetSplit split = load_dataset(data_dir.string(), 0, full.cfg.seed);

    TrainConfig no_clean = desk_config();
    no_clean.flags.use_clean_loss = false;
    const std::string dir_nc = (g_work / "desk_no_clean").string();
    if (!fs::exists(fs::path(dir_nc) / "final.ckpt")) train(no_clean, split, dir_nc);
    Checkpoint m_nc = load_checkpoint((fs::path(dir_nc) / "final.ckpt").string());
    AttackConfig acfg;
    const SpecificityReport spec_nc =
        evaluate_specificity(*m_nc.embedder, *m_nc.retriever, full.pairs, acfg, full.cfg.seed);
    c.expect_ge(spec_nc.clean.mean_ncc, full.specificity.clean.mean_ncc + 0.2,
                "clean NCC rises without the clean loss");
    c.detail << "    clean_ncc full=" << full.specificity.clean.mean_ncc
             << " no_clean=" << spec_nc.clean.mean_ncc << "\n";

    TrainConfig no_freq = desk_config();
    no_freq.flags.use_freq_loss = false;
    const std::string dir_nf = (g_work / "desk_no_freq").string();
    if (!fs::exists(fs::path(dir_nf) / "final.ckpt")) train(no_freq, split, dir_nf);
    Checkpoint m_nf = load_checkpoint((fs::path(dir_nf) / "final.ckpt").string());

    const CutoffRadius d{full.cfg.effective_cutoff()};
    auto mean_oob = [&](Embedder& e) {
        double acc = 0.0;
        for (const auto& p : full.pairs) acc += out_of_band_energy_fraction(embed(e, p.secret), d);
        return acc / full.pairs.size();
    };
    const double oob_full = mean_oob(*full.model.embedder);
    const double oob_nf = mean_oob(*m_nf.embedder);
    c.expect_ge(oob_nf, 2.0 * oob_full, "out-of-band energy doubles without the frequency loss");
    c.detail << "    oob full=" << oob_full << " no_freq=" << oob_nf << "\n";
    return c.ok;
}

// ---- criterion 10: determinism ----

bool criterion10(CheckList& c) {
    DeskRun& run1 = ensure_primary();
    DeskRun run2 = run_desk("desk_run2");

    c.expect(run1.fidelity.container.to_csv() == run2.fidelity.container.to_csv(),
             "fidelity container report identical");
    c.expect(run1.fidelity.recovered.to_csv() == run2.fidelity.recovered.to_csv(),
             "fidelity recovered report identical");
    c.expect(attack_outcomes_csv(run1.robustness) == attack_outcomes_csv(run2.robustness),
             "robustness report identical");
    c.expect(attack_outcomes_csv({run1.specificity.clean, run1.specificity.damaged_clean}) ==
                 attack_outcomes_csv({run2.specificity.clean, run2.specificity.damaged_clean}),
             "specificity report identical");
    c.expect(run1.freq_csv == run2.freq_csv, "frequency alignment report identical");
    c.expect(run1.sweep_csv_text == run2.sweep_csv_text, "sweep report identical");
    return c.ok;
}

struct Criterion {
    int id;
    const char* name;
    bool (*fn)(CheckList&);
};

const Criterion kCriteria[] = {
    {1, "spectral correctness", criterion1},
    {2, "focal frequency loss", criterion2},
    {3, "metric oracles", criterion3},
    {4, "attack fidelity", criterion4},
    {5, "model differentiability", criterion5},
    {6, "end-to-end desk training", criterion6},
    {7, "frequency alignment", criterion7},
    {8, "high/low-pass sweep", criterion8},
    {9, "ablation directions", criterion9},
    {10, "determinism", criterion10},
};

std::set<int> parse_ids(const std::string& csv) {
    std::set<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.insert(std::stoi(tok));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only, skip;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = parse_ids(argv[++i]);
        } else if (arg == "--skip" && i + 1 < argc) {
            skip = parse_ids(argv[++i]);
        } else if (arg == "--ablations") {
            g_run_ablations = true;
        } else if (arg == "--work" && i + 1 < argc) {
            g_work = argv[++i];
        } else {
            std::cerr << "usage: acceptance [--only a,b] [--skip a,b] [--ablations] [--work DIR]\n";
            return 2;
        }
    }
    fs::create_directories(g_work);

    bool all_ok = true;
    for (const auto& crit : kCriteria) {
        if (!only.empty() && !only.count(crit.id)) continue;
        if (skip.count(crit.id)) continue;
        if (crit.id == 9 && !g_run_ablations) {
            std::cout << "[SKIP] criterion 9: ablation directions (enable with --ablations)\n";
            continue;
        }
        CheckList checks;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = crit.fn(checks);
        } catch (const std::exception& e) {
            checks.ok = false;
            checks.detail << "    exception: " << e.what() << "\n";
        }
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (ok && checks.ok ? "[PASS]" : "[FAIL]") << " criterion " << crit.id << ": "
                  << crit.name << " (" << dt << "s)\n"
                  << checks.detail.str();
        std::cout.flush();
        all_ok &= ok && checks.ok;
    }
    return all_ok ? 0 : 1;
}
