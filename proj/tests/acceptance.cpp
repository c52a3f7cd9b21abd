// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "audit/attack.hpp"
#include "audit/corpus.hpp"
#include "audit/embed.hpp"
#include "audit/fingerprint.hpp"
#include "audit/image_io.hpp"
#include "audit/learn.hpp"
#include "audit/rng.hpp"
#include "audit/spectrum.hpp"
#include "cli_harness.hpp"
#include "embed_oracle.hpp"
#include "learn_oracle.hpp"
#include "spectral_oracle.hpp"
#include "test_util.hpp"

using namespace audit;
namespace fs = std::filesystem;
using testutil::run_audit;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p)); }

void require_ok(const testutil::CliResult& r, const std::string& what) {
    if (r.code != 0) throw std::runtime_error(what + " exited " + std::to_string(r.code) + ": " + r.err);
}

// Directories produced by CLI runs, replayed by the reproducibility check.
std::vector<fs::path> g_cli_runs;

testutil::CliResult cli(const std::vector<std::string>& args, const fs::path& out_dir, const std::string& what) {
    // args: optional "--seed N" pair first, then the command
    std::vector<std::string> full;
    std::size_t start = 0;
    if (args.size() >= 2 && args[0] == "--seed") {
        full = {args[0], args[1]};
        start = 2;
    }
    full.push_back("--out-dir");
    full.push_back(out_dir.string());
    full.insert(full.end(), args.begin() + static_cast<long>(start), args.end());
    auto r = run_audit(full);
    require_ok(r, what);
    g_cli_runs.push_back(out_dir);
    return r;
}

// 1 -------------------------------------------------------------------------
Outcome dft_oracle() {
    Rng rng(1);
    double worst = 0.0;
    for (int h = 1; h <= 16; ++h) {
        for (int w = 1; w <= 16; ++w) {
            RealGrid g{w, h, std::vector<double>(static_cast<std::size_t>(w) * h)};
            for (double& v : g.values) v = rng.uniform(-1.0, 1.0);
            worst = std::max(worst, testutil::relative_error(dft2(g).values, testutil::naive_dft2(g.values, w, h)));
        }
    }
    double parseval = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        RealGrid g{224, 224, std::vector<double>(224 * 224)};
        for (double& v : g.values) v = rng.uniform();
        double space = 0.0;
        for (double v : g.values) space += v * v;
        double freq = 0.0;
        for (const auto& c : dft2(g).values) freq += std::norm(c);
        freq /= 224.0 * 224.0;
        parseval = std::max(parseval, std::abs(freq - space) / space);
    }
    return {worst < 1e-9 && parseval < 1e-9,
            "max rel err 1..16 = " + fmt("%.2e", worst) + ", Parseval 224x224 = " + fmt("%.2e", parseval)};
}

// 2 -------------------------------------------------------------------------
Outcome gradient_suite() {
    double param = 0.0;
    double input = 0.0;
    double tsne = 0.0;
    int instances = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto batch = testutil::random_batch(8, 6, seed);
        const auto mlp = testutil::random_model(Mlp{8, 4}, seed + 1000);
        param = std::max(param, testutil::max_param_gradient_error(mlp, batch));
        param = std::max(param, testutil::max_param_gradient_error(testutil::random_model(Logistic{8}, seed), batch));
        input = std::max(input, testutil::max_input_gradient_error(mlp, batch[0].features, batch[0].label));

        Rng rng(seed + 2000);
        std::vector<std::vector<double>> pts(12, std::vector<double>(3));
        for (auto& p : pts) for (double& v : p) v = rng.normal();
        const auto joint = joint_affinities(perplexity_calibrate(squared_distances(pts), 4.0));
        std::vector<Point2> y(12);
        for (auto& p : y) p = {rng.normal(), rng.normal()};
        const auto g = tsne_gradient(joint, y);
        for (std::size_t i = 0; i < y.size(); ++i) {
            for (int a = 0; a < 2; ++a) {
                const double keep = y[i][a];
                y[i][a] = keep + 1e-6;
                const double up = kl_divergence(joint, y);
                y[i][a] = keep - 1e-6;
                const double down = kl_divergence(joint, y);
                y[i][a] = keep;
                tsne = std::max(tsne, testutil::gradient_error(g[i][a], (up - down) / 2e-6));
            }
        }
        ++instances;
    }
    return {param < 1e-4 && input < 1e-4 && tsne < 1e-4,
            std::to_string(instances) + " instances each; max rel err params " + fmt("%.2e", param) + ", input " +
                fmt("%.2e", input) + ", t-SNE " + fmt("%.2e", tsne)};
}

// 3 -------------------------------------------------------------------------
Outcome auc_oracle() {
    Rng rng(3);
    int mismatches = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = 2 + static_cast<int>(rng.below(199));
        std::vector<double> s(n);
        std::vector<int> y(n);
        const double grid = rep % 2 == 0 ? 10.0 : 1e6;  // even reps have many ties
        for (int i = 0; i < n; ++i) {
            s[i] = std::round(rng.uniform() * grid) / grid;
            y[i] = rng.uniform() < 0.5;
        }
        y[0] = 0;
        y[1] = 1;
        mismatches += roc_auc(s, y) != testutil::brute_force_auc(s, y);
    }
    return {mismatches == 0, "1000 instances, " + std::to_string(mismatches) + " mismatches"};
}

// 4 and 5 share the family corpora.
std::vector<fs::path> g_family_crop_dirs;

Outcome crop_vs_resize(const fs::path& work) {
    std::string detail;
    bool pass = true;
    for (int seed = 1; seed <= 5; ++seed) {
        const fs::path base = work / ("families_" + std::to_string(seed));
        cli({"--seed", std::to_string(seed), "gen", "--preset", "families", "--size", "64", "--count", "300"},
            base / "corpus", "gen");
        const std::string manifest = (base / "corpus" / "manifest.csv").string();
        const auto crop = cli({"fingerprint", "--manifest", manifest, "--pipeline", "crop", "--size", "32"},
                              base / "crop", "fingerprint crop");
        const auto resize = cli({"fingerprint", "--manifest", manifest, "--pipeline", "resize", "--size", "32"},
                                base / "resize", "fingerprint resize");
        g_family_crop_dirs.push_back(base / "crop");
        const double c = testutil::stdout_value(crop.out, "pairwise_spread");
        const double r = testutil::stdout_value(resize.out, "pairwise_spread");
        const double ratio = c / r;
        pass = pass && c > r && ratio >= 1.2;
        detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " " +
                  fmt("%.4f", c) + "/" + fmt("%.4f", r) + "=" + fmt("%.2f", ratio);
    }
    return {pass, "crop/resize spread " + detail};
}

Outcome similarity_structure(const fs::path& work) {
    if (g_family_crop_dirs.empty()) return {false, "family corpora missing"};
    bool pass = true;
    std::string detail;
    for (std::size_t k = 0; k < g_family_crop_dirs.size(); ++k) {
        const fs::path dir = g_family_crop_dirs[k];
        std::vector<std::string> args = {"compare", "--fingerprints"};
        std::vector<DatasetFingerprint> fps;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().extension() == ".csv") args.push_back(e.path().string());
        }
        std::sort(args.begin() + 2, args.end());
        for (std::size_t i = 2; i < args.size(); ++i) fps.push_back(read_fingerprint(args[i]));
        const auto cmp = cli(args, work / ("compare_" + std::to_string(k + 1)), "compare");
        const auto m = similarity_matrix(fps);
        const std::size_t n = m.names.size();

        bool symmetric = true;
        bool diagonal = true;
        std::size_t b = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (m.names[i].starts_with("b_")) b = i;
            diagonal = diagonal && m.values[i][i] == m.max_d2;
            for (std::size_t j = 0; j < n; ++j) symmetric = symmetric && m.values[i][j] == m.values[j][i];
        }
        if (b == n) return {false, "no outlier dataset found"};
        std::vector<double> within;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (i != b && j != b) within.push_back(m.values[i][j]);
            }
        }
        std::sort(within.begin(), within.end());
        const std::size_t h = within.size() / 2;
        const double median = within.size() % 2 ? within[h] : 0.5 * (within[h - 1] + within[h]);
        double outlier_max = -1e300;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != b) outlier_max = std::max(outlier_max, m.values[b][j]);
        }
        const bool printed = std::abs(testutil::stdout_value(cmp.out, "max_d2") - m.max_d2) <= 1e-8 * m.max_d2;
        pass = pass && symmetric && diagonal && printed && outlier_max < median;
        detail += (detail.empty() ? "" : ", ") + fmt("%.3f", outlier_max) + "<" + fmt("%.3f", median);
    }
    return {pass, "symmetric, diagonal = max_d2; outlier max vs within-family median: " + detail};
}

// 6 and 7 share the trained detector.
fs::path g_detector_model;
fs::path g_detection_test;

double mean_top_quartile(const fs::path& manifest) {
    double total = 0.0;
    const auto entries = read_manifest(manifest);
    for (const auto& e : entries) total += top_quartile_mean(profile_of(load_image(e.path), false));
    return total / static_cast<double>(entries.size());
}

Outcome compression_direction(const fs::path& work) {
    cli({"--seed", "11", "gen", "--preset", "detection", "--size", "128", "--count", "300"}, work / "det_train",
        "gen train");
    cli({"--seed", "12", "gen", "--preset", "detection", "--size", "128", "--count", "150"}, work / "det_test",
        "gen test");
    g_detection_test = work / "det_test" / "manifest.csv";
    const auto tr = cli({"--seed", "13", "train", "--manifest", (work / "det_train" / "manifest.csv").string(),
                         "--test-manifest", g_detection_test.string(), "--features", "pixels", "--arch", "logistic",
                         "--size", "128"},
                        work / "det_model", "train");
    g_detector_model = work / "det_model" / "model.json";
    const double val = testutil::stdout_value(tr.out, "val_acc");
    const double clean = testutil::stdout_value(tr.out, "test_acc");

    std::vector<double> energy;
    double degraded_acc = std::nan("");
    for (int q : {90, 70, 50, 30}) {
        const fs::path dir = work / ("det_q" + std::to_string(q));
        cli({"--seed", "14", "degrade", "--manifest", g_detection_test.string(), "--quality", std::to_string(q),
             "--labels", "all"},
            dir, "degrade");
        energy.push_back(mean_top_quartile(dir / "manifest.csv"));
        if (q == 30) {
            // an epsilon-0 attack is a plain evaluation of the saved model
            cli({"attack", "--model", g_detector_model.string(), "--manifest", (dir / "manifest.csv").string(),
                 "--epsilon", "0"},
                work / "det_eval_q30", "evaluate q30");
            degraded_acc = read_json(work / "det_eval_q30" / "metrics.json")["clean"]["acc"].get<double>();
        }
    }
    bool monotone = true;
    for (std::size_t i = 1; i < energy.size(); ++i) monotone = monotone && energy[i] <= energy[i - 1];
    const double drop = clean - degraded_acc;
    std::string e;
    for (double v : energy) e += (e.empty() ? "" : " ") + fmt("%.4f", v);
    return {val >= 0.95 && drop >= 0.15 && monotone,
            "val " + fmt("%.3f", val) + ", test clean " + fmt("%.3f", clean) + " -> q30 " + fmt("%.3f", degraded_acc) +
                " (drop " + fmt("%.3f", drop) + "), top-quartile q90..q30: " + e};
}

Outcome adversarial_direction(const fs::path& work) {
    // Part one: a trained logistic model on interior data, so the one-step
    // logit shift is exactly eps * |w|_1 for every unclamped sample.
    const int d = 32;
    auto place = [](std::vector<Sample> s) {
        for (auto& x : s) for (double& v : x.features) v = std::clamp(0.5 + 0.08 * v, 0.01, 0.99);
        return s;
    };
    const auto tr = place(testutil::blobs(d, 400, 0.25, 0.5, 71));
    const auto va = place(testutil::blobs(d, 200, 0.25, 0.5, 72));
    const auto te = place(testutil::blobs(d, 400, 0.25, 0.5, 73));
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.seed = 74;
    cfg.lr_max = 0.05;
    cfg.patience = 1000;
    cfg.center_inputs = true;
    const auto model = train(tr, va, Logistic{d}, cfg).model;
    const auto w = model.logistic_weights();
    const double l1 = std::accumulate(w.begin(), w.end(), 0.0, [](double a, double v) { return a + std::abs(v); });

    std::vector<double> mags;
    for (const auto& s : te) mags.push_back(std::abs(logit(model, s.features)));
    std::sort(mags.begin(), mags.end());
    const double p90 = mags[static_cast<std::size_t>(0.9 * static_cast<double>(mags.size() - 1))];
    AttackConfig acfg;
    acfg.epsilon = acfg.step_size = 1.05 * p90 / l1;

    int interior = 0;
    int flipped = 0;
    int disagreements = 0;
    for (const auto& s : te) {
        const bool inside = std::all_of(s.features.begin(), s.features.end(), [&](double v) {
            return v - acfg.epsilon >= 0.0 && v + acfg.epsilon <= 1.0;
        });
        if (!inside) continue;
        ++interior;
        const double z = logit(model, s.features);
        const auto adv = pgd_attack(model, s.features, s.label, acfg);
        const bool before = forward(model, s.features) >= 0.5;
        const bool after = forward(model, adv) >= 0.5;
        const bool correct = before == (s.label == 1);
        const bool predicted = correct && std::abs(z) < acfg.epsilon * l1;
        flipped += before != after;
        disagreements += (before != after) != predicted;
    }
    const double rate = interior ? static_cast<double>(flipped) / interior : 0.0;

    // Part two: the pixel detector at eps = 1/255.
    if (g_detector_model.empty()) return {false, "detector from the compression check missing"};
    const auto att = cli({"attack", "--model", g_detector_model.string(), "--manifest", g_detection_test.string()},
                         work / "det_attack", "attack");
    const double clean = testutil::stdout_value(att.out, "clean_acc");
    const double advacc = testutil::stdout_value(att.out, "adv_acc");
    return {interior > 0 && rate >= 0.8 && disagreements == 0 && advacc <= clean,
            "eps*|w|_1 = " + fmt("%.4g", acfg.epsilon * l1) + " > p90 |logit| " + fmt("%.4g", p90) + ": flips " +
                fmt("%.3f", rate) + " of " + std::to_string(interior) + " interior, predicate mismatches " +
                std::to_string(disagreements) + "; detector at 1/255: clean " + fmt("%.3f", clean) + " adv " +
                fmt("%.3f", advacc) + ", flip_rate " + fmt("%.3f", testutil::stdout_value(att.out, "flip_rate"))};
}

// 8 -------------------------------------------------------------------------
Outcome training_machinery() {
    std::vector<double> theta = {0.0};
    AdamState st(1);
    int steps = 0;
    while (steps < 2000 && std::abs(theta[0] - 3.0) >= 1e-3) {
        adam_step(st, theta, std::vector<double>{2.0 * (theta[0] - 3.0)}, 0.05);
        ++steps;
    }
    const bool adam = std::abs(theta[0] - 3.0) < 1e-3;

    const TrainConfig defaults;
    const long total = 1000;
    const double lr0 = onecycle_lr(0, total, defaults);
    const double lrp = onecycle_lr(onecycle_peak_step(total, defaults), total, defaults);
    const double lrn = onecycle_lr(total - 1, total, defaults);
    const bool schedule = std::abs(lr0 - 8e-5) < 1e-15 && std::abs(lrp - 2e-3) < 1e-15 && std::abs(lrn - 8e-9) < 1e-18;

    // Early stopping inside train(): noisy validation labels keep accuracy
    // from improving for long.
    bool stop = true;
    int checked_runs = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto tr = testutil::blobs(4, 300, 0.3, 1.0, 80 + seed);
        auto va = testutil::blobs(4, 60, 0.3, 1.0, 90 + seed);
        TrainConfig cfg;
        cfg.batch_size = 16;
        cfg.seed = seed;
        const auto res = train(tr, va, Logistic{4}, cfg);
        std::vector<double> evals;
        for (const auto& row : res.history) {
            if (!std::isnan(row.val_acc)) evals.push_back(row.val_acc);
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < evals.size(); ++i) {
            if (evals[i] > evals[best]) best = i;
        }
        if (res.stopped_early) {
            ++checked_runs;
            stop = stop && evals.size() == best + 11 && res.best_val_acc == evals[best];
        } else {
            stop = stop && res.steps == res.total_steps;
        }
    }
    stop = stop && checked_runs > 0;

    // evaluation points: 10 per epoch, gaps differ by at most one batch, last
    // batch always evaluated, and train() evaluates exactly there
    bool spaced = true;
    for (std::size_t batches : {10UL, 13UL, 37UL, 100UL, 251UL}) {
        const auto pts = evaluation_points(batches, 10);
        std::size_t lo = batches;
        std::size_t hi = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::size_t gap = pts[i] - (i ? pts[i - 1] : static_cast<std::size_t>(-1));
            lo = std::min(lo, gap);
            hi = std::max(hi, gap);
        }
        spaced = spaced && pts.size() == 10 && pts.back() == batches - 1 && hi - lo <= 1;
    }
    {
        const auto tr = testutil::blobs(3, 370, 1.0, 0.3, 5);
        const auto va = testutil::blobs(3, 50, 1.0, 0.3, 6);
        TrainConfig cfg;
        cfg.batch_size = 10;  // 37 batches per epoch
        cfg.epochs = 2;
        cfg.patience = 1000;
        const auto res = train(tr, va, Logistic{3}, cfg);
        const auto pts = evaluation_points(37, 10);
        std::vector<long> expect;
        for (long e = 0; e < 2; ++e) {
            for (auto p : pts) expect.push_back(e * 37 + static_cast<long>(p));
        }
        std::vector<long> got;
        for (const auto& row : res.history) {
            if (!std::isnan(row.val_acc)) got.push_back(row.step);
        }
        spaced = spaced && got == expect;
    }
    return {adam && schedule && stop && spaced,
            "Adam |theta-3| " + fmt("%.1e", std::abs(theta[0] - 3.0)) + " after " + std::to_string(steps) +
                " steps; lr " + fmt("%.3g", lr0) + "/" + fmt("%.3g", lrp) + "/" + fmt("%.3g", lrn) +
                "; early stop exact in " + std::to_string(checked_runs) + " stopped runs: " + (stop ? "yes" : "no") +
                "; evaluation spacing: " + (spaced ? "yes" : "no")};
}

// 9 -------------------------------------------------------------------------
Outcome tsne_clusters() {
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto data = testutil::gaussian_clusters(3, 50, 8, 10.0, 100 + seed);
        EmbedConfig cfg;
        cfg.seed = seed;
        const auto res = tsne_fit(data.features, data.labels, cfg);
        const double purity = testutil::centroid_purity(res.coords, data.cluster, 3);
        const bool ok = purity >= 0.9 && res.kl_history.back() < res.kl_history.front();
        pass = pass && ok;
        detail += (detail.empty() ? "" : ", ") + fmt("%.2f", purity) + "/" + fmt("%.3f", res.kl_history.back());
    }
    return {pass, "purity/final KL per seed: " + detail};
}

// 10 ------------------------------------------------------------------------
Outcome reproducibility(const fs::path& work, double elapsed_before) {
    const auto t0 = std::chrono::steady_clock::now();
    cli({"--seed", "21", "embed", "--manifest", g_detection_test.string(), "--size", "128", "--per-dataset", "100"},
        work / "det_embed", "embed");
    std::size_t replayed = 0;
    std::string failures;
    for (const auto& dir : std::vector<fs::path>(g_cli_runs)) {
        const auto diff = testutil::replay_differences(dir, fs::path(dir.string() + "_replay"));
        if (diff.empty()) {
            ++replayed;
        } else {
            failures += " " + dir.filename().string() + " (" + diff + ")";
        }
    }
    std::vector<std::string> commands;
    for (const auto& dir : g_cli_runs) {
        const auto c = read_json(dir / "run.json")["command"].get<std::string>();
        if (std::find(commands.begin(), commands.end(), c) == commands.end()) commands.push_back(c);
    }
    const double total =
        elapsed_before + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string cmds;
    for (const auto& c : commands) cmds += (cmds.empty() ? "" : ",") + c;
    return {failures.empty() && commands.size() == 7 && total < 600.0,
            std::to_string(replayed) + "/" + std::to_string(g_cli_runs.size()) + " runs byte-identical (" + cmds +
                ")" + failures + "; suite time " + fmt("%.1f", total) + " s"};
}

}  // namespace

int main() {
    testutil::TempDir work("acceptance");
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

    struct Criterion {
        const char* name;
        double budget;  // seconds, 0 = none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"dft-oracle", 30, dft_oracle},
        {"gradient-suite", 60, gradient_suite},
        {"auc-oracle", 0, auc_oracle},
        {"crop-vs-resize", 180, [&] { return crop_vs_resize(work.path()); }},
        {"similarity-structure", 0, [&] { return similarity_structure(work.path()); }},
        {"compression-direction", 0, [&] { return compression_direction(work.path()); }},
        {"adversarial-direction", 0, [&] { return adversarial_direction(work.path()); }},
        {"training-machinery", 0, training_machinery},
        {"tsne-clusters", 60, tsne_clusters},
        {"reproducibility", 0, [&] { return reproducibility(work.path(), elapsed()); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[i].budget > 0 && secs >= criteria[i].budget) {
            o.pass = false;
            o.detail += "; over the " + fmt("%.0f", criteria[i].budget) + " s budget";
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << (i + 1) << ' ' << criteria[i].name << ": " << o.detail
                  << " [" << fmt("%.1f", secs) << " s]" << std::endl;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << '/' << criteria.size() << std::endl;
    return failed ? 1 : 0;
}
