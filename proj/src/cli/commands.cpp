#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "audit/attack.hpp"
#include "audit/corpus.hpp"
#include "audit/error.hpp"
#include "audit/fingerprint.hpp"
#include "audit/image_io.hpp"
#include "audit/raster.hpp"
#include "audit/rng.hpp"
#include "audit/svg.hpp"
#include "audit/text.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace audit::cli {

namespace {

std::string absolute_string(const std::string& p) { return fs::absolute(p).lexically_normal().generic_string(); }

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw ConfigError(std::string("missing required option --") + flag);
}

Pipeline make_pipeline(const PreprocessOptions& pre) {
    Pipeline pipe;
    if (pre.pipeline == "crop") pipe = CentralCrop{pre.size};
    else if (pre.pipeline == "resize") pipe = Resize{pre.size, pre.size};
    else throw ConfigError("--pipeline must be crop or resize, got '" + pre.pipeline + "'");
    validate(pipe);
    return pipe;
}

ordered_json to_json(const PreprocessOptions& pre) {
    return {{"pipeline", pre.pipeline}, {"size", pre.size}, {"padding", pre.padding}, {"normalize", pre.normalize}};
}

void merge(ordered_json& into, const ordered_json& from) {
    for (const auto& [k, v] : from.items()) into[k] = v;
}

void check_features(const std::string& features) {
    if (features != "pixels" && features != "profile") {
        throw ConfigError("--features must be pixels or profile, got '" + features + "'");
    }
}

std::vector<double> featurize(const ManifestEntry& entry, const std::string& features, const PreprocessOptions& pre) {
    const Raster img = to_grayscale(load_image(entry.path));
    const Pipeline pipe = make_pipeline(pre);
    const PaddingFactor padding(pre.padding);
    if (features == "pixels") {
        const Raster face = apply_pipeline(img, entry.bbox, padding, pipe);
        return {face.pixels().begin(), face.pixels().end()};
    }
    return face_profile(img, entry.bbox, padding, pipe, pre.normalize).bins;
}

std::vector<Sample> load_samples(const std::vector<ManifestEntry>& entries, const std::string& features,
                                 const PreprocessOptions& pre) {
    std::vector<Sample> samples;
    samples.reserve(entries.size());
    for (const auto& e : entries) samples.push_back(Sample{featurize(e, features, pre), e.label});
    return samples;
}

// Dataset names in order of first appearance.
std::vector<std::string> dataset_order(const std::vector<ManifestEntry>& entries) {
    std::vector<std::string> names;
    for (const auto& e : entries) {
        if (std::find(names.begin(), names.end(), e.dataset) == names.end()) names.push_back(e.dataset);
    }
    return names;
}

ordered_json metrics_json(std::span<const Sample> samples, const ModelParams& model) {
    const auto scores = predict(model, samples);
    std::vector<int> labels;
    for (const auto& s : samples) labels.push_back(s.label);
    const bool both = std::count(labels.begin(), labels.end(), 0) > 0 && std::count(labels.begin(), labels.end(), 1) > 0;
    ordered_json j;
    j["n"] = samples.size();
    j["acc"] = accuracy(scores, labels);
    j["auc"] = both ? ordered_json(roc_auc(scores, labels)) : ordered_json(nullptr);
    return j;
}

void write_json(const fs::path& path, const ordered_json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

}  // namespace

ordered_json cmd_gen(const GlobalOptions& g, const GenOptions& o, std::ostream& out) {
    std::vector<SynthSpec> specs;
    if (o.preset == "families") {
        specs = family_preset(o.size, o.count, g.seed);
    } else if (o.preset == "detection") {
        specs = detection_preset(o.size, o.count, g.seed);
    } else if (o.preset.empty()) {
        SynthSpec spec;
        spec.dataset = o.dataset;
        spec.size = o.size;
        spec.count = o.count;
        spec.seed = g.seed;
        spec.spectral_slope = o.slope;
        if (o.kind == "real") spec.kind = Real1F{};
        else if (o.kind == "upsample") spec.kind = FakeUpsample{o.factor};
        else if (o.kind == "smoothed") spec.kind = FakeSmoothed{o.kernel_sigma};
        else if (o.kind == "periodic") spec.kind = FakePeriodic{o.period, o.amplitude};
        else throw ConfigError("--kind must be real, upsample, smoothed or periodic, got '" + o.kind + "'");
        specs.push_back(spec);
    } else {
        throw ConfigError("--preset must be families or detection, got '" + o.preset + "'");
    }
    const fs::path manifest = generate_corpora(specs, g.out_dir);

    ordered_json datasets = ordered_json::array();
    for (const auto& s : specs) {
        datasets.push_back({{"dataset", s.dataset}, {"kind", describe(s.kind)}, {"label", label_of(s.kind)},
                            {"size", s.size}, {"count", s.count}, {"seed", s.seed}, {"slope", s.spectral_slope}});
    }
    out << "wrote " << specs.size() << " dataset(s) to " << manifest.generic_string() << '\n';

    ordered_json j = {{"preset", o.preset}, {"kind", o.kind},     {"dataset", o.dataset},
                      {"size", o.size},     {"count", o.count},   {"slope", o.slope},
                      {"factor", o.factor}, {"kernel-sigma", o.kernel_sigma}, {"period", o.period},
                      {"amplitude", o.amplitude}};
    write_json(fs::path(g.out_dir) / "datasets.json", datasets);
    return j;
}

ordered_json cmd_fingerprint(const GlobalOptions& g, const FingerprintOptions& o, std::ostream& out) {
    require(o.manifest, "manifest");
    const Pipeline pipe = make_pipeline(o.pre);
    const PaddingFactor padding(o.pre.padding);
    const auto entries = read_manifest(o.manifest);
    if (entries.empty()) throw DataError("manifest lists no images");

    std::vector<DatasetFingerprint> fps;
    LineChart chart{"Mean spectral profile per dataset (" + describe(pipe) + ")", "radius (bins)",
                    o.pre.normalize ? "log power / DC" : "log power", {}};
    for (const auto& name : dataset_order(entries)) {
        std::vector<SpectralProfile> profiles;
        for (const auto& e : entries) {
            if (e.dataset != name) continue;
            profiles.push_back(face_profile(to_grayscale(load_image(e.path)), e.bbox, padding, pipe, o.pre.normalize));
        }
        auto fp = aggregate_profiles(profiles, name, pipe, padding);
        write_fingerprint(fs::path(g.out_dir) / ("fingerprint_" + name + ".csv"), fp);
        LineSeries series{name, {}, fp.mean.bins};
        for (std::size_t k = 0; k < fp.mean.size(); ++k) series.x.push_back(static_cast<double>(k));
        chart.series.push_back(std::move(series));
        fps.push_back(std::move(fp));
    }
    write_svg(fs::path(g.out_dir) / "profiles.svg", render_line_chart(chart));
    out << "datasets=" << fps.size() << '\n';
    if (fps.size() >= 2) out << "pairwise_spread=" << format_sig9(pairwise_spread(fps)) << '\n';

    ordered_json j = {{"manifest", absolute_string(o.manifest)}};
    merge(j, to_json(o.pre));
    return j;
}

ordered_json cmd_compare(const GlobalOptions& g, const CompareOptions& o, std::ostream& out) {
    if (o.fingerprints.size() < 2) throw ConfigError("compare needs at least two fingerprint files");
    std::vector<DatasetFingerprint> fps;
    std::vector<std::string> paths;
    for (const auto& p : o.fingerprints) {
        fps.push_back(read_fingerprint(p));
        paths.push_back(absolute_string(p));
    }
    const auto matrix = similarity_matrix(fps);
    write_similarity(fs::path(g.out_dir) / "similarity.csv", matrix);
    write_svg(fs::path(g.out_dir) / "similarity.svg",
              render_heatmap(Heatmap{"Fingerprint similarity (" + matrix.pipeline + ")", matrix.names, matrix.values}));
    out << "max_d2=" << format_sig9(matrix.max_d2) << '\n';
    return {{"fingerprints", paths}};
}

ordered_json cmd_degrade(const GlobalOptions& g, const DegradeOptions& o, std::ostream& out) {
    require(o.manifest, "manifest");
    if (o.labels != "fake" && o.labels != "all") throw ConfigError("--labels must be fake or all");
    std::optional<Quality> quality;
    if (o.quality != 0) quality = Quality(o.quality);
    if (!(o.sigma >= 0.0)) throw ConfigError("--sigma must be >= 0");

    auto entries = read_manifest(o.manifest);
    const fs::path image_dir = fs::path(g.out_dir) / "images";
    fs::create_directories(image_dir);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& e = entries[i];
        if (o.labels == "fake" && e.label != 1) {
            e.path = fs::absolute(e.path).lexically_normal();
            continue;
        }
        Raster img = to_grayscale(load_image(e.path));
        if (quality) img = jpeg_like_compress(img, *quality);
        img = gaussian_noise(img, o.sigma, derive_seed(g.seed, i));
        char name[32];
        std::snprintf(name, sizeof name, "_%05zu.pgm", i);
        e.path = image_dir / (e.dataset + name);
        save_image(e.path, img);
        ++changed;
    }
    write_manifest(fs::path(g.out_dir) / "manifest.csv", entries);
    out << "degraded " << changed << " of " << entries.size() << " images\n";
    return {{"manifest", absolute_string(o.manifest)},
            {"quality", o.quality},
            {"sigma", o.sigma},
            {"labels", o.labels}};
}

namespace {

// Stratified split: a val_fraction share of each class, chosen by a seeded
// shuffle, goes to validation.
void split(const std::vector<Sample>& all, double val_fraction, std::uint64_t seed, std::vector<Sample>& train_set,
           std::vector<Sample>& val_set) {
    Rng rng(derive_seed(seed, 0x5b11));
    std::vector<bool> is_val(all.size(), false);
    for (int label = 0; label <= 1; ++label) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (all[i].label == label) idx.push_back(i);
        }
        shuffle(idx.begin(), idx.end(), rng);
        auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(idx.size())));
        if (idx.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, idx.size() - 1);
        for (std::size_t k = 0; k < n_val && k < idx.size(); ++k) is_val[idx[k]] = true;
    }
    for (std::size_t i = 0; i < all.size(); ++i) (is_val[i] ? val_set : train_set).push_back(all[i]);
}

}  // namespace

ordered_json cmd_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& out) {
    require(o.manifest, "manifest");
    check_features(o.features);
    make_pipeline(o.pre);
    if (!(o.val_fraction > 0.0 && o.val_fraction < 1.0)) throw ConfigError("--val-fraction must be in (0,1)");
    TrainConfig cfg = o.train;
    cfg.seed = g.seed;
    validate(cfg);

    const auto all = load_samples(read_manifest(o.manifest), o.features, o.pre);
    if (all.size() < 2) throw DataError("training needs at least two samples");
    std::vector<Sample> train_set;
    std::vector<Sample> val_set;
    split(all, o.val_fraction, g.seed, train_set, val_set);

    const int d = static_cast<int>(all.front().features.size());
    Architecture arch;
    if (o.arch == "logistic") arch = Logistic{d};
    else if (o.arch == "mlp") arch = Mlp{d, o.hidden};
    else throw ConfigError("--arch must be logistic or mlp, got '" + o.arch + "'");

    const TrainResult result = train(train_set, val_set, arch, cfg);

    auto model_doc = model_to_json(result.model);
    model_doc["preprocess"] = {{"features", o.features}};
    merge(model_doc["preprocess"], to_json(o.pre));
    write_json(fs::path(g.out_dir) / "model.json", model_doc);
    write_history_csv(fs::path(g.out_dir) / "history.csv", result.history);

    LineChart curve{"Training loss", "step", "mean BCE", {{"train_loss", {}, {}}}};
    for (const auto& row : result.history) {
        curve.series[0].x.push_back(static_cast<double>(row.step));
        curve.series[0].y.push_back(row.train_loss);
    }
    write_svg(fs::path(g.out_dir) / "history.svg", render_line_chart(curve));

    ordered_json metrics;
    metrics["train_samples"] = train_set.size();
    metrics["steps"] = result.steps;
    metrics["total_steps"] = result.total_steps;
    metrics["evaluations"] = result.evaluations;
    metrics["stopped_early"] = result.stopped_early;
    metrics["best_val_acc"] = result.best_val_acc;
    metrics["val"] = metrics_json(val_set, result.model);
    out << "val_acc=" << format_sig9(metrics["val"]["acc"].get<double>()) << '\n';
    if (!o.test_manifest.empty()) {
        const auto test_set = load_samples(read_manifest(o.test_manifest), o.features, o.pre);
        if (test_set.empty()) throw DataError("test manifest lists no images");
        metrics["test"] = metrics_json(test_set, result.model);
        out << "test_acc=" << format_sig9(metrics["test"]["acc"].get<double>()) << '\n';
    }
    write_json(fs::path(g.out_dir) / "metrics.json", metrics);

    ordered_json j = {{"manifest", absolute_string(o.manifest)},
                      {"test-manifest", o.test_manifest.empty() ? "" : absolute_string(o.test_manifest)},
                      {"features", o.features},
                      {"arch", o.arch},
                      {"hidden", o.hidden},
                      {"val-fraction", o.val_fraction}};
    merge(j, to_json(o.pre));
    merge(j, ordered_json{{"lr-max", cfg.lr_max},
                          {"batch-size", cfg.batch_size},
                          {"epochs", cfg.epochs},
                          {"evals-per-epoch", cfg.evals_per_epoch},
                          {"patience", cfg.patience},
                          {"div-factor", cfg.div_factor},
                          {"final-div-factor", cfg.final_div_factor},
                          {"pct-start", cfg.pct_start},
                          {"center", cfg.center_inputs}});
    return j;
}

ordered_json cmd_attack(const GlobalOptions& g, const AttackOptions& o, std::ostream& out) {
    require(o.model, "model");
    require(o.manifest, "manifest");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(o.model));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("model file is not valid JSON: " + std::string(e.what()));
    }
    const ModelParams model = model_from_json(doc);
    PreprocessOptions pre;
    std::string features;
    try {
        const auto& p = doc.at("preprocess");
        features = p.at("features").get<std::string>();
        pre.pipeline = p.at("pipeline").get<std::string>();
        pre.size = p.at("size").get<int>();
        pre.padding = p.at("padding").get<double>();
        pre.normalize = p.at("normalize").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("model file lacks a valid preprocess block: " + std::string(e.what()));
    }
    check_features(features);

    AttackConfig cfg;
    cfg.epsilon = o.epsilon;
    cfg.step_size = o.step_size;
    cfg.steps = o.steps;
    if (o.random_start) cfg.random_start = g.seed;
    if (features == "profile") {
        // profile features are unbounded log-power values
        cfg.clamp_lo = -std::numeric_limits<double>::infinity();
        cfg.clamp_hi = std::numeric_limits<double>::infinity();
    }
    validate(cfg);

    const auto samples = load_samples(read_manifest(o.manifest), features, pre);
    const AttackReport report = evaluate_attack(model, samples, cfg);
    write_attack_report(fs::path(g.out_dir) / "attack.csv", report);

    auto metric = [](const Metrics& m) {
        return ordered_json{{"acc", m.acc}, {"auc", std::isnan(m.auc) ? ordered_json(nullptr) : ordered_json(m.auc)}};
    };
    ordered_json metrics = {{"n", samples.size()},
                            {"clean", metric(report.clean)},
                            {"adversarial", metric(report.adversarial)},
                            {"flip_rate", report.flip_rate()}};
    write_json(fs::path(g.out_dir) / "metrics.json", metrics);

    ScatterChart chart{"Detector probability before and after the attack", {}};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        chart.points.push_back({report.samples[i].clean_prob, report.samples[i].adv_prob,
                                samples[i].label == 1 ? "fake" : "real"});
    }
    write_svg(fs::path(g.out_dir) / "attack.svg", render_scatter(chart));
    out << "clean_acc=" << format_sig9(report.clean.acc) << " adv_acc=" << format_sig9(report.adversarial.acc)
        << " flip_rate=" << format_sig9(report.flip_rate()) << '\n';

    return {{"model", absolute_string(o.model)},
            {"manifest", absolute_string(o.manifest)},
            {"epsilon", cfg.epsilon},
            {"step-size", cfg.step_size},
            {"steps", cfg.steps},
            {"random-start", o.random_start}};
}

ordered_json cmd_embed(const GlobalOptions& g, const EmbedOptions& o, std::ostream& out) {
    require(o.manifest, "manifest");
    check_features(o.features);
    make_pipeline(o.pre);
    if (o.per_dataset < 1) throw ConfigError("--per-dataset must be >= 1");
    EmbedConfig cfg = o.embed;
    cfg.seed = g.seed;

    const auto entries = read_manifest(o.manifest);
    std::map<std::string, int> taken;
    std::vector<std::vector<double>> features;
    std::vector<std::string> names;
    std::vector<int> classes;
    for (const auto& e : entries) {
        if (taken[e.dataset] >= o.per_dataset) continue;
        ++taken[e.dataset];
        features.push_back(featurize(e, o.features, o.pre));
        names.push_back(e.dataset);
        classes.push_back(e.label);
    }
    const EmbeddingResult result = tsne_fit(features, names, cfg);
    write_embedding_csv(fs::path(g.out_dir) / "embedding.csv", result, classes);
    write_kl_csv(fs::path(g.out_dir) / "kl.csv", result.kl_history);

    ScatterChart chart{"t-SNE of " + o.features + " features", {}};
    for (std::size_t i = 0; i < result.coords.size(); ++i) {
        chart.points.push_back({result.coords[i][0], result.coords[i][1], names[i]});
    }
    write_svg(fs::path(g.out_dir) / "embedding.svg", render_scatter(chart));
    out << "points=" << result.coords.size() << " final_kl=" << format_sig9(result.kl_history.back()) << '\n';

    ordered_json j = {{"manifest", absolute_string(o.manifest)},
                      {"per-dataset", o.per_dataset},
                      {"features", o.features}};
    merge(j, to_json(o.pre));
    merge(j, ordered_json{{"perplexity", cfg.perplexity},
                          {"iterations", cfg.iterations},
                          {"learning-rate", cfg.learning_rate}});
    return j;
}

}  // namespace audit::cli
