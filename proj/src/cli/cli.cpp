#include "audit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "audit/error.hpp"
#include "audit/text.hpp"
#include "commands.hpp"

namespace fs = std::filesystem;

namespace audit {

namespace {

void add_preprocess(CLI::App* cmd, cli::PreprocessOptions& pre) {
    cmd->add_option("--pipeline", pre.pipeline, "crop or resize")->capture_default_str();
    cmd->add_option("--size", pre.size, "crop side or resize target side")->capture_default_str();
    cmd->add_option("--padding", pre.padding, "bounding-box padding factor")->capture_default_str();
    cmd->add_option("--normalize", pre.normalize, "divide profiles by the DC bin (true/false)")
        ->capture_default_str();
}

std::string scalar_string(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw ConfigError("config key '" + key + "' must be a scalar or an array of scalars");
}

// Values from the config file fill options that were not given on the
// command line.
void apply_entry(CLI::App& app, const std::string& key, const nlohmann::json& value) {
    CLI::Option* opt = app.get_option_no_throw("--" + key);
    if (opt == nullptr) throw ConfigError("unknown config key '" + key + "' for " + app.get_name());
    if (opt->count() > 0 || value.is_null()) return;
    if (value.is_array()) {
        for (const auto& v : value) opt->add_result(scalar_string(v, key));
    } else {
        opt->add_result(scalar_string(value, key));
    }
    try {
        opt->run_callback();
    } catch (const CLI::ParseError& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

void apply_config(CLI::App& root, CLI::App& sub, const std::string& path,
                  const std::vector<std::string>& command_names) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "command") {
            if (value != sub.get_name()) {
                throw ConfigError("config was written by '" + value.dump() + "', not '" + sub.get_name() + "'");
            }
        } else if (key == sub.get_name()) {
            if (!value.is_object()) throw ConfigError("config section '" + key + "' must be an object");
            for (const auto& [k, v] : value.items()) apply_entry(sub, k, v);
        } else if (std::find(command_names.begin(), command_names.end(), key) != command_names.end()) {
            continue;  // section for another command
        } else if (key == "config") {
            throw ConfigError("config files cannot nest --config");
        } else {
            apply_entry(root, key, value);
        }
    }
}

// `audit --config run.json` with no subcommand reruns the command the file
// was written by.
std::vector<std::string> with_config_command(std::vector<std::string> args, const CLI::App& app) {
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (app.get_subcommand_no_throw(args[i]) != nullptr) return args;
        if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
        if (args[i].starts_with("--config=")) config = args[i].substr(9);
    }
    if (config.empty()) return args;
    try {
        const auto doc = nlohmann::json::parse(read_text_file(config));
        if (doc.is_object() && doc.contains("command") && doc["command"].is_string()) {
            args.push_back(doc["command"].get<std::string>());
        }
    } catch (const nlohmann::json::exception&) {
        // reported by apply_config
    }
    return args;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral-fingerprint and detector audit toolkit", "audit"};
    app.require_subcommand(1);
    app.fallthrough();

    cli::GlobalOptions global;
    app.add_option("--seed", global.seed, "random seed")->capture_default_str();
    app.add_option("--out-dir", global.out_dir, "output directory");
    app.add_option("--config", global.config, "JSON config; command-line flags take precedence");

    cli::GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic corpus");
    gen_cmd->add_option("--preset", gen.preset, "families or detection (overrides --kind)");
    gen_cmd->add_option("--kind", gen.kind, "real, upsample, smoothed or periodic")->capture_default_str();
    gen_cmd->add_option("--dataset", gen.dataset, "dataset name for a single-kind corpus")->capture_default_str();
    gen_cmd->add_option("--size", gen.size, "image side")->capture_default_str();
    gen_cmd->add_option("--count", gen.count, "images per dataset")->capture_default_str();
    gen_cmd->add_option("--slope", gen.slope, "spectral slope of the 1/f texture")->capture_default_str();
    gen_cmd->add_option("--factor", gen.factor, "upsampling factor")->capture_default_str();
    gen_cmd->add_option("--kernel-sigma", gen.kernel_sigma, "smoothing kernel sigma")->capture_default_str();
    gen_cmd->add_option("--period", gen.period, "periodic pattern period")->capture_default_str();
    gen_cmd->add_option("--amplitude", gen.amplitude, "periodic pattern amplitude")->capture_default_str();

    cli::FingerprintOptions fp;
    auto* fp_cmd = app.add_subcommand("fingerprint", "per-dataset spectral fingerprints");
    fp_cmd->add_option("--manifest", fp.manifest, "input manifest CSV");
    add_preprocess(fp_cmd, fp.pre);

    cli::CompareOptions cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "similarity matrix of fingerprints");
    cmp_cmd->add_option("--fingerprints", cmp.fingerprints, "two or more fingerprint CSVs");

    cli::DegradeOptions deg;
    auto* deg_cmd = app.add_subcommand("degrade", "compress and/or add noise to a corpus");
    deg_cmd->add_option("--manifest", deg.manifest, "input manifest CSV");
    deg_cmd->add_option("--quality", deg.quality, "JPEG-like quality 1..100 (0 disables)")->capture_default_str();
    deg_cmd->add_option("--sigma", deg.sigma, "Gaussian noise sigma")->capture_default_str();
    deg_cmd->add_option("--labels", deg.labels, "fake or all")->capture_default_str();

    cli::TrainOptions tr;
    auto* tr_cmd = app.add_subcommand("train", "train a detector");
    tr_cmd->add_option("--manifest", tr.manifest, "training manifest CSV");
    tr_cmd->add_option("--test-manifest", tr.test_manifest, "optional held-out manifest");
    tr_cmd->add_option("--features", tr.features, "pixels or profile")->capture_default_str();
    tr_cmd->add_option("--arch", tr.arch, "logistic or mlp")->capture_default_str();
    tr_cmd->add_option("--hidden", tr.hidden, "MLP hidden width")->capture_default_str();
    tr_cmd->add_option("--val-fraction", tr.val_fraction, "validation share per class")->capture_default_str();
    add_preprocess(tr_cmd, tr.pre);
    tr_cmd->add_option("--lr-max", tr.train.lr_max)->capture_default_str();
    tr_cmd->add_option("--batch-size", tr.train.batch_size)->capture_default_str();
    tr_cmd->add_option("--epochs", tr.train.epochs)->capture_default_str();
    tr_cmd->add_option("--evals-per-epoch", tr.train.evals_per_epoch)->capture_default_str();
    tr_cmd->add_option("--patience", tr.train.patience)->capture_default_str();
    tr_cmd->add_option("--div-factor", tr.train.div_factor)->capture_default_str();
    tr_cmd->add_option("--final-div-factor", tr.train.final_div_factor)->capture_default_str();
    tr_cmd->add_option("--pct-start", tr.train.pct_start)->capture_default_str();
    tr_cmd->add_option("--center", tr.train.center_inputs, "center inputs on the training mean (true/false)")
        ->capture_default_str();

    cli::AttackOptions att;
    auto* att_cmd = app.add_subcommand("attack", "L-infinity gradient-sign attack on a trained detector");
    att_cmd->add_option("--model", att.model, "model.json written by train");
    att_cmd->add_option("--manifest", att.manifest, "manifest of images to attack");
    att_cmd->add_option("--epsilon", att.epsilon, "L-infinity budget")->capture_default_str();
    att_cmd->add_option("--step-size", att.step_size, "per-step magnitude")->capture_default_str();
    att_cmd->add_option("--steps", att.steps, "number of steps")->capture_default_str();
    att_cmd->add_option("--random-start", att.random_start, "start from a random point of the ball (true/false)")
        ->capture_default_str();

    cli::EmbedOptions emb;
    auto* emb_cmd = app.add_subcommand("embed", "2-D t-SNE embedding of per-image features");
    emb_cmd->add_option("--manifest", emb.manifest, "input manifest CSV");
    emb_cmd->add_option("--per-dataset", emb.per_dataset, "images taken from each dataset")->capture_default_str();
    emb_cmd->add_option("--features", emb.features, "pixels or profile")->capture_default_str();
    add_preprocess(emb_cmd, emb.pre);
    emb_cmd->add_option("--perplexity", emb.embed.perplexity)->capture_default_str();
    emb_cmd->add_option("--iterations", emb.embed.iterations)->capture_default_str();
    emb_cmd->add_option("--learning-rate", emb.embed.learning_rate)->capture_default_str();

    try {
        const auto full = with_config_command(args, app);
        std::vector<std::string> reversed(full.rbegin(), full.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::vector<std::string> names;
    for (const auto* s : app.get_subcommands({})) names.push_back(s->get_name());
    if (!global.config.empty()) apply_config(app, *sub, global.config, names);
    if (global.out_dir.empty()) throw ConfigError("missing required option --out-dir");
    fs::create_directories(global.out_dir);

    using Runner = std::function<nlohmann::ordered_json()>;
    const std::vector<std::pair<CLI::App*, Runner>> runners = {
        {gen_cmd, [&] { return cli::cmd_gen(global, gen, out); }},
        {fp_cmd, [&] { return cli::cmd_fingerprint(global, fp, out); }},
        {cmp_cmd, [&] { return cli::cmd_compare(global, cmp, out); }},
        {deg_cmd, [&] { return cli::cmd_degrade(global, deg, out); }},
        {tr_cmd, [&] { return cli::cmd_train(global, tr, out); }},
        {att_cmd, [&] { return cli::cmd_attack(global, att, out); }},
        {emb_cmd, [&] { return cli::cmd_embed(global, emb, out); }},
    };
    for (const auto& [cmd, run] : runners) {
        if (cmd != sub) continue;
        nlohmann::ordered_json record;
        record["command"] = sub->get_name();
        record["seed"] = global.seed;
        record[sub->get_name()] = run();
        write_text_file(fs::path(global.out_dir) / "run.json", record.dump(2) + "\n");
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace audit
