#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "audit/embed.hpp"
#include "audit/learn.hpp"

namespace audit::cli {

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string config;
};

struct PreprocessOptions {
    std::string pipeline = "crop";
    int size = 64;
    double padding = 0.0;
    bool normalize = true;
};

struct GenOptions {
    std::string preset;
    std::string kind = "real";
    std::string dataset = "synthetic";
    int size = 64;
    int count = 100;
    double slope = 1.0;
    int factor = 2;
    double kernel_sigma = 1.0;
    int period = 2;
    double amplitude = 0.02;
};

struct FingerprintOptions {
    std::string manifest;
    PreprocessOptions pre;
};

struct CompareOptions {
    std::vector<std::string> fingerprints;
};

struct DegradeOptions {
    std::string manifest;
    int quality = 0;  // 0: no compression
    double sigma = 0.0;
    std::string labels = "fake";
};

struct TrainOptions {
    std::string manifest;
    std::string test_manifest;
    std::string features = "pixels";
    std::string arch = "logistic";
    int hidden = 32;
    double val_fraction = 0.2;
    PreprocessOptions pre;
    TrainConfig train = [] {
        TrainConfig c;
        c.center_inputs = true;
        return c;
    }();
};

struct AttackOptions {
    std::string model;
    std::string manifest;
    double epsilon = 1.0 / 255.0;
    double step_size = 1.0 / 255.0;
    int steps = 1;
    bool random_start = false;
};

struct EmbedOptions {
    std::string manifest;
    int per_dataset = 200;
    std::string features = "profile";
    PreprocessOptions pre;
    EmbedConfig embed;
};

// Each command resolves its options, writes its artifacts plus run.json into
// g.out_dir and returns the resolved option block recorded there.
nlohmann::ordered_json cmd_gen(const GlobalOptions& g, const GenOptions& o, std::ostream& out);
nlohmann::ordered_json cmd_fingerprint(const GlobalOptions& g, const FingerprintOptions& o, std::ostream& out);
nlohmann::ordered_json cmd_compare(const GlobalOptions& g, const CompareOptions& o, std::ostream& out);
nlohmann::ordered_json cmd_degrade(const GlobalOptions& g, const DegradeOptions& o, std::ostream& out);
nlohmann::ordered_json cmd_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& out);
nlohmann::ordered_json cmd_attack(const GlobalOptions& g, const AttackOptions& o, std::ostream& out);
nlohmann::ordered_json cmd_embed(const GlobalOptions& g, const EmbedOptions& o, std::ostream& out);

}  // namespace audit::cli
