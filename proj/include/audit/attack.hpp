#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "audit/learn.hpp"

namespace audit {

struct AttackConfig {
    double epsilon = 1.0 / 255.0;
    double step_size = 1.0 / 255.0;
    int steps = 1;
    double clamp_lo = 0.0;
    double clamp_hi = 1.0;
    /// When set, start from a uniform point of the epsilon ball.
    std::optional<std::uint64_t> random_start;
};

void validate(const AttackConfig& cfg);

/// L-infinity PGD: x' <- Proj(x' + step_size * sign(grad_x BCE)), projected
/// onto [x - eps, x + eps] intersected with [clamp_lo, clamp_hi]. sign(0) = 0.
std::vector<double> pgd_attack(const ModelParams& model, std::span<const double> x, int label,
                               const AttackConfig& cfg);

struct SampleOutcome {
    double clean_prob = 0.0;
    double adv_prob = 0.0;
    bool flipped = false;  // predicted class changed
};

struct AttackReport {
    Metrics clean;
    Metrics adversarial;
    std::vector<SampleOutcome> samples;

    double flip_rate() const;
};

/// Attacks every sample (sample i uses derive_seed(random_start, i) when random
/// starts are enabled) and scores both versions with the same model. AUC
/// fields are NaN unless both classes are present.
AttackReport evaluate_attack(const ModelParams& model, std::span<const Sample> samples, const AttackConfig& cfg);

/// "sample,clean_prob,adv_prob,flipped" rows plus a trailing "# ..." summary line.
void write_attack_report(const std::filesystem::path& path, const AttackReport& report);

}  // namespace audit
