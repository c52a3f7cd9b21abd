#include "audit/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "audit/error.hpp"
#include "audit/rng.hpp"
#include "audit/text.hpp"

namespace audit {

void validate(const AttackConfig& cfg) {
    if (!(cfg.epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    if (cfg.steps < 0) throw ConfigError("steps must be >= 0");
    if (cfg.steps >= 1 && !(cfg.step_size > 0.0)) throw ConfigError("step size must be > 0");
    if (!(cfg.clamp_lo < cfg.clamp_hi)) throw ConfigError("clamp_lo must be below clamp_hi");
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<double> attack_one(const ModelParams& model, std::span<const double> x, int label, const AttackConfig& cfg,
                               std::optional<std::uint64_t> start_seed) {
    if (static_cast<int>(x.size()) != model.input_dim()) {
        throw DimensionError("attack input has " + std::to_string(x.size()) + " entries, model expects " +
                             std::to_string(model.input_dim()));
    }
    const std::size_t d = x.size();
    std::vector<double> lo(d);
    std::vector<double> hi(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!(x[i] >= cfg.clamp_lo && x[i] <= cfg.clamp_hi)) throw DataError("attack input outside the clamp range");
        // x +- eps can round outward; step back until the distance is within eps
        double down = x[i] - cfg.epsilon;
        while (x[i] - down > cfg.epsilon) down = std::nextafter(down, x[i]);
        double up = x[i] + cfg.epsilon;
        while (up - x[i] > cfg.epsilon) up = std::nextafter(up, x[i]);
        lo[i] = std::max(down, cfg.clamp_lo);
        hi[i] = std::min(up, cfg.clamp_hi);
    }
    std::vector<double> adv(x.begin(), x.end());
    if (start_seed) {
        Rng rng(*start_seed);
        for (std::size_t i = 0; i < d; ++i) {
            adv[i] = std::clamp(x[i] + rng.uniform(-cfg.epsilon, cfg.epsilon), lo[i], hi[i]);
        }
    }
    for (int step = 0; step < cfg.steps; ++step) {
        const auto g = input_grad(model, adv, label);
        for (std::size_t i = 0; i < d; ++i) adv[i] = std::clamp(adv[i] + cfg.step_size * sign(g[i]), lo[i], hi[i]);
    }
    return adv;
}

}  // namespace

std::vector<double> pgd_attack(const ModelParams& model, std::span<const double> x, int label,
                               const AttackConfig& cfg) {
    validate(cfg);
    return attack_one(model, x, label, cfg, cfg.random_start);
}

double AttackReport::flip_rate() const {
    if (samples.empty()) return 0.0;
    const auto flips = std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.flipped; });
    return static_cast<double>(flips) / static_cast<double>(samples.size());
}

AttackReport evaluate_attack(const ModelParams& model, std::span<const Sample> samples, const AttackConfig& cfg) {
    validate(cfg);
    if (samples.empty()) throw DataError("no samples to attack");
    std::vector<double> clean_scores;
    std::vector<double> adv_scores;
    std::vector<int> labels;
    AttackReport report;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        std::optional<std::uint64_t> start;
        if (cfg.random_start) start = derive_seed(*cfg.random_start, i);
        const auto adv = attack_one(model, s.features, s.label, cfg, start);
        const double p_clean = forward(model, s.features);
        const double p_adv = forward(model, adv);
        clean_scores.push_back(p_clean);
        adv_scores.push_back(p_adv);
        labels.push_back(s.label);
        report.samples.push_back({p_clean, p_adv, (p_clean >= 0.5) != (p_adv >= 0.5)});
    }
    // AUC is undefined for single-class sets; reported as NaN there
    const bool both = std::count(labels.begin(), labels.end(), 1) > 0 && std::count(labels.begin(), labels.end(), 0) > 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.clean = {accuracy(clean_scores, labels), both ? roc_auc(clean_scores, labels) : nan};
    report.adversarial = {accuracy(adv_scores, labels), both ? roc_auc(adv_scores, labels) : nan};
    return report;
}

void write_attack_report(const std::filesystem::path& path, const AttackReport& report) {
    std::ostringstream out;
    out << "sample,clean_prob,adv_prob,flipped\n";
    for (std::size_t i = 0; i < report.samples.size(); ++i) {
        const auto& s = report.samples[i];
        out << i << ',' << format_sig9(s.clean_prob) << ',' << format_sig9(s.adv_prob) << ',' << (s.flipped ? 1 : 0)
            << '\n';
    }
    out << "# clean_acc=" << format_sig9(report.clean.acc) << " clean_auc=" << format_sig9(report.clean.auc)
        << " adv_acc=" << format_sig9(report.adversarial.acc) << " adv_auc=" << format_sig9(report.adversarial.auc)
        << " flip_rate=" << format_sig9(report.flip_rate()) << '\n';
    write_text_file(path, out.str());
}

}  // namespace audit
