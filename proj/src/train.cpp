#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "audit/error.hpp"
#include "audit/learn.hpp"
#include "audit/rng.hpp"
#include "audit/text.hpp"

namespace audit {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size() || params.size() != state.v.size()) {
        throw DimensionError("adam_step: parameter, gradient and state sizes differ");
    }
    ++state.t;
    const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

void validate(const TrainConfig& cfg) {
    if (!(cfg.lr_max > 0.0)) throw ConfigError("lr_max must be > 0");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (cfg.evals_per_epoch < 1) throw ConfigError("evals_per_epoch must be >= 1");
    if (cfg.patience < 1) throw ConfigError("patience must be >= 1");
    if (!(cfg.div_factor > 0.0) || !(cfg.final_div_factor > 0.0)) throw ConfigError("div factors must be > 0");
    if (!(cfg.pct_start > 0.0 && cfg.pct_start < 1.0)) throw ConfigError("pct_start must be in (0,1)");
}

long onecycle_peak_step(long total_steps, const TrainConfig& cfg) {
    const long peak = std::lround(cfg.pct_start * static_cast<double>(total_steps));
    return std::clamp(peak, 0L, std::max(total_steps - 1, 0L));
}

namespace {

// Cosine interpolation from `from` (pct = 0) to `to` (pct = 1).
double cosine_anneal(double from, double to, double pct) {
    return to + (from - to) * 0.5 * (1.0 + std::cos(std::numbers::pi * pct));
}

}  // namespace

double onecycle_lr(long step, long total_steps, const TrainConfig& cfg) {
    if (step < 0 || step >= total_steps) {
        throw NumericError("schedule step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) +
                           ")");
    }
    const double initial = cfg.lr_max / cfg.div_factor;
    const double final_lr = initial / cfg.final_div_factor;
    const long peak = onecycle_peak_step(total_steps, cfg);
    const long last = total_steps - 1;
    if (step < peak) {
        return cosine_anneal(initial, cfg.lr_max, static_cast<double>(step) / static_cast<double>(peak));
    }
    if (step == peak) return cfg.lr_max;
    return cosine_anneal(cfg.lr_max, final_lr, static_cast<double>(step - peak) / static_cast<double>(last - peak));
}

bool EarlyStopping::observe(double accuracy) {
    ++evaluations_;
    if (accuracy > best_) {
        best_ = accuracy;
        best_evaluation_ = evaluations_;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

std::vector<std::size_t> evaluation_points(std::size_t batches_per_epoch, int evals_per_epoch) {
    std::vector<std::size_t> points;
    const auto evals = static_cast<std::size_t>(evals_per_epoch);
    for (std::size_t k = 1; k <= evals; ++k) {
        const std::size_t idx = (k * batches_per_epoch + evals - 1) / evals - 1;
        if (points.empty() || points.back() != idx) points.push_back(idx);
    }
    return points;
}

ModelParams fold_input_shift(const ModelParams& model, std::span<const double> shift) {
    if (static_cast<int>(shift.size()) != model.input_dim()) throw DimensionError("shift length must equal input dim");
    ModelParams out = model;
    auto p = out.params();
    const std::size_t d = shift.size();
    if (std::holds_alternative<Logistic>(model.architecture())) {
        for (std::size_t j = 0; j < d; ++j) p[d] -= p[j] * shift[j];
        return out;
    }
    const auto h = static_cast<std::size_t>(std::get<Mlp>(model.architecture()).h);
    for (std::size_t k = 0; k < h; ++k) {
        for (std::size_t j = 0; j < d; ++j) p[h * d + k] -= p[k * d + j] * shift[j];
    }
    return out;
}

namespace {

TrainResult train_raw(std::span<const Sample> train_set, std::span<const Sample> val_set, const Architecture& arch,
                      const TrainConfig& cfg) {

    const std::size_t n = train_set.size();
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t batches = (n + batch - 1) / batch;
    const long total_steps = static_cast<long>(batches) * cfg.epochs;
    const auto eval_at = evaluation_points(batches, cfg.evals_per_epoch);

    Rng rng(cfg.seed);
    ModelParams model = ModelParams::initialize(arch, derive_seed(cfg.seed, 0x9e11));
    AdamState adam(model.size());
    EarlyStopping stopper(cfg.patience);

    TrainResult result{model, {}, 0.0, 0, 0, total_steps, false};
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs && !result.stopped_early; ++epoch) {
        shuffle(order.begin(), order.end(), rng);
        std::size_t next_eval = 0;
        for (std::size_t b = 0; b < batches; ++b, ++step) {
            const std::span<const std::size_t> idx(order.data() + b * batch, std::min(batch, n - b * batch));
            HistoryRow row;
            row.step = step;
            row.lr = onecycle_lr(step, total_steps, cfg);
            const LossGrad lg = loss_and_grad(model, train_set, idx);
            row.train_loss = lg.loss;
            adam_step(adam, model.params(), lg.grads, row.lr);

            if (next_eval < eval_at.size() && eval_at[next_eval] == b) {
                ++next_eval;
                row.val_acc = accuracy(model, val_set);
                if (stopper.observe(row.val_acc)) result.model = model;
            }
            result.history.push_back(row);
            if (stopper.should_stop()) {
                result.stopped_early = true;
                ++step;
                break;
            }
        }
    }
    result.best_val_acc = stopper.best();
    result.evaluations = stopper.evaluations();
    result.steps = step;
    return result;
}

std::vector<Sample> shifted(std::span<const Sample> samples, std::span<const double> shift) {
    std::vector<Sample> out(samples.begin(), samples.end());
    for (auto& s : out) {
        if (s.features.size() != shift.size()) throw DimensionError("feature vectors differ in length");
        for (std::size_t j = 0; j < shift.size(); ++j) s.features[j] -= shift[j];
    }
    return out;
}

}  // namespace

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const Architecture& arch,
                  const TrainConfig& cfg) {
    validate(cfg);
    if (train_set.empty()) throw DataError("training set is empty");
    if (val_set.empty()) throw DataError("validation set is empty");
    if (!cfg.center_inputs) return train_raw(train_set, val_set, arch, cfg);

    std::vector<double> mean(train_set.front().features.size(), 0.0);
    for (const auto& s : train_set) {
        if (s.features.size() != mean.size()) throw DimensionError("feature vectors differ in length");
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += s.features[j];
    }
    for (double& m : mean) m /= static_cast<double>(train_set.size());
    const auto train_c = shifted(train_set, mean);
    const auto val_c = shifted(val_set, mean);
    TrainResult result = train_raw(train_c, val_c, arch, cfg);
    result.model = fold_input_shift(result.model, mean);
    return result;
}

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> history) {
    std::ostringstream out;
    out << "step,lr,train_loss,val_acc\n";
    for (const auto& row : history) {
        out << row.step << ',' << format_sig9(row.lr) << ',' << format_sig9(row.train_loss) << ',';
        if (!std::isnan(row.val_acc)) out << format_sig9(row.val_acc);
        out << '\n';
    }
    write_text_file(path, out.str());
}

}  // namespace audit
