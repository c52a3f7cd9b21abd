#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace audit {

struct Sample {
    std::vector<double> features;
    int label = 0;
};

/// sigma(w.x + b)
struct Logistic {
    int d = 1;
    bool operator==(const Logistic&) const = default;
};

/// sigma(w2 . relu(W1 x + b1) + b2)
struct Mlp {
    int d = 1;
    int h = 1;
    bool operator==(const Mlp&) const = default;
};

using Architecture = std::variant<Logistic, Mlp>;

/// Detector parameters in one flat array so the optimizer and the
/// finite-difference checks can treat them uniformly.
///
/// Layout:
///   Logistic: [w (d), b]
///   Mlp:      [W1 (h x d, row-major), b1 (h), w2 (h), b2]
class ModelParams {
public:
    /// All parameters zero.
    explicit ModelParams(Architecture arch);
    ModelParams(Architecture arch, std::vector<double> params);

    /// Logistic: zeros. Mlp: He-normal W1, N(0, 1/h) w2, zero biases.
    static ModelParams initialize(Architecture arch, std::uint64_t seed);

    const Architecture& architecture() const noexcept { return arch_; }
    int input_dim() const noexcept;
    std::size_t size() const noexcept { return params_.size(); }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }

    /// Logistic weight vector; throws DimensionError for other architectures.
    std::span<const double> logistic_weights() const;

    bool operator==(const ModelParams&) const = default;

private:
    Architecture arch_;
    std::vector<double> params_;
};

std::size_t parameter_count(const Architecture& arch);

inline constexpr double kProbabilityClamp = 1e-12;

double sigmoid(double z);
/// Pre-sigmoid activation. Throws DimensionError if dim(x) != d.
double logit(const ModelParams& model, std::span<const double> x);
double forward(const ModelParams& model, std::span<const double> x);
/// -[y ln p + (1-y) ln(1-p)] with p clamped to [1e-12, 1-1e-12].
double bce(double probability, int label);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grads;  // same layout as ModelParams::params()
};

/// Mean BCE over the batch and its exact gradient. Throws DataError on an
/// empty batch and DimensionError on a feature-length mismatch.
LossGrad loss_and_grad(const ModelParams& model, std::span<const Sample> batch);
/// Same over data[indices[i]].
LossGrad loss_and_grad(const ModelParams& model, std::span<const Sample> data, std::span<const std::size_t> indices);

/// d BCE / d x for one sample.
std::vector<double> input_grad(const ModelParams& model, std::span<const double> x, int label);

struct AdamState {
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    std::vector<double> m;
    std::vector<double> v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr);

struct TrainConfig {
    double lr_max = 2e-3;
    int batch_size = 192;
    int epochs = 20;
    int evals_per_epoch = 10;
    int patience = 10;
    std::uint64_t seed = 0;
    double div_factor = 25.0;
    double final_div_factor = 1e4;
    double pct_start = 0.3;
    /// Train on inputs shifted by the training-set mean, then fold the shift
    /// back into the first-layer biases so the returned model takes raw inputs.
    bool center_inputs = false;
};

void validate(const TrainConfig& cfg);

/// Step at which the one-cycle schedule peaks: round(pct_start * total),
/// kept inside [0, total - 1].
long onecycle_peak_step(long total_steps, const TrainConfig& cfg);

/// Cosine warm-up from lr_max/div_factor to lr_max, then cosine annealing to
/// lr_max/(div_factor*final_div_factor) at the last step. Throws NumericError
/// when step is outside [0, total_steps).
double onecycle_lr(long step, long total_steps, const TrainConfig& cfg);

/// Best-snapshot tracker. An evaluation counts as an improvement only when it
/// is strictly better than every earlier one.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Records one evaluation; returns true when it is a new best.
    bool observe(double accuracy);
    bool should_stop() const noexcept { return since_best_ >= patience_; }
    double best() const noexcept { return best_; }
    int evaluations() const noexcept { return evaluations_; }
    /// 1-based index of the best evaluation (0 before any).
    int best_evaluation() const noexcept { return best_evaluation_; }

private:
    int patience_;
    double best_ = -std::numeric_limits<double>::infinity();
    int since_best_ = 0;
    int evaluations_ = 0;
    int best_evaluation_ = 0;
};

/// Batch indices (0-based, within an epoch) after which validation runs:
/// ceil(k * batches / evals) - 1 for k = 1..evals, deduplicated. With fewer
/// batches than evals every batch is followed by an evaluation.
std::vector<std::size_t> evaluation_points(std::size_t batches_per_epoch, int evals_per_epoch);

/// Parameters g with g(x) = model(x - shift) for every x.
ModelParams fold_input_shift(const ModelParams& model, std::span<const double> shift);

struct HistoryRow {
    long step = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_acc = std::numeric_limits<double>::quiet_NaN();  // NaN when no evaluation ran at this step
};

struct TrainResult {
    ModelParams model;
    std::vector<HistoryRow> history;
    double best_val_acc = 0.0;
    int evaluations = 0;
    long steps = 0;
    long total_steps = 0;
    bool stopped_early = false;
};

/// Mini-batch Adam with the one-cycle schedule, seeded per-epoch shuffling and
/// validation-accuracy early stopping. Returns the best snapshot.
TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const Architecture& arch,
                  const TrainConfig& cfg);

struct Metrics {
    double acc = 0.0;
    double auc = 0.0;
};

/// Fraction of samples whose prediction (score >= 0.5) equals the label.
double accuracy(std::span<const double> scores, std::span<const int> labels);

/// Mann-Whitney AUC with half credit for ties, computed by sorting.
/// Throws NumericError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

std::vector<double> predict(const ModelParams& model, std::span<const Sample> samples);
/// Accuracy over `samples` (no AUC, works for single-class sets).
double accuracy(const ModelParams& model, std::span<const Sample> samples);
Metrics evaluate(const ModelParams& model, std::span<const Sample> samples);

/// {"architecture": {...}, "weights": {...}} with 9 significant digits.
nlohmann::ordered_json model_to_json(const ModelParams& model);
/// Throws FormatError on malformed documents.
ModelParams model_from_json(const nlohmann::json& doc);

/// "step,lr,train_loss,val_acc"; val_acc is empty for steps without evaluation.
void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> history);

}  // namespace audit
