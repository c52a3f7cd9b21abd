#include <algorithm>
#include <cmath>
#include <string>

#include "audit/error.hpp"
#include "audit/learn.hpp"
#include "audit/rng.hpp"
#include "audit/text.hpp"

namespace audit {

std::size_t parameter_count(const Architecture& arch) {
    if (const auto* lg = std::get_if<Logistic>(&arch)) return static_cast<std::size_t>(lg->d) + 1;
    const auto& mlp = std::get<Mlp>(arch);
    const auto d = static_cast<std::size_t>(mlp.d);
    const auto h = static_cast<std::size_t>(mlp.h);
    return h * d + h + h + 1;
}

namespace {

void check_architecture(const Architecture& arch) {
    if (const auto* lg = std::get_if<Logistic>(&arch)) {
        if (lg->d < 1) throw ConfigError("logistic input dimension must be >= 1");
        return;
    }
    const auto& mlp = std::get<Mlp>(arch);
    if (mlp.d < 1 || mlp.h < 1) throw ConfigError("MLP dimensions must be >= 1");
}

void check_input(const ModelParams& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.input_dim()) {
        throw DimensionError("feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                             std::to_string(model.input_dim()));
    }
}

}  // namespace

ModelParams::ModelParams(Architecture arch) : arch_(arch) {
    check_architecture(arch_);
    params_.assign(parameter_count(arch_), 0.0);
}

ModelParams::ModelParams(Architecture arch, std::vector<double> params) : arch_(arch), params_(std::move(params)) {
    check_architecture(arch_);
    if (params_.size() != parameter_count(arch_)) throw DimensionError("parameter count does not match architecture");
    for (double p : params_) {
        if (!std::isfinite(p)) throw NumericError("model parameters must be finite");
    }
}

ModelParams ModelParams::initialize(Architecture arch, std::uint64_t seed) {
    ModelParams model(arch);
    if (const auto* mlp = std::get_if<Mlp>(&arch)) {
        Rng rng(seed);
        const auto d = static_cast<std::size_t>(mlp->d);
        const auto h = static_cast<std::size_t>(mlp->h);
        auto p = model.params();
        const double w1_std = std::sqrt(2.0 / static_cast<double>(d));
        const double w2_std = std::sqrt(1.0 / static_cast<double>(h));
        for (std::size_t i = 0; i < h * d; ++i) p[i] = w1_std * rng.normal();
        for (std::size_t i = 0; i < h; ++i) p[h * d + h + i] = w2_std * rng.normal();
    }
    return model;
}

int ModelParams::input_dim() const noexcept {
    return std::visit([](const auto& a) { return a.d; }, arch_);
}

std::span<const double> ModelParams::logistic_weights() const {
    if (!std::holds_alternative<Logistic>(arch_)) throw DimensionError("model is not logistic");
    return std::span<const double>(params_).first(params_.size() - 1);
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double bce(double probability, int label) {
    const double p = std::clamp(probability, kProbabilityClamp, 1.0 - kProbabilityClamp);
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

namespace {

struct MlpView {
    std::size_t d;
    std::size_t h;
    const double* w1;
    const double* b1;
    const double* w2;
    double b2;
};

MlpView view(const ModelParams& model) {
    const auto& mlp = std::get<Mlp>(model.architecture());
    const auto d = static_cast<std::size_t>(mlp.d);
    const auto h = static_cast<std::size_t>(mlp.h);
    const double* p = model.params().data();
    return {d, h, p, p + h * d, p + h * d + h, p[h * d + 2 * h]};
}

// Hidden pre-activations W1 x + b1.
std::vector<double> hidden(const MlpView& m, std::span<const double> x) {
    std::vector<double> z(m.h);
    for (std::size_t k = 0; k < m.h; ++k) {
        const double* row = m.w1 + k * m.d;
        double acc = m.b1[k];
        for (std::size_t j = 0; j < m.d; ++j) acc += row[j] * x[j];
        z[k] = acc;
    }
    return z;
}

double output(const MlpView& m, const std::vector<double>& z) {
    double s = m.b2;
    for (std::size_t k = 0; k < m.h; ++k) s += m.w2[k] * std::max(z[k], 0.0);
    return s;
}

}  // namespace

double logit(const ModelParams& model, std::span<const double> x) {
    check_input(model, x);
    const auto p = model.params();
    if (std::holds_alternative<Logistic>(model.architecture())) {
        double s = p.back();
        for (std::size_t j = 0; j < x.size(); ++j) s += p[j] * x[j];
        return s;
    }
    const MlpView m = view(model);
    return output(m, hidden(m, x));
}

double forward(const ModelParams& model, std::span<const double> x) { return sigmoid(logit(model, x)); }

LossGrad loss_and_grad(const ModelParams& model, std::span<const Sample> data, std::span<const std::size_t> indices) {
    if (indices.empty()) throw DataError("loss_and_grad needs a non-empty batch");
    LossGrad out;
    out.grads.assign(model.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(indices.size());
    const bool logistic = std::holds_alternative<Logistic>(model.architecture());

    for (std::size_t idx : indices) {
        const Sample& s = data[idx];
        check_input(model, s.features);
        const auto x = std::span<const double>(s.features);
        if (logistic) {
            const double p = forward(model, x);
            out.loss += bce(p, s.label) * inv_n;
            const double delta = (p - s.label) * inv_n;
            for (std::size_t j = 0; j < x.size(); ++j) out.grads[j] += delta * x[j];
            out.grads.back() += delta;
            continue;
        }
        const MlpView m = view(model);
        const auto z = hidden(m, x);
        const double p = sigmoid(output(m, z));
        out.loss += bce(p, s.label) * inv_n;
        const double delta = (p - s.label) * inv_n;
        double* g_w1 = out.grads.data();
        double* g_b1 = g_w1 + m.h * m.d;
        double* g_w2 = g_b1 + m.h;
        for (std::size_t k = 0; k < m.h; ++k) {
            g_w2[k] += delta * std::max(z[k], 0.0);
            if (z[k] <= 0.0) continue;
            const double dz = delta * m.w2[k];
            g_b1[k] += dz;
            double* row = g_w1 + k * m.d;
            for (std::size_t j = 0; j < m.d; ++j) row[j] += dz * x[j];
        }
        out.grads.back() += delta;
    }
    return out;
}

LossGrad loss_and_grad(const ModelParams& model, std::span<const Sample> batch) {
    std::vector<std::size_t> indices(batch.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    return loss_and_grad(model, batch, indices);
}

std::vector<double> input_grad(const ModelParams& model, std::span<const double> x, int label) {
    check_input(model, x);
    const auto p = model.params();
    std::vector<double> g(x.size(), 0.0);
    if (std::holds_alternative<Logistic>(model.architecture())) {
        const double delta = forward(model, x) - label;
        for (std::size_t j = 0; j < x.size(); ++j) g[j] = delta * p[j];
        return g;
    }
    const MlpView m = view(model);
    const auto z = hidden(m, x);
    const double delta = sigmoid(output(m, z)) - label;
    for (std::size_t k = 0; k < m.h; ++k) {
        if (z[k] <= 0.0) continue;
        const double dz = delta * m.w2[k];
        const double* row = m.w1 + k * m.d;
        for (std::size_t j = 0; j < m.d; ++j) g[j] += dz * row[j];
    }
    return g;
}

namespace {

std::vector<double> rounded(std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::stod(format_sig9(v[i]));
    return out;
}

}  // namespace

nlohmann::ordered_json model_to_json(const ModelParams& model) {
    nlohmann::ordered_json doc;
    const auto p = model.params();
    if (const auto* lg = std::get_if<Logistic>(&model.architecture())) {
        doc["architecture"] = {{"type", "logistic"}, {"d", lg->d}};
        doc["weights"] = {{"w", rounded(p.first(p.size() - 1))}, {"b", rounded(p.last(1))}};
        return doc;
    }
    const auto& mlp = std::get<Mlp>(model.architecture());
    const auto d = static_cast<std::size_t>(mlp.d);
    const auto h = static_cast<std::size_t>(mlp.h);
    doc["architecture"] = {{"type", "mlp"}, {"d", mlp.d}, {"h", mlp.h}};
    doc["weights"] = {{"W1", rounded(p.subspan(0, h * d))},
                      {"b1", rounded(p.subspan(h * d, h))},
                      {"w2", rounded(p.subspan(h * d + h, h))},
                      {"b2", rounded(p.last(1))}};
    return doc;
}

ModelParams model_from_json(const nlohmann::json& doc) {
    try {
        const auto& arch = doc.at("architecture");
        const auto type = arch.at("type").get<std::string>();
        const auto& w = doc.at("weights");
        std::vector<double> params;
        auto append = [&](const char* key) {
            const auto v = w.at(key).get<std::vector<double>>();
            params.insert(params.end(), v.begin(), v.end());
        };
        if (type == "logistic") {
            append("w");
            append("b");
            return ModelParams(Logistic{arch.at("d").get<int>()}, std::move(params));
        }
        if (type == "mlp") {
            for (const char* key : {"W1", "b1", "w2", "b2"}) append(key);
            return ModelParams(Mlp{arch.at("d").get<int>(), arch.at("h").get<int>()}, std::move(params));
        }
        throw FormatError("unknown architecture type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model checkpoint: ") + e.what());
    } catch (const DimensionError& e) {
        throw FormatError(std::string("malformed model checkpoint: ") + e.what());
    }
}

}  // namespace audit
