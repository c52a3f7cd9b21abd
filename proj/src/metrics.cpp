#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "audit/error.hpp"
#include "audit/learn.hpp"

namespace audit {

namespace {

void check_pair(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
    if (scores.empty()) throw DataError("metrics need at least one sample");
    for (double s : scores) {
        if (std::isnan(s)) throw NumericError("score is NaN");
    }
}

}  // namespace

double accuracy(std::span<const double> scores, std::span<const int> labels) {
    check_pair(scores, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) correct += static_cast<int>(scores[i] >= 0.5) == labels[i];
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_pair(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // 2U = sum over tie groups of pos_g * (2 * negatives_below + neg_g); integer-exact.
    std::uint64_t twice_u = 0;
    std::uint64_t negatives_below = 0;
    std::uint64_t positives = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t pos_g = 0;
        std::uint64_t neg_g = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? pos_g : neg_g) += 1;
            ++j;
        }
        twice_u += pos_g * (2 * negatives_below + neg_g);
        negatives_below += neg_g;
        positives += pos_g;
        i = j;
    }
    const std::uint64_t negatives = negatives_below;
    if (positives == 0 || negatives == 0) throw NumericError("AUC needs both positive and negative labels");
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

std::vector<double> predict(const ModelParams& model, std::span<const Sample> samples) {
    std::vector<double> scores;
    scores.reserve(samples.size());
    for (const auto& s : samples) scores.push_back(forward(model, s.features));
    return scores;
}

namespace {

std::vector<int> labels_of(std::span<const Sample> samples) {
    std::vector<int> labels;
    labels.reserve(samples.size());
    for (const auto& s : samples) labels.push_back(s.label);
    return labels;
}

}  // namespace

double accuracy(const ModelParams& model, std::span<const Sample> samples) {
    return accuracy(predict(model, samples), labels_of(samples));
}

Metrics evaluate(const ModelParams& model, std::span<const Sample> samples) {
    const auto scores = predict(model, samples);
    const auto labels = labels_of(samples);
    return {accuracy(scores, labels), roc_auc(scores, labels)};
}

}  // namespace audit
