#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace audit {

/// Dense n x n matrix, row-major.
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> values;

    explicit SquareMatrix(std::size_t size = 0) : n(size), values(size * size, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

using Point2 = std::array<double, 2>;

struct EmbedConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iterations = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    std::uint64_t seed = 0;
};

struct EmbeddingResult {
    std::vector<Point2> coords;
    std::vector<double> kl_history;  // KL(P || Q) after every iteration
    std::vector<std::string> labels;
};

inline constexpr double kAffinityFloor = 1e-12;

SquareMatrix squared_distances(std::span<const std::vector<double>> features);

/// Row-wise Gaussian conditionals p(j|i) whose perplexity matches the target
/// to 1e-5 (bracket expansion, then at most 64 bisections on the precision).
/// Throws ConfigError when perplexity >= n.
SquareMatrix perplexity_calibrate(const SquareMatrix& distances_sq, double perplexity);

/// (P + P^T) / 2n with off-diagonal entries floored at kAffinityFloor and the
/// result renormalized to sum to one.
SquareMatrix joint_affinities(const SquareMatrix& conditional);

/// KL(P || Q) for the Student-t affinities Q of `coords`.
double kl_divergence(const SquareMatrix& joint, std::span<const Point2> coords);

/// d KL / d y_i = 4 sum_j (p_ij - q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2).
std::vector<Point2> tsne_gradient(const SquareMatrix& joint, std::span<const Point2> coords);

/// Exact t-SNE from seeded N(0, 1e-4^2) initial coordinates.
/// Throws DataError for fewer than two points or ragged features, ConfigError
/// unless 2 <= perplexity < n, NumericError
/// when all points coincide.
EmbeddingResult tsne_fit(std::span<const std::vector<double>> features, std::span<const std::string> labels,
                         const EmbedConfig& cfg);

/// Same optimisation from caller-supplied initial coordinates.
EmbeddingResult tsne_fit(std::span<const std::vector<double>> features, std::span<const std::string> labels,
                         const EmbedConfig& cfg, std::vector<Point2> initial);

/// "index,dataset,label,x,y".
void write_embedding_csv(const std::filesystem::path& path, const EmbeddingResult& result,
                         std::span<const int> class_labels);
/// "iteration,kl".
void write_kl_csv(const std::filesystem::path& path, std::span<const double> kl_history);

}  // namespace audit
