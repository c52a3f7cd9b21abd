#include "audit/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "audit/error.hpp"
#include "audit/rng.hpp"
#include "audit/text.hpp"

namespace audit {

SquareMatrix squared_distances(std::span<const std::vector<double>> features) {
    const std::size_t n = features.size();
    SquareMatrix d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (features[i].size() != features[0].size()) throw DataError("feature rows differ in length");
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < features[i].size(); ++k) {
                const double d = features[i][k] - features[j][k];
                acc += d * d;
            }
            d2(i, j) = d2(j, i) = acc;
        }
    }
    return d2;
}

namespace {

// Entropy (nats) of the row distribution at precision beta; fills `row`.
double row_entropy(const SquareMatrix& d2, std::size_t i, double beta, std::vector<double>& row) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d2.n; ++j) {
        if (j != i) dmin = std::min(dmin, d2(i, j));
    }
    double z = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < d2.n; ++j) {
        if (j == i) {
            row[j] = 0.0;
            continue;
        }
        const double shifted = d2(i, j) - dmin;
        row[j] = std::exp(-beta * shifted);
        z += row[j];
        weighted += row[j] * shifted;
    }
    for (double& p : row) p /= z;
    return std::log(z) + beta * weighted / z;
}

}  // namespace

SquareMatrix perplexity_calibrate(const SquareMatrix& distances_sq, double perplexity) {
    const std::size_t n = distances_sq.n;
    if (n < 2) throw DataError("perplexity calibration needs at least two points");
    if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n)) {
        throw ConfigError("perplexity must be below the number of points (" + std::to_string(n) + ")");
    }
    const double target = std::log(perplexity);
    constexpr double kTolerance = 1e-5;
    constexpr int kMaxBisections = 64;
    constexpr int kMaxExpansions = 200;

    SquareMatrix p(n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto converged = [&](double h) { return std::abs(std::exp(h) - perplexity) < kTolerance; };

        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += distances_sq(i, j);
        mean /= static_cast<double>(n - 1);
        double beta = mean > 0.0 ? 1.0 / mean : 1.0;
        double h = row_entropy(distances_sq, i, beta, row);

        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        for (int k = 0; k < kMaxExpansions && !converged(h) && h > target; ++k) {
            lo = beta;
            beta *= 2.0;
            h = row_entropy(distances_sq, i, beta, row);
        }
        for (int k = 0; k < kMaxExpansions && !converged(h) && h < target; ++k) {
            hi = beta;
            beta *= 0.5;
            h = row_entropy(distances_sq, i, beta, row);
        }
        if (h > target) lo = beta;
        else hi = beta;

        for (int k = 0; k < kMaxBisections && !converged(h) && std::isfinite(hi); ++k) {
            beta = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
            h = row_entropy(distances_sq, i, beta, row);
            (h > target ? lo : hi) = beta;
        }
        std::copy(row.begin(), row.end(), p.values.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    return p;
}

SquareMatrix joint_affinities(const SquareMatrix& conditional) {
    const std::size_t n = conditional.n;
    SquareMatrix joint(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double v = (conditional(i, j) + conditional(j, i)) / (2.0 * static_cast<double>(n));
            joint(i, j) = std::max(v, kAffinityFloor);
            total += joint(i, j);
        }
    }
    for (double& v : joint.values) v /= total;
    return joint;
}

namespace {

// Student-t kernel 1/(1 + |yi - yj|^2), zero diagonal; returns the normalizer.
double student_kernel(std::span<const Point2> y, SquareMatrix& kernel) {
    const std::size_t n = y.size();
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = y[i][0] - y[j][0];
            const double dy = y[i][1] - y[j][1];
            const double k = 1.0 / (1.0 + dx * dx + dy * dy);
            kernel(i, j) = kernel(j, i) = k;
            z += 2.0 * k;
        }
    }
    return z;
}

double kl_from_kernel(const SquareMatrix& joint, const SquareMatrix& kernel, double z) {
    double kl = 0.0;
    for (std::size_t i = 0; i < joint.n; ++i) {
        for (std::size_t j = 0; j < joint.n; ++j) {
            if (i == j) continue;
            const double p = joint(i, j);
            const double q = kernel(i, j) / z;
            kl += p * std::log(p / q);
        }
    }
    return std::max(kl, 0.0);
}

std::vector<Point2> gradient_from_kernel(const SquareMatrix& joint, std::span<const Point2> y,
                                         const SquareMatrix& kernel, double z, double exaggeration) {
    const std::size_t n = y.size();
    std::vector<Point2> grad(n, Point2{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double k = kernel(i, j);
            const double coeff = 4.0 * (exaggeration * joint(i, j) - k / z) * k;
            grad[i][0] += coeff * (y[i][0] - y[j][0]);
            grad[i][1] += coeff * (y[i][1] - y[j][1]);
        }
    }
    return grad;
}

}  // namespace

double kl_divergence(const SquareMatrix& joint, std::span<const Point2> coords) {
    if (joint.n != coords.size()) throw DimensionError("affinity matrix and coordinates differ in size");
    SquareMatrix kernel(coords.size());
    const double z = student_kernel(coords, kernel);
    return kl_from_kernel(joint, kernel, z);
}

std::vector<Point2> tsne_gradient(const SquareMatrix& joint, std::span<const Point2> coords) {
    if (joint.n != coords.size()) throw DimensionError("affinity matrix and coordinates differ in size");
    SquareMatrix kernel(coords.size());
    const double z = student_kernel(coords, kernel);
    return gradient_from_kernel(joint, coords, kernel, z, 1.0);
}

EmbeddingResult tsne_fit(std::span<const std::vector<double>> features, std::span<const std::string> labels,
                         const EmbedConfig& cfg) {
    Rng rng(cfg.seed);
    std::vector<Point2> initial(features.size());
    for (auto& p : initial) {
        p[0] = 1e-4 * rng.normal();
        p[1] = 1e-4 * rng.normal();
    }
    return tsne_fit(features, labels, cfg, std::move(initial));
}

EmbeddingResult tsne_fit(std::span<const std::vector<double>> features, std::span<const std::string> labels,
                         const EmbedConfig& cfg, std::vector<Point2> initial) {
    const std::size_t n = features.size();
    if (n < 2) throw DataError("t-SNE needs at least two points");
    if (features[0].empty()) throw DataError("t-SNE needs at least one feature");
    if (labels.size() != n) throw DimensionError("labels and features differ in length");
    if (initial.size() != n) throw DimensionError("initial coordinates and features differ in length");
    if (cfg.iterations < 1) throw ConfigError("t-SNE needs at least one iteration");
    if (cfg.perplexity < 2.0) throw ConfigError("perplexity must be >= 2");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");

    const SquareMatrix d2 = squared_distances(features);
    if (*std::max_element(d2.values.begin(), d2.values.end()) == 0.0) {
        throw NumericError("all points are identical; embedding is undefined");
    }
    const SquareMatrix joint = joint_affinities(perplexity_calibrate(d2, cfg.perplexity));

    EmbeddingResult result;
    result.labels.assign(labels.begin(), labels.end());
    std::vector<Point2>& y = initial;
    std::vector<Point2> velocity(n, Point2{0.0, 0.0});
    SquareMatrix kernel(n);
    result.kl_history.reserve(static_cast<std::size_t>(cfg.iterations));

    for (int it = 0; it < cfg.iterations; ++it) {
        const double exaggeration = it < cfg.exaggeration_iterations ? cfg.early_exaggeration : 1.0;
        const double momentum = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
        double z = student_kernel(y, kernel);
        const auto grad = gradient_from_kernel(joint, y, kernel, z, exaggeration);

        Point2 mean{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                velocity[i][c] = momentum * velocity[i][c] - cfg.learning_rate * grad[i][c];
                y[i][c] += velocity[i][c];
                mean[c] += y[i][c];
            }
        }
        for (auto& p : y) {
            p[0] -= mean[0] / static_cast<double>(n);
            p[1] -= mean[1] / static_cast<double>(n);
        }
        z = student_kernel(y, kernel);
        const double kl = kl_from_kernel(joint, kernel, z);
        if (!std::isfinite(kl)) throw NumericError("t-SNE diverged (non-finite KL)");
        result.kl_history.push_back(kl);
    }
    result.coords = std::move(y);
    return result;
}

void write_embedding_csv(const std::filesystem::path& path, const EmbeddingResult& result,
                         std::span<const int> class_labels) {
    if (class_labels.size() != result.coords.size()) throw DimensionError("class labels and points differ in length");
    std::ostringstream out;
    out << "index,dataset,label,x,y\n";
    for (std::size_t i = 0; i < result.coords.size(); ++i) {
        out << i << ',' << result.labels[i] << ',' << class_labels[i] << ',' << format_sig9(result.coords[i][0]) << ','
            << format_sig9(result.coords[i][1]) << '\n';
    }
    write_text_file(path, out.str());
}

void write_kl_csv(const std::filesystem::path& path, std::span<const double> kl_history) {
    std::ostringstream out;
    out << "iteration,kl\n";
    for (std::size_t i = 0; i < kl_history.size(); ++i) out << i << ',' << format_sig9(kl_history[i]) << '\n';
    write_text_file(path, out.str());
}

}  // namespace audit
