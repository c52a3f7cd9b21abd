#include "audit/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "audit/error.hpp"
#include "audit/text.hpp"

namespace audit {

SpectralProfile face_profile(const Raster& img, const BBox& box, PaddingFactor padding, const Pipeline& pipe,
                             bool normalize) {
    return profile_of(apply_pipeline(img, box, padding, pipe), normalize);
}

DatasetFingerprint aggregate_profiles(std::span<const SpectralProfile> profiles, std::string name,
                                      const Pipeline& pipe, PaddingFactor padding) {
    if (profiles.empty()) throw DataError("dataset '" + name + "' has no images");
    const auto& first = profiles.front();
    const std::size_t n_bins = first.size();
    for (const auto& p : profiles) {
        if (p.size() != n_bins) throw DimensionError("dataset '" + name + "' mixes profile lengths");
        if (p.normalized != first.normalized) throw DataError("dataset '" + name + "' mixes normalization");
    }
    const auto n = static_cast<double>(profiles.size());

    // Shifted by the first profile so identical inputs reproduce it exactly.
    std::vector<double> mean(n_bins, 0.0);
    for (const auto& p : profiles) {
        for (std::size_t b = 0; b < n_bins; ++b) mean[b] += p.bins[b] - first.bins[b];
    }
    for (std::size_t b = 0; b < n_bins; ++b) mean[b] = first.bins[b] + mean[b] / n;

    std::vector<double> var(n_bins, 0.0);
    for (const auto& p : profiles) {
        for (std::size_t b = 0; b < n_bins; ++b) {
            const double d = p.bins[b] - mean[b];
            var[b] += d * d;
        }
    }
    std::vector<double> stddev(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) stddev[b] = std::sqrt(var[b] / n);

    DatasetFingerprint fp;
    fp.name = std::move(name);
    fp.mean = SpectralProfile{std::move(mean), first.normalized};
    fp.std = std::move(stddev);
    fp.count = profiles.size();
    fp.pipeline = pipe;
    fp.padding = padding.value();
    fp.normalized = first.normalized;
    return fp;
}

DatasetFingerprint fingerprint_dataset(std::span<const FaceImage> images, PaddingFactor padding, const Pipeline& pipe,
                                       bool normalize, std::string name) {
    if (images.empty()) throw DataError("dataset '" + name + "' has no images");
    std::vector<SpectralProfile> profiles;
    profiles.reserve(images.size());
    for (const auto& face : images) profiles.push_back(face_profile(face.image, face.box, padding, pipe, normalize));
    return aggregate_profiles(profiles, std::move(name), pipe, padding);
}

double squared_distance(const DatasetFingerprint& a, const DatasetFingerprint& b) {
    if (a.mean.size() != b.mean.size()) throw DataError("fingerprints have different profile lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.mean.size(); ++i) {
        const double d = a.mean.bins[i] - b.mean.bins[i];
        acc += d * d;
    }
    return acc;
}

namespace {

void check_compatible(std::span<const DatasetFingerprint> fps) {
    if (fps.size() < 2) throw DataError("need at least two fingerprints to compare");
    const auto& ref = fps.front();
    for (const auto& fp : fps) {
        if (fp.mean.size() != ref.mean.size()) {
            throw DataError("fingerprint '" + fp.name + "' has " + std::to_string(fp.mean.size()) +
                            " bins, expected " + std::to_string(ref.mean.size()));
        }
        if (!(fp.pipeline == ref.pipeline)) {
            throw DataError("fingerprint '" + fp.name + "' uses pipeline " + describe(fp.pipeline) + ", expected " +
                            describe(ref.pipeline));
        }
        if (fp.normalized != ref.normalized) {
            throw DataError("fingerprint '" + fp.name + "' differs in normalization");
        }
    }
}

}  // namespace

SimilarityMatrix similarity_matrix(std::span<const DatasetFingerprint> fingerprints) {
    check_compatible(fingerprints);
    const std::size_t n = fingerprints.size();
    std::vector<std::vector<double>> d2(n, std::vector<double>(n, 0.0));
    double max_d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d2[i][j] = d2[j][i] = squared_distance(fingerprints[i], fingerprints[j]);
            max_d2 = std::max(max_d2, d2[i][j]);
        }
    }
    SimilarityMatrix m;
    m.max_d2 = max_d2;
    m.values.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        m.names.push_back(fingerprints[i].name);
        for (std::size_t j = 0; j < n; ++j) m.values[i][j] = max_d2 - d2[i][j];
    }
    m.pipeline = describe(fingerprints.front().pipeline);
    m.normalized = fingerprints.front().normalized;
    return m;
}

double pairwise_spread(std::span<const DatasetFingerprint> fingerprints) {
    check_compatible(fingerprints);
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < fingerprints.size(); ++i) {
        for (std::size_t j = i + 1; j < fingerprints.size(); ++j) {
            acc += squared_distance(fingerprints[i], fingerprints[j]);
            ++pairs;
        }
    }
    return acc / static_cast<double>(pairs);
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".json");
    return p;
}

void write_fingerprint(const std::filesystem::path& csv_path, const DatasetFingerprint& fp) {
    std::ostringstream csv;
    csv << "bin,mean,std\n";
    for (std::size_t i = 0; i < fp.mean.size(); ++i) {
        csv << i << ',' << format_sig9(fp.mean.bins[i]) << ',' << format_sig9(fp.std[i]) << '\n';
    }
    write_text_file(csv_path, csv.str());

    nlohmann::ordered_json meta;
    meta["name"] = fp.name;
    meta["count"] = fp.count;
    meta["pipeline"] = describe(fp.pipeline);
    meta["padding"] = fp.padding;
    meta["normalized"] = fp.normalized;
    meta["n_bins"] = fp.mean.size();
    write_text_file(sidecar_path(csv_path), meta.dump(2) + "\n");
}

DatasetFingerprint read_fingerprint(const std::filesystem::path& csv_path) {
    const std::string text = read_text_file(csv_path);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty fingerprint file " + csv_path.string(), 1);
    ++line_no;
    if (split_csv_line(line) != std::vector<std::string>{"bin", "mean", "std"}) {
        throw ParseError("expected header 'bin,mean,std' in " + csv_path.string(), line_no);
    }
    DatasetFingerprint fp;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) throw ParseError("expected 3 fields in " + csv_path.string(), line_no);
        try {
            if (std::stoul(f[0]) != fp.mean.bins.size()) throw ParseError("bins out of order", line_no);
            fp.mean.bins.push_back(std::stod(f[1]));
            fp.std.push_back(std::stod(f[2]));
        } catch (const std::logic_error&) {
            throw ParseError("non-numeric field in " + csv_path.string(), line_no);
        }
    }
    if (fp.mean.bins.empty()) throw DataError("fingerprint " + csv_path.string() + " has no bins");

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text_file(sidecar_path(csv_path)));
        fp.name = meta.at("name").get<std::string>();
        fp.count = meta.at("count").get<std::size_t>();
        fp.pipeline = parse_pipeline(meta.at("pipeline").get<std::string>());
        fp.padding = meta.at("padding").get<double>();
        fp.normalized = meta.at("normalized").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad fingerprint metadata " + sidecar_path(csv_path).string() + ": " + e.what());
    }
    fp.mean.normalized = fp.normalized;
    return fp;
}

void write_similarity(const std::filesystem::path& csv_path, const SimilarityMatrix& matrix) {
    std::ostringstream csv;
    csv << "dataset";
    for (const auto& name : matrix.names) csv << ',' << name;
    csv << '\n';
    for (std::size_t i = 0; i < matrix.names.size(); ++i) {
        csv << matrix.names[i];
        for (double v : matrix.values[i]) csv << ',' << format_sig9(v);
        csv << '\n';
    }
    write_text_file(csv_path, csv.str());

    nlohmann::ordered_json meta;
    meta["names"] = matrix.names;
    meta["max_d2"] = matrix.max_d2;
    meta["pipeline"] = matrix.pipeline;
    meta["normalized"] = matrix.normalized;
    write_text_file(sidecar_path(csv_path), meta.dump(2) + "\n");
}

}  // namespace audit
