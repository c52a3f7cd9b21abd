#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "audit/raster.hpp"
#include "audit/spectrum.hpp"

namespace audit {

/// Per-dataset mean and population standard deviation of spectral profiles,
/// together with the preprocessing that produced them.
struct DatasetFingerprint {
    std::string name;
    SpectralProfile mean;
    std::vector<double> std;
    std::size_t count = 0;
    Pipeline pipeline = CentralCrop{1};
    double padding = 0.0;
    bool normalized = false;
};

/// Closeness matrix max_d2 - ||a - b||^2, where max_d2 is the largest pairwise
/// squared distance inside the compared set.
struct SimilarityMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    double max_d2 = 0.0;
    // recorded for the metadata sidecar
    std::string pipeline;
    bool normalized = false;
};

struct FaceImage {
    Raster image;
    BBox box;
};

/// Preprocess one face and return its profile.
SpectralProfile face_profile(const Raster& img, const BBox& box, PaddingFactor padding, const Pipeline& pipe,
                             bool normalize);

/// Bin-wise mean and population std of `profiles`, reduced in sequence order.
/// Throws DataError when empty and DimensionError on mixed lengths.
DatasetFingerprint aggregate_profiles(std::span<const SpectralProfile> profiles, std::string name,
                                      const Pipeline& pipe, PaddingFactor padding);

DatasetFingerprint fingerprint_dataset(std::span<const FaceImage> images, PaddingFactor padding, const Pipeline& pipe,
                                       bool normalize, std::string name);

/// Sum of squared bin differences between the two means.
double squared_distance(const DatasetFingerprint& a, const DatasetFingerprint& b);

/// Requires >= 2 fingerprints with equal lengths, pipeline and normalization;
/// throws DataError otherwise.
SimilarityMatrix similarity_matrix(std::span<const DatasetFingerprint> fingerprints);

/// Mean squared distance over unordered pairs.
double pairwise_spread(std::span<const DatasetFingerprint> fingerprints);

/// Writes "bin,mean,std" to `csv_path` and the metadata to the sibling ".json".
void write_fingerprint(const std::filesystem::path& csv_path, const DatasetFingerprint& fp);
DatasetFingerprint read_fingerprint(const std::filesystem::path& csv_path);

/// Writes the matrix CSV and a sibling ".json" recording max_d2.
void write_similarity(const std::filesystem::path& csv_path, const SimilarityMatrix& matrix);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace audit
