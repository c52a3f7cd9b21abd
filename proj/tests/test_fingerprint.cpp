#include <doctest.h>

#include <algorithm>

#include "audit/corpus.hpp"
#include "audit/error.hpp"
#include "audit/fingerprint.hpp"
#include "audit/text.hpp"
#include "test_util.hpp"

using namespace audit;

namespace {

DatasetFingerprint fp_of(std::string name, std::vector<double> mean) {
    DatasetFingerprint fp;
    fp.name = std::move(name);
    fp.std.assign(mean.size(), 0.0);
    fp.mean = SpectralProfile{std::move(mean), false};
    fp.count = 1;
    fp.pipeline = CentralCrop{8};
    return fp;
}

std::vector<FaceImage> faces_of(const SynthSpec& spec) {
    std::vector<FaceImage> faces;
    for (int i = 0; i < spec.count; ++i) faces.push_back({synthesize_image(spec, i), BBox{0, 0, spec.size, spec.size}});
    return faces;
}

}  // namespace

TEST_CASE("aggregation statistics") {
    const std::vector<SpectralProfile> two = {{{1.0, 3.0}, false}, {{3.0, 5.0}, false}};
    const auto fp = aggregate_profiles(two, "d", CentralCrop{4}, PaddingFactor(0.0));
    CHECK(fp.mean.bins == std::vector<double>{2.0, 4.0});
    CHECK(fp.std == std::vector<double>{1.0, 1.0});
    CHECK(fp.count == 2);

    const Raster img = testutil::random_raster(32, 32, 1, 1);
    const std::vector<FaceImage> same(5, FaceImage{img, BBox{0, 0, 32, 32}});
    const auto rep = fingerprint_dataset(same, PaddingFactor(0.0), CentralCrop{16}, true, "rep");
    CHECK(rep.mean.bins == face_profile(img, {0, 0, 32, 32}, PaddingFactor(0.0), CentralCrop{16}, true).bins);
    for (double s : rep.std) CHECK(s == 0.0);

    CHECK_THROWS_AS(aggregate_profiles({}, "d", CentralCrop{4}, PaddingFactor(0.0)), DataError);
    const std::vector<SpectralProfile> ragged = {{{1.0, 2.0}, false}, {{1.0}, false}};
    CHECK_THROWS_AS(aggregate_profiles(ragged, "d", CentralCrop{4}, PaddingFactor(0.0)), DimensionError);
}

TEST_CASE("fingerprints ignore channel count for gray content") {
    std::vector<FaceImage> gray;
    std::vector<FaceImage> rgb;
    for (std::uint64_t s = 0; s < 3; ++s) {
        const Raster g = testutil::random_raster(24, 24, 1, s);
        std::vector<double> px;
        for (double v : g.pixels()) px.insert(px.end(), {v, v, v});
        gray.push_back({g, {2, 2, 22, 22}});
        rgb.push_back({Raster(24, 24, 3, px), {2, 2, 22, 22}});
    }
    const auto a = fingerprint_dataset(gray, PaddingFactor(0.1), Resize{16, 16}, false, "g");
    const auto b = fingerprint_dataset(rgb, PaddingFactor(0.1), Resize{16, 16}, false, "g");
    for (std::size_t i = 0; i < a.mean.size(); ++i) {
        CHECK(a.mean.bins[i] == doctest::Approx(b.mean.bins[i]).epsilon(1e-12));
    }
}

TEST_CASE("similarity matrix and spread") {
    const std::vector<DatasetFingerprint> abc = {fp_of("a", {0, 0}), fp_of("b", {3, 4}), fp_of("c", {0, 0})};
    const auto m = similarity_matrix(abc);
    CHECK(m.max_d2 == 25.0);
    CHECK(m.values[0][1] == 0.0);
    CHECK(m.values[0][2] == 25.0);
    for (int i = 0; i < 3; ++i) CHECK(m.values[i][i] == 25.0);
    CHECK(m.names == std::vector<std::string>{"a", "b", "c"});

    const std::vector<DatasetFingerprint> pair = {fp_of("a", {0, 0}), fp_of("b", {3, 4})};
    CHECK(pairwise_spread(pair) == 25.0);
    const std::vector<DatasetFingerprint> same = {fp_of("a", {1, 2}), fp_of("b", {1, 2})};
    CHECK(pairwise_spread(same) == 0.0);
}

TEST_CASE("similarity matrix invariants on random fingerprints") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        std::vector<DatasetFingerprint> fps;
        const int n = 2 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) {
            std::vector<double> mean(7);
            for (double& v : mean) v = rng.normal();
            fps.push_back(fp_of("d" + std::to_string(i), mean));
        }
        const auto m = similarity_matrix(fps);
        for (int i = 0; i < n; ++i) {
            CHECK(m.values[i][i] == m.max_d2);
            for (int j = 0; j < n; ++j) {
                CHECK(m.values[i][j] == m.values[j][i]);
                CHECK(m.values[i][j] >= 0.0);
                CHECK(m.values[i][j] <= m.max_d2);
            }
        }
        // appending a duplicate keeps the ordering of the original distances
        auto grown = fps;
        grown.push_back(fps[rng.below(static_cast<std::uint64_t>(n))]);
        grown.back().name = "dup";
        const auto g = similarity_matrix(grown);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) {
                    for (int l = 0; l < n; ++l) {
                        const double d_ij = m.max_d2 - m.values[i][j];
                        const double d_kl = m.max_d2 - m.values[k][l];
                        if (d_ij < d_kl) CHECK(g.values[i][j] >= g.values[k][l]);
                    }
                }
            }
        }
    }
}

TEST_CASE("incompatible fingerprints are rejected") {
    const std::vector<DatasetFingerprint> one = {fp_of("a", {1, 2})};
    CHECK_THROWS_AS(similarity_matrix(one), DataError);
    CHECK_THROWS_AS(pairwise_spread(one), DataError);

    std::vector<DatasetFingerprint> lengths = {fp_of("a", {1, 2}), fp_of("b", {1, 2, 3})};
    CHECK_THROWS_AS(similarity_matrix(lengths), DataError);
    std::vector<DatasetFingerprint> pipes = {fp_of("a", {1, 2}), fp_of("b", {1, 2})};
    pipes[1].pipeline = Resize{8, 8};
    CHECK_THROWS_AS(similarity_matrix(pipes), DataError);
    std::vector<DatasetFingerprint> norms = {fp_of("a", {1, 2}), fp_of("b", {1, 2})};
    norms[1].normalized = true;
    norms[1].mean.normalized = true;
    CHECK_THROWS_AS(pairwise_spread(norms), DataError);
}

TEST_CASE("fingerprint files round-trip") {
    testutil::TempDir dir("fp");
    const std::vector<SpectralProfile> ps = {{{1.0, 0.5, 0.25}, true}, {{1.0, 0.4, 0.2}, true}};
    auto fp = aggregate_profiles(ps, "set one", Resize{32, 16}, PaddingFactor(0.15));
    write_fingerprint(dir / "fp.csv", fp);
    CHECK(std::filesystem::exists(dir / "fp.json"));
    const auto back = read_fingerprint(dir / "fp.csv");
    CHECK(back.name == "set one");
    CHECK(back.count == 2);
    CHECK(describe(back.pipeline) == "resize:32x16");
    CHECK(back.padding == 0.15);
    CHECK(back.normalized);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.mean.bins[i] == doctest::Approx(fp.mean.bins[i]).epsilon(1e-9));
        CHECK(back.std[i] == doctest::Approx(fp.std[i]).epsilon(1e-9));
    }
    CHECK_THROWS_AS(read_fingerprint(dir / "missing.csv"), IoError);

    const std::vector<DatasetFingerprint> pair = {fp_of("a", {0, 0}), fp_of("b", {3, 4})};
    write_similarity(dir / "sim.csv", similarity_matrix(pair));
    CHECK(read_text_file(dir / "sim.csv") == "dataset,a,b\na,25,0\nb,0,25\n");
}

TEST_CASE("fingerprints are bit-identical across runs") {
    const SynthSpec spec{"r", Real1F{}, 32, 6, 9, 1.0};
    const auto a = fingerprint_dataset(faces_of(spec), PaddingFactor(0.0), CentralCrop{16}, true, "r");
    const auto b = fingerprint_dataset(faces_of(spec), PaddingFactor(0.0), CentralCrop{16}, true, "r");
    CHECK(a.mean.bins == b.mean.bins);
    CHECK(a.std == b.std);
}

TEST_CASE("generator kinds separate in the top-quartile band") {
    // Low-pass fakes (Gaussian blur, nearest-neighbour hold) both sit below
    // the real textures at high radii.
    const int n = 40;
    const auto real = fingerprint_dataset(faces_of({"r", Real1F{}, 64, n, 1, 1.0}), PaddingFactor(0.0),
                                          CentralCrop{64}, false, "r");
    const auto smooth = fingerprint_dataset(faces_of({"s", FakeSmoothed{1.0}, 64, n, 2, 1.0}), PaddingFactor(0.0),
                                            CentralCrop{64}, false, "s");
    const auto up = fingerprint_dataset(faces_of({"u", FakeUpsample{2}, 64, n, 3, 1.0}), PaddingFactor(0.0),
                                        CentralCrop{64}, false, "u");
    CHECK(top_quartile_mean(smooth.mean) < top_quartile_mean(real.mean));
    CHECK(top_quartile_mean(up.mean) < top_quartile_mean(real.mean));
}

TEST_CASE("five-plus-one family structure") {
    std::vector<DatasetFingerprint> fps;
    for (const auto& spec : family_preset(64, 60, 3)) {
        fps.push_back(fingerprint_dataset(faces_of(spec), PaddingFactor(0.0), CentralCrop{32}, true, spec.dataset));
    }
    const auto m = similarity_matrix(fps);
    std::vector<double> within;
    for (int i = 0; i < 5; ++i) {
        for (int j = i + 1; j < 5; ++j) within.push_back(m.values[i][j]);
    }
    std::sort(within.begin(), within.end());
    const double median = (within[4] + within[5]) / 2.0;
    for (int i = 0; i < 5; ++i) CHECK(m.values[5][i] < median);
}
