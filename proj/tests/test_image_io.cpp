#include <doctest.h>

#include <fstream>

#include "audit/error.hpp"
#include "audit/image_io.hpp"
#include "test_util.hpp"

using namespace audit;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

Raster quantized(int w, int h, int c, std::uint64_t seed) {
    Raster r = testutil::random_raster(w, h, c, seed);
    for (double& v : r.pixels()) v = std::round(v * 255.0) / 255.0;
    return r;
}

}  // namespace

TEST_CASE("PGM bytes scale by 1/255") {
    testutil::TempDir dir("io");
    write_bytes(dir / "a.pgm", std::string("P5\n# comment\n2 2\n255\n") + std::string("\x00\xff\x80\x40", 4));
    const Raster r = load_image(dir / "a.pgm");
    REQUIRE(r.width() == 2);
    REQUIRE(r.channels() == 1);
    CHECK(r.at(0, 0) == 0.0);
    CHECK(r.at(1, 0) == 1.0);
    CHECK(r.at(0, 1) == 128.0 / 255.0);
    CHECK(r.at(1, 1) == 64.0 / 255.0);
}

TEST_CASE("PNM and PNG round-trip bit-exactly") {
    testutil::TempDir dir("io");
    for (int c : {1, 3}) {
        const Raster img = quantized(9, 7, c, static_cast<std::uint64_t>(c));
        for (const char* ext : {".pnm", ".png"}) {
            const auto p = dir / ("img" + std::to_string(c) + ext);
            save_image(p, img);
            CHECK(load_image(p) == img);
        }
    }
}

TEST_CASE("malformed inputs") {
    testutil::TempDir dir("io");
    CHECK_THROWS_AS(load_image(dir / "missing.png"), IoError);

    save_image(dir / "ok.png", quantized(16, 16, 3, 1));
    std::ifstream in(dir / "ok.png", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    write_bytes(dir / "trunc.png", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_image(dir / "trunc.png"), FormatError);

    write_bytes(dir / "short.pgm", std::string("P5 4 4 255\n") + std::string(5, 'x'));
    CHECK_THROWS_AS(load_image(dir / "short.pgm"), FormatError);
    write_bytes(dir / "deep.pgm", std::string("P5 1 1 65535\n") + std::string(2, 'x'));
    CHECK_THROWS_AS(load_image(dir / "deep.pgm"), FormatError);
    write_bytes(dir / "text.txt", "hello world");
    CHECK_THROWS_AS(load_image(dir / "text.txt"), FormatError);
}
