#include "audit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "audit/error.hpp"

namespace audit {

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return bytes;
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<unsigned char> quantize(const Raster& img) {
    std::vector<unsigned char> out(img.pixels().size());
    std::transform(img.pixels().begin(), img.pixels().end(), out.begin(), [](double v) {
        return static_cast<unsigned char>(std::clamp(std::lround(v * 255.0), 0L, 255L));
    });
    return out;
}

Raster from_bytes(int width, int height, int channels, const unsigned char* data) {
    std::vector<double> px(static_cast<std::size_t>(width) * height * channels);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = data[i] / 255.0;
    return Raster(width, height, channels, std::move(px));
}

// Netpbm header parser: magic, width, height, maxval separated by whitespace
// and '#' comments, then exactly one whitespace byte before the raster.
class PnmHeader {
public:
    explicit PnmHeader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    long next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw FormatError("malformed PNM header");
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > 1'000'000) throw FormatError("PNM header value out of range");
        }
        return v;
    }

    std::size_t data_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw FormatError("malformed PNM header");
        return pos_ + 1;
    }

    void skip(std::size_t n) { pos_ += n; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 0;
};

Raster decode_pnm(const std::vector<unsigned char>& bytes) {
    const int channels = bytes[1] == '5' ? 1 : 3;
    PnmHeader header(bytes);
    header.skip(2);
    const long width = header.next_int();
    const long height = header.next_int();
    const long maxval = header.next_int();
    if (width < 1 || height < 1) throw FormatError("PNM dimensions must be positive");
    if (maxval != 255) throw FormatError("unsupported PNM maxval " + std::to_string(maxval) + " (only 8-bit)");
    const std::size_t offset = header.data_offset();
    const std::size_t need = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() < offset + need) throw FormatError("truncated PNM raster");
    return from_bytes(static_cast<int>(width), static_cast<int>(height), channels, bytes.data() + offset);
}

Raster decode_png(const std::vector<unsigned char>& bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw FormatError(std::string("invalid PNG: ") + image.message);
    }
    const auto fmt = image.format;
    const bool unsupported =
        (fmt & PNG_FORMAT_FLAG_LINEAR) || (fmt & PNG_FORMAT_FLAG_ALPHA) || (fmt & PNG_FORMAT_FLAG_COLORMAP);
    if (unsupported) {
        png_image_free(&image);
        throw FormatError("unsupported PNG pixel format (only 8-bit gray or RGB)");
    }
    const int channels = (fmt & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw FormatError("invalid PNG: " + msg);
    }
    return from_bytes(static_cast<int>(image.width), static_cast<int>(image.height), channels, buffer.data());
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

}  // namespace

Raster load_image(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    static constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) return decode_pnm(bytes);
    throw FormatError("unsupported image format: '" + path.string() + "'");
}

void save_image(const std::filesystem::path& path, const Raster& img) {
    if (img.empty()) throw DimensionError("cannot save an empty raster");
    const auto data = quantize(img);
    if (lower_extension(path) == ".png") {
        png_image image;
        std::memset(&image, 0, sizeof image);
        image.version = PNG_IMAGE_VERSION;
        image.width = static_cast<png_uint_32>(img.width());
        image.height = static_cast<png_uint_32>(img.height());
        image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
        png_alloc_size_t size = 0;
        if (!png_image_write_get_memory_size(image, size, 0, data.data(), 0, nullptr)) {
            throw IoError(std::string("PNG encoding failed: ") + image.message);
        }
        std::vector<unsigned char> encoded(size);
        if (!png_image_write_to_memory(&image, encoded.data(), &size, 0, data.data(), 0, nullptr)) {
            throw IoError(std::string("PNG encoding failed: ") + image.message);
        }
        encoded.resize(size);
        write_bytes(path, encoded);
        return;
    }
    const std::string header = std::string(img.channels() == 3 ? "P6" : "P5") + "\n" +
                               std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.insert(out.end(), data.begin(), data.end());
    write_bytes(path, out);
}

}  // namespace audit
