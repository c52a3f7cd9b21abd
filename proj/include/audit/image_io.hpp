#pragma once

#include <filesystem>

#include "audit/raster.hpp"

namespace audit {

/// Reads 8-bit PNG (gray or RGB) and binary PGM (P5) / PPM (P6) files; the
/// format is detected from the file signature. Pixels are scaled by 1/255.
/// Throws IoError when the file cannot be read and FormatError for anything
/// malformed or unsupported (16-bit, alpha, palette, maxval != 255).
Raster load_image(const std::filesystem::path& path);

/// Writes PNG when the extension is ".png", otherwise P5 (one channel) or P6
/// (three channels). Values are stored as round(v * 255).
void save_image(const std::filesystem::path& path, const Raster& img);

}  // namespace audit
