#pragma once

#include <string>
#include <vector>

#include "vstab/core/frame.hpp"
#include "vstab/core/geometry.hpp"

namespace vstab::io {

enum class ImageFormat { Png, Ppm };

/// Format from the file extension (.png / .ppm); throws FormatError otherwise.
ImageFormat format_from_path(const std::string& path);

/// Reads an 8-bit RGB image (PNG of any color type is expanded to RGB, PPM
/// must be binary P6 maxval 255). Values are divided by 255.
Frame read_image(const std::string& path);

/// Writes 8-bit RGB, rounding each sample to the nearest of 256 levels.
void write_image(const Frame& frame, const std::string& path);

/// A frame directory holds zero-padded numeric filenames 000001.<ext>
/// onward, contiguous, all with the same format and dimensions.
struct FrameDirSpec {
    std::string directory;
    ImageFormat format = ImageFormat::Png;
    int count = 0;
};

/// Scans and validates a frame directory without decoding.
FrameDirSpec probe_frame_dir(const std::string& directory);

/// Reads every frame; errors name the offending frame index.
FrameSequence read_frame_dir(const std::string& directory);

/// Writes frames as 000001.<ext> onward, creating the directory if needed.
void write_frame_dir(const std::string& directory, const FrameSequence& seq, ImageFormat format);

/// Ground-truth sidecar: one line per frame with the six affine coefficients
/// a1..a6, space separated, full double precision.
void write_transform_sidecar(const std::string& path, const std::vector<AffineTransform>& ts);
std::vector<AffineTransform> read_transform_sidecar(const std::string& path);

}  // namespace vstab::io
