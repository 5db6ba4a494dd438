#pragma once

#include <optional>
#include <string>

#include "coastal/io.hpp"
#include "coastal/labels.hpp"

namespace coastal {

struct GridSize {
    std::size_t width = 0;
    std::size_t height = 0;
};

/**
 * Loads a label raster written by an outside segmentation model. Color
 * output is snapped to the nearest scheme color, which also absorbs the
 * color noise of image-to-image models.
 */
inline LabelRaster import_external_labels(const std::string& path, const ClassScheme& scheme,
                                          std::optional<GridSize> expected = std::nullopt, unsigned threads = 1) {
    const ImageRaster img = io::read_image(path);
    if (expected && (img.width() != expected->width || img.height() != expected->height)) {
        throw IoError(path, "expected " + std::to_string(expected->width) + "x" + std::to_string(expected->height) +
                                " pixels but file is " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()));
    }
    if (img.bands() == 1) return io::read_labels(path, scheme);
    return decode_labels(img, scheme, nullptr, threads);
}

} // namespace coastal
